# This file makes the harness directory a Python package
