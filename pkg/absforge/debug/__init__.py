# This file makes the debug directory a Python package
