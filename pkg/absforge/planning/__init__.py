# This file makes the planning directory a Python package
