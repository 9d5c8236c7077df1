# This file makes the proposer directory a Python package
