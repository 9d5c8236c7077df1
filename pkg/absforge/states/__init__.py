# This file makes the states directory a Python package 