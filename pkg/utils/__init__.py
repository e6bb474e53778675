"""
Utility modules for the toolkit.
Contains constants, errors, validators, formatters, decorators and polynomial expressions.
"""
