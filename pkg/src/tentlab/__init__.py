"""Numerical testbed for tent spaces, Hardy and BMO spaces over quasi-monotone semigroups."""
__version__ = "0.1.0"
