"""Bredon cohomology of C2-surfaces with constant Z/2 coefficients."""
