"""Closed-form bifurcation and linear-stability analysis of a 3-D tumor growth
free boundary problem with Robin (nutrient supply) boundary condition."""

__version__ = "0.1.0"
