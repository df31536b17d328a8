"""Satisfiability of hybrid modal logic fragments classified by Boolean clone and frame class."""

__version__ = "0.1.0"
