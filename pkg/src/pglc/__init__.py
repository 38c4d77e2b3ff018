"""Guarded probabilistic lambda calculus: evaluator, logics and proof checker."""

__version__ = "0.1.0"
