"""Infinite ZW calculus: diagrams, semantics, truncation, rewriting and optics."""
