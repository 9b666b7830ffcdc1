"""Growth inequalities for product sets in locally compact groups, checked on exact and bracketed models."""

__version__ = "0.1.0"
