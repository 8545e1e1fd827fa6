"""Discontinuous Galerkin solver for LWR traffic flow on road networks."""

__version__ = "0.1.0"
