"""Prime geodesic theorem laboratory for Bianchi groups."""

__version__ = "0.1.0"
