"""Commercial building operational carbon: projection, peak uncertainty and allocation."""

__version__ = "0.1.0"
