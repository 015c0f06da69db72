"""Net benefit separation and cost-effectiveness determination curves."""

__version__ = "0.1.0"
