"""Deep baselines trained on the exported token-index dataset format."""

__version__ = "0.1.0"
