"""Steam-generator level-control cyber-attack testbed."""

__version__ = "0.1.0"
