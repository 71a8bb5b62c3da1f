"""squadkit: username-squatting variant generation, discovery and
suspicious-account classification."""

__version__ = "0.1.0"
