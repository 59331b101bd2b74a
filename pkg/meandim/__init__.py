"""meandim package."""

__version__ = "0.1.0"
SPEC_VERSION = "1.0"

__all__ = ["__version__", "SPEC_VERSION"]
