"""stmtkit: scholarly statement extraction and nest-classification baselines."""

__version__ = "0.1.0"

from stmtkit.taxonomy import Taxonomy, load_taxonomy

__all__ = ["Taxonomy", "load_taxonomy", "__version__"]
