"""Structural genre analysis of drama corpora via character co-occurrence networks."""

from .corpus import Genre, Play, filter_corpus, normalize_genre, parse_tei
from .features import FEATURE_NAMES, assemble, extract_features, kmeans3_1d
from .graph import build_graph, compute_metrics, weighted_degrees

__version__ = "0.1.0"

__all__ = [
    "FEATURE_NAMES",
    "Genre",
    "Play",
    "assemble",
    "build_graph",
    "compute_metrics",
    "extract_features",
    "filter_corpus",
    "kmeans3_1d",
    "normalize_genre",
    "parse_tei",
    "weighted_degrees",
]
