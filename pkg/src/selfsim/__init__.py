"""Analysis of self-similar sets defined by iterated function systems.

Computes the similarity dimension, the level-sum and finite-subcover fractal
dimensions of the natural covering structure, and decides separation
properties (irreducibility, level separation, tiling, open-set conditions)
three-valued with certificates and witnesses.
"""

from .analysis import AnalysisConfig, run_analysis
from .attractor import IFSystem, Piece, build_level, estimate_diameter, sample_points
from .corpus import CorpusEntry, get_entry, project_system
from .dimensions import (
    box_dimension_estimate,
    h3_level_sum,
    min_subcover_weight,
    similarity_dimension,
    verify_dim3,
)
from .geometry import Similitude, approx_equal, similitude_1d, similitude_2d
from .oracle import GeometricOracle, Outcome, Verdict
from .separation import SeparationAnalyzer, wosc_report

__version__ = "0.1.0"

__all__ = [
    "AnalysisConfig",
    "CorpusEntry",
    "GeometricOracle",
    "IFSystem",
    "Outcome",
    "Piece",
    "SeparationAnalyzer",
    "Similitude",
    "Verdict",
    "approx_equal",
    "box_dimension_estimate",
    "build_level",
    "estimate_diameter",
    "get_entry",
    "h3_level_sum",
    "min_subcover_weight",
    "project_system",
    "run_analysis",
    "sample_points",
    "similarity_dimension",
    "similitude_1d",
    "similitude_2d",
    "verify_dim3",
    "wosc_report",
]
