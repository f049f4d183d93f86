"""Congested Clique simulator and distance algorithms built on sparse min-plus products."""
from .apps import (DistanceEstimates, DiameterEstimate, ShortcutGraph, apsp_unweighted, apsp_weighted,
                   diameter_approx, mssp, sssp_exact)
from .clique import Clique, NodeProgram, RoundLedger, run
from .disttools import NearestSet, SourceTable, ThroughSet, distance_through_sets, k_nearest, source_detection
from .errors import *  # noqa: F401,F403
from .generators import generate
from .graph import Graph
from .harness import ExperimentConfig, ExperimentReport, run_experiment, scaling_sweep
from .hopset import Bunch, Hopset, HittingSet, build_hopset, compute_bunches, hitting_set
from .matmul import filtered_mm, sparse_mm
from .matrix import SparseMatrix, weight_matrix
from .semiring import AUGMENTED, BOOLEAN, INF, MIN_PLUS, AugWeight

__version__ = "0.1.0"
