"""Solver for the generalized (k,m)-Heron problem.

Pick one point in each of k feasible convex sets and one in each of m target
convex sets so that the sum of all feasible-to-target Euclidean distances is
minimal.
"""

from .convex_sets import Ball, Box, ConvexSet, Halfspace, Segment, Singleton
from .optimality import OptimalityReport, boundary_check, check_optimality
from .oracle import GridSpec, brute_force_min, non_uniqueness_probe
from .problem import (
    Configuration,
    ProblemInstance,
    objective,
    reduce_to_generalized_heron,
    subgradient,
    subgradient_norm_bound,
)
from .solver import (
    Constant,
    InverseT,
    InverseTScaled,
    SolverRun,
    StoppingRule,
    certify_convergence_bound,
    solve,
    step,
)

__version__ = "0.1.0"
