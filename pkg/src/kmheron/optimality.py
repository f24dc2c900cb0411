"""First-order optimality certificate for a candidate configuration.

At an optimal configuration with x_i != y_j for all pairs, the vectors

    n_S_i = -sum_j unit(x_i - y_j)        n_C_j = -sum_i unit(y_j - x_i)

must lie in the normal cones of S_i at x_i and C_j at y_j respectively, and
they sum to zero. The certificate computes these vectors and measures how
far each one is from its cone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .convex_sets import DEFAULT_TOL
from .errors import DegenerateConfigurationError
from .problem import (
    Configuration,
    ProblemInstance,
    _unit_differences,
    check_shapes,
    require_feasible,
)

DEFAULT_CERT_TOL = 1e-3
BOUNDARY_TOL = 1e-6


@dataclass(frozen=True)
class OptimalityReport:
    o1_residuals: np.ndarray
    o2_residuals: np.ndarray
    o3_residual: float
    feasible_normals: np.ndarray
    target_normals: np.ndarray
    feasible_in_cone: tuple[bool, ...]
    target_in_cone: tuple[bool, ...]
    min_pair_distance: float
    tol: float
    passed: bool

    @property
    def cone_memberships(self) -> tuple[bool, ...]:
        return self.feasible_in_cone + self.target_in_cone

    def rows(self):
        """(label, residual, in_cone) per set, feasible sets first."""
        out = []
        for i, (r, ok) in enumerate(zip(self.o1_residuals, self.feasible_in_cone)):
            out.append((f"S_{i + 1}", float(r), ok))
        for j, (r, ok) in enumerate(zip(self.o2_residuals, self.target_in_cone)):
            out.append((f"C_{j + 1}", float(r), ok))
        return out


def check_optimality(
    inst: ProblemInstance, Z: Configuration, tol: float = DEFAULT_CERT_TOL
) -> OptimalityReport:
    """Certify (or refute) first-order optimality of ``Z`` at tolerance ``tol``."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    check_shapes(inst, Z)
    require_feasible(inst, Z, tol)

    units, dist = _unit_differences(Z.xs, Z.ys)
    i, j = np.unravel_index(np.argmin(dist), dist.shape)
    min_pair = float(dist[i, j])
    if min_pair <= tol:
        raise DegenerateConfigurationError(
            f"x_{i + 1} and y_{j + 1} coincide (distance {min_pair:.3g}); "
            "the certificate assumes disjoint feasible and target sets",
            pair=(int(i) + 1, int(j) + 1),
        )

    n_s = -units.sum(axis=1)
    n_c = units.sum(axis=0)

    o1 = np.array([s.normal_cone_residual(x, n, tol) for s, x, n in zip(inst.feasible, Z.xs, n_s)])
    o2 = np.array([c.normal_cone_residual(y, n, tol) for c, y, n in zip(inst.targets, Z.ys, n_c)])
    in_s = tuple(
        bool(r <= tol * max(1.0, np.linalg.norm(n))) for r, n in zip(o1, n_s)
    )
    in_c = tuple(
        bool(r <= tol * max(1.0, np.linalg.norm(n))) for r, n in zip(o2, n_c)
    )
    o3 = float(np.linalg.norm(n_s.sum(axis=0) + n_c.sum(axis=0)))
    passed = all(in_s) and all(in_c) and o3 <= tol * (inst.k + inst.m)

    return OptimalityReport(
        o1_residuals=o1,
        o2_residuals=o2,
        o3_residual=o3,
        feasible_normals=n_s,
        target_normals=n_c,
        feasible_in_cone=in_s,
        target_in_cone=in_c,
        min_pair_distance=min_pair,
        tol=tol,
        passed=bool(passed),
    )


def boundary_check(
    inst: ProblemInstance, Z: Configuration, tol: float = BOUNDARY_TOL
) -> tuple[bool, ...]:
    """Whether each x_i, then each y_j, lies on the boundary of its set.

    Advisory only: minimizers sit on boundaries when the feasible and target
    sets are separated, which is not verified here.
    """
    check_shapes(inst, Z)
    require_feasible(inst, Z, DEFAULT_TOL)
    on_s = tuple(s.boundary_distance(x) <= tol for s, x in zip(inst.feasible, Z.xs))
    on_c = tuple(c.boundary_distance(y) <= tol for c, y in zip(inst.targets, Z.ys))
    return on_s + on_c
