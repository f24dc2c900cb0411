"""Problem instances, configurations, objective and subgradient."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .convex_sets import DEFAULT_TOL, ConvexSet, as_point
from .errors import (
    DimensionMismatchError,
    InfeasibleError,
    ShapeMismatchError,
    UnboundedProblemWarning,
    UnsupportedReductionError,
)


@dataclass(frozen=True)
class ProblemInstance:
    """k feasible sets and m target sets in R^dim.

    The objective couples every feasible point with every target point; feasible
    points are not coupled with each other.
    """

    dim: int
    feasible: tuple[ConvexSet, ...]
    targets: tuple[ConvexSet, ...]

    def __post_init__(self):
        object.__setattr__(self, "feasible", tuple(self.feasible))
        object.__setattr__(self, "targets", tuple(self.targets))
        if self.dim < 1:
            raise ValueError("dimension must be positive")
        if not self.feasible or not self.targets:
            raise ValueError("need at least one feasible set and one target set")
        for kind, sets in (("feasible", self.feasible), ("target", self.targets)):
            for i, s in enumerate(sets):
                if s.dim != self.dim:
                    raise DimensionMismatchError(
                        f"{kind} set {i + 1} has dimension {s.dim}, instance has {self.dim}"
                    )
        if not self.has_bounded_set:
            warnings.warn(
                "no bounded set in the instance; a minimizer is not guaranteed to exist",
                UnboundedProblemWarning,
                stacklevel=3,
            )

    @property
    def k(self) -> int:
        return len(self.feasible)

    @property
    def m(self) -> int:
        return len(self.targets)

    @property
    def has_bounded_set(self) -> bool:
        return any(s.bounded for s in self.feasible + self.targets)

    @property
    def all_bounded(self) -> bool:
        return all(s.bounded for s in self.feasible + self.targets)

    @property
    def sets(self) -> tuple[ConvexSet, ...]:
        return self.feasible + self.targets

    def translated(self, shift) -> "ProblemInstance":
        return ProblemInstance(
            self.dim,
            [s.translated(shift) for s in self.feasible],
            [s.translated(shift) for s in self.targets],
        )

    def scaled(self, s: float) -> "ProblemInstance":
        return ProblemInstance(
            self.dim, [c.scaled(s) for c in self.feasible], [c.scaled(s) for c in self.targets]
        )


@dataclass(frozen=True, eq=False)
class Configuration:
    """One point per set: ``xs`` has shape (k, n), ``ys`` has shape (m, n)."""

    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = np.array(self.xs, dtype=float, ndmin=2)
        ys = np.array(self.ys, dtype=float, ndmin=2)
        if xs.ndim != 2 or ys.ndim != 2 or xs.shape[1] != ys.shape[1]:
            raise DimensionMismatchError(
                f"inconsistent point arrays: xs {xs.shape}, ys {ys.shape}"
            )
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
            raise ValueError("configuration has non-finite coordinates")
        xs.setflags(write=False)
        ys.setflags(write=False)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @property
    def k(self):
        return self.xs.shape[0]

    @property
    def m(self):
        return self.ys.shape[0]

    @property
    def dim(self):
        return self.xs.shape[1]

    def flat(self) -> np.ndarray:
        """The stacked decision vector (x_1, ..., x_k, y_1, ..., y_m)."""
        return np.concatenate([self.xs.ravel(), self.ys.ravel()])

    @classmethod
    def from_flat(cls, z, k: int, m: int, dim: int) -> "Configuration":
        z = np.asarray(z, dtype=float)
        return cls(z[: k * dim].reshape(k, dim), z[k * dim:].reshape(m, dim))

    def __eq__(self, other):
        if not isinstance(other, Configuration):
            return NotImplemented
        return np.array_equal(self.xs, other.xs) and np.array_equal(self.ys, other.ys)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Subgradient:
    gxs: np.ndarray
    gys: np.ndarray

    def flat(self) -> np.ndarray:
        return np.concatenate([self.gxs.ravel(), self.gys.ravel()])

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.flat()))


def check_shapes(inst: ProblemInstance, Z: Configuration) -> None:
    if Z.k != inst.k or Z.m != inst.m:
        raise ShapeMismatchError(
            f"configuration has {Z.k} feasible and {Z.m} target points, "
            f"instance needs {inst.k} and {inst.m}"
        )
    if Z.dim != inst.dim:
        raise DimensionMismatchError(f"configuration dimension {Z.dim} != instance dimension {inst.dim}")


def infeasible_blocks(inst: ProblemInstance, Z: Configuration, tol: float = DEFAULT_TOL):
    """List of ``(kind, index, distance)`` for every point outside its set (1-based index)."""
    check_shapes(inst, Z)
    bad = []
    for i, (s, x) in enumerate(zip(inst.feasible, Z.xs)):
        d = s.distance(x)
        if d > tol:
            bad.append(("feasible", i + 1, d))
    for j, (c, y) in enumerate(zip(inst.targets, Z.ys)):
        d = c.distance(y)
        if d > tol:
            bad.append(("target", j + 1, d))
    return bad


def is_feasible(inst, Z, tol=DEFAULT_TOL) -> bool:
    return not infeasible_blocks(inst, Z, tol)


def require_feasible(inst, Z, tol=DEFAULT_TOL) -> None:
    bad = infeasible_blocks(inst, Z, tol)
    if bad:
        kind, idx, d = bad[0]
        raise InfeasibleError(
            f"point for {kind} set {idx} lies outside the set (distance {d:.3g} > tol {tol:g})",
            kind=kind,
            index=idx,
        )


def pairwise_distances(Z: Configuration) -> np.ndarray:
    """(k, m) matrix of ``||x_i - y_j||``."""
    diff = Z.xs[:, None, :] - Z.ys[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def objective(inst: ProblemInstance, Z: Configuration) -> float:
    check_shapes(inst, Z)
    return float(pairwise_distances(Z).sum())


def _unit_differences(xs, ys):
    """Unit vectors u_ij = (x_i - y_j)/||x_i - y_j|| (zero when the points coincide) and distances."""
    diff = xs[:, None, :] - ys[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    safe = np.where(dist > 0, dist, 1.0)
    units = diff / safe[:, :, None]
    units[dist == 0] = 0.0
    return units, dist


def subgradient(inst: ProblemInstance, Z: Configuration) -> Subgradient:
    """A subgradient of the objective at ``Z``.

    Each coincident pair ``x_i == y_j`` contributes the zero vector, which is a
    valid element of the subdifferential of ``||x_i - y_j||`` there.
    """
    check_shapes(inst, Z)
    units, _ = _unit_differences(Z.xs, Z.ys)
    return Subgradient(units.sum(axis=1), -units.sum(axis=0))


def subgradient_norm_bound(k: int, m: int) -> float:
    """Uniform bound sqrt(k*m*(m+k)) on the norm of every subgradient."""
    if k < 1 or m < 1:
        raise ValueError("k and m must be positive")
    return math.sqrt(k * m * (m + k))


def project_configuration(inst: ProblemInstance, Z: Configuration) -> Configuration:
    """Projection onto the product of all sets, applied block by block."""
    check_shapes(inst, Z)
    xs = [s._project(x) for s, x in zip(inst.feasible, Z.xs)]
    ys = [c._project(y) for c, y in zip(inst.targets, Z.ys)]
    return Configuration(np.array(xs), np.array(ys))


def reduce_to_generalized_heron(inst: ProblemInstance, x, tol: float = DEFAULT_TOL):
    """For k = 1 and a fixed feasible point, solve the inner problem over the targets.

    Returns ``(value, ys)`` with ``ys[j]`` the projection of ``x`` onto target j
    and ``value`` the sum of the distances from ``x`` to the targets.
    """
    if inst.k != 1:
        raise UnsupportedReductionError(f"reduction needs exactly one feasible set, got k={inst.k}")
    x = as_point(x, inst.dim, "x")
    if not inst.feasible[0].contains(x, tol):
        raise InfeasibleError("x is not in the feasible set", kind="feasible", index=1)
    ys = np.array([c.project(x) for c in inst.targets])
    value = sum(c.distance(x) for c in inst.targets)
    return value, ys
