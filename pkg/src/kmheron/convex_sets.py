"""Closed convex shapes with exact Euclidean projection and normal-cone tests.

Every shape is immutable after construction. Coordinates are stored as
read-only float64 arrays. The public methods validate their inputs; the
underscore-prefixed ``_project`` skips validation and is what the solver's
inner loop calls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, InfeasibleError

DEFAULT_TOL = 1e-9


def as_point(z, dim=None, name="point"):
    """Convert ``z`` to a finite 1-D float array, checking its length."""
    arr = np.asarray(z, dtype=float)
    if arr.ndim != 1:
        raise DimensionMismatchError(f"{name} must be a flat coordinate list, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionMismatchError(f"{name} has dimension {arr.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite coordinates: {arr.tolist()}")
    return arr


def _frozen(z):
    arr = np.array(z, dtype=float)
    arr.setflags(write=False)
    return arr


def _norm(v):
    return math.sqrt(float(v @ v))


class ConvexSet:
    """Common interface; concrete shapes are the dataclasses below."""

    kind: str = ""
    bounded: bool = True

    @property
    def dim(self) -> int:
        raise NotImplementedError

    # -- projections and distances -------------------------------------
    def _project(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def project(self, z) -> np.ndarray:
        return np.array(self._project(as_point(z, self.dim)), dtype=float)

    def distance(self, z) -> float:
        z = as_point(z, self.dim)
        return _norm(z - self._project(z))

    def contains(self, z, tol: float = DEFAULT_TOL) -> bool:
        return self.distance(z) <= tol

    # -- normal cone ---------------------------------------------------
    def _cone_residual(self, base: np.ndarray, v: np.ndarray, tol: float) -> float:
        raise NotImplementedError

    def _check_base(self, base, tol):
        base = as_point(base, self.dim, "base")
        if self.distance(base) > tol:
            raise InfeasibleError(
                f"normal cone base {base.tolist()} is not in {self!r} (tol={tol})"
            )
        return base

    def normal_cone_residual(self, base, v, tol: float = DEFAULT_TOL) -> float:
        """Euclidean distance from ``v`` to the normal cone at ``base``.

        ``tol`` also decides which faces are active at ``base``.
        """
        base = self._check_base(base, tol)
        v = as_point(v, self.dim, "v")
        return self._cone_residual(base, v, tol)

    def in_normal_cone(self, base, v, tol: float = DEFAULT_TOL) -> bool:
        base = self._check_base(base, tol)
        v = as_point(v, self.dim, "v")
        return self._cone_residual(base, v, tol) <= tol * max(1.0, _norm(v))

    # -- misc geometry -------------------------------------------------
    def boundary_distance(self, z) -> float:
        """Distance from ``z`` to the topological boundary of the set."""
        raise NotImplementedError

    def farthest_distance(self, z) -> float:
        """sup of ``||z - y||`` over ``y`` in the set (inf if unbounded)."""
        raise NotImplementedError

    @property
    def diameter(self) -> float:
        raise NotImplementedError

    @property
    def anchor(self) -> np.ndarray:
        """A representative point of the set (its center when it has one)."""
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    def translated(self, shift) -> "ConvexSet":
        raise NotImplementedError

    def scaled(self, s: float) -> "ConvexSet":
        """Image of the set under ``z -> s * z`` for ``s > 0``."""
        raise NotImplementedError

    def __eq__(self, other):
        if not isinstance(other, ConvexSet):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Ball(ConvexSet):
    center: np.ndarray
    radius: float

    kind = "ball"

    def __post_init__(self):
        object.__setattr__(self, "center", _frozen(as_point(self.center, name="center")))
        r = float(self.radius)
        if not (r > 0 and math.isfinite(r)):
            raise ValueError(f"ball radius must be positive, got {self.radius}")
        object.__setattr__(self, "radius", r)

    @property
    def dim(self):
        return self.center.shape[0]

    def _project(self, z):
        d = z - self.center
        nn = float(d @ d)
        if nn <= self.radius * self.radius:
            return z
        return self.center + d * (self.radius / math.sqrt(nn))

    def _cone_residual(self, base, v, tol):
        u = base - self.center
        rho = _norm(u)
        if rho < self.radius - tol:
            return _norm(v)
        u = u / rho
        lam = max(0.0, float(v @ u))
        return _norm(v - lam * u)

    def boundary_distance(self, z):
        z = as_point(z, self.dim)
        return abs(self.radius - _norm(z - self.center))

    def farthest_distance(self, z):
        z = as_point(z, self.dim)
        return _norm(z - self.center) + self.radius

    @property
    def diameter(self):
        return 2.0 * self.radius

    @property
    def anchor(self):
        return np.array(self.center)

    def to_dict(self):
        return {"type": "ball", "center": self.center.tolist(), "radius": self.radius}

    def translated(self, shift):
        return Ball(self.center + as_point(shift, self.dim), self.radius)

    def scaled(self, s):
        return Ball(self.center * s, self.radius * s)


@dataclass(frozen=True, eq=False)
class Box(ConvexSet):
    """Axis-aligned box ``{z : |z_i - center_i| <= half_widths_i}``."""

    center: np.ndarray
    half_widths: np.ndarray

    kind = "box"

    def __post_init__(self):
        c = as_point(self.center, name="center")
        h = np.broadcast_to(np.asarray(self.half_widths, dtype=float), c.shape)
        h = as_point(h, c.shape[0], "half_widths")
        if np.any(h <= 0):
            raise ValueError(f"box half widths must be positive, got {h.tolist()}")
        object.__setattr__(self, "center", _frozen(c))
        object.__setattr__(self, "half_widths", _frozen(h))
        object.__setattr__(self, "lower", _frozen(c - h))
        object.__setattr__(self, "upper", _frozen(c + h))

    @property
    def dim(self):
        return self.center.shape[0]

    def _project(self, z):
        return np.minimum(np.maximum(z, self.lower), self.upper)

    def _cone_residual(self, base, v, tol):
        at_upper = base >= self.upper - tol
        at_lower = base <= self.lower + tol
        w = np.array(v)
        w[at_upper] = np.minimum(v[at_upper], 0.0)
        w[at_lower] = np.maximum(v[at_lower], 0.0)
        w[at_upper & at_lower] = 0.0
        return _norm(w)

    def boundary_distance(self, z):
        z = as_point(z, self.dim)
        if self.distance(z) > 0:
            return self.distance(z)
        return float(np.min(self.half_widths - np.abs(z - self.center)))

    def farthest_distance(self, z):
        z = as_point(z, self.dim)
        return _norm(np.abs(z - self.center) + self.half_widths)

    @property
    def diameter(self):
        return 2.0 * _norm(self.half_widths)

    @property
    def anchor(self):
        return np.array(self.center)

    def to_dict(self):
        return {
            "type": "box",
            "center": self.center.tolist(),
            "half_widths": self.half_widths.tolist(),
        }

    def translated(self, shift):
        return Box(self.center + as_point(shift, self.dim), self.half_widths)

    def scaled(self, s):
        return Box(self.center * s, self.half_widths * s)


@dataclass(frozen=True, eq=False)
class Halfspace(ConvexSet):
    """``{z : <normal, z> <= offset}``."""

    normal: np.ndarray
    offset: float

    kind = "halfspace"
    bounded = False

    def __post_init__(self):
        a = as_point(self.normal, name="normal")
        nn = float(a @ a)
        if nn == 0:
            raise ValueError("halfspace normal must be nonzero")
        object.__setattr__(self, "normal", _frozen(a))
        object.__setattr__(self, "offset", float(self.offset))
        object.__setattr__(self, "_nn", nn)

    @property
    def dim(self):
        return self.normal.shape[0]

    def _project(self, z):
        s = float(self.normal @ z) - self.offset
        if s <= 0:
            return z
        return z - (s / self._nn) * self.normal

    def _cone_residual(self, base, v, tol):
        an = math.sqrt(self._nn)
        if float(self.normal @ base) - self.offset < -tol * an:
            return _norm(v)
        u = self.normal / an
        lam = max(0.0, float(v @ u))
        return _norm(v - lam * u)

    def boundary_distance(self, z):
        z = as_point(z, self.dim)
        return abs(float(self.normal @ z) - self.offset) / math.sqrt(self._nn)

    def farthest_distance(self, z):
        return math.inf

    @property
    def diameter(self):
        return math.inf

    @property
    def anchor(self):
        return self.normal * (self.offset / self._nn)

    def to_dict(self):
        return {"type": "halfspace", "normal": self.normal.tolist(), "offset": self.offset}

    def translated(self, shift):
        shift = as_point(shift, self.dim)
        return Halfspace(self.normal, self.offset + float(self.normal @ shift))

    def scaled(self, s):
        return Halfspace(self.normal, self.offset * s)


@dataclass(frozen=True, eq=False)
class Segment(ConvexSet):
    a: np.ndarray
    b: np.ndarray

    kind = "segment"

    def __post_init__(self):
        a = as_point(self.a, name="a")
        b = as_point(self.b, a.shape[0], "b")
        d = b - a
        ll = float(d @ d)
        if ll == 0:
            raise ValueError("segment endpoints must differ")
        object.__setattr__(self, "a", _frozen(a))
        object.__setattr__(self, "b", _frozen(b))
        object.__setattr__(self, "_d", _frozen(d))
        object.__setattr__(self, "_ll", ll)

    @property
    def dim(self):
        return self.a.shape[0]

    @property
    def length(self):
        return math.sqrt(self._ll)

    def _project(self, z):
        t = float((z - self.a) @ self._d) / self._ll
        t = min(1.0, max(0.0, t))
        return self.a + t * self._d

    def _cone_residual(self, base, v, tol):
        u = self._d / self.length
        s = float(v @ u)
        if _norm(base - self.a) <= tol:
            return max(0.0, s)
        if _norm(base - self.b) <= tol:
            return max(0.0, -s)
        return abs(s)

    def in_normal_cone(self, base, v, tol=DEFAULT_TOL):
        # variational inequality over the two extreme points
        base = self._check_base(base, tol)
        v = as_point(v, self.dim, "v")
        slack = tol * _norm(v)
        return all(float(v @ (y - base)) <= slack for y in (self.a, self.b))

    def boundary_distance(self, z):
        z = as_point(z, self.dim)
        if self.dim > 1:
            return self.distance(z)
        if self.distance(z) > 0:
            return self.distance(z)
        return min(_norm(z - self.a), _norm(z - self.b))

    def farthest_distance(self, z):
        z = as_point(z, self.dim)
        return max(_norm(z - self.a), _norm(z - self.b))

    @property
    def diameter(self):
        return self.length

    @property
    def anchor(self):
        return 0.5 * (self.a + self.b)

    def to_dict(self):
        return {"type": "segment", "a": self.a.tolist(), "b": self.b.tolist()}

    def translated(self, shift):
        shift = as_point(shift, self.dim)
        return Segment(self.a + shift, self.b + shift)

    def scaled(self, s):
        return Segment(self.a * s, self.b * s)


@dataclass(frozen=True, eq=False)
class Singleton(ConvexSet):
    p: np.ndarray

    kind = "singleton"

    def __post_init__(self):
        object.__setattr__(self, "p", _frozen(as_point(self.p, name="p")))

    @property
    def dim(self):
        return self.p.shape[0]

    def _project(self, z):
        return self.p

    def _cone_residual(self, base, v, tol):
        return 0.0

    def in_normal_cone(self, base, v, tol=DEFAULT_TOL):
        base = self._check_base(base, tol)
        v = as_point(v, self.dim, "v")
        return float(v @ (self.p - base)) <= tol * _norm(v)

    def boundary_distance(self, z):
        return self.distance(z)

    def farthest_distance(self, z):
        return self.distance(z)

    @property
    def diameter(self):
        return 0.0

    @property
    def anchor(self):
        return np.array(self.p)

    def to_dict(self):
        return {"type": "singleton", "point": self.p.tolist()}

    def translated(self, shift):
        return Singleton(self.p + as_point(shift, self.dim))

    def scaled(self, s):
        return Singleton(self.p * s)


SHAPES = {"ball": Ball, "box": Box, "halfspace": Halfspace, "segment": Segment, "singleton": Singleton}


def from_dict(record: dict) -> ConvexSet:
    """Build a shape from its ``to_dict`` record.

    Raises KeyError for unknown types or missing fields and ValueError for
    invalid values; the scene parser turns both into diagnostics.
    """
    kind = record["type"]
    if kind == "ball":
        return Ball(record["center"], record["radius"])
    if kind == "box":
        half = record["half_widths"] if "half_widths" in record else record["half"]
        return Box(record["center"], half)
    if kind == "halfspace":
        return Halfspace(record["normal"], record["offset"])
    if kind == "segment":
        return Segment(record["a"], record["b"])
    if kind == "singleton":
        return Singleton(record["point"])
    raise KeyError(f"unknown shape type {kind!r}")


# Functional surface -------------------------------------------------------

def project(cset: ConvexSet, z) -> np.ndarray:
    return cset.project(z)


def distance(cset: ConvexSet, z) -> float:
    return cset.distance(z)


def contains(cset: ConvexSet, z, tol: float = DEFAULT_TOL) -> bool:
    return cset.contains(z, tol)


def in_normal_cone(cset: ConvexSet, base, v, tol: float = DEFAULT_TOL) -> bool:
    return cset.in_normal_cone(base, v, tol)


@dataclass(frozen=True)
class SubdifferentialDescription:
    """Subdifferential of ``d_C`` at a point.

    Outside ``C`` it is the single unit vector ``vector``. Inside ``C`` it is
    the normal cone at ``base`` intersected with the closed unit ball, and
    ``vector`` is None.
    """

    cset: ConvexSet
    base: np.ndarray
    vector: np.ndarray | None = field(default=None)

    @property
    def is_singleton(self) -> bool:
        return self.vector is not None

    def contains(self, v, tol: float = DEFAULT_TOL) -> bool:
        v = as_point(v, self.cset.dim, "v")
        if self.vector is not None:
            return _norm(v - self.vector) <= tol
        return _norm(v) <= 1.0 + tol and self.cset.in_normal_cone(self.base, v, tol)


def subdifferential_distance(cset: ConvexSet, z) -> SubdifferentialDescription:
    z = as_point(z, cset.dim)
    p = cset._project(z)
    d = _norm(z - p)
    if d > 0:
        return SubdifferentialDescription(cset, z, (z - p) / d)
    return SubdifferentialDescription(cset, z, None)
