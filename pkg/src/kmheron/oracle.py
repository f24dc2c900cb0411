"""Brute-force grid oracle for small bounded instances.

The oracle is deliberately independent of the solver: it never uses
subgradients, only objective evaluations at sampled feasible points.

Enumeration trick: once every target point is fixed, the objective splits
into one independent term per feasible point (and vice versa). So the full
product grid is minimized exactly by enumerating the side with the smaller
product and minimizing each block of the other side on its own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .convex_sets import Ball, Box, ConvexSet, Halfspace, Segment, Singleton
from .errors import BudgetExceededError, UnboundedSetError
from .problem import Configuration, ProblemInstance

_CHUNK_ELEMENTS = 4_000_000


@dataclass(frozen=True)
class GridSpec:
    """density: samples along one full boundary circuit of each set.

    refine: local refinement rounds around the incumbent.
    include_interior: also sample the interior (needed when optimal points
    need not lie on boundaries, e.g. overlapping or aligned scenes).
    budget: cap on elementary candidate evaluations.
    """

    density: int = 64
    refine: int = 0
    include_interior: bool = False
    budget: int = 10_000_000

    def __post_init__(self):
        if self.density < 8:
            raise ValueError("density must be at least 8")
        if self.refine < 0:
            raise ValueError("refine must be nonnegative")
        if self.budget < 1:
            raise ValueError("budget must be positive")


class OracleResult(NamedTuple):
    value: float
    config: Configuration
    cell: float
    round_values: tuple[float, ...]


def _dedupe(points: np.ndarray) -> np.ndarray:
    seen = {}
    for p in points:
        seen.setdefault(tuple(np.round(p, 12)), p)
    return np.array(list(seen.values()))


def _circle(n_angles):
    th = 2 * np.pi * np.arange(n_angles) / n_angles
    return np.stack([np.cos(th), np.sin(th)], axis=1)


def _sphere(n_lon):
    n_lat = max(2, n_lon // 2)
    pts = [(0.0, 0.0, 1.0), (0.0, 0.0, -1.0)]
    for l in range(1, n_lat):
        phi = np.pi * l / n_lat
        for th in 2 * np.pi * np.arange(n_lon) / n_lon:
            pts.append((np.sin(phi) * np.cos(th), np.sin(phi) * np.sin(th), np.cos(phi)))
    return np.array(pts)


def _ball_samples(ball: Ball, density: int, interior: bool):
    n, c, r = ball.dim, ball.center, ball.radius
    if n == 1:
        shell = lambda count: np.array([[1.0], [-1.0]])  # noqa: E731
    elif n == 2:
        shell = _circle
    elif n == 3:
        shell = _sphere
    else:
        raise ValueError("the grid oracle supports dimensions 1 to 3")
    pts = [c[None, :], c + r * shell(density)]
    if interior:
        rings = max(2, density // 8)
        for i in range(1, rings):
            count = max(8, 4 * round(density * i / rings / 4))
            pts.append(c + (r * i / rings) * shell(count))
    cell = r * (2.0 if n == 1 else 2 * np.pi / density)
    return np.concatenate(pts), cell


def _box_samples(box: Box, density: int, interior: bool):
    q = max(1, density // 4)
    axes = [np.linspace(lo, hi, q + 1) for lo, hi in zip(box.lower, box.upper)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, box.dim)
    if not interior:
        on_face = np.any(np.isclose(mesh, box.lower) | np.isclose(mesh, box.upper), axis=1)
        mesh = mesh[on_face]
    pts = np.concatenate([box.center[None, :], mesh])
    return pts, float(np.max(2 * box.half_widths / q))


def sample_set(cset: ConvexSet, density: int, include_interior: bool = False):
    """Deterministic feasible samples of a bounded set and their spacing."""
    if isinstance(cset, Halfspace) or not cset.bounded:
        raise UnboundedSetError(f"cannot grid the unbounded set {cset!r}")
    if isinstance(cset, Ball):
        pts, cell = _ball_samples(cset, density, include_interior)
    elif isinstance(cset, Box):
        pts, cell = _box_samples(cset, density, include_interior)
    elif isinstance(cset, Segment):
        t = np.linspace(0.0, 1.0, density + 1)[:, None]
        pts, cell = cset.a + t * (cset.b - cset.a), cset.length / density
    elif isinstance(cset, Singleton):
        pts, cell = np.array([cset.p]), 0.0
    else:
        raise TypeError(f"no sampler for {type(cset).__name__}")
    return _dedupe(pts), cell


def _local_samples(cset: ConvexSet, center: np.ndarray, half_width: float):
    """Grid around ``center`` projected onto the set; ``center`` comes first."""
    per_axis = 9 if cset.dim <= 2 else 5
    offs = np.linspace(-half_width, half_width, per_axis)
    mesh = np.stack(np.meshgrid(*([offs] * cset.dim), indexing="ij"), axis=-1).reshape(-1, cset.dim)
    pts = [center] + [cset._project(center + o) for o in mesh]
    return _dedupe(np.array(pts)), 2 * half_width / (per_axis - 1)


class _Search:
    """Exact minimization of the objective over a product of candidate lists."""

    def __init__(self, x_cands, y_cands, budget):
        px = math.prod(len(c) for c in x_cands)
        py = math.prod(len(c) for c in y_cands)
        work_y_outer = py * sum(len(c) for c in x_cands)
        work_x_outer = px * sum(len(c) for c in y_cands)
        # ties go to enumerating the targets
        self.outer_is_y = work_y_outer <= work_x_outer
        self.work = min(work_y_outer, work_x_outer)
        if self.work > budget:
            raise BudgetExceededError(
                f"product grid needs {self.work:.3g} evaluations, budget is {budget:.3g}; "
                "lower the density or raise the budget",
                required=self.work,
                budget=budget,
            )
        self.outer, self.inner = (y_cands, x_cands) if self.outer_is_y else (x_cands, y_cands)
        self.shape = tuple(len(c) for c in self.outer)
        # dist[i][j][c, a] = ||inner_i[c] - outer_j[a]||
        self.dist = [
            [np.linalg.norm(ic[:, None, :] - oc[None, :, :], axis=-1) for oc in self.outer]
            for ic in self.inner
        ]

    def _inner_costs(self, idx):
        """Per inner block, the (|inner_i|, B) cost table for outer index rows ``idx``."""
        tables = []
        for d_i in self.dist:
            s = d_i[0][:, idx[:, 0]]
            for j in range(1, len(d_i)):
                s = s + d_i[j][:, idx[:, j]]
            tables.append(s)
        return tables

    def run(self, keep_within=None):
        total = math.prod(self.shape)
        widest = max(len(c) for c in self.inner)
        chunk = max(1, _CHUNK_ELEMENTS // widest)
        best = (math.inf, None, None)
        kept = []
        for start in range(0, total, chunk):
            flat = np.arange(start, min(total, start + chunk))
            idx = np.stack(np.unravel_index(flat, self.shape), axis=1)
            tables = self._inner_costs(idx)
            values = sum(t.min(axis=0) for t in tables)
            a = int(np.argmin(values))
            if values[a] < best[0]:
                best = (float(values[a]), idx[a], [int(t[:, a].argmin()) for t in tables])
            if keep_within is not None:
                near = np.nonzero(values <= best[0] + keep_within)[0]
                kept.extend((float(values[b]), idx[b], [t[:, b] for t in tables]) for b in near)
        if keep_within is not None:
            kept = [e for e in kept if e[0] <= best[0] + keep_within]
        return best, kept

    def configuration(self, outer_idx, inner_idx):
        outer = np.array([c[a] for c, a in zip(self.outer, outer_idx)])
        inner = np.array([c[a] for c, a in zip(self.inner, inner_idx)])
        return Configuration(inner, outer) if self.outer_is_y else Configuration(outer, inner)


def _check_instance(inst: ProblemInstance):
    if not inst.all_bounded:
        raise UnboundedSetError("the grid oracle needs every set bounded")
    if inst.dim > 3:
        raise ValueError("the grid oracle supports dimensions 1 to 3")


def brute_force_min(inst: ProblemInstance, grid: GridSpec | None = None) -> OracleResult:
    """Minimize the objective over a product grid of set samples.

    The result is feasible, so its value is always an upper bound on the
    true optimum; it is within a few cell diameters (times k*m) of it.
    """
    grid = grid or GridSpec()
    _check_instance(inst)
    samples = [sample_set(s, grid.density, grid.include_interior) for s in inst.sets]
    cands = [p for p, _ in samples]
    cell = max(c for _, c in samples)

    search = _Search(cands[: inst.k], cands[inst.k:], grid.budget)
    (value, outer_idx, inner_idx), _ = search.run()
    config = search.configuration(outer_idx, inner_idx)
    rounds = [value]

    half_width = cell
    for _ in range(grid.refine):
        points = list(config.xs) + list(config.ys)
        local = [_local_samples(s, p, half_width) for s, p in zip(inst.sets, points)]
        search = _Search([p for p, _ in local[: inst.k]], [p for p, _ in local[inst.k:]], grid.budget)
        (v, outer_idx, inner_idx), _ = search.run()
        if v <= value:
            value, config = v, search.configuration(outer_idx, inner_idx)
        rounds.append(value)
        half_width = max(h for _, h in local)
        cell = half_width
    return OracleResult(value, config, cell, tuple(rounds))


def non_uniqueness_probe(inst: ProblemInstance, grid: GridSpec | None = None, tol: float = 1e-6) -> int:
    """Count distinct base-grid configurations within ``tol`` of the grid minimum.

    Configurations closer than two grid cells (per set) are counted once.
    """
    grid = grid or GridSpec()
    _check_instance(inst)
    samples = [sample_set(s, grid.density, grid.include_interior) for s in inst.sets]
    cands = [p for p, _ in samples]
    cells = [c for _, c in samples]

    search = _Search(cands[: inst.k], cands[inst.k:], grid.budget)
    (best, _, _), kept = search.run(keep_within=tol)
    if search.outer_is_y:
        outer_cells, inner_cells = cells[inst.k:], cells[: inst.k]
    else:
        outer_cells, inner_cells = cells[: inst.k], cells[inst.k:]

    def snap(points, cell_sizes):
        return tuple(
            tuple(np.floor(p / (2 * c)).astype(int)) if c > 0 else tuple(p)
            for p, c in zip(points, cell_sizes)
        )

    keys = set()
    for value, outer_idx, inner_tables in kept:
        slack = best + tol - value
        outer_key = snap([c[a] for c, a in zip(search.outer, outer_idx)], outer_cells)
        # every inner choice whose summed excess over the blockwise minimum fits the slack
        options = []
        for tab, cand, cell in zip(inner_tables, search.inner, inner_cells):
            excess = tab - tab.min()
            ok = np.nonzero(excess <= slack)[0]
            options.append([(float(excess[c]), snap([cand[c]], [cell])[0]) for c in ok])
        partial = {((), 0.0)}
        for opts in options:
            merged = {}
            for key, used in partial:
                for ex, k in opts:
                    if used + ex <= slack:
                        nk = key + (k,)
                        merged[nk] = min(merged.get(nk, math.inf), used + ex)
            partial = set(merged.items())
        for key, _ in partial:
            keys.add((outer_key, key))
    return len(keys)
