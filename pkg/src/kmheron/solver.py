"""Projected subgradient method with diminishing step sizes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .convex_sets import DEFAULT_TOL
from .errors import NumericFailureError, UnboundedSetError
from .problem import (
    Configuration,
    ProblemInstance,
    check_shapes,
    is_feasible,
    objective,
    project_configuration,
    require_feasible,
    subgradient,
    subgradient_norm_bound,
)

# Rows of the convergence tables that are always recorded.
CHECKPOINTS = frozenset({1, 10, 100, 500, 1_000, 10_000, 50_000, 100_000})


@dataclass(frozen=True)
class InverseT:
    """alpha_t = 1/t (t >= 1)."""

    diminishing = True

    def __call__(self, t: int) -> float:
        return 1.0 / t

    def label(self):
        return "inv-t"


@dataclass(frozen=True)
class InverseTScaled:
    c: float

    diminishing = True

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("scale must be positive")

    def __call__(self, t: int) -> float:
        return self.c / t

    def label(self):
        return f"inv-t-scaled:{self.c:g}"


@dataclass(frozen=True)
class Constant:
    """Fixed step. Does not converge in general; for experiments only."""

    alpha: float

    diminishing = False

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("step must be positive")

    def __call__(self, t: int) -> float:
        return self.alpha

    def label(self):
        return f"const:{self.alpha:g}"


StepSchedule = InverseT | InverseTScaled | Constant


def parse_schedule(text: str) -> StepSchedule:
    """Parse ``inv-t``, ``inv-t-scaled:<c>`` or ``const:<a>``."""
    name, _, arg = text.partition(":")
    if name == "inv-t" and not arg:
        return InverseT()
    if name == "inv-t-scaled" and arg:
        return InverseTScaled(float(arg))
    if name == "const" and arg:
        return Constant(float(arg))
    raise ValueError(f"unknown step schedule {text!r}")


@dataclass(frozen=True)
class StoppingRule:
    epsilon: float = 1e-15
    max_iters: int = 1_000_000

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")


class StopReason(str, Enum):
    TOLERANCE = "Tolerance"
    MAX_ITERS = "MaxIters"


@dataclass(frozen=True)
class HistoryEntry:
    iteration: int
    objective: float
    delta: float


@dataclass
class SolverRun:
    final: Configuration
    best: Configuration
    best_value: float
    final_value: float
    initial_value: float
    iterations: int
    stop_reason: StopReason
    history: list[HistoryEntry] = field(default_factory=list)

    def history_at(self, iteration: int) -> HistoryEntry:
        for h in self.history:
            if h.iteration == iteration:
                return h
        raise KeyError(f"iteration {iteration} was not recorded")


def _recorded(t: int, stride: int | None) -> bool:
    if t <= 100 or t in CHECKPOINTS:
        return True
    if stride is not None:
        return t % stride == 0
    # 1-2-5 thinning beyond the first hundred iterations
    p = 10 ** int(math.log10(t))
    return t % p == 0 and t // p in (1, 2, 5)


def step(inst: ProblemInstance, Z: Configuration, alpha: float) -> Configuration:
    """One projected subgradient update ``proj_A(Z - alpha * g)``."""
    if alpha < 0 or not math.isfinite(alpha):
        raise ValueError(f"step size must be a nonnegative finite number, got {alpha}")
    g = subgradient(inst, Z)
    moved = Configuration(Z.xs - alpha * g.gxs, Z.ys - alpha * g.gys)
    return project_configuration(inst, moved)


def solve(
    inst: ProblemInstance,
    Z0: Configuration,
    schedule: StepSchedule | None = None,
    stop: StoppingRule | None = None,
    *,
    history_stride: int | None = None,
    check_initial: bool = True,
    tol: float = DEFAULT_TOL,
) -> SolverRun:
    """Run the projected subgradient method from ``Z0``.

    Iteration ``t`` (starting at 1) maps ``Z_{t-1}`` to ``Z_t`` with step
    ``schedule(t)`` and stops once ``|F(Z_t) - F(Z_{t-1})| < stop.epsilon`` or
    after ``stop.max_iters`` iterations. The best feasible iterate is tracked
    alongside the current one.

    With ``check_initial=False`` an infeasible start is accepted; it is then
    projected by the first update and never counted as the best iterate.
    """
    schedule = schedule or InverseT()
    stop = stop or StoppingRule()
    check_shapes(inst, Z0)
    if check_initial:
        require_feasible(inst, Z0, tol)

    feasible = inst.feasible
    targets = inst.targets
    xs = np.array(Z0.xs)
    ys = np.array(Z0.ys)

    def evaluate(xs, ys):
        diff = xs[:, None, :] - ys[None, :, :]
        dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        return diff, dist

    diff, dist = evaluate(xs, ys)
    f_prev = float(dist.sum())
    initial_value = f_prev
    if not math.isfinite(f_prev):
        raise NumericFailureError("objective is not finite at the initial point", iteration=0)

    if is_feasible(inst, Z0, tol):
        best_value, best_xs, best_ys = f_prev, xs, ys
    else:
        best_value, best_xs, best_ys = math.inf, None, None

    history = []
    stop_reason = StopReason.MAX_ITERS
    t = 0
    for t in range(1, stop.max_iters + 1):
        safe = np.where(dist > 0, dist, 1.0)
        units = diff / safe[:, :, None]
        units[dist == 0] = 0.0
        gx = units.sum(axis=1)
        gy = -units.sum(axis=0)
        if not (np.all(np.isfinite(gx)) and np.all(np.isfinite(gy))):
            raise NumericFailureError(f"non-finite subgradient at iteration {t}", iteration=t)

        alpha = schedule(t)
        tx = xs - alpha * gx
        ty = ys - alpha * gy
        xs = np.array([s._project(x) for s, x in zip(feasible, tx)])
        ys = np.array([c._project(y) for c, y in zip(targets, ty)])

        diff, dist = evaluate(xs, ys)
        f = float(dist.sum())
        if not math.isfinite(f):
            raise NumericFailureError(f"non-finite objective at iteration {t}", iteration=t)
        delta = abs(f - f_prev)
        if f < best_value:
            best_value, best_xs, best_ys = f, xs, ys

        done = delta < stop.epsilon
        if done or t == stop.max_iters or _recorded(t, history_stride):
            history.append(HistoryEntry(t, f, delta))
        if done:
            stop_reason = StopReason.TOLERANCE
            break
        f_prev = f

    final = Configuration(xs, ys)
    return SolverRun(
        final=final,
        best=Configuration(best_xs, best_ys),
        best_value=best_value,
        final_value=f,
        initial_value=initial_value,
        iterations=t,
        stop_reason=stop_reason,
        history=history,
    )


def certify_convergence_bound(
    inst: ProblemInstance,
    Z0: Configuration,
    Zstar_value: float,
    schedule: StepSchedule,
    N: int,
    dist_bound: float | None = None,
) -> float:
    """Upper bound on ``F_best^(N) - F*`` after N projected subgradient steps.

    Uses ``(D^2 + G^2 sum alpha_t^2) / (2 sum alpha_t)`` over t = 1..N with
    G = sqrt(k m (m + k)) and D a bound on ``||Z0 - Z*||``. When ``dist_bound``
    is omitted, D is taken as the largest possible distance from ``Z0`` to any
    point of the product set, which needs every set bounded.

    ``Zstar_value`` is a reference optimal value; it is only checked for
    consistency (it cannot exceed the objective at a feasible ``Z0``).
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    if not getattr(schedule, "diminishing", False):
        raise ValueError("the bound needs a diminishing step schedule")
    check_shapes(inst, Z0)
    if not math.isfinite(Zstar_value):
        raise ValueError("reference optimal value must be finite")
    if is_feasible(inst, Z0) and Zstar_value > objective(inst, Z0) + 1e-12:
        raise ValueError("reference optimal value exceeds the objective at a feasible Z0")

    if dist_bound is None:
        if not inst.all_bounded:
            raise UnboundedSetError("distance bound needs every set bounded; pass dist_bound")
        sq = sum(s.farthest_distance(x) ** 2 for s, x in zip(inst.feasible, Z0.xs))
        sq += sum(c.farthest_distance(y) ** 2 for c, y in zip(inst.targets, Z0.ys))
        dist_bound = math.sqrt(sq)

    G = subgradient_norm_bound(inst.k, inst.m)
    alphas = np.array([schedule(t) for t in range(1, N + 1)])
    return (dist_bound**2 + G**2 * float(np.sum(alphas**2))) / (2.0 * float(np.sum(alphas)))
