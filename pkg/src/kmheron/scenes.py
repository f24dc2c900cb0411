"""Scene files: JSON documents describing an instance plus solver settings.

Grammar (JSON object)::

    {
      "name":        optional string,
      "description": optional string,
      "dim":         positive integer,
      "feasible":    [shape, ...],          # k >= 1
      "targets":     [shape, ...],          # m >= 1
      "initial":     optional [[x...], ...] # k + m points, feasible first
      "solver": {                           # optional, every key optional
        "schedule": "inv-t" | "inv-t-scaled:<c>" | "const:<a>",
        "epsilon": number, "max_iters": integer,
        "history_stride": integer | null,
        "check_initial": boolean            # false accepts an infeasible start
      }
    }

    shape := {"type": "ball",      "center": [..], "radius": r}
           | {"type": "box",       "center": [..], "half_widths": [..] | number}
           | {"type": "halfspace", "normal": [..], "offset": b}   # <normal, z> <= b
           | {"type": "segment",   "a": [..], "b": [..]}
           | {"type": "singleton", "point": [..]}
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .convex_sets import SHAPES, ConvexSet, from_dict
from .errors import InfeasibleError, SceneParseError
from .problem import Configuration, ProblemInstance, infeasible_blocks
from .solver import StoppingRule, parse_schedule

BUNDLED = ("example_5_1", "example_5_2", "example_3_1", "two_ball_toy", "classical_heron")

_SHAPE_FIELDS = {
    "ball": {"center", "radius"},
    "box": {"center", "half_widths", "half"},
    "halfspace": {"normal", "offset"},
    "segment": {"a", "b"},
    "singleton": {"point"},
}
_NUMBER_LIST = re.compile(r"\[\n\s*((?:-?[\d.eE+-]+,?\s*)+)\]")
_TOP_FIELDS = {"name", "description", "dim", "feasible", "targets", "initial", "solver"}
_SOLVER_FIELDS = {"schedule", "epsilon", "max_iters", "history_stride", "check_initial"}


@dataclass(frozen=True)
class SolverSettings:
    schedule: str = "inv-t"
    epsilon: float = 1e-15
    max_iters: int = 1_000_000
    history_stride: int | None = None
    check_initial: bool = True

    def stopping_rule(self) -> StoppingRule:
        return StoppingRule(self.epsilon, self.max_iters)


@dataclass(frozen=True)
class SceneFile:
    dim: int
    feasible: tuple[ConvexSet, ...]
    targets: tuple[ConvexSet, ...]
    initial: tuple[tuple[float, ...], ...] | None = None
    solver: SolverSettings = field(default_factory=SolverSettings)
    name: str = "scene"
    description: str = ""

    def instance(self) -> ProblemInstance:
        return ProblemInstance(self.dim, self.feasible, self.targets)

    def initial_configuration(self) -> Configuration:
        k = len(self.feasible)
        if self.initial is None:
            return default_initial(self.instance())
        pts = np.array(self.initial, dtype=float)
        return Configuration(pts[:k], pts[k:])


def default_initial(inst: ProblemInstance) -> Configuration:
    """Project each set's anchor, shift it by +1 along the first axis, project again."""
    shift = np.zeros(inst.dim)
    shift[0] = 1.0

    def pick(s):
        return s.project(s.project(s.anchor) + shift)

    return Configuration([pick(s) for s in inst.feasible], [pick(c) for c in inst.targets])


def _shape(record, path, dim):
    if not isinstance(record, dict):
        raise SceneParseError("shape record must be an object", field=path)
    kind = record.get("type")
    if kind not in SHAPES:
        raise SceneParseError(f"unknown shape type {kind!r}", field=f"{path}.type")
    extra = set(record) - _SHAPE_FIELDS[kind] - {"type"}
    if extra:
        raise SceneParseError(f"unexpected keys {sorted(extra)} for {kind}", field=path)
    try:
        shape = from_dict(record)
    except KeyError as exc:
        raise SceneParseError(f"missing field {exc.args[0]!r} for {kind}", field=path) from None
    except (TypeError, ValueError) as exc:
        raise SceneParseError(str(exc), field=path) from None
    if shape.dim != dim:
        raise SceneParseError(f"shape has dimension {shape.dim}, scene dim is {dim}", field=path)
    return shape


def parse_scene(text: str, name: str | None = None) -> SceneFile:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneParseError(f"invalid JSON: {exc.msg} at column {exc.colno}", line=exc.lineno) from None
    if not isinstance(doc, dict):
        raise SceneParseError("scene must be a JSON object", line=1)
    extra = set(doc) - _TOP_FIELDS
    if extra:
        raise SceneParseError(f"unexpected top-level keys {sorted(extra)}", field=sorted(extra)[0])

    dim = doc.get("dim")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise SceneParseError("dim must be a positive integer", field="dim")
    groups = {}
    for key in ("feasible", "targets"):
        records = doc.get(key)
        if not isinstance(records, list) or not records:
            raise SceneParseError(f"{key} must be a nonempty list of shapes", field=key)
        groups[key] = tuple(_shape(r, f"{key}[{i}]", dim) for i, r in enumerate(records))

    raw_solver = doc.get("solver", {}) or {}
    if not isinstance(raw_solver, dict):
        raise SceneParseError("solver must be an object", field="solver")
    extra = set(raw_solver) - _SOLVER_FIELDS
    if extra:
        raise SceneParseError(f"unexpected solver keys {sorted(extra)}", field="solver")
    try:
        settings = SolverSettings(
            schedule=str(raw_solver.get("schedule", "inv-t")),
            epsilon=float(raw_solver.get("epsilon", 1e-15)),
            max_iters=int(raw_solver.get("max_iters", 1_000_000)),
            history_stride=raw_solver.get("history_stride"),
            check_initial=bool(raw_solver.get("check_initial", True)),
        )
        parse_schedule(settings.schedule)
        settings.stopping_rule()
    except (TypeError, ValueError) as exc:
        raise SceneParseError(str(exc), field="solver") from None

    initial = doc.get("initial")
    if initial is not None:
        k, m = len(groups["feasible"]), len(groups["targets"])
        try:
            pts = np.array(initial, dtype=float)
        except (TypeError, ValueError):
            raise SceneParseError("initial must be a list of coordinate lists", field="initial") from None
        if pts.shape != (k + m, dim):
            raise SceneParseError(
                f"initial needs {k + m} points of dimension {dim}, got shape {pts.shape}",
                field="initial",
            )
        initial = tuple(tuple(float(c) for c in p) for p in pts)

    scene = SceneFile(
        dim=dim,
        feasible=groups["feasible"],
        targets=groups["targets"],
        initial=initial,
        solver=settings,
        name=str(doc.get("name", name or "scene")),
        description=str(doc.get("description", "")),
    )
    if initial is not None and settings.check_initial:
        bad = infeasible_blocks(scene.instance(), scene.initial_configuration())
        if bad:
            kind, idx, d = bad[0]
            raise InfeasibleError(
                f"initial point for {kind} set {idx} lies outside the set (distance {d:.3g})",
                kind=kind,
                index=idx,
            )
    return scene


def render_scene(scene: SceneFile) -> str:
    doc = {
        "name": scene.name,
        "description": scene.description,
        "dim": scene.dim,
        "feasible": [s.to_dict() for s in scene.feasible],
        "targets": [s.to_dict() for s in scene.targets],
    }
    if scene.initial is not None:
        doc["initial"] = [list(p) for p in scene.initial]
    doc["solver"] = {
        "schedule": scene.solver.schedule,
        "epsilon": scene.solver.epsilon,
        "max_iters": scene.solver.max_iters,
        "history_stride": scene.solver.history_stride,
        "check_initial": scene.solver.check_initial,
    }
    text = json.dumps(doc, indent=2)
    # keep coordinate lists on one line
    text = _NUMBER_LIST.sub(lambda mt: "[" + ", ".join(re.findall(r"[^,\s]+", mt.group(1))) + "]", text)
    return text + "\n"


def bundled_text(name: str) -> str:
    if name not in BUNDLED:
        raise KeyError(f"no bundled scene {name!r}; available: {', '.join(BUNDLED)}")
    return resources.files("kmheron").joinpath("scenes").joinpath(f"{name}.json").read_text()


def load_scene(ref: str) -> SceneFile:
    """Load a scene by bundled name or file path."""
    if ref in BUNDLED:
        return parse_scene(bundled_text(ref), name=ref)
    path = Path(ref)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SceneParseError(f"cannot read scene file: {exc.strerror}", field=str(path)) from None
    return parse_scene(text, name=path.stem)

