"""Text, CSV and SVG renderings of solver runs and certificates."""

from __future__ import annotations

import io
import json
import xml.etree.ElementTree as ET

import numpy as np

from .convex_sets import Ball, Box, Halfspace, Segment, Singleton
from .optimality import OptimalityReport
from .problem import Configuration, ProblemInstance, pairwise_distances
from .solver import SolverRun

COORD_DECIMALS = 4
VALUE_DECIMALS = 6


def fmt_point(p, decimals=COORD_DECIMALS) -> str:
    return "(" + ", ".join(f"{c:.{decimals}f}" for c in p) + ")"


def history_csv(run: SolverRun, decimals=VALUE_DECIMALS) -> str:
    lines = ["iteration,objective,delta"]
    for h in run.history:
        lines.append(f"{h.iteration},{h.objective:.{decimals}f},{h.delta:.4e}")
    return "\n".join(lines) + "\n"


def distance_matrix_csv(Z: Configuration, decimals=COORD_DECIMALS) -> str:
    d = pairwise_distances(Z)
    lines = [",".join([""] + [f"y_{j + 1}" for j in range(Z.m)])]
    for i, row in enumerate(d):
        lines.append(",".join([f"x_{i + 1}"] + [f"{v:.{decimals}f}" for v in row]))
    return "\n".join(lines) + "\n"


def parse_distance_matrix(text: str) -> np.ndarray:
    rows = [line.split(",") for line in text.strip().splitlines()[1:]]
    return np.array([[float(v) for v in r[1:]] for r in rows])


def configuration_table(Z: Configuration, decimals=COORD_DECIMALS) -> str:
    out = [f"  x_{i + 1} = {fmt_point(x, decimals)}" for i, x in enumerate(Z.xs)]
    out += [f"  y_{j + 1} = {fmt_point(y, decimals)}" for j, y in enumerate(Z.ys)]
    return "\n".join(out)


def optimality_table(report: OptimalityReport, boundary=None) -> str:
    buf = io.StringIO()
    header = f"{'set':<6}{'residual':>14}  {'in cone':<8}"
    if boundary is not None:
        header += "  on boundary"
    buf.write(header + "\n")
    for n, (label, res, ok) in enumerate(report.rows()):
        line = f"{label:<6}{res:>14.3e}  {'yes' if ok else 'no':<8}"
        if boundary is not None:
            line += f"  {'yes' if boundary[n] else 'no'}"
        buf.write(line + "\n")
    buf.write(f"balance residual (O3): {report.o3_residual:.3e}\n")
    buf.write(f"min pair distance:     {report.min_pair_distance:.4f}\n")
    buf.write(f"certificate at tol {report.tol:g}: {'PASSED' if report.passed else 'FAILED'}\n")
    return buf.getvalue()


def solution_json(run: SolverRun) -> str:
    doc = {
        "best_value": run.best_value,
        "final_value": run.final_value,
        "iterations": run.iterations,
        "stop_reason": run.stop_reason.value,
        "best": {"xs": run.best.xs.tolist(), "ys": run.best.ys.tolist()},
        "final": {"xs": run.final.xs.tolist(), "ys": run.final.ys.tolist()},
    }
    return json.dumps(doc, indent=2) + "\n"


def load_points(text: str) -> Configuration:
    """Read ``{"xs": .., "ys": ..}`` or a solution file (its ``best`` entry)."""
    doc = json.loads(text)
    if "best" in doc:
        doc = doc["best"]
    return Configuration(doc["xs"], doc["ys"])


# -- SVG ------------------------------------------------------------------

def _extent(inst: ProblemInstance, Z: Configuration):
    pts = [Z.xs, Z.ys]
    for s in inst.sets:
        if isinstance(s, Ball):
            pts.append(np.array([s.center - s.radius, s.center + s.radius]))
        elif isinstance(s, Box):
            pts.append(np.array([s.lower, s.upper]))
        elif isinstance(s, Segment):
            pts.append(np.array([s.a, s.b]))
        elif isinstance(s, Singleton):
            pts.append(s.p[None, :])
    allp = np.concatenate(pts)
    lo, hi = allp.min(axis=0), allp.max(axis=0)
    pad = 0.08 * max(1.0, float(np.max(hi - lo)))
    return lo - pad, hi + pad


def _clip_halfspace(h: Halfspace, lo, hi):
    """The view rectangle intersected with the halfspace, as a polygon."""
    poly = [(lo[0], lo[1]), (hi[0], lo[1]), (hi[0], hi[1]), (lo[0], hi[1])]
    a, b = h.normal, h.offset
    out = []
    for p, q in zip(poly, poly[1:] + poly[:1]):
        fp, fq = a @ np.array(p) - b, a @ np.array(q) - b
        if fp <= 0:
            out.append(p)
        if fp * fq < 0:
            t = fp / (fp - fq)
            out.append(tuple(np.array(p) + t * (np.array(q) - np.array(p))))
    return out


def render_svg(inst: ProblemInstance, Z: Configuration, width: int = 640) -> str:
    """Static figure of a planar scene: sets, chosen points, and connecting segments."""
    if inst.dim != 2:
        raise ValueError("figures are only drawn for planar scenes")
    lo, hi = _extent(inst, Z)
    scale = width / float(hi[0] - lo[0])
    height = int(round(float(hi[1] - lo[1]) * scale))

    def xy(p):
        return (float(p[0] - lo[0]) * scale, float(hi[1] - p[1]) * scale)

    svg = ET.Element(
        "svg",
        xmlns="http://www.w3.org/2000/svg",
        width=str(width),
        height=str(height),
        viewBox=f"0 0 {width} {height}",
    )
    ET.SubElement(svg, "rect", {"class": "background", "width": "100%", "height": "100%", "fill": "white"})
    colors = {"feasible": "#3b6fb6", "target": "#c8553d"}

    def draw_set(s, role, label):
        style = {"fill": colors[role], "fill-opacity": "0.15", "stroke": colors[role], "stroke-width": "1.5"}
        cls = {"class": f"set {role} {s.kind}", "data-label": label}
        if isinstance(s, Ball):
            cx, cy = xy(s.center)
            ET.SubElement(svg, "circle", {**cls, **style, "cx": f"{cx:.2f}", "cy": f"{cy:.2f}", "r": f"{s.radius * scale:.2f}"})
        elif isinstance(s, Box):
            x0, y0 = xy((s.lower[0], s.upper[1]))
            w, h = 2 * s.half_widths * scale
            ET.SubElement(svg, "rect", {**cls, **style, "x": f"{x0:.2f}", "y": f"{y0:.2f}", "width": f"{w:.2f}", "height": f"{h:.2f}"})
        elif isinstance(s, Halfspace):
            pts = " ".join("{:.2f},{:.2f}".format(*xy(p)) for p in _clip_halfspace(s, lo, hi))
            ET.SubElement(svg, "polygon", {**cls, **style, "points": pts})
        elif isinstance(s, Segment):
            (x1, y1), (x2, y2) = xy(s.a), xy(s.b)
            ET.SubElement(svg, "line", {**cls, **style, "x1": f"{x1:.2f}", "y1": f"{y1:.2f}", "x2": f"{x2:.2f}", "y2": f"{y2:.2f}"})
        else:
            cx, cy = xy(s.p)
            ET.SubElement(svg, "circle", {**cls, **style, "cx": f"{cx:.2f}", "cy": f"{cy:.2f}", "r": "5"})

    for i, s in enumerate(inst.feasible):
        draw_set(s, "feasible", f"S_{i + 1}")
    for j, c in enumerate(inst.targets):
        draw_set(c, "target", f"C_{j + 1}")

    for x in Z.xs:
        for y in Z.ys:
            (x1, y1), (x2, y2) = xy(x), xy(y)
            ET.SubElement(svg, "line", {
                "class": "pair", "x1": f"{x1:.2f}", "y1": f"{y1:.2f}", "x2": f"{x2:.2f}", "y2": f"{y2:.2f}",
                "stroke": "#888888", "stroke-width": "0.8", "stroke-dasharray": "4 3",
            })
    for role, pts, name in (("feasible", Z.xs, "x"), ("target", Z.ys, "y")):
        for n, p in enumerate(pts):
            cx, cy = xy(p)
            ET.SubElement(svg, "circle", {
                "class": f"point {role}", "cx": f"{cx:.2f}", "cy": f"{cy:.2f}", "r": "3.5", "fill": colors[role],
            })
            text = ET.SubElement(svg, "text", {
                "class": "label", "x": f"{cx + 5:.2f}", "y": f"{cy - 5:.2f}", "font-size": "12",
                "font-family": "sans-serif",
            })
            text.text = f"{name}{n + 1}*"
    return ET.tostring(svg, encoding="unicode") + "\n"
