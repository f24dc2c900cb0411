import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import PRINTED_5_1_XS, PRINTED_5_1_YS, PRINTED_5_2_XS, PRINTED_5_2_YS
from kmheron.convex_sets import Ball, Box, Halfspace, Singleton
from kmheron.errors import (
    DimensionMismatchError,
    ShapeMismatchError,
    UnboundedProblemWarning,
    UnsupportedReductionError,
)
from kmheron.problem import (
    Configuration,
    ProblemInstance,
    objective,
    project_configuration,
    reduce_to_generalized_heron,
    subgradient,
    subgradient_norm_bound,
)
from kmheron.scenes import load_scene


def free_instance(k, m, n=2):
    """Instance whose sets are big enough that random points are feasible."""
    return ProblemInstance(n, [Ball(np.zeros(n), 100)] * k, [Ball(np.zeros(n), 100)] * m)


def random_config(rng, k, m, n=2, scale=5.0):
    return Configuration(rng.normal(scale=scale, size=(k, n)), rng.normal(scale=scale, size=(m, n)))


def test_objective_examples():
    inst = free_instance(1, 1)
    assert objective(inst, Configuration([(0, 0)], [(3, 4)])) == 5.0
    inst = free_instance(2, 2)
    assert objective(inst, Configuration([(1, 2), (1, 2)], [(1, 2), (1, 2)])) == 0.0


def test_objective_at_solver_optimum(example_5_1, example_5_2):
    for (scene, run), expected in ((example_5_1, 79.113613), (example_5_2, 30.691348)):
        assert objective(scene.instance(), run.best) == pytest.approx(expected, abs=1e-5)


@pytest.mark.parametrize(
    "name, xs, ys, expected",
    [
        ("example_5_1", PRINTED_5_1_XS, PRINTED_5_1_YS, 79.113613),
        ("example_5_2", PRINTED_5_2_XS, PRINTED_5_2_YS, 30.691348),
    ],
)
def test_objective_at_printed_points(name, xs, ys, expected):
    inst = load_scene(name).instance()
    # each printed coordinate is off by at most 5e-5; each of the k*m terms moves
    # by at most the sum of its two endpoint errors
    bound = 2 * inst.k * inst.m * 5e-5 * math.sqrt(inst.dim)
    assert objective(inst, Configuration(xs, ys)) == pytest.approx(expected, abs=bound)


def test_subgradient_examples():
    inst = free_instance(1, 1)
    g = subgradient(inst, Configuration([(0, 0)], [(3, 4)]))
    np.testing.assert_allclose(g.gxs, [(-0.6, -0.8)])
    np.testing.assert_allclose(g.gys, [(0.6, 0.8)])
    g = subgradient(inst, Configuration([(1, 1)], [(1, 1)]))
    assert not g.gxs.any() and not g.gys.any()
    g = subgradient(free_instance(1, 2), Configuration([(0, 0)], [(1, 0), (-1, 0)]))
    np.testing.assert_allclose(g.gxs, [(0, 0)], atol=1e-15)


@pytest.mark.parametrize("k, m, expected", [(4, 3, math.sqrt(84)), (1, 1, math.sqrt(2)), (3, 2, math.sqrt(30))])
def test_subgradient_norm_bound(k, m, expected):
    assert subgradient_norm_bound(k, m) == pytest.approx(expected, rel=1e-15)


def test_norm_bound_rejects_empty():
    with pytest.raises(ValueError):
        subgradient_norm_bound(0, 2)


def test_shape_mismatch():
    inst = free_instance(2, 1)
    with pytest.raises(ShapeMismatchError):
        objective(inst, Configuration([(0, 0)], [(1, 1)]))
    with pytest.raises(DimensionMismatchError):
        objective(inst, Configuration([(0, 0, 0), (1, 1, 1)], [(1, 1, 1)]))
    with pytest.raises(DimensionMismatchError):
        ProblemInstance(2, [Ball((0, 0), 1)], [Ball((0, 0, 0), 1)])


def test_unbounded_instance_warns():
    with pytest.warns(UnboundedProblemWarning):
        ProblemInstance(2, [Halfspace((0, 1), 0)], [Halfspace((0, -1), -3)])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        ProblemInstance(2, [Halfspace((0, 1), 0)], [Singleton((0, 3))])


# -- reduction for k = 1 ----------------------------------------------------

def test_reduction_examples():
    inst = ProblemInstance(2, [Halfspace((0, 1), 0)], [Singleton((0, 3))])
    value, ys = reduce_to_generalized_heron(inst, (0, 0))
    assert value == 3.0
    np.testing.assert_array_equal(ys, [(0, 3)])

    inst = ProblemInstance(2, [Ball((0, 0), 1)], [Ball((5, 0), 1)])
    value, ys = reduce_to_generalized_heron(inst, (0, 0))
    assert value == pytest.approx(4.0)
    np.testing.assert_allclose(ys, [(4, 0)])


def test_reduction_requires_single_feasible_set():
    with pytest.raises(UnsupportedReductionError):
        reduce_to_generalized_heron(free_instance(2, 1), (0, 0))


def _grid_min_distance(cset, x, n=401):
    """Brute-force distance from x to a planar ball or box over a dense grid; also returns the grid spacing."""
    if isinstance(cset, Ball):
        r = np.linspace(0, cset.radius, n)
        th = np.linspace(0, 2 * np.pi, n, endpoint=False)
        pts = cset.center + np.stack([np.outer(r, np.cos(th)), np.outer(r, np.sin(th))], -1).reshape(-1, 2)
        spacing = 2 * np.pi * cset.radius / n
    else:
        g = [np.linspace(lo, hi, n) for lo, hi in zip(cset.lower, cset.upper)]
        pts = np.stack(np.meshgrid(*g), -1).reshape(-1, 2)
        spacing = float(np.linalg.norm(2 * cset.half_widths / (n - 1)))
    return np.min(np.linalg.norm(pts - x, axis=1)), spacing


def test_reduction_matches_grid_minimization(rng):
    inst = ProblemInstance(2, [Ball((0, 0), 2)], [Ball((6, 1), 1.5), Box((-4, 5), (1, 2)), Ball((1, -7), 1)])
    for _ in range(5):
        x = inst.feasible[0].project(rng.normal(scale=3, size=2))
        value, _ = reduce_to_generalized_heron(inst, x)
        brute = [_grid_min_distance(c, x) for c in inst.targets]
        assert value <= sum(d for d, _ in brute) + 1e-12
        assert value == pytest.approx(sum(d for d, _ in brute), abs=sum(h for _, h in brute))


# -- properties -------------------------------------------------------------

dims = st.sampled_from([2, 3])
sizes = st.integers(1, 5)


@given(sizes, sizes, dims, st.integers(0, 2**32 - 1))
def test_subgradient_inequality_and_bounds(k, m, n, seed):
    rng = np.random.default_rng(seed)
    inst = free_instance(k, m, n)
    Z, W = random_config(rng, k, m, n), random_config(rng, k, m, n)
    g = subgradient(inst, Z)
    slack = objective(inst, W) - objective(inst, Z) - g.flat() @ (W.flat() - Z.flat())
    assert slack >= -1e-9
    assert g.norm <= subgradient_norm_bound(k, m) + 1e-12
    assert np.all(np.linalg.norm(g.gxs, axis=1) <= m + 1e-12)
    assert np.all(np.linalg.norm(g.gys, axis=1) <= k + 1e-12)


@given(sizes, sizes, st.integers(0, 2**32 - 1), st.floats(0, 1))
def test_objective_convex(k, m, seed, lam):
    rng = np.random.default_rng(seed)
    inst = free_instance(k, m)
    Z, W = random_config(rng, k, m), random_config(rng, k, m)
    mid = Configuration.from_flat(lam * Z.flat() + (1 - lam) * W.flat(), k, m, 2)
    assert objective(inst, mid) <= lam * objective(inst, Z) + (1 - lam) * objective(inst, W) + 1e-9


@given(sizes, sizes, st.integers(0, 2**32 - 1))
def test_translation_equivariance(k, m, seed):
    rng = np.random.default_rng(seed)
    inst = free_instance(k, m)
    Z = random_config(rng, k, m)
    shift = rng.normal(scale=10, size=2)
    moved = Configuration(Z.xs + shift, Z.ys + shift)
    inst2 = inst.translated(shift)
    assert objective(inst2, moved) == pytest.approx(objective(inst, Z), abs=1e-9)
    np.testing.assert_allclose(subgradient(inst2, moved).flat(), subgradient(inst, Z).flat(), atol=1e-9)


@given(sizes, sizes, st.integers(0, 2**32 - 1))
def test_subgradient_matches_finite_differences(k, m, seed):
    rng = np.random.default_rng(seed)
    inst = free_instance(k, m)
    Z = random_config(rng, k, m)
    z = Z.flat()
    h = 1e-6
    fd = np.empty_like(z)
    for i in range(z.size):
        e = np.zeros_like(z)
        e[i] = h
        fd[i] = (
            objective(inst, Configuration.from_flat(z + e, k, m, 2))
            - objective(inst, Configuration.from_flat(z - e, k, m, 2))
        ) / (2 * h)
    np.testing.assert_allclose(subgradient(inst, Z).flat(), fd, atol=1e-5)


def test_objective_symmetric_under_relabeling(rng):
    inst = free_instance(3, 4)
    Z = random_config(rng, 3, 4)
    px, py = rng.permutation(3), rng.permutation(4)
    assert objective(inst, Configuration(Z.xs[px], Z.ys[py])) == pytest.approx(objective(inst, Z), abs=1e-12)


def test_projection_is_blockwise():
    inst = ProblemInstance(2, [Ball((0, 0), 1)], [Box((5, 0), 1)])
    P = project_configuration(inst, Configuration([(3, 0)], [(9, 9)]))
    np.testing.assert_allclose(P.xs, [(1, 0)])
    np.testing.assert_allclose(P.ys, [(6, 1)])
