from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypercross.bspline_recover import (
    QuasiInterpScheme,
    builtin_scheme,
    cardinal_bspline,
    cube_functional,
    grid_points,
    level_operator,
    levels_upto,
    periodic_qk_apply,
    recover_separable,
    refinement_mask,
    scheme_for_smoothness,
    smolyak_recover,
)
from hypercross.errors import PreconditionError

SCHEMES = ["linear", "quadratic", "cubic"]


@pytest.mark.parametrize("name", SCHEMES)
def test_stencil_sums_to_one(name):
    scheme = builtin_scheme(name)
    assert math.fsum(scheme.stencil) == 1.0


def test_scheme_validation():
    with pytest.raises(PreconditionError):
        QuasiInterpScheme("bad", 4, (1.0, 0.0))
    with pytest.raises(PreconditionError):
        QuasiInterpScheme("bad", 4, (0.1, 0.8, 0.2))
    with pytest.raises(PreconditionError):
        builtin_scheme("quintic")
    with pytest.raises(PreconditionError):
        scheme_for_smoothness(4)


@pytest.mark.parametrize("ell", [1, 2, 3, 4, 6])
def test_cardinal_bspline_basics(ell):
    x = np.linspace(-1, ell + 1, 2001)
    vals = cardinal_bspline(ell, x)
    assert np.all(vals >= 0) and np.all(vals[(x < 0) | (x >= ell)] == 0)
    t = np.linspace(0, 1, 50, endpoint=False)
    np.testing.assert_allclose(sum(cardinal_bspline(ell, t + s) for s in range(ell)), 1.0, atol=1e-14)


@pytest.mark.parametrize("ell", [2, 3, 4])
def test_refinement_relation(ell):
    x = np.linspace(-0.5, ell + 0.5, 301)
    mask = refinement_mask(ell)
    fine = sum(c * cardinal_bspline(ell, 2 * x - j) for j, c in enumerate(mask))
    np.testing.assert_allclose(fine, cardinal_bspline(ell, x), atol=1e-14)


@pytest.mark.parametrize("name", SCHEMES)
def test_polynomial_reproduction(name):
    scheme = builtin_scheme(name)
    x = np.linspace(-3, 3, 97)
    for degree in range(scheme.ell):
        np.testing.assert_allclose(scheme.quasi_interpolate(lambda t, p=degree: t**p, x), x**degree, atol=1e-11)


@pytest.mark.parametrize("name", SCHEMES)
@pytest.mark.parametrize("k", [1, 2, 4])
def test_difference_kills_constants(name, k):
    comp = periodic_qk_apply(builtin_scheme(name), (k,), lambda x: np.ones_like(x))
    assert np.abs(comp.coefficients).max() <= 1e-14


@pytest.mark.parametrize("name", SCHEMES)
def test_level_zero_constant(name):
    comp = periodic_qk_apply(builtin_scheme(name), (0, 0), lambda x: np.ones(len(x)))
    np.testing.assert_allclose(comp.coefficients, 1.0, rtol=1e-15)


@pytest.mark.parametrize("name", SCHEMES)
def test_level_zero_row_support(name):
    scheme = builtin_scheme(name)
    op = level_operator(scheme, 0)
    assert np.diff(op.matrix.indptr).max() <= 2 * scheme.mu + 1


@pytest.mark.parametrize("name", SCHEMES)
@pytest.mark.parametrize("k", [(0, 0), (1, 2), (3, 0)])
def test_sample_count_is_tensor_of_axes(name, k):
    scheme = builtin_scheme(name)
    comp = periodic_qk_apply(scheme, k, lambda x: np.ones(len(x)))
    assert comp.sample_count == math.prod(level_operator(scheme, v).numerators.size for v in k)


@pytest.mark.parametrize("name", SCHEMES)
@pytest.mark.parametrize("d", [1, 2])
def test_recover_constant(name, d):
    rec = smolyak_recover(builtin_scheme(name), 3, lambda x: np.ones(len(x)), d)
    x = np.random.default_rng(3).uniform(0, 1, size=(50, d))
    np.testing.assert_allclose(rec(x), 1.0, atol=1e-13)


@pytest.mark.parametrize("name", SCHEMES)
@pytest.mark.parametrize("m", [0, 2, 4])
def test_d1_recovery_is_level_quasi_interpolant(name, m):
    scheme = builtin_scheme(name)

    def f(x):
        return np.exp(np.sin(2 * math.pi * x))

    rec = smolyak_recover(scheme, m, f, 1)
    h = 1.0 / (scheme.ell * 2**m)
    x = np.linspace(0, 1, 73, endpoint=False)
    direct = scheme.quasi_interpolate(lambda t: f(h * t), x / h)
    np.testing.assert_allclose(rec(x), direct, atol=1e-13)


def test_levels_upto():
    assert levels_upto(-1, 2) == []
    assert levels_upto(2, 2) == [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (2, 0)]


def test_grid_points_examples():
    grid = grid_points(0, 1, 2)
    np.testing.assert_array_equal(grid.points[:, 0], [0.0, 0.5])
    grid = grid_points(1, 2, 2)
    assert grid.size == 12
    with pytest.warns(UserWarning, match="empty"):
        assert grid_points(1, 2, 2, positive_levels=True).size == 0


@pytest.mark.parametrize(("m", "d", "name"), [(3, 2, "linear"), (4, 2, "cubic"), (2, 3, "cubic"), (3, 2, "quadratic")])
def test_grid_is_sample_set(m, d, name):
    scheme = builtin_scheme(name)
    grid = grid_points(m, d, scheme.ell, scheme=scheme)
    pts = grid.points
    assert np.all((pts >= 0) & (pts < 1))
    assert len({tuple(r) for r in grid.numerators.tolist()}) == grid.size
    seen = []
    rec = smolyak_recover(scheme, m, lambda x: seen.append(len(x)) or np.ones(len(x)), d)
    assert seen == [grid.size] and rec.sample_points.shape == (grid.size, d)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 4), st.sampled_from(SCHEMES))
def test_separable_matches_general(m, name):
    scheme = builtin_scheme(name)
    g1 = lambda t: np.cos(2 * math.pi * t) + 0.3
    g2 = lambda t: np.exp(np.sin(2 * math.pi * t))
    general = smolyak_recover(scheme, m, lambda x: g1(x[:, 0]) * g2(x[:, 1]), 2)
    sep = recover_separable(scheme, m, [g1, g2])
    x = np.random.default_rng(m).uniform(0, 1, size=(40, 2))
    np.testing.assert_allclose(sep(x), general(x), atol=1e-13)
    axes = [np.linspace(0, 1, 5, endpoint=False), np.linspace(0, 1, 7, endpoint=False)]
    grid = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=-1)
    np.testing.assert_allclose(sep.on_grid(axes).ravel(), sep(grid), atol=1e-14)


def test_linf_rate_cubic():
    scheme = builtin_scheme("cubic")
    g = lambda t: np.sin(2 * math.pi * t)
    x = np.linspace(0, 1, 257, endpoint=False)
    grid_axes = [x, x]
    exact = np.multiply.outer(g(x), g(x))
    errors = [np.abs(recover_separable(scheme, m, [g, g]).on_grid(grid_axes) - exact).max() for m in range(2, 7)]
    assert all(b < a for a, b in itertools.pairwise(errors))
    slope = np.polyfit(range(2, 7), np.log2(errors), 1)[0]
    assert slope < -3.0


@pytest.mark.parametrize("name", SCHEMES)
def test_cube_functional(name):
    scheme = builtin_scheme(name)
    for k in range(4):
        _, weights, _ = cube_functional(scheme, k)
        assert weights.sum() == pytest.approx(1.0 if k == 0 else 0.0, abs=1e-14)
