from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypercross.cube_rules import (
    CubeRule,
    PeriodizationMap,
    fibonacci,
    fibonacci_index_within,
    fibonacci_rule,
    midpoint_rule,
    periodize,
    smolyak_bspline_cube_rule,
)
from hypercross.errors import PreconditionError


def _ones(x):
    return np.ones(np.shape(x)[0])


def test_fibonacci_numbers():
    assert [fibonacci(m) for m in range(10)] == [1, 1, 2, 3, 5, 8, 13, 21, 34, 55]
    assert fibonacci_index_within(55) == 9
    assert fibonacci_index_within(54) == 8


def test_fibonacci_m2_nodes():
    rule = fibonacci_rule(2)
    np.testing.assert_array_equal(rule.nodes, [[0.0, 0.0], [-0.5, -0.5]])
    np.testing.assert_array_equal(rule.weights, [0.5, 0.5])


def test_fibonacci_m4_constant():
    assert fibonacci_rule(4).integrate(_ones) == pytest.approx(1.0, abs=1e-15)


def test_fibonacci_m5_cosine():
    assert abs(fibonacci_rule(5).integrate(lambda x: np.cos(2 * math.pi * x[:, 0]))) <= 1e-15


@pytest.mark.parametrize("m", range(2, 10))
def test_fibonacci_dual_lattice_exactness(m):
    rule = fibonacci_rule(m)
    bm, bm1 = fibonacci(m), fibonacci(m - 1)
    t = rule.nodes + 0.5
    for h1 in range(-6, 7):
        for h2 in range(-6, 7):
            value = np.mean(np.cos(2 * math.pi * (h1 * t[:, 0] + h2 * t[:, 1])))
            expected = 1.0 if (h1 + h2 * bm1) % bm == 0 else 0.0
            assert value == pytest.approx(expected, abs=1e-12)


def test_psi_one_closed_form():
    psi = PeriodizationMap(1)
    assert psi.constant == 6
    t = np.linspace(0, 1, 41)
    np.testing.assert_allclose(psi(t), 3 * t**2 - 2 * t**3, atol=1e-15)


@pytest.mark.parametrize("k", range(6))
def test_psi_properties(k):
    psi = PeriodizationMap(k)
    assert psi(0.5) == pytest.approx(0.5, abs=1e-15)
    assert (psi(0.0), psi(1.0)) == (0.0, 1.0)
    for order in range(1, k + 1):
        assert abs(psi.derivative(np.array([0.0, 1.0]), order)).max() <= 1e-12
    t = np.linspace(0, 1, 201)
    assert np.all(np.diff(psi(t)) >= 0)


def test_psi_rejects_negative():
    with pytest.raises(PreconditionError):
        PeriodizationMap(-1)


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 1), st.integers(0, 5))
def test_psi_reflection(t, k):
    psi = PeriodizationMap(k)
    assert psi(t) + psi(1 - t) == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_periodize_preserves_mass(k):
    # tensor Gauss-Legendre with 8 points is exact for the degree-2k Jacobian product
    t, w = np.polynomial.legendre.leggauss(8)
    grid = np.stack([g.ravel() for g in np.meshgrid(t / 2, t / 2, indexing="ij")], axis=-1)
    base = CubeRule(grid, np.outer(w / 2, w / 2).ravel(), "general")
    rule = periodize(base, k)
    assert rule.contract == "general"
    assert rule.weights.sum() == pytest.approx(1.0, abs=1e-14)


def test_periodized_fibonacci_general_integrand():
    exact = (math.exp(0.5) - math.exp(-0.5)) ** 2
    f = lambda x: np.exp(x[:, 0] + x[:, 1])
    errors = [abs(periodize(fibonacci_rule(m), 3).integrate(f) - exact) for m in (8, 11, 14)]
    assert errors[0] > errors[1] > errors[2]
    assert errors[2] < 1e-8


def test_midpoint_rule():
    rule = midpoint_rule(4, 2)
    assert rule.size == 16 and rule.integrate(_ones) == pytest.approx(1.0, abs=1e-15)
    np.testing.assert_allclose(np.unique(rule.nodes[:, 0]), [-0.375, -0.125, 0.125, 0.375])
    with pytest.raises(PreconditionError):
        midpoint_rule(0, 2)


@pytest.mark.parametrize(("m", "r", "d"), [(16, 2, 2), (200, 2, 2), (100, 1, 2), (300, 3, 3), (40, 2, 1)])
def test_smolyak_cube_rule(m, r, d):
    rule = smolyak_bspline_cube_rule(m, r, d)
    assert rule.size <= m
    assert rule.dim == d
    assert rule.integrate(_ones) == pytest.approx(1.0, abs=1e-12)


def test_smolyak_cube_rule_converges_on_periodic():
    # t^2 (1-t)^2 is periodic C^2 with a jump in the third derivative; each factor integrates to 1/30
    def f(x):
        t = x + 0.5
        return np.prod(t**2 * (1 - t) ** 2, axis=1)

    errors = [abs(smolyak_bspline_cube_rule(m, 2, 2).integrate(f) - 1 / 900) for m in (100, 1000, 10000)]
    assert errors[0] > errors[1] > errors[2]
    assert errors[2] < 1e-12


def test_smolyak_budget_too_small():
    with pytest.raises(PreconditionError):
        smolyak_bspline_cube_rule(3, 2, 2)


def test_cube_rule_validation():
    with pytest.raises(PreconditionError):
        CubeRule(np.array([[0.7]]), np.array([1.0]), "periodic")
    with pytest.raises(PreconditionError):
        CubeRule(np.array([[0.1]]), np.array([1.0]), "smooth")
