from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from hypercross.errors import EmptyTruncationError, IntegrandError, PreconditionError
from hypercross.orthopoly import gauss_rule_for
from hypercross.quad1d import (
    bump_constants,
    fooling_bump_1d,
    integrate_tg,
    largest_degree_within,
    tg_rule,
    tg_rule_for_budget,
    tg_size,
    truncate,
)
from hypercross.weights import FreudWeight, MarkovSoninWeight, gaussian_density

HERMITE = FreudWeight(2.0, 1.0)
GAUSS = gaussian_density(1)


def _phi(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = (u > 0) & (u < 1)
    out[inside] = np.exp(4.0 - 1.0 / (u[inside] * (1 - u[inside])))
    return out


def test_theta_near_one_keeps_everything():
    rule = truncate(gauss_rule_for(HERMITE, 20), theta=1 - 1e-12)
    assert rule.size == 20


def test_hermite_m2_small_theta():
    rule = truncate(gauss_rule_for(HERMITE, 2), theta=0.1)
    assert rule.j_m == 1
    assert rule.size == 2


def test_hermite_m64_mrs_scan():
    full = gauss_rule_for(HERMITE, 64)
    positive = full.nodes[full.nodes > 0]
    expected = 1 + int(np.sum(positive < 0.5 * math.sqrt(64)))
    rule = truncate(full, 0.5, "mrs")
    assert rule.j_m == expected
    assert positive[rule.j_m - 1] >= 4.0 > positive[rule.j_m - 2]


@pytest.mark.parametrize("theta", [0.0, 1.0, -0.2])
def test_theta_out_of_range(theta):
    with pytest.raises(PreconditionError):
        tg_rule(HERMITE, 16, theta)


def test_empty_truncation():
    # 0.99 * a_m lies beyond the largest zero of a degree-4 Hermite rule in a = 8 scaling
    with pytest.raises(EmptyTruncationError):
        tg_rule(FreudWeight(2.0, 8.0), 4, 0.99, "mrs")


def test_constant_on_full_rule():
    assert gauss_rule_for(HERMITE, 30).integrate(lambda x: np.ones_like(x)) == pytest.approx(math.sqrt(math.pi), rel=1e-14)


@pytest.mark.parametrize("m", [9, 32, 100])
def test_odd_integrand_vanishes(m):
    assert integrate_tg(tg_rule(GAUSS, m), lambda x: x) == 0.0


def test_gaussian_against_scipy():
    ref, _ = integrate.quad(lambda t: math.exp(-1.5 * t * t), -np.inf, np.inf, epsabs=1e-14)
    assert tg_rule(HERMITE, 32, 0.6).integrate(lambda x: np.exp(-0.5 * x**2)) == pytest.approx(ref, abs=1e-8)


def test_nan_integrand_names_node():
    with pytest.raises(IntegrandError, match="node"):
        tg_rule(GAUSS, 8).integrate(lambda x: np.where(x > 0, np.nan, 1.0))


@pytest.mark.parametrize("m", [2**j for j in range(5, 13)])
def test_tg_count_and_symmetry(m):
    rule = tg_rule(GAUSS, m)
    assert rule.size == tg_size(GAUSS, m)
    assert rule.size < m
    assert rule.size / m > 0.3
    np.testing.assert_array_equal(rule.kept_nodes, -rule.kept_nodes[::-1])
    assert rule.kept_nodes[rule.kept_nodes > 0].size == rule.j_m


@pytest.mark.parametrize("m", [64, 256, 1024, 4096])
def test_j_m_bounds(m):
    # calibrated: j(m) / m stays near 0.35 for theta = 1/2
    j = tg_rule(GAUSS, m).j_m
    assert 0.25 * m <= j <= m / 2


def test_sonin_cases():
    w = MarkovSoninWeight(0.5, 1.0)
    dropped = tg_rule(w, 31, 0.5, sonin_case="i")
    kept = tg_rule(w, 31, 0.5, sonin_case="ii")
    assert kept.size == dropped.size + 1
    assert 0.0 in kept.kept_nodes and 0.0 not in dropped.kept_nodes


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3000))
def test_budget_search_is_maximal(n):
    m = largest_degree_within(GAUSS, n)
    assert tg_size(GAUSS, m) <= n
    assert all(tg_size(GAUSS, k) > n for k in range(m + 1, m + 8))
    assert tg_rule_for_budget(GAUSS, n).size <= n


def test_bump_constant_b0_against_scipy():
    b0, _ = integrate.quad(lambda u: _phi(np.array([u]))[0], 0, 1, epsabs=1e-15)
    assert bump_constants(1)[0] == pytest.approx(b0, rel=1e-12)


def test_bump_empty_nodes_first_interval():
    bump = fooling_bump_1d(np.zeros(0), 1, 1, GAUSS)
    assert bump.index == 2
    assert (bump.lo, bump.hi, bump.delta) == (1.0, 2.0, 1.0)
    assert bump.integral == pytest.approx(bump_constants(1)[0], rel=1e-15)


# n = 1, r = 1, Gaussian density: int_1^2 |h| w + |h'| w at 30 digits (mpmath, split at the sign change of h')
BUMP_NORM_N1_R1 = 2.41162678953819707811502614692


def test_bump_norm_error_is_honest():
    bump = fooling_bump_1d(np.zeros(0), 1, 1, GAUSS)
    assert abs(bump.norm - BUMP_NORM_N1_R1) <= bump.norm_error
    assert bump.norm_error < 1e-6 * bump.norm
    assert bump.certified <= bump.integral / BUMP_NORM_N1_R1


def test_bump_norm_scipy_route():
    bump = fooling_bump_1d(np.zeros(0), 1, 1, GAUSS)
    lo, delta = bump.lo, bump.delta

    def h_w(x):
        return _phi(np.array([(x - lo) / delta]))[0]

    def dh_w(x):
        # (phi(u) / w)' * w with u = (x - lo) / delta; (1/w)' / (1/w) = x for the Gaussian
        u = (x - lo) / delta
        if not 0 < u < 1:
            return 0.0
        return h_w(x) * ((1 - 2 * u) / (u * (1 - u)) ** 2 / delta + x)

    ref = sum(integrate.quad(lambda x, g=g: abs(g(x)), lo, lo + delta, limit=200, epsabs=1e-14)[0] for g in (h_w, dh_w))
    assert ref == pytest.approx(BUMP_NORM_N1_R1, rel=1e-10)


@pytest.mark.parametrize("n", [16, 64, 256])
@pytest.mark.parametrize("r", [1, 2])
def test_bump_fools_tg_nodes(n, r):
    rule = tg_rule_for_budget(GAUSS, n)
    bump = fooling_bump_1d(rule.kept_nodes, n, r, GAUSS)
    assert n + 1 <= bump.index <= 2 * n + 2
    assert np.all(bump(rule.kept_nodes) == 0.0)
    assert rule.integrate(bump) == 0.0
    assert bump.certified > 0


def test_bump_example_n64():
    rule = tg_rule(GAUSS, 64, 0.5)
    bump = fooling_bump_1d(rule.kept_nodes, 64, 1, GAUSS)
    assert bump.certified >= 0.01 * 64**-0.5


def test_bump_rejects_too_many_nodes():
    with pytest.raises(PreconditionError):
        fooling_bump_1d(np.arange(5.0), 4, 1, GAUSS)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-40, 40, allow_nan=False), max_size=30), st.integers(1, 2))
def test_bump_vanishes_on_arbitrary_nodes(nodes, r):
    n = max(len(nodes), 1)
    bump = fooling_bump_1d(np.array(nodes), n, r, GAUSS)
    assert np.all(bump(np.array(nodes)) == 0.0)
