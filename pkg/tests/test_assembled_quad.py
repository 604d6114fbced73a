from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from hypercross.assembled_quad import (
    assemble,
    assemble_partitioned,
    feasible_delta,
    fibonacci_family,
    partition,
    ramp,
    schedule,
    smolyak_family,
    smooth_step,
)
from hypercross.cube_rules import midpoint_rule
from hypercross.errors import PreconditionError
from hypercross.weights import FreudWeight, gaussian_density

GAUSS2 = gaussian_density(2)
GAUSS1 = gaussian_density(1)


def _ones(x):
    return np.ones(np.shape(x)[0])


@pytest.mark.parametrize(("n", "alpha"), [(100, 1.0), (5000, 0.5), (20000, 2.0)])
def test_schedule_funds_only_inside_radius(n, alpha):
    sched = schedule(n, alpha, GAUSS2)
    xi = (sched.lam * alpha * math.log(n) / sched.delta) ** (1 / sched.lam)
    assert sched.xi_n == pytest.approx(xi, rel=1e-15)
    assert all(np.linalg.norm(k) < sched.xi_n for k in sched.budgets)
    assert sched.total <= n


def test_degenerate_small_budget():
    sched = schedule(2, 0.5, GAUSS2)
    assert sched.degenerate
    assert sched.floors == {(0, 0): 2}


def test_d1_brute_force_budget():
    sched = schedule(1024, 0.5, GAUSS1)
    brute = sum(math.floor(v) for v in sched.budgets.values())
    assert brute == sched.total <= 1024


@pytest.mark.parametrize("mode", ["paper", "tight"])
def test_sparsity_slope(mode):
    sched = schedule(10**6, 1.0, GAUSS2, mode=mode)
    keys = np.array(list(sched.budgets), dtype=float)
    s = np.linalg.norm(keys, axis=1) ** sched.lam
    vals = np.log(list(sched.budgets.values()))
    slope = np.polyfit(s, vals, 1)[0]
    assert slope == pytest.approx(-sched.decay, abs=1e-9)


def test_tight_uses_at_least_paper_budget():
    paper, tight = schedule(5000, 1.0, GAUSS2), schedule(5000, 1.0, GAUSS2, mode="tight")
    assert paper.total <= tight.total <= 5000


def test_schedule_preconditions():
    for kwargs in ({"n": 1, "alpha": 1.0}, {"n": 10, "alpha": 0.0}, {"n": 10, "alpha": 1.0, "mode": "loose"}):
        with pytest.raises(PreconditionError):
            schedule(weight=GAUSS2, **kwargs)


def test_feasible_delta():
    choice = feasible_delta(GAUSS2, 2)
    assert 0 < choice.delta < GAUSS2.a
    assert choice.log_constant >= 0.0
    k = np.array(list(itertools.product(range(-5, 6), repeat=2)), dtype=float)
    s = np.linalg.norm(k, axis=1)
    bound = np.maximum(-GAUSS2.a * np.linalg.norm(k - np.sign(k) / 2, axis=1) ** 2 / 2,
                       GAUSS2.a * np.linalg.norm(k + np.sign(k) / 2, axis=1) ** 2 / 2 - GAUSS2.a * s**2 / 1.25)
    assert np.all(bound <= choice.log_constant - choice.delta * s**2 + 1e-12)
    with pytest.raises(PreconditionError):
        feasible_delta(GAUSS2, 2, p=1.0)


@pytest.mark.parametrize("n", [2000, 5000, 50000])
def test_constant_mass(n):
    rule = assemble(schedule(n, 1.0, GAUSS2), fibonacci_family(1), GAUSS2)
    assert rule.size <= n
    assert abs(rule.integrate(_ones) - 1.0) < 1e-3


def test_mass_converges():
    errs = [abs(assemble(schedule(n, 1.0, GAUSS2), fibonacci_family(1), GAUSS2).integrate(_ones) - 1) for n in (500, 50000)]
    assert errs[1] < errs[0]


def test_odd_integrand_vanishes():
    rule = assemble(schedule(5000, 1.0, GAUSS2), fibonacci_family(1), GAUSS2)
    assert abs(rule.integrate(lambda x: x[:, 0])) <= 1e-13


def test_single_cube_origin():
    rule = assemble(schedule(2, 1.0, GAUSS2), fibonacci_family(1), GAUSS2)
    assert rule.cubes == (((0, 0), 2),)


def test_smolyak_family_fallback():
    family = smolyak_family(2, 2)
    small = family(9)
    assert small.size == 9 and "midpoint" in small.provenance
    assert "smolyak" in family(400).provenance


def test_base_failure_names_cube():
    def broken(budget):
        raise PreconditionError("no rule")

    with pytest.raises(PreconditionError, match=r"cube \(0, 0\)"):
        assemble(schedule(2, 1.0, GAUSS2), broken, GAUSS2)


def test_base_oversize_rejected():
    with pytest.raises(PreconditionError):
        assemble(schedule(2, 1.0, GAUSS2), lambda b: midpoint_rule(3, 2), GAUSS2)


def test_smooth_step_and_ramp():
    t = np.linspace(-0.5, 1.5, 81)
    s = smooth_step(t)
    assert np.all(s[t <= 0] == 0.0) and np.all(s[t >= 1] == 1.0)
    assert np.all(np.diff(s) >= 0)
    assert smooth_step(0.5) == pytest.approx(0.5, abs=1e-15)
    theta = 1.4
    assert ramp(0.0, theta) == 1.0 and ramp(0.7, theta) == 0.0


@pytest.mark.parametrize("theta", [1.2, 1.5, 1.9])
def test_partition_of_unity(theta):
    rng = np.random.default_rng(7)
    x = rng.uniform(-3, 3, size=(400, 2))
    total = sum(partition(k, x, theta) for k in itertools.product(range(-4, 5), repeat=2))
    np.testing.assert_allclose(total, 1.0, atol=1e-14)
    outside = np.abs(x - np.array([1, -1])).max(axis=1) >= theta / 2
    assert np.all(partition((1, -1), x[outside], theta) == 0.0)


def test_partitioned_rule():
    theta = 1.5
    sched = schedule(20000, 1.0, GAUSS2)
    rule = assemble_partitioned(sched, fibonacci_family(1), GAUSS2, theta)
    assert rule.radius == pytest.approx(theta * math.sqrt(2) / 2 + sched.xi_n)
    assert np.linalg.norm(rule.nodes, axis=1).max() <= rule.radius
    assert abs(rule.integrate(_ones) - 1.0) < 1e-3
    with pytest.raises(PreconditionError):
        assemble_partitioned(sched, fibonacci_family(1), GAUSS2, 2.0)


def test_freud_weight_lambda4():
    w = FreudWeight(4.0, 1.0, 0.0, 2)
    assert math.isfinite(feasible_delta(w, 2).log_constant)
    sched = schedule(3000, 1.0, w)
    rule = assemble(sched, fibonacci_family(1), w)
    assert rule.size <= 3000
