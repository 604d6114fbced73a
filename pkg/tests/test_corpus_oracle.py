from __future__ import annotations

import math

import numpy as np
import pytest

from hypercross.corpus_oracle import (
    FAMILIES,
    algebraic_tail_integral,
    corpus,
    corpus_member,
    default_radius,
    oracle_integral,
    pcore_exponent,
    tail_exponent,
)
from hypercross.errors import PreconditionError
from hypercross.weights import FreudWeight, MarkovSoninWeight, gaussian_density

GAUSS = gaussian_density(1)
HERMITE = FreudWeight(2.0, 1.0)


def test_oracle_constant():
    res = oracle_integral(lambda x: np.ones(len(x)), GAUSS, 1)
    assert res.value == pytest.approx(1.0, abs=1e-13)
    assert res.error_bound < 1e-12


def test_oracle_second_moment():
    res = oracle_integral(lambda x: np.ravel(x) ** 2, HERMITE, 1, growth=(1.0, 2.0))
    assert res.value == pytest.approx(math.sqrt(math.pi) / 2, abs=1e-13)


def test_oracle_product_2d():
    res = oracle_integral(lambda x: x[:, 0] ** 2 * x[:, 1] ** 2, HERMITE, 2, growth=(1.0, 2.0))
    assert res.value == pytest.approx(math.pi / 4, abs=1e-12)


def test_oracle_lebesgue_singular():
    res = oracle_integral(lambda t: np.sqrt(np.abs(t)), None, 1, interval=(0.0, 1.0), singular=[0.0])
    assert res.value == pytest.approx(2 / 3, abs=1e-12)


def test_oracle_sonin_weight():
    w = MarkovSoninWeight(0.5, 1.0)
    res = oracle_integral(lambda x: np.ones(len(x)), w, 1)
    assert res.value == pytest.approx(w.mass_1d(), rel=1e-12)


def test_oracle_preconditions():
    with pytest.raises(PreconditionError):
        oracle_integral(lambda x: x, GAUSS, 1, tol=1e-15)
    with pytest.raises(PreconditionError):
        oracle_integral(lambda x: x, None, 1)


def test_algebraic_tail():
    # int_2^inf x^{-2} dx = 1/2
    res = algebraic_tail_integral(lambda x: x**-2.0, 2.0, (1.0, 1.0))
    assert res.value == pytest.approx(0.5, abs=1e-12)


@pytest.mark.parametrize("weight", [GAUSS, HERMITE, FreudWeight(4.0, 1.0)])
def test_default_radius_equation(weight):
    r = default_radius(weight)
    assert weight.a * r**weight.lam == pytest.approx(40 * math.log(10) + weight.lam * math.log(r), rel=1e-12)


@pytest.mark.parametrize("weight", [GAUSS, FreudWeight(4.0, 1.0), MarkovSoninWeight(0.5, 1.0)])
@pytest.mark.parametrize("d", [1, 2, 3])
@pytest.mark.parametrize("r", [1, 2, 3, 4])
def test_corpus_size_and_labels(weight, d, r):
    members = corpus(weight, d, r)
    assert len(members) >= 5
    assert len({m.id for m in members}) == len(members)
    for m in members:
        assert m.dim == d
        assert m.r in (None, r)
        assert corpus_member(m.id, weight).id == m.id


def test_corpus_families_cover_list():
    ids = {m.family for m in corpus(GAUSS, 1, 1)}
    assert ids == set(FAMILIES)


@pytest.mark.parametrize(
    "fid", ["bad", "quartic:d=1", "cos:r=1,d=1", "tail:d=1", "tail:r=5,d=1", "cos:d=4", "spike:r=1,d=2", "cos:d=x"]
)
def test_corpus_member_rejects(fid):
    with pytest.raises(PreconditionError):
        corpus_member(fid, GAUSS)


def test_tail_needs_freud():
    with pytest.raises(PreconditionError):
        corpus_member("tail:r=1,d=1", MarkovSoninWeight(0.5, 1.0))


@pytest.mark.parametrize("r", [1, 2, 3])
def test_dual_layout_agreement(r):
    for member in corpus(GAUSS, 1, r):
        a = member.reference_oracle("A")
        b = member.reference_oracle("B")
        assert abs(a.value - b.value) <= 1e-10, member.id
        ref = member.reference()
        assert abs(ref.value - b.value) <= 1e-10 + ref.error_bound, member.id


def test_periodic_sine_integral():
    member = corpus_member("sin:d=2", GAUSS)
    assert member.periodic
    assert member.reference().value == 0.0
    assert member.cube_reference().value == 0.0


def test_times_weight_matches_product():
    w = gaussian_density(2)
    x = np.random.default_rng(5).normal(size=(64, 2))
    for member in corpus(w, 2, 2):
        np.testing.assert_allclose(member.times_weight(x, w), member(x) * w.evaluate(x), rtol=1e-12, atol=1e-300)


def test_tail_member_integral():
    eps = tail_exponent(1, 2.0)
    member = corpus_member("tail:r=1,d=1", GAUSS)
    expected = (2 * math.pi) ** -0.5 * math.sqrt(math.pi) * math.gamma(eps / 2) / math.gamma((1 + eps) / 2)
    assert member.reference().value == pytest.approx(expected, rel=1e-14)


def _difference(f, order, h, x):
    return sum((-1) ** (order - j) * math.comb(order, j) * f(x + j * h) for j in range(order + 1)) / h**order


def _quotient_l1(f, order, h, lo=0.0, hi=1.0):
    x = np.linspace(lo, hi, 400001)
    return float(np.mean(np.abs(_difference(f, order, h, x)))) * (hi - lo)


@pytest.mark.parametrize("family", ["pcore1", "pcore2"])
@pytest.mark.parametrize("r", [1, 2])
def test_cusp_labels_are_exact(family, r):
    g = corpus_member(f"{family}:r={r},d=1", GAUSS).factors[0]
    hs = (1e-3, 1e-4)
    settle = [_quotient_l1(g.value, r, h) for h in hs]
    blow = [_quotient_l1(g.value, r + 1, h) for h in hs]
    # D^r f ~ |t|^{q-r} is integrable; D^{r+1} f ~ |t|^{q-r-1} is not, L1 mass grows like h^{q-r}
    assert abs(math.log10(settle[1] / settle[0])) < 0.1
    assert math.log10(blow[1] / blow[0]) == pytest.approx(r - g.q, abs=0.1)


@pytest.mark.parametrize("r", [1, 2, 3])
def test_bspline_label_is_exact(r):
    g = corpus_member(f"bspline:r={r},d=1", GAUSS).factors[0]
    h = 1e-3
    x = np.linspace(-2.0, 2.5, 450001)
    near = np.min(np.abs(x[:, None] - np.array(g.breakpoints)[None, :]), axis=1) <= (r + 2) * h
    top = np.abs(_difference(g.value, r, h, x))
    jump = np.abs(_difference(g.value, r + 1, h, x))
    # D^r f is a bounded step function; D^{r+1} f is a sum of point masses at the knots
    assert top[~near].max() > 0 and np.mean(top[near]) < 2 * np.mean(top)
    assert jump[~near].max() <= 1e-6 * jump.max()
    assert np.sum(jump) * (x[1] - x[0]) > 0.1


def test_pcore_exponents():
    assert pcore_exponent("pcore1", 2) == pytest.approx(1.1)
    assert pcore_exponent("pcore2", 2) == pytest.approx(1.6)
