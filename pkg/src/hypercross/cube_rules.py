"""Base quadratures on the cube ``[-1/2, 1/2]^d``.

* Fibonacci lattice rule (``d = 2``), equal weights, exact integer arithmetic
  for the fractional parts.
* Smolyak B-spline rule: the exact integral of the sparse-grid recovery
  operator, so its nodes are the recovery grid.
* The periodization ``psi_k`` that turns a rule for periodic integrands
  into one for general integrands on the cube.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .bspline_recover import cube_functional, levels_upto, scheme_for_smoothness
from .errors import PreconditionError
from .rules import weighted_terms

CONTRACTS = ("periodic", "zero_boundary", "general")


@dataclass(frozen=True)
class CubeRule:
    """Nodes in ``[-1/2, 1/2]^d`` with weights and the integrand class they target."""

    nodes: np.ndarray
    weights: np.ndarray
    contract: str
    rate: tuple[float, float] = (0.0, 0.0)
    provenance: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.contract not in CONTRACTS:
            raise PreconditionError(f"unknown contract {self.contract!r}")
        if self.nodes.size and np.any(np.abs(self.nodes) > 0.5):
            raise PreconditionError("cube rule nodes must lie in [-1/2, 1/2]^d")

    @property
    def dim(self) -> int:
        return int(self.nodes.shape[1])

    @property
    def size(self) -> int:
        return int(self.nodes.shape[0])

    def integrate(self, f) -> float:
        return float(np.sum(weighted_terms(f, self.nodes, self.weights, None, None)))


@functools.cache
def fibonacci(m: int) -> int:
    """``b_0 = b_1 = 1``, ``b_m = b_{m-1} + b_{m-2}``."""
    if m < 0:
        raise PreconditionError(f"Fibonacci index must be nonnegative, got {m}")
    a, b = 1, 1
    for _ in range(m):
        a, b = b, a + b
    return a


def fibonacci_rule(m: int, r: int = 1) -> CubeRule:
    """Fibonacci lattice rule with ``b_m`` nodes ``({i/b_m}, {i b_{m-1}/b_m}) - 1/2``."""
    if m < 1:
        raise PreconditionError(f"m must be at least 1, got {m}")
    bm, bm1 = fibonacci(m), fibonacci(m - 1)
    i = np.arange(1, bm + 1, dtype=np.int64)
    x = (i % bm) / bm - 0.5
    y = ((i * bm1) % bm) / bm - 0.5
    nodes = np.column_stack([x, y])
    return CubeRule(nodes, np.full(bm, 1.0 / bm), "periodic", (float(r), 0.5), f"fibonacci(m={m})", {"m": m})


def fibonacci_index_within(n: int) -> int:
    """Largest ``m >= 1`` with ``b_m <= n``."""
    if n < 1:
        raise PreconditionError(f"budget must be at least 1, got {n}")
    m = 1
    while fibonacci(m + 1) <= n:
        m += 1
    return m


@dataclass(frozen=True)
class PeriodizationMap:
    """``psi_k(t) = C_k int_0^t s^k (1-s)^k ds`` on ``[0, 1]``."""

    k: int

    def __post_init__(self):
        if self.k < 0:
            raise PreconditionError(f"smoothing order must be nonnegative, got {self.k}")

    @property
    def constant(self) -> float:
        k = self.k
        return math.factorial(2 * k + 1) / math.factorial(k) ** 2

    @functools.cached_property
    def _antiderivative(self) -> np.polynomial.Polynomial:
        core = np.polynomial.Polynomial([0.0, 1.0]) ** self.k * np.polynomial.Polynomial([1.0, -1.0]) ** self.k
        return core.integ() * self.constant

    def __call__(self, t) -> np.ndarray:
        t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
        low = t <= 0.5
        # evaluate near 0 on both halves: psi(t) = 1 - psi(1 - t)
        u = np.where(low, t, 1.0 - t)
        v = self._antiderivative(u)
        return np.where(low, v, 1.0 - v)

    def derivative(self, t, order: int = 1) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        inside = (t >= 0.0) & (t <= 1.0)
        poly = self._antiderivative.deriv(order)
        return np.where(inside, poly(np.clip(t, 0.0, 1.0)), 0.0)


def periodize(rule: CubeRule, psi: PeriodizationMap | int) -> CubeRule:
    """Map nodes through ``psi`` componentwise and multiply weights by ``prod psi'``."""
    if isinstance(psi, int):
        psi = PeriodizationMap(psi)
    t = rule.nodes + 0.5
    nodes = psi(t) - 0.5
    jac = np.prod(psi.derivative(t), axis=1)
    return CubeRule(
        nodes,
        rule.weights * jac,
        "general",
        rule.rate,
        f"periodize(k={psi.k}, {rule.provenance})",
        dict(rule.meta, psi_order=psi.k),
    )


def midpoint_rule(q: int, d: int) -> CubeRule:
    """Tensor midpoint rule with ``q`` points per axis, ``q^d`` equal weights."""
    if q < 1 or d < 1:
        raise PreconditionError(f"midpoint rule needs q >= 1 and d >= 1, got q={q}, d={d}")
    axis = (np.arange(q) + 0.5) / q - 0.5
    nodes = np.stack([g.ravel() for g in np.meshgrid(*[axis] * d, indexing="ij")], axis=-1)
    return CubeRule(nodes, np.full(q**d, 1.0 / q**d), "periodic", (2.0, 0.0), f"midpoint(q={q},d={d})", {"q": q})


def _smolyak_cube_weights(scheme, level: int, d: int) -> tuple[np.ndarray, np.ndarray]:
    top = 2 * scheme.ell * 2**level
    acc: dict[tuple[int, ...], float] = {}
    for k in levels_upto(level, d):
        parts = []
        for kv in k:
            nums, w, denom = cube_functional(scheme, kv)
            parts.append((nums * (top // denom), w))
        grids = np.meshgrid(*[p[0] for p in parts], indexing="ij")
        keys = np.stack([g.ravel() for g in grids], axis=-1)
        wts = parts[0][1]
        for p in parts[1:]:
            wts = np.multiply.outer(wts, p[1])
        for key, val in zip(map(tuple, keys.tolist()), np.ravel(wts)):
            acc[key] = acc.get(key, 0.0) + val
    keys = sorted(acc)
    nums = np.array(keys, dtype=np.int64).reshape(-1, d)
    weights = np.array([acc[k] for k in keys])
    return nums / top, weights


def smolyak_bspline_size(level: int, r: int, d: int) -> int:
    scheme = scheme_for_smoothness(r)
    return _smolyak_cube_weights(scheme, level, d)[0].shape[0]


def smolyak_bspline_cube_rule(m: int, r: int, d: int) -> CubeRule:
    """Integral of the sparse-grid recovery operator at the largest level with at most ``m`` nodes.

    ``r <= 1`` uses the linear scheme and ``r in {2, 3}`` the cubic one.
    Weights whose accumulated value cancels to zero are kept so the node
    set stays equal to the recovery grid.
    """
    if m < 1:
        raise PreconditionError(f"budget must be at least 1, got {m}")
    scheme = scheme_for_smoothness(r)
    best = None
    level = 0
    while True:
        pts, w = _smolyak_cube_weights(scheme, level, d)
        if pts.shape[0] > m:
            break
        best = (level, pts, w)
        level += 1
    if best is None:
        raise PreconditionError(f"budget {m} is below the smallest Smolyak B-spline rule")
    level, pts, w = best
    beta = (d - 1) * (r + 0.5)
    return CubeRule(
        pts - 0.5,
        w,
        "periodic",
        (float(r), beta),
        f"smolyak-bspline(level={level},scheme={scheme.name},d={d})",
        {"level": level, "scheme": scheme.name},
    )
