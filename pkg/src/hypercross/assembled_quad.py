"""Assembled quadrature on ``R^d`` from shifted unit cubes.

The integral of ``f w`` is split over the cubes ``k + [-1/2, 1/2]^d``
(or the overlapping ``theta``-cubes with a smooth partition of unity).
Each cube with ``|k| < xi_n`` gets ``floor(n_k)`` nodes of a base cube
rule, where

    xi_n = (lam alpha log(n) / delta)^{1/lam},   n_k = rho n exp(-(a delta / alpha) |k|^lam),

so the node density falls off exponentially away from the origin.
"""

from __future__ import annotations

import functools
import itertools
import math
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field

import numpy as np

from .cube_rules import (
    CubeRule,
    fibonacci_index_within,
    fibonacci_rule,
    midpoint_rule,
    periodize,
    smolyak_bspline_cube_rule,
    smolyak_bspline_size,
)
from .errors import PreconditionError
from .quad1d import bump_derivative
from .rules import QuadratureRule, weighted_terms
from .weights import FreudWeight

MODES = ("paper", "tight")


def _double_factorial(d: int) -> int:
    return math.prod(range(d, 0, -2)) if d > 0 else 1


def _bounding_terms(k: np.ndarray, w: FreudWeight, p: float, tau: float, theta: float) -> np.ndarray:
    """``max{exp(-a|k - theta sgn k/2|^lam (1-1/p)), exp(a|k + theta sgn k/2|^lam/p - a|k|^lam/tau)}``."""
    s = np.sign(k)
    inner = np.linalg.norm(k - theta * s / 2.0, axis=1)
    outer = np.linalg.norm(k + theta * s / 2.0, axis=1)
    norm = np.linalg.norm(k, axis=1)
    first = -w.a * inner**w.lam * (1.0 - 1.0 / p)
    second = w.a * outer**w.lam / p - w.a * norm**w.lam / tau
    return np.maximum(first, second)


@dataclass(frozen=True)
class DeltaChoice:
    """Decay parameter ``delta`` with ``log C`` for the constant that makes the bound hold on the scanned box.

    ``C`` is stored as a logarithm: for ``lam > 2`` it exceeds the float range.
    """

    delta: float
    log_constant: float
    p: float
    tau: float
    box: int


def feasible_delta(
    weight: FreudWeight,
    d: int,
    p: float = 2.0,
    tau: float | None = None,
    theta: float = 1.0,
    box: int = 40,
) -> DeltaChoice:
    """Largest ``delta`` with ``bounding_terms(k) <= C exp(-delta |k|^lam)`` over ``|k_i| <= box``.

    Every ``delta`` below the asymptotic decay rate of the bounding terms is
    feasible with some finite ``C``; the rate is measured on the outer
    shell ``box/2 <= |k| <= box`` and ``C`` is then the smallest constant
    valid on the whole box, reported as ``log C``.
    """
    w = weight.univariate()
    if not p > 1.0:
        raise PreconditionError(f"p must exceed 1, got {p}")
    tau = 1.0 + (p - 1.0) / 4.0 if tau is None else tau
    if not 1.0 < tau < p:
        raise PreconditionError(f"need 1 < tau < p, got tau={tau}, p={p}")
    axis = np.arange(-box, box + 1, dtype=float)
    k = np.array(list(itertools.product(axis, repeat=d))) if d <= 3 else None
    if k is None:
        raise PreconditionError("feasible_delta scans the lattice box only for d <= 3")
    norm = np.linalg.norm(k, axis=1)
    logs = _bounding_terms(k, w, p, tau, theta)
    shell = (norm >= box / 2.0) & (norm <= box)
    delta = float(np.min(-logs[shell] / norm[shell] ** w.lam))
    if delta <= 0.0:
        raise PreconditionError(f"no positive delta for p={p}, tau={tau}")
    log_constant = float(np.max(logs + delta * norm**w.lam))
    return DeltaChoice(delta, log_constant, p, tau, box)


@dataclass(frozen=True)
class BudgetSchedule:
    """Per-cube budgets ``n_k`` for shifts ``|k| < xi_n`` (only funded cubes stored)."""

    n: int
    dim: int
    xi_n: float
    delta: float
    alpha: float
    lam: float
    a: float
    rho: float
    rho_paper: float
    mode: str
    budgets: Mapping[tuple[int, ...], float] = field(repr=False)
    degenerate: bool = False

    @property
    def decay(self) -> float:
        """``a delta / alpha``: the slope of ``log n_k`` against ``|k|^lam``."""
        return self.a * self.delta / self.alpha

    @property
    def floors(self) -> dict[tuple[int, ...], int]:
        return {k: math.floor(v) for k, v in self.budgets.items() if math.floor(v) >= 1}

    @property
    def total(self) -> int:
        return sum(self.floors.values())

    @property
    def radius(self) -> float:
        return math.sqrt(self.dim) / 2.0 + self.xi_n


def paper_rho(a: float, delta: float, alpha: float, lam: float, d: int, terms: int = 100000) -> float:
    """``rho^{-1} = 2 (2 pi)^{(d-1)/2} / d!! * sum_{s>=0} s^d exp(-(a delta/alpha) s^lam)``."""
    c = a * delta / alpha
    s = np.arange(terms, dtype=float)
    series = float(np.sum(s**d * np.exp(-c * s**lam)))
    return _double_factorial(d) / (2.0 * (2.0 * math.pi) ** ((d - 1) / 2.0) * series)


def _shifts(xi: float, d: int) -> np.ndarray:
    top = math.ceil(xi)
    axis = np.arange(-top, top + 1)
    grid = np.array(list(itertools.product(axis, repeat=d)), dtype=np.int64).reshape(-1, d)
    norm = np.linalg.norm(grid.astype(float), axis=1)
    keep = norm < xi
    grid, norm = grid[keep], norm[keep]
    order = np.lexsort(tuple(grid.T[::-1]) + (norm,))
    return grid[order]


def schedule(
    n: int,
    alpha: float,
    weight: FreudWeight,
    delta: float | None = None,
    mode: str = "paper",
    d: int | None = None,
    p: float = 2.0,
) -> BudgetSchedule:
    """Budget schedule ``(xi_n, n_k)`` for a total of ``n`` nodes.

    In ``"paper"`` mode ``rho`` is the closed-form normalizer, reduced if
    needed so that ``sum floor(n_k) <= n``; ``"tight"`` mode raises ``rho``
    to the largest value keeping that inequality.  When ``xi_n < 1`` or no
    cube would receive a node, only the origin cube is funded with ``n``.
    """
    if n < 2:
        raise PreconditionError(f"n must be at least 2, got {n}")
    if alpha <= 0:
        raise PreconditionError(f"alpha must be positive, got {alpha}")
    if mode not in MODES:
        raise PreconditionError(f"unknown schedule mode {mode!r}")
    d = weight.dim if d is None else d
    w = weight.univariate()
    if delta is None:
        delta = feasible_delta(w, d, p=p).delta
    if delta <= 0:
        raise PreconditionError(f"delta must be positive, got {delta}")
    lam, a = w.lam, w.a
    xi = (lam * alpha * math.log(n) / delta) ** (1.0 / lam)
    rho0 = paper_rho(a, delta, alpha, lam, d)
    origin = (0,) * d
    if xi < 1.0:
        return BudgetSchedule(n, d, xi, delta, alpha, lam, a, 1.0 / n, rho0, mode, {origin: float(n)}, True)
    shifts = _shifts(xi, d)
    profile = np.exp(-(a * delta / alpha) * np.linalg.norm(shifts.astype(float), axis=1) ** lam)

    def total(rho: float) -> int:
        return int(np.sum(np.floor(rho * n * profile)))

    rho = rho0
    if total(rho) > n:
        lo, hi = 0.0, rho
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if total(mid) <= n else (lo, mid)
        rho = lo
    if mode == "tight":
        lo, hi = rho, max(rho, 1.0 / n)
        while total(hi) <= n:
            lo, hi = hi, 2.0 * hi
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if total(mid) <= n else (lo, mid)
        rho = lo
    budgets = {tuple(int(v) for v in k): float(rho * n * pr) for k, pr in zip(shifts, profile)}
    sched = BudgetSchedule(n, d, xi, delta, alpha, lam, a, rho, rho0, mode, budgets)
    if not sched.floors:
        return BudgetSchedule(n, d, xi, delta, alpha, lam, a, rho, rho0, mode, {origin: float(n)}, True)
    if sched.total > n:  # pragma: no cover - guarded by the bisection above
        raise AssertionError("schedule exceeds its budget")
    return sched


@dataclass(frozen=True)
class AssembledRule:
    """Flattened nodes and weights of the assembled rule.

    ``scaled_weights`` are ``weights / w(nodes)``, used with integrands
    providing ``times_weight``.
    """

    nodes: np.ndarray
    weights: np.ndarray
    scaled_weights: np.ndarray
    weight: FreudWeight = field(repr=False)
    cubes: tuple[tuple[tuple[int, ...], int], ...]
    radius: float
    schedule: BudgetSchedule = field(repr=False)
    theta: float | None = None

    @property
    def size(self) -> int:
        return int(self.nodes.shape[0])

    def as_rule(self) -> QuadratureRule:
        return QuadratureRule(self.nodes, self.weights, self.weight, self.scaled_weights, "assembled")

    def integrate(self, f) -> float:
        return integrate_assembled(self, f)


BaseFamily = Callable[[int], CubeRule]


def fibonacci_family(r: int, psi_order: int | None = None) -> BaseFamily:
    """Periodized Fibonacci rules: the largest ``b_m <= budget``, mapped through ``psi_{r+1}``."""
    k = r + 1 if psi_order is None else psi_order

    @functools.cache
    def family(budget: int) -> CubeRule:
        return periodize(fibonacci_rule(fibonacci_index_within(budget), r), k)

    return family


def smolyak_family(r: int, d: int, psi_order: int | None = None) -> BaseFamily:
    """Periodized Smolyak B-spline rules within the budget.

    Budgets below the smallest Smolyak rule (``ell^d`` nodes) fall back to
    the periodized tensor midpoint rule with ``floor(budget^(1/d))^d`` nodes;
    those cubes sit in the far tail where the budget is tiny anyway.
    """
    k = r + 1 if psi_order is None else psi_order
    smallest = smolyak_bspline_size(0, min(r, 3), d)

    @functools.cache
    def family(budget: int) -> CubeRule:
        if budget < smallest:
            q = math.floor(budget ** (1.0 / d) + 1e-12)
            return periodize(midpoint_rule(max(q, 1), d), k)
        return periodize(smolyak_bspline_cube_rule(budget, min(r, 3), d), k)

    return family


def _base_rule(base: BaseFamily, k, budget: int) -> CubeRule:
    try:
        rule = base(budget)
    except PreconditionError as exc:
        raise PreconditionError(f"base family has no rule for cube {k} with budget {budget}: {exc}") from None
    if rule.size > budget:
        raise PreconditionError(f"base rule for cube {k} has {rule.size} > {budget} nodes")
    return rule


def assemble(sched: BudgetSchedule, base: BaseFamily, weight: FreudWeight) -> AssembledRule:
    """Shift the base rule for each funded cube and multiply weights by ``w``."""
    w = weight.with_dim(sched.dim)
    blocks, scaled, cubes = [], [], []
    for k, budget in sched.floors.items():
        rule = _base_rule(base, k, budget)
        blocks.append(rule.nodes + np.asarray(k, dtype=float))
        scaled.append(rule.weights)
        cubes.append((k, rule.size))
    nodes = np.concatenate(blocks)
    scaled_w = np.concatenate(scaled)
    weights = scaled_w * np.exp(w.log_evaluate(nodes))
    return AssembledRule(nodes, weights, scaled_w, w.univariate(), tuple(cubes), sched.radius, sched)


@functools.lru_cache(maxsize=1)
def _step_rule(order: int = 64):
    t, wt = np.polynomial.legendre.leggauss(order)
    u = 0.5 * (t + 1.0)
    weights = 0.5 * wt
    total = float(np.sum(weights * bump_derivative(0, u)))
    return u, weights, total


def smooth_step(t) -> np.ndarray:
    """``s(t) = int_0^t phi / int_0^1 phi``: 0 for ``t <= 0``, 1 for ``t >= 1``, smooth."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    u, wt, total = _step_rule()
    low = t <= 0.5
    v = np.where(low, t, 1.0 - t)
    part = np.sum(wt[None, :] * bump_derivative(0, v.reshape(-1, 1) * u[None, :]), axis=1).reshape(v.shape) * v
    part = part / total
    return np.where(low, part, 1.0 - part)


def ramp(x, theta: float) -> np.ndarray:
    """``1`` on ``|x| <= 1 - theta/2``, ``0`` on ``|x| >= theta/2``, smooth in between."""
    return smooth_step((theta / 2.0 - np.abs(np.asarray(x, dtype=float))) / (theta - 1.0))


def partition(k, x, theta: float) -> np.ndarray:
    """``phi_k(x) = prod_i ramp(x_i - k_i) / sum_j ramp(x_i - j)``."""
    if not 1.0 < theta < 2.0:
        raise PreconditionError(f"theta must lie in (1, 2), got {theta}")
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    k = np.asarray(k, dtype=float)
    out = np.ones(pts.shape[0])
    for i in range(pts.shape[1]):
        xi = pts[:, i]
        base = np.floor(xi)
        # at most two shifts overlap each coordinate
        denom = ramp(xi - base, theta) + ramp(xi - base - 1.0, theta) + ramp(xi - base + 1.0, theta)
        out *= ramp(xi - k[i], theta) / denom
    return out


def assemble_partitioned(
    sched: BudgetSchedule, base: BaseFamily, weight: FreudWeight, theta: float
) -> AssembledRule:
    """Rules on the dilated cubes ``k + theta [-1/2, 1/2]^d`` weighted by ``w phi_k``.

    The dilation contributes the Jacobian ``theta^d`` to every weight.
    """
    if not 1.0 < theta < 2.0:
        raise PreconditionError(f"theta must lie in (1, 2), got {theta}")
    w = weight.with_dim(sched.dim)
    blocks, scaled, cubes = [], [], []
    jac = theta**sched.dim
    for k, budget in sched.floors.items():
        rule = _base_rule(base, k, budget)
        pts = theta * rule.nodes + np.asarray(k, dtype=float)
        blocks.append(pts)
        scaled.append(jac * rule.weights * partition(k, pts, theta))
        cubes.append((k, rule.size))
    nodes = np.concatenate(blocks)
    scaled_w = np.concatenate(scaled)
    weights = scaled_w * np.exp(w.log_evaluate(nodes))
    radius = theta * math.sqrt(sched.dim) / 2.0 + sched.xi_n
    return AssembledRule(nodes, weights, scaled_w, w.univariate(), tuple(cubes), radius, sched, theta)


def integrate_assembled(rule: AssembledRule, f) -> float:
    """``sum lambda_{k,j} f(x_{k,j})`` in cube order."""
    w = rule.weight.with_dim(rule.nodes.shape[1])
    return float(np.sum(weighted_terms(f, rule.nodes, rule.weights, rule.scaled_weights, w)))
