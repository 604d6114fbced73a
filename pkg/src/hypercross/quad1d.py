"""Full and truncated Gauss quadrature on the real line.

The truncated rule keeps the zeros ``x_{m,k}`` with ``|k| <= j(m)``,
where ``j(m)`` is the smallest index with ``x_{m,j} >= theta * T`` and the
threshold ``T`` is either the MRS number (``mode="mrs"``) or the largest
zero (``mode="largest_zero"``).  Dropping the outer zeros, whose Cotes
numbers are expensive relative to the weight, improves the worst-case
rate on ``W^r_1`` from ``n^{-1/6}`` (for ``r = 1``) to ``n^{-(1-1/lam) r}``.

This module also builds the one-dimensional fooling bump: a smooth
function vanishing at every given node whose weighted integral certifies
a lower bound for any quadrature on those nodes.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial

from .errors import EmptyTruncationError, PreconditionError
from .orthopoly import GaussRule1D, count_zeros_below, gauss_rule_for, largest_zero
from .rules import integrate_1d
from .weights import FreudWeight, MarkovSoninWeight, Weight, mrs_number

MODES = ("mrs", "largest_zero")


def _threshold(w: Weight, m: int, theta: float, mode: str, top: float | None = None) -> float:
    if mode == "mrs":
        return theta * mrs_number(w, m)
    if mode == "largest_zero":
        return theta * (largest_zero(w, m) if top is None else top)
    raise PreconditionError(f"unknown threshold mode {mode!r}; expected one of {MODES}")


def _keeps_zero(w: Weight, m: int, sonin_case: str) -> bool:
    if m % 2 == 0:
        return False
    if isinstance(w, MarkovSoninWeight):
        return sonin_case == "ii"
    return True


def sonin_case_for(beta: float, r: int) -> str:
    """``"i"`` when ``beta > r - 1``, else ``"ii"`` (non-integer ``beta`` required)."""
    if beta > r - 1:
        return "i"
    if float(beta).is_integer():
        raise PreconditionError(f"beta={beta} < r-1={r - 1} must be non-integer")
    return "ii"


@dataclass(frozen=True)
class TruncatedRule:
    """Gauss rule of degree ``m`` restricted to the indices ``|k| <= j_m``."""

    base: GaussRule1D = field(repr=False)
    theta: float
    j_m: int
    threshold_mode: str
    keep_zero: bool
    kept: np.ndarray = field(repr=False)

    @property
    def m(self) -> int:
        return self.base.m

    @property
    def kept_nodes(self) -> np.ndarray:
        return self.base.nodes[self.kept]

    @property
    def kept_weights(self) -> np.ndarray:
        return self.base.weights[self.kept]

    @property
    def kept_indices(self) -> np.ndarray:
        return self.base.indices[self.kept]

    @property
    def scaled_weights(self) -> np.ndarray:
        return self.base.scaled_weights[self.kept]

    @property
    def size(self) -> int:
        return int(self.kept.size)

    @property
    def weight(self) -> Weight:
        return self.base.weight

    def integrate(self, f) -> float:
        return integrate_1d(self.kept_nodes, self.kept_weights, self.scaled_weights, self.weight, f)


def truncation_index(w: Weight, m: int, theta: float, mode: str = "largest_zero") -> int:
    """``j(m)``: one plus the number of positive zeros below ``theta * T``."""
    if not 0.0 < theta < 1.0:
        raise PreconditionError(f"theta must lie in (0, 1), got {theta}")
    half = m // 2
    if half == 0:
        return 0
    t = _threshold(w, m, theta, mode)
    below = count_zeros_below(w, m, t) - half - (m % 2)
    if below >= half:
        raise EmptyTruncationError(
            f"threshold {t:.6g} lies beyond the largest zero of degree {m} (mode={mode})"
        )
    return below + 1


def tg_size(w: Weight, m: int, theta: float = 0.5, mode: str = "largest_zero", sonin_case: str = "i") -> int:
    """Node count of the truncated rule of degree ``m`` without building it."""
    j = truncation_index(w, m, theta, mode)
    return 2 * j + int(_keeps_zero(w, m, sonin_case))


def truncate(rule: GaussRule1D, theta: float = 0.5, mode: str = "largest_zero", sonin_case: str = "i") -> TruncatedRule:
    """Truncate a Gauss rule to ``|k| <= j(m)``.

    Parameters
    ----------
    rule : GaussRule1D
        The full rule.
    theta : float
        Truncation fraction in ``(0, 1)``.
    mode : {"largest_zero", "mrs"}
        Which scale ``theta`` multiplies.
    sonin_case : {"i", "ii"}
        For Markov-Sonin weights, whether the zero node (odd ``m``) is
        dropped (``"i"``) or kept (``"ii"``).  Freud rules always keep it.
    """
    if not 0.0 < theta < 1.0:
        raise PreconditionError(f"theta must lie in (0, 1), got {theta}")
    m = rule.m
    w = rule.weight
    keep_zero = _keeps_zero(w, m, sonin_case)
    idx = rule.indices
    if m // 2 == 0:
        j = 0
    else:
        t = _threshold(w, m, theta, mode, top=float(rule.nodes[-1]))
        positive = rule.nodes[idx > 0]
        j = int(np.searchsorted(positive, t, side="left")) + 1
        if j > positive.size:
            raise EmptyTruncationError(
                f"threshold {t:.6g} lies beyond the largest zero {positive[-1]:.6g} (mode={mode})"
            )
    mask = (np.abs(idx) <= j) & ((idx != 0) | keep_zero)
    kept = np.flatnonzero(mask)
    if kept.size == 0:
        raise EmptyTruncationError(f"truncation of degree {m} keeps no nodes")
    return TruncatedRule(rule, float(theta), j, mode, keep_zero, kept)


def tg_rule(w: Weight, m: int, theta: float = 0.5, mode: str = "largest_zero", sonin_case: str = "i") -> TruncatedRule:
    """Truncated Gauss rule of degree ``m`` for the univariate factor of ``w``."""
    return truncate(gauss_rule_for(w, m), theta, mode, sonin_case)


def largest_degree_within(
    w: Weight, n: int, theta: float = 0.5, mode: str = "largest_zero", sonin_case: str = "i", lookahead: int = 16
) -> int:
    """Largest degree ``m`` whose truncated rule has at most ``n`` nodes.

    Binary search on the node count, then a scan of ``lookahead`` further
    degrees in case the count is not monotone there.
    """
    if n < 1:
        raise PreconditionError(f"budget must be at least 1, got {n}")

    def size(m: int) -> int:
        return tg_size(w, m, theta, mode, sonin_case)

    lo = 1
    if size(lo) > n:
        # Only Markov-Sonin case (i) can fail here; its smallest rule has two nodes.
        lo = 2
        if size(lo) > n:
            raise PreconditionError(f"no truncated rule fits a budget of {n} nodes")
    hi = 2
    while size(hi) <= n:
        lo, hi = hi, 2 * hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if size(mid) <= n:
            lo = mid
        else:
            hi = mid
    best = lo
    for m in range(lo + 1, lo + 1 + lookahead):
        if size(m) <= n:
            best = m
    return best


def tg_rule_for_budget(
    w: Weight, n: int, theta: float = 0.5, mode: str = "largest_zero", sonin_case: str = "i"
) -> TruncatedRule:
    """Truncated rule of the largest degree using at most ``n`` nodes."""
    return tg_rule(w, largest_degree_within(w, n, theta, mode, sonin_case), theta, mode, sonin_case)


def integrate_tg(rule: TruncatedRule, f) -> float:
    """Apply a truncated rule to ``f``."""
    return rule.integrate(f)


# --- fooling bump --------------------------------------------------------

_BUMP_PEAK_LOG = 4.0


def _bump_numerators(order: int) -> list[Polynomial]:
    """``N_i`` with ``phi^(i)(u) = N_i(u) q^{-2i} phi(u)``, ``q = u (1 - u)``."""
    q = Polynomial([0.0, 1.0, -1.0])
    dq = q.deriv()
    nums = [Polynomial([1.0])]
    for i in range(order):
        n_i = nums[-1]
        nums.append(n_i.deriv() * q * q - 2 * i * n_i * q * dq + n_i * dq)
    return nums


def bump_derivative(i: int, u) -> np.ndarray:
    """``phi^(i)(u)`` for ``phi(u) = exp(4 - 1/(u (1 - u)))`` on ``(0, 1)``, zero elsewhere."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = (u > 0.0) & (u < 1.0)
    if inside.any():
        ui = u[inside]
        q = ui * (1.0 - ui)
        num = _bump_numerators(i)[i](ui)
        with np.errstate(divide="ignore"):
            logmag = _BUMP_PEAK_LOG - 1.0 / q - 2 * i * np.log(q)
        out[inside] = num * np.exp(logmag)
    return out


def _abs_integral_01(g, breaks=(), panels: int = 64, order: int = 24) -> float:
    """``int_0^1 |g(u)| du`` by composite Gauss-Legendre split at ``breaks``."""
    t, wt = np.polynomial.legendre.leggauss(order)
    edges = np.unique(np.concatenate([np.linspace(0.0, 1.0, panels + 1), np.asarray(breaks, float)]))
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    u = (lo[:, None] + half[:, None] * (t[None, :] + 1.0)).ravel()
    vals = np.abs(g(u)).reshape(lo.size, order)
    return float(np.sum(vals * wt[None, :] * half[:, None]))


@functools.lru_cache(maxsize=16)
def bump_constants(r: int) -> tuple[float, ...]:
    """``b_0 = int phi`` and ``b_s = int |phi^(s)|`` for ``s = 1..r``."""
    out = []
    nums = _bump_numerators(r)
    for s in range(r + 1):
        roots = [z.real for z in nums[s].roots() if abs(z.imag) < 1e-12 and 0.0 < z.real < 1.0]
        out.append(_abs_integral_01(lambda u, s=s: bump_derivative(s, u), roots, panels=128, order=32))
    return tuple(out)


def _log_weight_derivative_polys(w: FreudWeight, order: int) -> list[dict[float, float]]:
    """``P_j`` with ``(1/w)^(j) = P_j / w`` on ``x > 0``, as exponent -> coefficient maps."""
    polys = [{0.0: 1.0}]
    for _ in range(order):
        prev = polys[-1]
        nxt: dict[float, float] = {}
        for e, c in prev.items():
            if e != 0.0:
                nxt[e - 1.0] = nxt.get(e - 1.0, 0.0) + c * e
            ee = e + w.lam - 1.0
            nxt[ee] = nxt.get(ee, 0.0) + c * w.a * w.lam
        polys.append(nxt)
    return polys


def _eval_powers(poly: dict[float, float], x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x)
    for e, c in poly.items():
        out += c * x**e
    return out


def bump_norm_terms(lo: float, delta: float, r: int, w: FreudWeight, panels: int = 128) -> list[float]:
    """``int |h^(s)| w dx`` for ``s = 0..r`` and ``h = phi((x - lo) / delta) / w``.

    Requires ``lo >= 0`` so the interval avoids the cusp of ``|x|^lam``.
    """
    if lo < 0.0:
        raise PreconditionError(f"bump interval must start at lo >= 0, got {lo}")
    polys = _log_weight_derivative_polys(w, r)

    def h_deriv_times_w(s: int, u: np.ndarray) -> np.ndarray:
        x = lo + delta * u
        total = np.zeros_like(u)
        for k in range(s + 1):
            total += math.comb(s, k) * delta ** (-k) * bump_derivative(k, u) * _eval_powers(polys[s - k], x)
        return total

    return [delta * _abs_integral_01(lambda u, s=s: h_deriv_times_w(s, u), panels=panels, order=24) for s in range(r + 1)]


@dataclass(frozen=True)
class FoolingBump1D:
    """Normalized bump ``h_bar = g / (w N)`` supported in ``(lo, hi)``.

    ``integral`` is ``int g dx = delta b_0``; ``norm`` is the computed
    ``sum_{s<=r} int |h^(s)| w``; ``certified = integral / norm`` is the
    weighted integral of ``h_bar``, which every quadrature on the given
    nodes misses entirely.
    """

    lo: float
    hi: float
    index: int
    delta: float
    n: int
    r: int
    weight: FreudWeight = field(repr=False)
    integral: float
    norm: float
    norm_error: float

    @property
    def certified(self) -> float:
        return self.integral / (self.norm + self.norm_error)

    def bump(self, x) -> np.ndarray:
        """``g(x) / N``: the weighted form ``h_bar * w``."""
        return bump_derivative(0, (np.asarray(x, dtype=float) - self.lo) / self.delta) / self.norm

    def times_weight(self, x, weight=None) -> np.ndarray:
        if weight is not None and weight.univariate() != self.weight:
            return self(x) * weight.univariate().evaluate(x)
        return self.bump(x)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        g = self.bump(x)
        out = np.zeros_like(x)
        nz = g != 0.0
        with np.errstate(over="ignore"):
            out[nz] = g[nz] * np.exp(-self.weight.log_factor(x[nz]))
        return out


def fooling_bump_1d(nodes, n: int, r: int, weight: FreudWeight) -> FoolingBump1D:
    """Construct the fooling bump for a node set of size at most ``n``.

    Parameters
    ----------
    nodes : array_like
        The quadrature nodes (any finite set of at most ``n`` reals).
    n : int
        Node budget.
    r : int
        Smoothness order of the Sobolev ball.
    weight : FreudWeight
        Univariate Freud weight defining the measure.
    """
    nodes = np.asarray(nodes, dtype=float).reshape(-1)
    if nodes.size > n:
        raise PreconditionError(f"{nodes.size} nodes exceed the budget n={n}")
    if r < 1 or n < 1:
        raise PreconditionError(f"need n >= 1 and r >= 1, got n={n}, r={r}")
    w = weight.univariate()
    delta = float(n) ** (1.0 / w.lam - 1.0)
    for i in range(n + 1, 2 * n + 3):
        lo, hi = delta * (i - 1), delta * i
        if not np.any((nodes > lo) & (nodes < hi)):
            break
    else:  # pragma: no cover - excluded by pigeonhole
        raise AssertionError("no node-free interval found")

    b0 = bump_constants(r)[0]
    coarse = bump_norm_terms(lo, delta, r, w, panels=64)
    fine = bump_norm_terms(lo, delta, r, w, panels=128)
    return FoolingBump1D(
        lo=lo,
        hi=hi,
        index=i,
        delta=delta,
        n=n,
        r=r,
        weight=w,
        integral=delta * b0,
        norm=sum(fine),
        norm_error=abs(sum(fine) - sum(coarse)),
    )
