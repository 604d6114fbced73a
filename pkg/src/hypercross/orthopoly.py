"""Orthonormal-polynomial recurrences and Gauss rules for symmetric weights.

The monic recurrence is

    p_{k+1}(x) = (x - alpha_k) p_k(x) - beta_k p_{k-1}(x),

with ``beta_0`` the total mass of the weight.  The Gauss rule of degree
``m`` has as nodes the eigenvalues of the Jacobi matrix
``J = tridiag(sqrt(beta_1..beta_{m-1}); alpha_0..alpha_{m-1})``.

Nodes come from LAPACK by default; :func:`ql_eigen` is an implicit-shift
QL sweep (Golub-Welsch) kept as an independent route.  Cotes numbers are
computed from the Christoffel function ``1 / sum_j p_j(x)^2`` of the
orthonormal polynomials, accumulated with running rescaling so that
their logarithms stay accurate long after the numbers underflow.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import ConvergenceError, PreconditionError
from .weights import FreudWeight, MarkovSoninWeight, Weight, lgamma, zero_scale


@dataclass(frozen=True)
class Recurrence:
    """Three-term recurrence coefficients ``alpha_k, beta_k`` for ``k < length``."""

    alpha: np.ndarray
    beta: np.ndarray
    weight_id: str = ""

    def __post_init__(self):
        if self.alpha.shape != self.beta.shape or self.alpha.ndim != 1:
            raise PreconditionError("alpha and beta must be 1-D arrays of equal length")
        if np.any(self.beta <= 0.0):
            raise PreconditionError("recurrence coefficients beta_k must be positive")

    @property
    def length(self) -> int:
        return int(self.alpha.size)

    @property
    def mass(self) -> float:
        return float(self.beta[0])


def recurrence_gaussian(a: float, m: int, b: float = 0.0) -> Recurrence:
    """Closed-form recurrence for ``exp(-a x^2 + b)``: ``beta_k = k / (2a)``."""
    if not a > 0.0 or m < 1:
        raise PreconditionError(f"need a > 0 and m >= 1, got a={a}, m={m}")
    beta = np.arange(m, dtype=float) / (2.0 * a)
    beta[0] = math.sqrt(math.pi / a) * math.exp(b)
    return Recurrence(np.zeros(m), beta, f"freud:lambda=2,a={a:g},b={b:.17g}")


def recurrence_sonin(beta: float, a: float, m: int, b: float = 0.0) -> Recurrence:
    """Generalized-Hermite recurrence for ``|x|^beta exp(-a x^2 + b)``.

    ``beta_k = (k + beta [k odd]) / (2a)`` for ``k >= 1``.
    """
    if not beta > 0.0 or not a > 0.0 or m < 1:
        raise PreconditionError(f"need beta > 0, a > 0, m >= 1, got {beta}, {a}, {m}")
    k = np.arange(m, dtype=float)
    coef = (k + beta * (k % 2)) / (2.0 * a)
    s = (beta + 1.0) / 2.0
    coef[0] = math.exp(b + lgamma(s) - s * math.log(a))
    return Recurrence(np.zeros(m), coef, f"sonin:beta={beta:g},a={a:g},b={b:.17g}")


def _stieltjes(x: np.ndarray, logw: np.ndarray, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Discretized Stieltjes procedure for the discrete measure ``sum exp(logw_i) delta_{x_i}``.

    Works on ``v_k = sqrt(w) p_k`` stored as ``mant * exp(scale)`` per node,
    so neither tiny weights nor the growth of ``p_k`` outside the zeros
    overflow or underflow before the products are formed.
    """
    alpha = np.zeros(m)
    beta = np.zeros(m)
    shift = float(np.max(logw))
    mass = float(np.sum(np.exp(logw - shift)))
    beta[0] = mass * math.exp(shift)
    scale = 0.5 * (logw - shift) - 0.5 * math.log(mass)
    factor = np.exp(2.0 * scale)
    cur = np.ones_like(x)
    prev = np.zeros_like(x)
    for k in range(m):
        dens = cur * cur * factor
        alpha[k] = float(np.dot(dens, x))
        if k == m - 1:
            break
        nxt = (x - alpha[k]) * cur - (math.sqrt(beta[k]) if k else 0.0) * prev
        nrm2 = float(np.dot(nxt * nxt, factor))
        beta[k + 1] = nrm2
        inv = 1.0 / math.sqrt(nrm2)
        prev, cur = cur, nxt * inv
        big = np.abs(cur) > 1e100
        if big.any():
            prev[big] *= 1e-100
            cur[big] *= 1e-100
            scale[big] += 100.0 * math.log(10.0)
            factor[big] = np.exp(2.0 * scale[big])
    return alpha, beta


def _freud_discretization(lam: float, a: float, b: float, m: int, order: int):
    """Mirrored panel Gauss-Legendre discretization of ``exp(-a|x|^lam + b)``: ``(nodes, log weights)``."""
    scale = zero_scale(FreudWeight(lam, a, b), max(m, 1))
    # Far enough that the weight itself is below 1e-40 of its peak.
    reach = (40.0 * math.log(10.0) / a) ** (1.0 / lam)
    edges = scale * np.array([0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.5])
    if reach > edges[-1]:
        edges = np.append(edges, reach)
    t, wt = np.polynomial.legendre.leggauss(order)
    xs, ws = [], []
    for lo, hi in itertools.pairwise(edges):
        half = 0.5 * (hi - lo)
        xs.append(lo + half * (t + 1.0))
        ws.append(half * wt)
    xp = np.concatenate(xs)
    logw = np.log(np.concatenate(ws)) - a * xp**lam + b
    return np.concatenate([-xp[::-1], xp]), np.concatenate([logw[::-1], logw])


def recurrence_freud(
    lam: float,
    a: float,
    m: int,
    b: float = 0.0,
    tol: float = 1e-12,
    max_refinements: int = 8,
) -> Recurrence:
    """Recurrence for ``exp(-a |x|^lam + b)`` by discretized Stieltjes.

    The sub-rule order per panel doubles until all ``beta_k`` agree with the
    previous refinement to relative ``tol``.  ``alpha_k`` is zero by symmetry.
    """
    if not lam > 1.0 or not a > 0.0 or m < 1:
        raise PreconditionError(f"need lam > 1, a > 0, m >= 1, got {lam}, {a}, {m}")
    if lam == 2.0:
        return recurrence_gaussian(a, m, b)
    order = max(32, m // 4)
    previous = None
    for _ in range(max_refinements):
        x, w = _freud_discretization(lam, a, b, m, order)
        _, beta = _stieltjes(x, w, m)
        if previous is not None and np.all(np.abs(beta - previous) <= tol * np.abs(beta)):
            return Recurrence(np.zeros(m), beta, f"freud:lambda={lam:g},a={a:g},b={b:.17g}")
        previous = beta
        order *= 2
    raise ConvergenceError(
        f"Stieltjes recurrence for lambda={lam}, m={m} did not stabilize; "
        f"last two iterates differ by {np.max(np.abs(beta - previous) / beta):.3e}"
    )


@functools.lru_cache(maxsize=256)
def _cached_recurrence(spec: tuple, m: int) -> Recurrence:
    kind = spec[0]
    if kind == "freud":
        _, lam, a, b = spec
        return recurrence_freud(lam, a, m, b)
    _, beta, a, b = spec
    return recurrence_sonin(beta, a, m, b)


def _weight_key(w: Weight) -> tuple:
    if isinstance(w, MarkovSoninWeight):
        return ("sonin", float(w.beta), float(w.a), float(w.b))
    return ("freud", float(w.lam), float(w.a), float(w.b))


def recurrence_for(w: Weight, m: int) -> Recurrence:
    """Recurrence of length ``m`` for the univariate factor of ``w`` (cached)."""
    m = int(m)
    length = max(16, 1 << (m - 1).bit_length())
    rec = _cached_recurrence(_weight_key(w), length)
    return Recurrence(rec.alpha[:m], rec.beta[:m], rec.weight_id)


def ql_eigen(diag, off, max_iter: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """Implicit-shift QL on a symmetric tridiagonal matrix.

    Returns the eigenvalues and the first component of each normalized
    eigenvector, both sorted by eigenvalue.  ``off[i]`` couples rows ``i``
    and ``i + 1``.
    """
    d = [float(v) for v in diag]
    n = len(d)
    e = [float(v) for v in off] + [0.0]
    if len(e) != n:
        raise PreconditionError("off-diagonal must have one entry fewer than the diagonal")
    z = [0.0] * n
    z[0] = 1.0
    eps = np.finfo(float).eps
    for l in range(n):
        iterations = 0
        while True:
            mm = l
            while mm < n - 1:
                if abs(e[mm]) <= eps * (abs(d[mm]) + abs(d[mm + 1])):
                    break
                mm += 1
            if mm == l:
                break
            iterations += 1
            if iterations > max_iter:
                norm = max(abs(v) for v in d) + max(abs(v) for v in e)
                raise ConvergenceError(
                    f"QL iteration stalled at row {l} after {max_iter} sweeps; "
                    f"matrix norm ~{norm:.3e}, residual coupling {abs(e[l]):.3e}"
                )
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[mm] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            deflated = False
            for i in range(mm - 1, l - 1, -1):
                f = s * e[i]
                bb = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[mm] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * bb
                p = s * r
                d[i + 1] = g + p
                g = c * r - bb
                f = z[i + 1]
                z[i + 1] = s * z[i] + c * f
                z[i] = c * z[i] - s * f
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[mm] = 0.0
    vals = np.array(d)
    first = np.array(z)
    order = np.argsort(vals, kind="stable")
    return vals[order], first[order]


def christoffel_log_weights(rec: Recurrence, x: np.ndarray, m: int) -> np.ndarray:
    """``log(1 / sum_{j<m} p_j(x)^2)`` for orthonormal ``p_j``, overflow-safe."""
    x = np.asarray(x, dtype=float)
    sb = np.sqrt(rec.beta[:m])
    p_prev = np.zeros_like(x)
    p = np.full_like(x, 1.0 / sb[0])
    acc = np.zeros_like(x)
    logscale = np.zeros_like(x)
    big = 1e100
    for j in range(m):
        acc += p * p
        if j == m - 1:
            break
        nxt = ((x - rec.alpha[j]) * p - (sb[j] if j else 0.0) * p_prev) / sb[j + 1]
        p_prev, p = p, nxt
        over = np.abs(p) > big
        if over.any():
            p[over] /= big
            p_prev[over] /= big
            acc[over] /= big * big
            logscale[over] += math.log(big)
    return -np.log(acc) - 2.0 * logscale


@dataclass(frozen=True)
class GaussRule1D:
    """Gauss rule of degree ``m`` for a univariate weight.

    ``indices`` are the signed labels of the zeros: ``+-1..+-m/2`` for even
    ``m`` and ``0, +-1..+-(m-1)/2`` for odd ``m``.
    """

    nodes: np.ndarray
    weights: np.ndarray
    log_weights: np.ndarray
    m: int
    weight: Weight = field(repr=False)
    weight_id: str = ""

    @property
    def indices(self) -> np.ndarray:
        half = self.m // 2
        if self.m % 2:
            return np.arange(-half, half + 1)
        return np.concatenate([np.arange(-half, 0), np.arange(1, half + 1)])

    @property
    def scaled_weights(self) -> np.ndarray:
        """Cotes numbers divided by the weight at their node (``inf`` where it vanishes)."""
        with np.errstate(over="ignore"):
            return np.exp(self.log_weights - self.weight.log_factor(self.nodes))

    def integrate(self, f) -> float:
        from .rules import integrate_1d

        return integrate_1d(self.nodes, self.weights, self.scaled_weights, self.weight, f)


def gauss_rule(rec: Recurrence, m: int, weight: Weight, method: str = "lapack") -> GaussRule1D:
    """Gauss rule of degree ``m`` from recurrence ``rec``.

    Parameters
    ----------
    rec : Recurrence
        Coefficients with ``rec.length >= m``.
    m : int
        Number of nodes.
    weight : Weight
        The weight the recurrence belongs to; used for scaled weights.
    method : {"lapack", "ql"}
        ``"lapack"`` takes eigenvalues from LAPACK and Cotes numbers from the
        Christoffel function; ``"ql"`` runs the implicit QL sweep and takes
        Cotes numbers from the first eigenvector components.
    """
    if m < 1 or rec.length < m:
        raise PreconditionError(f"recurrence of length {rec.length} cannot give a rule of degree {m}")
    diag = rec.alpha[:m]
    off = np.sqrt(rec.beta[1:m])
    if method == "ql":
        x, first = ql_eigen(diag, off)
        with np.errstate(divide="ignore"):
            logw = math.log(rec.beta[0]) + 2.0 * np.log(np.abs(first))
    elif method == "lapack":
        if m == 1:
            x = diag.copy()
        else:
            try:
                x = eigh_tridiagonal(diag, off, eigvals_only=True)
            except np.linalg.LinAlgError as exc:
                raise ConvergenceError(
                    f"tridiagonal eigen-solve failed for m={m}: {exc}; "
                    f"off-diagonal range [{off.min():.3e}, {off.max():.3e}]"
                ) from None
        if np.all(diag == 0.0):
            # even weight: evaluate the nonnegative half and mirror it
            half = m // 2
            right = christoffel_log_weights(rec, x[half:], m)
            logw = np.concatenate([right[::-1][: half], right])
        else:
            logw = christoffel_log_weights(rec, x, m)
    else:
        raise PreconditionError(f"unknown eigen method {method!r}")
    if np.all(diag == 0.0):
        # Enforce exact mirror symmetry of the rule of an even weight.
        x = 0.5 * (x - x[::-1])
        logw = 0.5 * (logw + logw[::-1])
    return GaussRule1D(x, np.exp(logw), logw, m, weight.univariate(), rec.weight_id)


def gauss_rule_for(w: Weight, m: int, method: str = "lapack") -> GaussRule1D:
    """Gauss rule of degree ``m`` for the univariate factor of ``w``."""
    return _cached_gauss(_weight_key(w), int(m), method)


@functools.lru_cache(maxsize=512)
def _cached_gauss(key: tuple, m: int, method: str) -> GaussRule1D:
    w = _weight_from_key(key)
    return gauss_rule(recurrence_for(w, m), m, w, method)


def _weight_from_key(key: tuple) -> Weight:
    if key[0] == "sonin":
        return MarkovSoninWeight(key[1], key[2], key[3])
    return FreudWeight(key[1], key[2], key[3])


def largest_zero(w: Weight, m: int) -> float:
    """Largest zero of ``p_m(w)`` without forming the whole rule."""
    if m == 1:
        return 0.0
    rec = recurrence_for(w, m)
    top = eigh_tridiagonal(
        rec.alpha[:m], np.sqrt(rec.beta[1:m]), eigvals_only=True, select="i", select_range=(m - 1, m - 1)
    )
    return float(top[0])


def count_zeros_below(w: Weight, m: int, t: float) -> int:
    """Number of zeros of ``p_m(w)`` strictly less than ``t`` (Sturm count)."""
    rec = recurrence_for(w, m)
    d = rec.alpha[:m]
    b2 = rec.beta[1:m]
    count = 0
    q = d[0] - t
    if q < 0:
        count += 1
    tiny = np.finfo(float).tiny
    for i in range(1, m):
        if q == 0.0:
            q = tiny
        q = d[i] - t - b2[i - 1] / q
        if q < 0:
            count += 1
    return count
