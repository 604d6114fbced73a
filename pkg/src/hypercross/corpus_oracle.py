"""Reference integrator and the test-function corpus.

The oracle is a tensorized composite Gauss-Legendre rule of escalating
degree on ``[-R, R]^d``.  Panels are split at declared breakpoints and
graded geometrically towards declared singular points; the truncated
tails are covered by an analytic bound from the weight's decay, or, for
integrands with algebraic tails, integrated after the map ``x = R / t``.

Every corpus member is a product of univariate factors, bound to one
weight, and identified by a string such as ``"tail:r=1,d=2"``.  The
reference integral is the product of univariate references (analytic
where a closed form exists, otherwise the oracle).
"""

from __future__ import annotations

import functools
import math
import re
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, PreconditionError
from .weights import FreudWeight, MarkovSoninWeight, Weight, lgamma

LAYOUTS = {
    # panels per unit radius, grading ratio, grading depth
    "A": (1.0, 0.25, 26),
    "B": (0.73, 0.4, 38),
}


@dataclass(frozen=True)
class OracleResult:
    value: float
    error_bound: float
    radius: float
    degree: int


def default_radius(w: Weight) -> float:
    """Solve ``a R^lam = 40 ln 10 + lam ln R`` by fixed-point iteration."""
    lam = 2.0 if isinstance(w, MarkovSoninWeight) else w.lam
    target = 40.0 * math.log(10.0)
    r = (target / w.a) ** (1.0 / lam)
    for _ in range(60):
        r_new = ((target + lam * math.log(r)) / w.a) ** (1.0 / lam)
        if abs(r_new - r) <= 1e-13 * r:
            break
        r = r_new
    return r_new


def _panel_edges(lo: float, hi: float, breakpoints, singular, layout: str) -> np.ndarray:
    density, ratio, depth = LAYOUTS[layout]
    count = max(4, math.ceil(density * (hi - lo)))
    edges = [np.linspace(lo, hi, count + 1)]
    pts = [p for p in breakpoints if lo < p < hi]
    sing = [s for s in singular if lo <= s <= hi]
    edges.append(np.asarray(pts + sing, dtype=float))
    base = np.unique(np.concatenate(edges))
    grading = []
    for s in sing:
        k = int(np.searchsorted(base, s))
        left = s - base[k - 1] if k > 0 and base[k - 1] < s else 0.0
        right_idx = k + 1 if k < base.size and base[k] == s else k
        right = base[right_idx] - s if right_idx < base.size else 0.0
        for width, sign in ((left, -1.0), (right, 1.0)):
            if width > 0.0:
                grading.append(s + sign * width * ratio ** np.arange(1, depth + 1))
    if grading:
        base = np.unique(np.concatenate([base] + grading))
    return base


def _composite(edges: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    t, wt = np.polynomial.legendre.leggauss(order)
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    x = (lo[:, None] + half[:, None] * (t[None, :] + 1.0)).ravel()
    w = (half[:, None] * wt[None, :]).ravel()
    return x, w


def _weighted_values(f, x: np.ndarray, weight: Weight | None) -> np.ndarray:
    if weight is None:
        return np.asarray(f(x), dtype=float).reshape(-1)
    if hasattr(f, "times_weight"):
        return np.asarray(f.times_weight(x, weight), dtype=float).reshape(-1)
    logw = weight.log_evaluate(x)
    return np.asarray(f(x), dtype=float).reshape(-1) * np.exp(logw)


def _tensor_sum(f, axes: list[tuple[np.ndarray, np.ndarray]], weight, chunk: int = 1 << 20) -> float:
    d = len(axes)
    if d == 1:
        x, w = axes[0]
        pts = x[:, None] if weight is not None and weight.dim == 1 else x
        vals = _weighted_values(f, pts if weight is not None else x, weight)
        return float(np.sum(vals * w))
    sizes = [a[0].size for a in axes]
    total = 0.0
    lead = axes[0]
    rest_grid = np.meshgrid(*[a[0] for a in axes[1:]], indexing="ij")
    rest_pts = np.stack([g.ravel() for g in rest_grid], axis=-1)
    rest_w = functools.reduce(np.multiply.outer, [a[1] for a in axes[1:]]).ravel()
    step = max(1, chunk // max(1, rest_pts.shape[0]))
    for start in range(0, sizes[0], step):
        xs = lead[0][start : start + step]
        ws = lead[1][start : start + step]
        pts = np.concatenate(
            [np.repeat(xs, rest_pts.shape[0])[:, None], np.tile(rest_pts, (xs.size, 1))], axis=1
        )
        vals = _weighted_values(f, pts, weight).reshape(xs.size, -1)
        total += float(np.sum(ws[:, None] * vals * rest_w[None, :]))
    return total


def _tail_bound_1d(w: Weight, radius: float, c: float, p: float) -> float:
    """Bound on ``int_R^inf c (1+x)^p w(x) dx`` from ``x^lam - R^lam >= lam R^{lam-1} (x - R)``."""
    lam = 2.0 if isinstance(w, MarkovSoninWeight) else w.lam
    if isinstance(w, MarkovSoninWeight):
        p = p + w.beta
    rate = w.a * lam * radius ** (lam - 1.0) - p / (1.0 + radius)
    if rate <= 0.0:
        return math.inf
    log_peak = math.log(c) + w.b + p * math.log1p(radius) - w.a * radius**lam
    return math.exp(log_peak) / rate


def oracle_integral(
    f,
    weight: Weight | None,
    d: int = 1,
    radius: float | None = None,
    tol: float = 1e-12,
    breakpoints: Sequence[float] = (),
    singular: Sequence[float] = (),
    layout: str = "A",
    growth: tuple[float, float] = (1.0, 0.0),
    interval: tuple[float, float] | None = None,
    max_order: int = 128,
    tail_bound: bool = True,
) -> OracleResult:
    """High-order reference integral of ``f`` against ``weight`` on ``R^d``.

    Parameters
    ----------
    f : callable
        Vectorized integrand on ``(N, d)`` points (``(N,)`` when ``d == 1``
        and ``weight`` is None).
    weight : Weight or None
        The measure; None means Lebesgue measure on ``interval^d``.
    radius : float, optional
        Truncation radius; defaults to :func:`default_radius`.
    tol : float
        Agreement required between successive degrees, relative to
        ``max(1, |value|)``.
    breakpoints, singular : sequence of float
        Per-axis points where ``f`` is not smooth; panels are graded
        towards ``singular`` points.
    growth : (C, p)
        Assumed bound ``|f(x)| <= C prod_i (1 + |x_i|)^p`` for the tail bound.
    interval : (lo, hi), optional
        Integration interval per axis for Lebesgue integrals.
    tail_bound : bool
        Add the analytic bound for the mass outside ``[-R, R]^d``; disable
        when the caller integrates the tails separately.
    """
    if tol < 1e-13:
        raise PreconditionError(f"tolerance below 1e-13 is not supported, got {tol}")
    if weight is not None:
        if weight.dim != d:
            weight = weight.with_dim(d)
        w1 = weight.univariate()
        if radius is None:
            radius = default_radius(w1)
        lo, hi = -radius, radius
        sing = list(singular)
        if isinstance(w1, MarkovSoninWeight):
            sing.append(0.0)
        pts = list(breakpoints) + [0.0]
    else:
        if interval is None:
            raise PreconditionError("Lebesgue integrals need an explicit interval")
        lo, hi = interval
        radius = max(abs(lo), abs(hi))
        sing = list(singular)
        pts = list(breakpoints)
    edges = _panel_edges(lo, hi, pts, sing, layout)
    prev = None
    order = 8
    while order <= max_order:
        axis = _composite(edges, order)
        value = _tensor_sum(f, [axis] * d, weight)
        if prev is not None and abs(value - prev) <= tol * max(1.0, abs(value)):
            break
        prev = value
        order *= 2
    else:
        raise ConvergenceError(
            f"oracle did not converge by order {max_order}: last values {prev!r}, {value!r}"
        )
    err = abs(value - prev)
    if weight is not None and tail_bound:
        c, p = growth
        t1 = _tail_bound_1d(w1, radius, c ** (1.0 / d), p)
        x, wq = axis
        inner = float(np.sum(c ** (1.0 / d) * (1.0 + np.abs(x)) ** p * np.exp(w1.log_factor(x)) * wq))
        tail = (inner + 2.0 * t1) ** d - inner**d
        err += tail
    return OracleResult(value, err, float(radius), order)


def algebraic_tail_integral(
    weighted,
    radius: float,
    envelope: tuple[float, float],
    tol: float = 1e-12,
    layout: str = "A",
) -> OracleResult:
    """``int_R^inf F(x) dx`` for ``|F(x)| <= C x^{-1-eps}`` via ``x = R / t``."""
    c, eps = envelope
    _density, ratio, depth = LAYOUTS[layout]
    depth = 3 * depth
    edges = np.unique(np.concatenate([ratio ** np.arange(depth, 0, -1), np.linspace(ratio, 1.0, 9)]))
    tmin = edges[0]
    prev = None
    order = 8
    while order <= 128:
        t, wt = _composite(edges, order)
        x = radius / t
        value = float(np.sum(np.asarray(weighted(x), dtype=float) * wt * radius / (t * t)))
        if prev is not None and abs(value - prev) <= tol * max(1.0, abs(value)):
            break
        prev = value
        order *= 2
    else:
        raise ConvergenceError(f"mapped tail integral did not converge (last {prev!r}, {value!r})")
    rest = c * (radius / tmin) ** (-eps) / eps
    return OracleResult(value, abs(value - prev) + rest, radius, order)


# --- corpus --------------------------------------------------------------


def cardinal_bspline(ell: int, x) -> np.ndarray:
    """Cardinal B-spline of order ``ell`` on ``[0, ell]`` by the Cox-de Boor recursion."""
    from .bspline_recover import cardinal_bspline as _impl

    return _impl(ell, x)


class Factor:
    """A univariate factor of a corpus member (abstract)."""

    breakpoints: tuple[float, ...] = ()
    singular: tuple[float, ...] = ()
    growth: tuple[float, float] = (1.0, 0.0)
    envelope: tuple[float, float] | None = None

    def value(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def weighted(self, t: np.ndarray, w1: Weight) -> np.ndarray:
        with np.errstate(divide="ignore", under="ignore"):
            return self.value(t) * np.exp(w1.log_factor(t))

    def analytic_weighted(self, w1: Weight) -> float | None:
        return None

    def analytic_cube(self) -> float | None:
        return None


class Constant(Factor):
    def value(self, t):
        return np.ones_like(np.asarray(t, dtype=float))

    def analytic_weighted(self, w1):
        return w1.mass_1d()

    def analytic_cube(self):
        return 1.0


class Polynomial4(Factor):
    """``1 + t/2 + t^2/4 + t^4/96``."""

    growth = (1.0, 4.0)
    coef = (1.0, 0.5, 0.25, 0.0, 1.0 / 96.0)

    def value(self, t):
        t = np.asarray(t, dtype=float)
        return np.polynomial.polynomial.polyval(t, self.coef)

    def analytic_weighted(self, w1):
        return sum(c * w1.even_moment_1d(k // 2) for k, c in enumerate(self.coef) if k % 2 == 0)

    def analytic_cube(self):
        return sum(c * (0.5 ** (k + 1) - (-0.5) ** (k + 1)) / (k + 1) for k, c in enumerate(self.coef))


class Cosine(Factor):
    """``cos(t)``."""

    def value(self, t):
        return np.cos(np.asarray(t, dtype=float))

    def analytic_weighted(self, w1):
        if isinstance(w1, FreudWeight) and w1.lam == 2.0:
            return math.sqrt(math.pi / w1.a) * math.exp(w1.b - 1.0 / (4.0 * w1.a))
        return None

    def analytic_cube(self):
        return 2.0 * math.sin(0.5)


class Sine(Factor):
    """``sin(2 pi t)``: periodic, zero mean on the cube."""

    def value(self, t):
        return np.sin(2.0 * math.pi * np.asarray(t, dtype=float))

    def analytic_weighted(self, w1):
        return 0.0

    def analytic_cube(self):
        return 0.0


class BSplineFactor(Factor):
    """Cardinal B-spline of order ``r + 1`` dilated by ``scale`` and centred at ``centre``."""

    def __init__(self, r: int, centre: float = 0.3, scale: float = 0.8):
        self.order = r + 1
        self.centre = centre
        self.scale = scale
        start = centre - scale * self.order / 2.0
        self.breakpoints = tuple(start + scale * j for j in range(self.order + 1))

    def value(self, t):
        u = (np.asarray(t, dtype=float) - self.breakpoints[0]) / self.scale
        return cardinal_bspline(self.order, u)

    def analytic_cube(self):
        return None


class AlgebraicTail(Factor):
    """``f = (1 + t^2)^{-(1+eps)/2} / w(t) * e^b``, so ``f w`` decays like ``|t|^{-1-eps}``."""

    def __init__(self, eps: float, w1: FreudWeight):
        self.eps = eps
        self.w1 = w1
        self.envelope = (math.exp(w1.b), eps)

    def value(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(over="ignore"):
            return np.exp(self.w1.a * np.abs(t) ** self.w1.lam - 0.5 * (1.0 + self.eps) * np.log1p(t * t))

    def weighted(self, t, w1):
        t = np.asarray(t, dtype=float)
        if w1 == self.w1:
            return math.exp(w1.b) * (1.0 + t * t) ** (-0.5 * (1.0 + self.eps))
        with np.errstate(over="ignore", under="ignore"):
            return np.exp(
                self.w1.a * np.abs(t) ** self.w1.lam
                - 0.5 * (1.0 + self.eps) * np.log1p(t * t)
                + w1.log_factor(t)
            )

    def analytic_weighted(self, w1):
        if w1 != self.w1:
            return None
        e = self.eps
        return math.exp(w1.b + 0.5 * math.log(math.pi) + lgamma(e / 2.0) - lgamma((1.0 + e) / 2.0))


class SpikeTrain(Factor):
    """Unit-height hats at the largest zeros of the full rules of degree ``2^j``.

    ``f w`` is the hat train; each hat's half-width shrinks like the
    reciprocal of its centre, so the Sobolev norm stays bounded while the
    outermost Cotes number of each dyadic full rule lands on a peak.
    """

    def __init__(self, w1: FreudWeight, levels: Sequence[int] = tuple(range(4, 14))):
        from .orthopoly import largest_zero

        self.w1 = w1
        self.centres = np.array([largest_zero(w1, 2**j) for j in levels])
        self.halfwidths = 1.0 / (2.0 * w1.a * self.centres)
        self.breakpoints = tuple(
            float(v) for c, h in zip(self.centres, self.halfwidths) for v in (c - h, c, c + h)
        )

    def hats(self, t):
        t = np.asarray(t, dtype=float)
        u = np.abs(t[..., None] - self.centres) / self.halfwidths
        return np.clip(1.0 - u, 0.0, None).sum(axis=-1)

    def value(self, t):
        t = np.asarray(t, dtype=float)
        h = self.hats(t)
        out = np.zeros_like(t)
        nz = h > 0
        with np.errstate(over="ignore"):
            out[nz] = h[nz] * np.exp(-self.w1.log_factor(t[nz]))
        return out

    def weighted(self, t, w1):
        if w1 == self.w1:
            return self.hats(t)
        t = np.asarray(t, dtype=float)
        h = self.hats(t)
        out = np.zeros_like(t)
        nz = h > 0
        out[nz] = h[nz] * np.exp(w1.log_factor(t[nz]) - self.w1.log_factor(t[nz]))
        return out

    def analytic_weighted(self, w1):
        if w1 != self.w1:
            return None
        return float(np.sum(self.halfwidths))


class PeriodicPower(Factor):
    """``|sin(pi (t - shift))|^q``: 1-periodic with an algebraic cusp at ``shift + Z``."""

    def __init__(self, q: float, shift: float, reach: float = 64.0):
        self.q = q
        self.shift = shift
        span = math.ceil(reach)
        self.singular = tuple(shift + k for k in range(-span, span + 1))

    def value(self, t):
        return np.abs(np.sin(math.pi * (np.asarray(t, dtype=float) - self.shift))) ** self.q

    def analytic_cube(self):
        q = self.q
        return math.exp(lgamma((q + 1.0) / 2.0) - lgamma(q / 2.0 + 1.0)) / math.sqrt(math.pi)


@dataclass(frozen=True)
class Reference:
    value: float
    error_bound: float
    method: str


@dataclass(frozen=True)
class CorpusFn:
    """A product test function ``f(x) = prod_i g_i(x_i)`` bound to a weight.

    ``r`` is the exact smoothness label (None for infinitely smooth members).
    """

    id: str
    dim: int
    r: int | None
    periodic: bool
    family: str
    weight: Weight = field(repr=False)
    factors: tuple = field(repr=False, compare=False)

    def __call__(self, x) -> np.ndarray:
        pts = np.asarray(x, dtype=float)
        if self.dim == 1 and pts.ndim <= 1:
            return self.factors[0].value(pts)
        pts = np.atleast_2d(pts)
        out = np.ones(pts.shape[0])
        for i, g in enumerate(self.factors):
            out = out * g.value(pts[:, i])
        return out

    def times_weight(self, x, weight: Weight) -> np.ndarray:
        """``f(x) * weight(x)``, exact in the weighted form for the member's own weight."""
        pts = np.asarray(x, dtype=float)
        w1 = weight.univariate()
        if self.dim == 1 and pts.ndim <= 1:
            return self.factors[0].weighted(pts, w1)
        pts = np.atleast_2d(pts)
        out = np.ones(pts.shape[0])
        for i, g in enumerate(self.factors):
            out = out * g.weighted(pts[:, i], w1)
        return out

    def reference(self, tol: float = 1e-12) -> Reference:
        """Reference value of ``int f w`` for the member's weight."""
        return _reference(self, tol)

    def cube_reference(self, tol: float = 1e-12) -> Reference:
        """Reference value of ``int_{[-1/2,1/2]^d} f dx``."""
        return _cube_reference(self, tol)

    def reference_oracle(self, layout: str = "B", tol: float = 1e-12) -> Reference:
        """Second, independent reference using oracle layout ``layout`` for every factor."""
        vals = [_factor_oracle(g, self.weight.univariate(), tol, layout) for g in self.factors]
        return _combine(vals, "oracle-" + layout)


def _combine(parts: list[tuple[float, float]], method: str) -> Reference:
    value = math.prod(v for v, _ in parts)
    upper = math.prod(abs(v) + e for v, e in parts)
    return Reference(value, upper - abs(value), method)


def _factor_oracle(g: Factor, w1: Weight, tol: float, layout: str) -> tuple[float, float]:
    def weighted(x):
        return g.weighted(np.asarray(x, dtype=float).reshape(-1), w1)

    class _F:
        def __call__(self, x):
            return g.value(np.asarray(x, dtype=float).reshape(-1))

        def times_weight(self, x, w):
            return weighted(x)

    if g.envelope is not None:
        radius = 8.0 if layout == "A" else 11.0
        inner = oracle_integral(
            _F(), w1, 1, radius=radius, tol=tol, breakpoints=g.breakpoints, singular=g.singular, layout=layout,
            tail_bound=False,
        )
        outer = algebraic_tail_integral(weighted, radius, g.envelope, tol, layout)
        outer_neg = algebraic_tail_integral(lambda x: weighted(-x), radius, g.envelope, tol, layout)
        value = inner.value + outer.value + outer_neg.value
        return value, inner.error_bound + outer.error_bound + outer_neg.error_bound
    radius = default_radius(w1)
    if g.breakpoints:
        radius = max(radius, max(abs(p) for p in g.breakpoints) + 1.0)
    res = oracle_integral(
        _F(), w1, 1, radius=radius, tol=tol, breakpoints=g.breakpoints, singular=g.singular, layout=layout,
        growth=g.growth,
    )
    return res.value, res.error_bound


@functools.lru_cache(maxsize=1024)
def _reference_cached(key, tol):
    fn = _MEMBER_REGISTRY[key]
    w1 = fn.weight.univariate()
    parts = []
    method = "analytic"
    for g in fn.factors:
        exact = g.analytic_weighted(w1)
        if exact is None:
            parts.append(_factor_oracle(g, w1, tol, "A"))
            method = "oracle"
        else:
            parts.append((exact, 4.0 * np.finfo(float).eps * abs(exact)))
    return _combine(parts, method)


def _reference(fn: CorpusFn, tol: float) -> Reference:
    key = (fn.id, fn.weight.univariate().spec())
    _MEMBER_REGISTRY[key] = fn
    return _reference_cached(key, tol)


def _cube_reference(fn: CorpusFn, tol: float) -> Reference:
    parts = []
    method = "analytic"
    for g in fn.factors:
        exact = g.analytic_cube()
        if exact is None:
            res = oracle_integral(
                lambda t, g=g: g.value(np.asarray(t, dtype=float)),
                None,
                1,
                tol=tol,
                breakpoints=g.breakpoints,
                singular=[s for s in g.singular if -0.5 <= s <= 0.5],
                interval=(-0.5, 0.5),
            )
            parts.append((res.value, res.error_bound))
            method = "oracle"
        else:
            parts.append((exact, 4.0 * np.finfo(float).eps * abs(exact)))
    return _combine(parts, method)


_MEMBER_REGISTRY: dict = {}

FAMILIES = ("const", "gpoly", "cos", "sin", "bspline", "tail", "spike", "pcore1", "pcore2")
_SMOOTH = {"const", "gpoly", "cos", "sin"}
_ID_RE = re.compile(r"^(?P<fam>[a-z0-9]+):(?P<params>.*)$")
_SHIFTS = (0.3, 0.41, 0.52)


def tail_exponent(r: int, lam: float) -> float:
    """Decay exponent ``eps`` of the tail member: ``f in W^r_1(mu)`` but not ``W^{r+1}_1(mu)``."""
    return r * (lam - 1.0) + 0.1


def pcore_exponent(kind: str, r: int) -> float:
    """Cusp power: ``r-1+0.1`` (``pcore1``, critical in ``L_1``) or ``r-1/2+0.1`` (``pcore2``, in ``L_2``)."""
    return r - 1.0 + 0.1 if kind == "pcore1" else r - 0.5 + 0.1


def member_id(family: str, d: int, r: int | None = None) -> str:
    if family in _SMOOTH:
        return f"{family}:d={d}"
    return f"{family}:r={r},d={d}"


def corpus_member(fid: str, weight: Weight) -> CorpusFn:
    """Rebuild a corpus member from its id string for ``weight``."""
    match = _ID_RE.match(fid.strip())
    if not match:
        raise PreconditionError(f"malformed corpus id {fid!r}")
    fam = match.group("fam")
    params = dict(p.split("=", 1) for p in match.group("params").split(",") if "=" in p)
    try:
        d = int(params.get("d", "1"))
        r = int(params["r"]) if "r" in params else None
    except ValueError:
        raise PreconditionError(f"malformed corpus id {fid!r}") from None
    if fam not in FAMILIES:
        raise PreconditionError(f"unknown corpus family {fam!r}")
    if fam in _SMOOTH and r is not None:
        raise PreconditionError(f"family {fam!r} carries no smoothness label")
    if fam not in _SMOOTH and r is None:
        raise PreconditionError(f"family {fam!r} needs r=")
    if r is not None and not 1 <= r <= 4:
        raise PreconditionError(f"smoothness label must lie in 1..4, got {r}")
    if not 1 <= d <= 3:
        raise PreconditionError(f"dimension must lie in 1..3, got {d}")
    w = weight.with_dim(d)
    w1 = w.univariate()
    periodic = fam in ("sin", "pcore1", "pcore2")
    if fam == "const":
        factors = [Constant() for _ in range(d)]
    elif fam == "gpoly":
        factors = [Polynomial4() for _ in range(d)]
    elif fam == "cos":
        factors = [Cosine() for _ in range(d)]
    elif fam == "sin":
        factors = [Sine() for _ in range(d)]
    elif fam == "bspline":
        factors = [BSplineFactor(r, centre=_SHIFTS[i]) for i in range(d)]
    elif fam == "tail":
        if not isinstance(w1, FreudWeight):
            raise PreconditionError("tail members need a Freud weight")
        factors = [AlgebraicTail(tail_exponent(r, w1.lam), w1) for _ in range(d)]
    elif fam == "spike":
        if not (isinstance(w1, FreudWeight) and w1.lam == 2.0 and d == 1 and r == 1):
            raise PreconditionError("spike members exist only for d=1, r=1 and lambda=2 Freud weights")
        factors = [SpikeTrain(w1)]
    else:
        q = pcore_exponent(fam, r)
        factors = [PeriodicPower(q, _SHIFTS[i]) for i in range(d)]
    fn = CorpusFn(member_id(fam, d, r), d, r, periodic, fam, w, tuple(factors))
    return fn


def corpus(weight: Weight, d: int, r: int) -> list[CorpusFn]:
    """All corpus members for ``(weight, d, r)``; at least five per combination."""
    if not 1 <= r <= 4 or not 1 <= d <= 3:
        raise PreconditionError(f"need r in 1..4 and d in 1..3, got r={r}, d={d}")
    w1 = weight.univariate()
    ids = [member_id(f, d) for f in ("const", "gpoly", "cos", "sin")]
    ids += [member_id(f, d, r) for f in ("bspline", "pcore1", "pcore2")]
    if isinstance(w1, FreudWeight):
        ids.append(member_id("tail", d, r))
        if w1.lam == 2.0 and d == 1 and r == 1:
            ids.append(member_id("spike", 1, 1))
    return [corpus_member(i, weight) for i in ids]
