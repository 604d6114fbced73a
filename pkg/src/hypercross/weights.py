"""Weight functions on R^d.

Two univariate families are supported, each tensorized over ``dim``
coordinates:

* Freud-type weights ``w(x) = exp(-a |x|^lam + b)`` with ``lam > 1``;
  the standard Gaussian density is ``lam = 2, a = 1/2, b = -log(2 pi)/2``.
* Markov-Sonin weights ``w(x) = |x|^beta exp(-a x^2 + b)``.

All evaluation happens in log-space; ``b`` is added there, so very large
``a |x|^lam`` never overflows before exponentiation.
"""

from __future__ import annotations

import math
import re
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError

# Lanczos approximation, g = 7, nine terms (about 15 significant digits).
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def lgamma(x: float) -> float:
    """Logarithm of the gamma function for real ``x > 0``."""
    x = float(x)
    if not x > 0.0:
        raise PreconditionError(f"lgamma needs a positive argument, got {x}")
    if x < 0.5:
        # Reflection keeps the series argument in its accurate range.
        return math.log(math.pi / math.sin(math.pi * x)) - lgamma(1.0 - x)
    x -= 1.0
    acc = _LANCZOS_COEF[0]
    for i, c in enumerate(_LANCZOS_COEF[1:], start=1):
        acc += c / (x + i)
    t = x + _LANCZOS_G + 0.5
    return 0.5 * math.log(2.0 * math.pi) + (x + 0.5) * math.log(t) - t + math.log(acc)


def gamma(x: float) -> float:
    """Gamma function for real ``x > 0``."""
    return math.exp(lgamma(x))


def gamma_lambda(lam: float) -> float:
    """The constant ``2 Gamma((1+lam)/2) / (sqrt(pi) Gamma(lam/2))``."""
    return 2.0 * math.exp(lgamma((1.0 + lam) / 2.0) - lgamma(lam / 2.0)) / math.sqrt(math.pi)


def _as_points(x, dim: int) -> np.ndarray:
    """Coerce ``x`` to an ``(N, dim)`` float array."""
    arr = np.asarray(x, dtype=float)
    if dim == 1 and arr.ndim <= 1:
        return arr.reshape(-1, 1)
    arr = np.atleast_2d(arr)
    if arr.shape[-1] != dim:
        raise PreconditionError(f"expected points with {dim} coordinates, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class FreudWeight:
    """Tensor-product Freud weight ``prod_i exp(-a |x_i|^lam + b)``.

    Parameters
    ----------
    lam : float
        Exponent, must exceed 1.
    a : float
        Positive scale.
    b : float
        Additive log-offset per coordinate.
    dim : int
        Number of coordinates.
    """

    lam: float
    a: float
    b: float = 0.0
    dim: int = 1

    def __post_init__(self):
        if not self.lam > 1.0:
            raise PreconditionError(f"Freud exponent must exceed 1, got {self.lam}")
        if not self.a > 0.0:
            raise PreconditionError(f"Freud scale must be positive, got {self.a}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise PreconditionError(f"dimension must be a positive integer, got {self.dim}")

    @property
    def symmetric(self) -> bool:
        return True

    def univariate(self) -> FreudWeight:
        return FreudWeight(self.lam, self.a, self.b, 1)

    def with_dim(self, dim: int) -> FreudWeight:
        return FreudWeight(self.lam, self.a, self.b, dim)

    def log_factor(self, t) -> np.ndarray:
        """Log of the univariate factor at the values ``t``."""
        t = np.asarray(t, dtype=float)
        return -self.a * np.abs(t) ** self.lam + self.b

    def log_evaluate(self, x) -> np.ndarray:
        pts = _as_points(x, self.dim)
        return np.sum(self.log_factor(pts), axis=-1)

    def evaluate(self, x) -> np.ndarray:
        return np.exp(self.log_evaluate(x))

    __call__ = evaluate

    def mass_1d(self) -> float:
        """Integral of the univariate factor over the real line."""
        return 2.0 * math.exp(self.b + lgamma(1.0 + 1.0 / self.lam)) * self.a ** (-1.0 / self.lam)

    def mass(self) -> float:
        return self.mass_1d() ** self.dim

    def even_moment_1d(self, j: int) -> float:
        """``int t^(2j) w(t) dt`` for the univariate factor."""
        s = (2 * j + 1) / self.lam
        return 2.0 * math.exp(self.b + lgamma(s) - s * math.log(self.a)) / self.lam

    def spec(self) -> str:
        return f"freud:lambda={self.lam:g},a={self.a:g},b={self.b:.17g},d={self.dim}"


@dataclass(frozen=True)
class MarkovSoninWeight:
    """Tensor-product weight ``prod_i |x_i|^beta exp(-a x_i^2 + b)``.

    The value at a zero coordinate is the continuous limit 0.
    """

    beta: float
    a: float
    b: float = 0.0
    dim: int = 1

    def __post_init__(self):
        if not self.beta > 0.0:
            raise PreconditionError(f"Sonin exponent must be positive, got {self.beta}")
        if not self.a > 0.0:
            raise PreconditionError(f"Sonin scale must be positive, got {self.a}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise PreconditionError(f"dimension must be a positive integer, got {self.dim}")

    lam = 2.0

    @property
    def symmetric(self) -> bool:
        return True

    def univariate(self) -> MarkovSoninWeight:
        return MarkovSoninWeight(self.beta, self.a, self.b, 1)

    def with_dim(self, dim: int) -> MarkovSoninWeight:
        return MarkovSoninWeight(self.beta, self.a, self.b, dim)

    def log_factor(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            return self.beta * np.log(np.abs(t)) - self.a * t * t + self.b

    def log_evaluate(self, x) -> np.ndarray:
        pts = _as_points(x, self.dim)
        return np.sum(self.log_factor(pts), axis=-1)

    def evaluate(self, x) -> np.ndarray:
        return np.exp(self.log_evaluate(x))

    __call__ = evaluate

    def mass_1d(self) -> float:
        s = (self.beta + 1.0) / 2.0
        return math.exp(self.b + lgamma(s) - s * math.log(self.a))

    def mass(self) -> float:
        return self.mass_1d() ** self.dim

    def even_moment_1d(self, j: int) -> float:
        s = (self.beta + 2 * j + 1.0) / 2.0
        return math.exp(self.b + lgamma(s) - s * math.log(self.a))

    def spec(self) -> str:
        return f"sonin:beta={self.beta:g},a={self.a:g},b={self.b:.17g},d={self.dim}"


Weight = FreudWeight | MarkovSoninWeight


def gaussian_density(dim: int = 1) -> FreudWeight:
    """Standard normal density on R^dim."""
    return FreudWeight(2.0, 0.5, -0.5 * math.log(2.0 * math.pi), dim)


def mrs_number(w: Weight, m: int) -> float:
    """Mhaskar-Rakhmanov-Saff number ``(gamma_lam m)^(1/lam)``.

    This value does not depend on ``a``.  For Markov-Sonin weights it is
    ``sqrt(m)``.  See :func:`zero_scale` for the scale that actually
    bounds the zeros of polynomials orthonormal with respect to ``w``.
    """
    if m < 1:
        raise PreconditionError(f"degree must be at least 1, got {m}")
    if isinstance(w, MarkovSoninWeight):
        return math.sqrt(m)
    if w.lam == 2.0:
        return math.sqrt(m)
    return (gamma_lambda(w.lam) * m) ** (1.0 / w.lam)


def zero_scale(w: Weight, m: int) -> float:
    """Asymptotic bound ``(2 gamma_lam m / a)^(1/lam)`` on the zeros of ``p_m(w)``."""
    lam = 2.0 if isinstance(w, MarkovSoninWeight) else w.lam
    return (2.0 * gamma_lambda(lam) * m / w.a) ** (1.0 / lam)


@dataclass(frozen=True)
class RateParams:
    """Smoothness ``r`` and the weighted rate ``r_lambda = (1 - 1/lam) r``."""

    r: int
    lam: float

    def __post_init__(self):
        if self.r < 1:
            raise PreconditionError(f"smoothness must be a positive integer, got {self.r}")
        if not self.lam > 1.0:
            raise PreconditionError(f"exponent must exceed 1, got {self.lam}")

    @property
    def r_lambda(self) -> float:
        return (1.0 - 1.0 / self.lam) * self.r


_SPEC_RE = re.compile(r"^\s*(\w+)\s*(?::\s*(.*))?$")


def parse_weight(spec: str) -> Weight:
    """Parse a weight string such as ``gauss:d=2`` or ``freud:lambda=4,a=1,b=0,d=1``."""
    match = _SPEC_RE.match(spec)
    if not match:
        raise PreconditionError(f"malformed weight spec {spec!r}")
    kind, rest = match.group(1).lower(), match.group(2) or ""
    params: dict[str, str] = {}
    for item in filter(None, (p.strip() for p in rest.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise PreconditionError(f"malformed weight parameter {item!r} in {spec!r}")
        params[key.strip().lower()] = value.strip()
    try:
        dim = int(params.pop("d", "1"))
        if kind == "gauss":
            if params:
                raise PreconditionError(f"unexpected parameters {sorted(params)} for gauss")
            return gaussian_density(dim)
        if kind == "freud":
            lam = float(params.pop("lambda"))
            a = float(params.pop("a", "1"))
            b = float(params.pop("b", "0"))
            if params:
                raise PreconditionError(f"unexpected parameters {sorted(params)} for freud")
            return FreudWeight(lam, a, b, dim)
        if kind == "sonin":
            beta = float(params.pop("beta"))
            a = float(params.pop("a", "1"))
            b = float(params.pop("b", "0"))
            if params:
                raise PreconditionError(f"unexpected parameters {sorted(params)} for sonin")
            return MarkovSoninWeight(beta, a, b, dim)
    except KeyError as exc:
        raise PreconditionError(f"weight spec {spec!r} is missing {exc.args[0]!r}") from None
    except ValueError as exc:
        if isinstance(exc, PreconditionError):
            raise
        raise PreconditionError(f"weight spec {spec!r}: {exc}") from None
    raise PreconditionError(f"unknown weight family {kind!r}")


@dataclass(frozen=True)
class NormEstimate:
    """Result of :func:`weighted_sobolev_norm_estimate`; an estimate, not a bound."""

    value: float
    error_bound: float
    radius: float
    terms: Mapping[tuple[int, ...], float]


def weighted_sobolev_norm_estimate(
    derivatives: Mapping[tuple[int, ...], Callable],
    w: Weight,
    r: int,
    p: float = 1.0,
    radius: float | None = None,
    breakpoints: Sequence[float] = (),
    tol: float = 1e-10,
) -> NormEstimate:
    """Estimate ``(sum_{|k|_inf <= r} ||D^k f||_{L_p(w)}^p)^(1/p)``.

    Parameters
    ----------
    derivatives : mapping
        Multi-order ``k`` (a ``dim``-tuple) to a vectorized callable for
        ``D^k f``.  Every ``k`` with ``max(k) <= r`` must be present.
    w : Weight
        The measure.
    r : int
        Highest order per coordinate.
    p : float
        Integrability exponent, ``p >= 1``.
    radius, breakpoints, tol
        Forwarded to :func:`hypercross.corpus_oracle.oracle_integral`.
    """
    from itertools import product

    from .corpus_oracle import oracle_integral

    if p < 1.0:
        raise PreconditionError(f"p must be at least 1, got {p}")
    terms: dict[tuple[int, ...], float] = {}
    total = 0.0
    err = 0.0
    for k in product(range(r + 1), repeat=w.dim):
        if k not in derivatives:
            raise PreconditionError(f"missing derivative handle for order {k}")
        g = derivatives[k]

        def integrand(x, g=g):
            return np.abs(g(x)) ** p

        res = oracle_integral(integrand, w, w.dim, radius=radius, tol=tol, breakpoints=breakpoints)
        terms[k] = res.value
        total += res.value
        err += res.error_bound
        used_radius = res.radius
    value = total ** (1.0 / p)
    # First-order propagation of the summed integration error through the p-th root.
    bound = err * value / (p * total) if total > 0 else err
    return NormEstimate(value, bound, used_radius, terms)
