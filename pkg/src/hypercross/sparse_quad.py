"""Smolyak quadrature on step hyperbolic crosses of ``R^d``.

With a dyadic ladder ``Q_{2^k}`` of univariate rules (``Q_{2^{-1}} := 0``)
and ``Delta_k = Q_{2^k} - Q_{2^{k-1}}``, the rule is

    Q_xi = sum_{|k|_1 <= xi} Delta_k,   Delta_k = prod_i Delta_{k_i}.

Expanding each ``Delta_k`` over subsets ``e`` of the axes gives signed
tensor rules ``Q_{2^{k(e)}}``.  Coincident tensor rules are merged by
accumulating integer combination coefficients per level tuple, and the
surviving nodes are merged again on bitwise-identical coordinates.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import MemoryGuardError, PreconditionError
from .orthopoly import gauss_rule_for
from .quad1d import (
    bump_constants,
    bump_derivative,
    bump_norm_terms,
    largest_degree_within,
    tg_rule,
)
from .rules import QuadratureRule, integrate_1d, weighted_terms
from .weights import FreudWeight, MarkovSoninWeight, Weight

DEFAULT_MEMORY_CAP = 10**8


@dataclass(frozen=True)
class MultiIndex:
    """A d-tuple of nonnegative integers with the componentwise partial order."""

    components: tuple[int, ...]

    def __post_init__(self):
        comps = tuple(int(c) for c in self.components)
        if any(c < 0 for c in comps):
            raise PreconditionError(f"multi-index entries must be nonnegative, got {comps}")
        object.__setattr__(self, "components", comps)

    @property
    def dim(self) -> int:
        return len(self.components)

    @property
    def l1(self) -> int:
        return sum(self.components)

    @property
    def linf(self) -> int:
        return max(self.components, default=0)

    def __le__(self, other: MultiIndex) -> bool:
        return all(a <= b for a, b in zip(self.components, other.components, strict=True))

    def __iter__(self):
        return iter(self.components)

    def __len__(self):
        return len(self.components)

    def __getitem__(self, i):
        return self.components[i]

    def reduced(self, e: Iterable[int]) -> tuple[int | None, ...]:
        """``k(e)``: ``k_i`` on ``e`` and ``k_i - 1`` elsewhere (None for ``-1``)."""
        keep = set(e)
        return tuple(k if i in keep else (k - 1 if k > 0 else None) for i, k in enumerate(self.components))


def simplex(level: int, d: int) -> list[MultiIndex]:
    """All ``k`` in ``N_0^d`` with ``|k|_1 <= level``, lexicographically."""
    if level < 0:
        return []
    return [MultiIndex(k) for k in itertools.product(range(level + 1), repeat=d) if sum(k) <= level]


@dataclass(frozen=True)
class LadderRule:
    """Level-``k`` rule of a ladder; ``ids`` are the signed zero indices."""

    k: int
    degree: int
    nodes: np.ndarray
    weights: np.ndarray
    scaled_weights: np.ndarray
    ids: np.ndarray

    @property
    def size(self) -> int:
        return int(self.nodes.size)


@dataclass(frozen=True)
class DyadicLadder:
    """Univariate rules ``Q_{2^k}``, ``k = 0..k_max``, sharing one weight."""

    rules: tuple[LadderRule, ...]
    weight: Weight = field(repr=False)
    alpha: float | None = None
    kind: str = ""

    def __post_init__(self):
        for level, rule in enumerate(self.rules):
            if rule.k != level:
                raise PreconditionError(f"ladder rule {level} carries level {rule.k}")
            if rule.size > 2**level:
                raise PreconditionError(f"ladder rule {level} has {rule.size} > 2^{level} nodes")
        if self.weight.dim != 1:
            raise PreconditionError("ladder weight must be univariate")

    @property
    def k_max(self) -> int:
        return len(self.rules) - 1

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(r.size for r in self.rules)

    def rule(self, k: int) -> LadderRule:
        if not 0 <= k <= self.k_max:
            raise PreconditionError(f"ladder too short: level {k} requested, k_max={self.k_max}")
        return self.rules[k]

    def integrate_level(self, k: int, f) -> float:
        """``Q_{2^k} f`` for a univariate integrand."""
        r = self.rule(k)
        return integrate_1d(r.nodes, r.weights, r.scaled_weights, self.weight, f)


def _ladder_rule_from_gauss(k: int, g, kept=None) -> LadderRule:
    idx = g.indices if kept is None else g.indices[kept]
    sel = slice(None) if kept is None else kept
    return LadderRule(k, g.m, g.nodes[sel], g.weights[sel], g.scaled_weights[sel], idx)


def tg_ladder(
    weight: Weight,
    k_max: int,
    theta: float = 0.5,
    mode: str = "largest_zero",
    sonin_case: str = "i",
    alpha: float | None = None,
) -> DyadicLadder:
    """Truncated-Gauss ladder: ``Q_{2^k}`` is the TG rule of the largest degree with at most ``2^k`` nodes.

    Markov-Sonin case (i) has no one-node truncated rule; level 0 then
    falls back to the one-point Gauss rule.
    """
    w = weight.univariate()
    rules = []
    for k in range(k_max + 1):
        m = largest_degree_within(w, 2**k, theta, mode, sonin_case)
        if m == 1 and isinstance(w, MarkovSoninWeight) and sonin_case == "i":
            rules.append(_ladder_rule_from_gauss(k, gauss_rule_for(w, 1)))
            continue
        t = tg_rule(w, m, theta, mode, sonin_case)
        rules.append(_ladder_rule_from_gauss(k, t.base, t.kept))
    return DyadicLadder(tuple(rules), w, alpha, f"tg(theta={theta},mode={mode})")


def tg_ladder_sizes(
    weight: Weight, k_max: int, theta: float = 0.5, mode: str = "largest_zero", sonin_case: str = "i"
) -> tuple[int, ...]:
    """Node counts of :func:`tg_ladder` without forming the rules."""
    from .quad1d import tg_size

    w = weight.univariate()
    sizes = []
    for k in range(k_max + 1):
        m = largest_degree_within(w, 2**k, theta, mode, sonin_case)
        sizes.append(max(1, tg_size(w, m, theta, mode, sonin_case)))
    return tuple(sizes)


def gauss_ladder(weight: Weight, k_max: int, alpha: float | None = None) -> DyadicLadder:
    """Full Gauss ladder ``m_k = 2^k``."""
    w = weight.univariate()
    rules = tuple(_ladder_rule_from_gauss(k, gauss_rule_for(w, 2**k)) for k in range(k_max + 1))
    return DyadicLadder(rules, w, alpha, "gauss")


def _difference_rule(ladder: DyadicLadder, k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Nodes and signed weights of the univariate ``Delta_k``."""
    top = ladder.rule(k)
    if k == 0:
        return top.nodes, top.weights, top.scaled_weights
    low = ladder.rule(k - 1)
    return (
        np.concatenate([top.nodes, low.nodes]),
        np.concatenate([top.weights, -low.weights]),
        np.concatenate([top.scaled_weights, -low.scaled_weights]),
    )


def _grid(axes: Sequence[np.ndarray]) -> np.ndarray:
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _outer(vectors: Sequence[np.ndarray]) -> np.ndarray:
    out = vectors[0]
    for v in vectors[1:]:
        out = np.multiply.outer(out, v)
    return out


def _tensor_values(f, axes_nodes, axes_weights, axes_scaled, weight) -> np.ndarray:
    """``weights * f`` on the tensor grid, shaped like the grid."""
    pts = _grid(axes_nodes)
    w = _outer(axes_weights).ravel()
    with np.errstate(invalid="ignore"):
        s = _outer(axes_scaled).ravel()
    terms = weighted_terms(f, pts, w, s, weight)
    return terms.reshape([a.size for a in axes_nodes])


def delta_apply(
    ladder: DyadicLadder,
    k: Sequence[int] | MultiIndex,
    f,
    axis_order: Sequence[int] | None = None,
) -> float:
    """``Delta_k f`` as the tensor product of univariate difference rules.

    ``f`` takes ``(N, d)`` points.  ``axis_order`` fixes the order in
    which the axes are contracted; the result does not depend on it up to
    rounding.
    """
    k = MultiIndex(tuple(k))
    d = k.dim
    if k.linf > ladder.k_max:
        raise PreconditionError(f"ladder too short: |k|_inf={k.linf} > k_max={ladder.k_max}")
    parts = [_difference_rule(ladder, kv) for kv in k]
    weight = ladder.weight.with_dim(d)
    # evaluate f * w once on the grid, then contract weight by weight
    pts = _grid([p[0] for p in parts])
    ones = [np.ones(p[0].size) for p in parts]
    scaled_ok = all(np.all(np.isfinite(p[2])) for p in parts) and hasattr(f, "times_weight")
    if scaled_ok:
        vals = np.asarray(f.times_weight(pts, weight), dtype=float)
        factors = [p[2] for p in parts]
    else:
        vals = weighted_terms(f, pts, _outer(ones).ravel(), None, weight)
        factors = [p[1] for p in parts]
    if not np.all(np.isfinite(vals)):
        from .rules import _check

        _check(vals, pts)
    tensor = vals.reshape([p[0].size for p in parts])
    order = list(range(d)) if axis_order is None else list(axis_order)
    if sorted(order) != list(range(d)):
        raise PreconditionError(f"axis_order must permute 0..{d - 1}, got {order}")
    # contract in the requested order, tracking the shrinking axis numbering
    remaining = list(range(d))
    for ax in order:
        pos = remaining.index(ax)
        tensor = np.tensordot(tensor, factors[ax], axes=([pos], [0]))
        remaining.pop(pos)
    return float(tensor)


def delta_apply_expanded(ladder: DyadicLadder, k: Sequence[int] | MultiIndex, f) -> float:
    """``sum_e (-1)^{d-|e|} Q_{2^{k(e)}} f``, skipping terms with a ``Q_{2^{-1}}`` factor."""
    k = MultiIndex(tuple(k))
    d = k.dim
    weight = ladder.weight.with_dim(d)
    total = 0.0
    for size in range(d + 1):
        for e in itertools.combinations(range(d), size):
            levels = k.reduced(e)
            if any(v is None for v in levels):
                continue
            rules = [ladder.rule(v) for v in levels]
            vals = _tensor_values(f, [r.nodes for r in rules], [r.weights for r in rules], [r.scaled_weights for r in rules], weight)
            total += (-1) ** (d - size) * float(np.sum(vals))
    return total


def combination_coefficients(xi: float, d: int) -> dict[tuple[int, ...], int]:
    """Integer coefficients ``c_L`` with ``Q_xi = sum_L c_L Q_{2^L}`` (zeros dropped)."""
    level = math.floor(xi)
    coef: dict[tuple[int, ...], int] = {}
    for k in simplex(level, d):
        for size in range(d + 1):
            for e in itertools.combinations(range(d), size):
                levels = k.reduced(e)
                if any(v is None for v in levels):
                    continue
                coef[levels] = coef.get(levels, 0) + (-1) ** (d - size)
    return {key: c for key, c in sorted(coef.items()) if c != 0}


def hypercross_count(sizes: Sequence[int], xi: float, d: int) -> int:
    """``|G(xi)| = sum_{|k|_1 <= xi} sum_e prod_i |Q_{2^{k(e)_i}}|`` with ``k(e)_i = max(k_i - 1, 0)`` off ``e``.

    ``sizes[k]`` is the node count of ``Q_{2^k}``.
    """
    level = math.floor(xi)
    if level > len(sizes) - 1:
        raise PreconditionError(f"ladder too short: xi={xi} needs level {level}, have {len(sizes) - 1}")
    total = 0
    for k in simplex(level, d):
        for size in range(d + 1):
            for e in itertools.combinations(range(d), size):
                keep = set(e)
                total += math.prod(sizes[kv if i in keep else max(kv - 1, 0)] for i, kv in enumerate(k))
    return total


@dataclass(frozen=True)
class HyperCrossRule:
    """Merged Smolyak rule ``Q_xi`` with its accounting."""

    xi: float
    dim: int
    raw_count: int
    coefficients: dict = field(repr=False)
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    scaled_weights: np.ndarray = field(repr=False)
    weight: Weight = field(repr=False)

    @property
    def merged_count(self) -> int:
        return int(self.nodes.shape[0])

    def as_rule(self) -> QuadratureRule:
        return QuadratureRule(
            self.nodes,
            self.weights,
            self.weight,
            self.scaled_weights,
            provenance=f"hypercross(xi={self.xi},d={self.dim})",
            meta={"raw_count": self.raw_count},
        )

    def integrate(self, f) -> float:
        return integrate_hypercross(self, f)


def build_hypercross(
    ladder: DyadicLadder, xi: float, d: int, memory_cap: int = DEFAULT_MEMORY_CAP
) -> HyperCrossRule:
    """Enumerate ``G(xi)``, accumulate signed weights, and merge coincident nodes.

    Raises
    ------
    MemoryGuardError
        If the raw triple count exceeds ``memory_cap``.
    """
    if xi < 0:
        raise PreconditionError(f"xi must be nonnegative, got {xi}")
    if d < 1:
        raise PreconditionError(f"dimension must be positive, got {d}")
    if math.ceil(xi) > ladder.k_max and math.floor(xi) > ladder.k_max:
        raise PreconditionError(f"ladder too short: xi={xi} exceeds k_max={ladder.k_max}")
    raw = hypercross_count(ladder.sizes, xi, d)
    if raw > memory_cap:
        raise MemoryGuardError(f"raw count {raw} exceeds the memory cap {memory_cap}")
    coef = combination_coefficients(xi, d)
    node_blocks, w_blocks, s_blocks = [], [], []
    for levels, c in coef.items():
        rules = [ladder.rule(v) for v in levels]
        node_blocks.append(_grid([r.nodes for r in rules]))
        w_blocks.append(c * _outer([r.weights for r in rules]).ravel())
        with np.errstate(invalid="ignore"):
            s_blocks.append(c * _outer([r.scaled_weights for r in rules]).ravel())
    nodes = np.concatenate(node_blocks)
    weights = np.concatenate(w_blocks)
    scaled = np.concatenate(s_blocks)
    # merge on bitwise-identical coordinates
    uniq, inverse = np.unique(nodes, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    merged_w = np.bincount(inverse, weights=weights, minlength=uniq.shape[0])
    finite = np.isfinite(scaled)
    merged_s = np.bincount(inverse, weights=np.where(finite, scaled, 0.0), minlength=uniq.shape[0])
    bad = np.zeros(uniq.shape[0], dtype=bool)
    bad[inverse[~finite]] = True
    merged_s[bad] = np.inf
    return HyperCrossRule(float(xi), d, raw, coef, uniq, merged_w, merged_s, ladder.weight.with_dim(d))


def integrate_hypercross(rule: HyperCrossRule, f) -> float:
    """``sum_nodes weight * f(node)`` with the scaled route where available."""
    if rule.dim == 1:
        return integrate_1d(rule.nodes[:, 0], rule.weights, rule.scaled_weights, rule.weight.univariate(), f)
    terms = weighted_terms(f, rule.nodes, rule.weights, rule.scaled_weights, rule.weight)
    return float(np.sum(terms))


@dataclass(frozen=True)
class ProfileRow:
    xi: float
    raw_count: int
    merged_count: int
    abs_error: float


def error_profile(ladder: DyadicLadder, f, xi_range: Iterable[float], reference: float, d: int) -> list[ProfileRow]:
    """``|I - Q_xi f|`` over an increasing ``xi`` grid."""
    rows = []
    for xi in sorted(xi_range):
        rule = build_hypercross(ladder, xi, d)
        rows.append(ProfileRow(float(xi), rule.raw_count, rule.merged_count, abs(reference - rule.integrate(f))))
    return rows


# --- fooling construction ---------------------------------------------------


def gamma_set(m: int, d: int) -> list[tuple[int, ...]]:
    """``Gamma_d(M)``: ``s in N^d`` with ``prod s_i <= 2M`` and every ``s_i >= M^{1/d}``."""
    lo = math.ceil(m ** (1.0 / d) - 1e-12)
    lo = max(lo, 1)
    out: list[tuple[int, ...]] = []

    def rec(prefix: tuple[int, ...], budget: float):
        if len(prefix) == d:
            out.append(prefix)
            return
        rest = d - len(prefix) - 1
        s = lo
        while s * lo**rest <= budget:
            rec(prefix + (s,), budget / s)
            s += 1

    rec((), 2.0 * m)
    return out


def smallest_gamma_level(n: int, d: int) -> int:
    """Smallest integer ``M`` with ``|Gamma_d(M)| >= n + 1``."""
    m = 1
    while len(gamma_set(m, d)) < n + 1:
        m *= 2
    lo, hi = m // 2, m
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if len(gamma_set(mid, d)) >= n + 1:
            hi = mid
        else:
            lo = mid
    return hi if len(gamma_set(lo, d)) < n + 1 or lo < 1 else lo


@dataclass(frozen=True)
class FoolingBumpND:
    """Product bump ``h_bar = prod_i g_i / (w N)`` on a node-free cube ``K_s``."""

    s: tuple[int, ...]
    level: int
    delta: float
    r: int
    weight: FreudWeight = field(repr=False)
    integral: float
    norm: float
    norm_error: float

    @property
    def dim(self) -> int:
        return len(self.s)

    @property
    def lower(self) -> np.ndarray:
        return self.delta * (np.asarray(self.s, dtype=float) - 1.0)

    @property
    def certified(self) -> float:
        return self.integral / (self.norm + self.norm_error)

    def bump(self, x) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(x, dtype=float))
        u = (pts - self.lower) / self.delta
        return np.prod([bump_derivative(0, u[:, i]) for i in range(self.dim)], axis=0) / self.norm

    def times_weight(self, x, weight=None) -> np.ndarray:
        if weight is not None and weight.univariate() != self.weight:
            return self(x) * weight.with_dim(self.dim).evaluate(x)
        return self.bump(x)

    def __call__(self, x) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(x, dtype=float))
        g = self.bump(pts)
        out = np.zeros(pts.shape[0])
        nz = g != 0.0
        with np.errstate(over="ignore"):
            out[nz] = g[nz] * np.exp(-self.weight.with_dim(self.dim).log_evaluate(pts[nz]))
        return out


def fooling_bump_nd(nodes, r: int, weight: FreudWeight) -> FoolingBumpND:
    """Fooling bump for an arbitrary set of ``n`` points in ``R^d``.

    ``M_n`` is the smallest level with ``|Gamma_d(M_n)| >= n + 1``; the
    cube side is ``delta = M_n^{(1/lam - 1)/d}`` and the first ``s`` in
    ``Gamma_d(M_n)`` (lexicographic) whose open cube holds no node is used.
    """
    pts = np.atleast_2d(np.asarray(nodes, dtype=float))
    n, d = pts.shape
    w = weight.univariate()
    if r < 1:
        raise PreconditionError(f"r must be positive, got {r}")
    level = smallest_gamma_level(max(n, 1), d)
    delta = level ** ((1.0 / w.lam - 1.0) / d)
    chosen = None
    for s in gamma_set(level, d):
        lo = delta * (np.asarray(s, dtype=float) - 1.0)
        hi = delta * np.asarray(s, dtype=float)
        inside = np.all((pts > lo) & (pts < hi), axis=1)
        if not inside.any():
            chosen = s
            break
    if chosen is None:  # pragma: no cover - excluded by pigeonhole
        raise AssertionError("no node-free cube found")
    b0 = bump_constants(r)[0]
    fine, coarse = 1.0, 1.0
    for s_i in chosen:
        fine *= sum(bump_norm_terms(delta * (s_i - 1), delta, r, w, panels=128))
        coarse *= sum(bump_norm_terms(delta * (s_i - 1), delta, r, w, panels=64))
    return FoolingBumpND(tuple(chosen), level, delta, r, w, (delta * b0) ** d, fine, abs(fine - coarse))
