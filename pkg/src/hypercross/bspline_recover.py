"""Periodic B-spline quasi-interpolation and Smolyak sparse-grid recovery.

Level ``k`` works on the lattice ``h_k Z`` with ``h_k = 1 / (ell 2^k)``.
The dyadic quasi-interpolant is

    Q_k f = sum_s a_{k,s}(f) N_{k,s},   a_{k,s}(f) = sum_j lam(j) f(h_k (s - j + ell/2)),

with ``N_{k,s}(x) = M_ell(x / h_k - s)`` wrapped to the unit torus.  The
difference operator ``q_k = Q_k - Q_{k-1}`` is re-expanded in the level-k
basis through the two-scale relation of ``M_ell``, and the recovery
operator is ``R_m = sum_{|k|_1 <= m} q_k`` over ``k`` in ``N_0^d``.

Each one-dimensional ``q_k`` is a sparse matrix from samples on a point
set ``X_k`` to the ``ell 2^k`` coefficients; the d-dimensional component
is the tensor product of those matrices applied axis by axis.

Sample points are identified by integer numerators over the common
denominator ``2 ell 2^K``, so point sets are deduplicated exactly.
"""

from __future__ import annotations

import functools
import itertools
import math
import warnings
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import PreconditionError


def cardinal_bspline(ell: int, x) -> np.ndarray:
    """Cardinal B-spline ``M_ell`` with knots ``0, 1, ..., ell`` (Cox-de Boor)."""
    if ell < 1:
        raise PreconditionError(f"B-spline order must be >= 1, got {ell}")
    x = np.asarray(x, dtype=float)
    # order-1 pieces on [i, i+1) for i = 0..ell-1
    vals = [((x >= i) & (x < i + 1)).astype(float) for i in range(ell)]
    for order in range(2, ell + 1):
        vals = [
            ((x - i) * vals[i] + (i + order - x) * vals[i + 1]) / (order - 1)
            for i in range(ell - order + 1)
        ]
    return vals[0]


def refinement_mask(ell: int) -> np.ndarray:
    """Two-scale mask ``2^{-ell+1} C(ell, j)``: ``M(x) = sum_j mask_j M(2x - j)``."""
    return np.array([math.comb(ell, j) for j in range(ell + 1)], dtype=float) * 2.0 ** (1 - ell)


@dataclass(frozen=True)
class QuasiInterpScheme:
    """An even stencil ``lam(j), |j| <= mu`` paired with the B-spline order ``ell``."""

    name: str
    ell: int
    stencil: tuple[float, ...]

    def __post_init__(self):
        if len(self.stencil) % 2 == 0:
            raise PreconditionError("stencil must have odd length 2 mu + 1")
        if any(a != b for a, b in zip(self.stencil, reversed(self.stencil))):
            raise PreconditionError("stencil must be even: lam(-j) = lam(j)")

    @property
    def mu(self) -> int:
        return len(self.stencil) // 2

    @property
    def offsets(self) -> range:
        return range(-self.mu, self.mu + 1)

    @property
    def half_shift(self) -> bool:
        """Odd orders sample on the half-shifted lattice."""
        return self.ell % 2 == 1

    def quasi_interpolate(self, f: Callable, x) -> np.ndarray:
        """Non-periodic ``Q(f, x) = sum_s Lambda(f, s) M(x - s)`` on the integer lattice."""
        x = np.asarray(x, dtype=float)
        base = np.floor(x).astype(int)
        out = np.zeros_like(x)
        for shift in range(self.ell):
            s = base - shift
            lam = np.zeros_like(x)
            for j, c in zip(self.offsets, self.stencil):
                lam = lam + c * f(s - j + self.ell / 2.0)
            out = out + lam * cardinal_bspline(self.ell, x - s)
        return out


_BUILTIN = {
    "linear": (2, (1.0,)),
    "quadratic": (3, (-1.0 / 8.0, 10.0 / 8.0, -1.0 / 8.0)),
    "cubic": (4, (-1.0 / 6.0, 8.0 / 6.0, -1.0 / 6.0)),
}


def builtin_scheme(name: str) -> QuasiInterpScheme:
    """One of ``linear`` (ell=2), ``quadratic`` (ell=3) or ``cubic`` (ell=4)."""
    try:
        ell, stencil = _BUILTIN[name]
    except KeyError:
        raise PreconditionError(f"unknown scheme {name!r}; choose from {sorted(_BUILTIN)}") from None
    return QuasiInterpScheme(name, ell, stencil)


def scheme_for_smoothness(r: int) -> QuasiInterpScheme:
    """Scheme used by the cube rule for smoothness ``r``."""
    if r <= 1:
        return builtin_scheme("linear")
    if r in (2, 3):
        return builtin_scheme("cubic")
    raise PreconditionError(f"no builtin scheme for smoothness r={r}; supported r in 1..3")


# --- one-dimensional operators ---------------------------------------------
#
# Positions are integers over the denominator 2 * ell * 2^k at level k, so
# that half-shifted samples stay integral.


def _lattice_size(ell: int, k: int) -> int:
    return ell * 2**k


def _sample_numerators(scheme: QuasiInterpScheme, k: int) -> np.ndarray:
    """Numerators (denominator ``2 L_k``) of the samples read by ``a_k``."""
    size = _lattice_size(scheme.ell, k)
    t = np.arange(size)
    return (2 * t + (1 if scheme.half_shift else 0)) % (2 * size)


def _a_matrix(scheme: QuasiInterpScheme, k: int) -> sp.csr_matrix:
    """``a_k`` as a map from level-k lattice samples (indexed by ``t``) to coefficients."""
    size = _lattice_size(scheme.ell, k)
    rows, cols, vals = [], [], []
    half = scheme.ell // 2
    s = np.arange(size)
    for j, c in zip(scheme.offsets, scheme.stencil):
        # ell/2 = half (+ 1/2 for odd ell, absorbed into the sample lattice)
        rows.append(s)
        cols.append((s - j + half) % size)
        vals.append(np.full(size, c))
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(size, size)
    )


def _prolongation(ell: int, k: int) -> sp.csr_matrix:
    """Re-expansion of level ``k-1`` coefficients in the level-``k`` basis."""
    size = _lattice_size(ell, k)
    coarse = size // 2
    mask = refinement_mask(ell)
    sprime = np.arange(coarse)
    rows, cols, vals = [], [], []
    for j, mj in enumerate(mask):
        rows.append((2 * sprime + j) % size)
        cols.append(sprime)
        vals.append(np.full(coarse, mj))
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(size, coarse)
    )


@dataclass(frozen=True)
class LevelOperator:
    """``q_k`` in one dimension: ``coeffs = matrix @ f(points / denom)``."""

    k: int
    numerators: np.ndarray
    denom: int
    matrix: sp.csr_matrix

    @property
    def points(self) -> np.ndarray:
        return self.numerators / self.denom


@functools.lru_cache(maxsize=256)
def level_operator(scheme: QuasiInterpScheme, k: int) -> LevelOperator:
    """Sparse matrix of ``q_k`` (with ``Q_{-1} = 0``) and the points it reads."""
    size = _lattice_size(scheme.ell, k)
    denom = 2 * size
    fine = _sample_numerators(scheme, k)
    a_fine = _a_matrix(scheme, k)
    if k == 0:
        return LevelOperator(k, fine, denom, a_fine.tocsr())
    coarse = 2 * _sample_numerators(scheme, k - 1)  # rescaled to denominator 2 L_k
    diff = -(_prolongation(scheme.ell, k) @ _a_matrix(scheme, k - 1))
    if scheme.half_shift:
        pts = np.concatenate([fine, coarse])
        mat = sp.hstack([a_fine, diff])
    else:
        # coarse samples sit on even lattice sites of the fine lattice
        pts = fine
        index = coarse // 2
        diff = diff.tocoo()
        moved = sp.csr_matrix((diff.data, (diff.row, index[diff.col])), shape=(size, size))
        mat = a_fine + moved
    order = np.argsort(pts, kind="stable")
    pts = pts[order]
    mat = sp.csr_matrix(mat)[:, order]
    uniq, inverse = np.unique(pts, return_inverse=True)
    if uniq.size != pts.size:
        gather = sp.csr_matrix((np.ones(pts.size), (np.arange(pts.size), inverse)), shape=(pts.size, uniq.size))
        mat = mat @ gather
    mat = sp.csr_matrix(mat)
    mat.eliminate_zeros()
    return LevelOperator(k, uniq, denom, mat)


def basis_values(ell: int, k: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Indices ``(P, ell)`` and values of the nonzero ``N_{k,s}`` at points ``x``."""
    size = _lattice_size(ell, k)
    u = np.mod(np.asarray(x, dtype=float), 1.0) * size
    base = np.floor(u).astype(np.int64)
    shifts = np.arange(ell)
    s = base[:, None] - shifts[None, :]
    vals = cardinal_bspline(ell, u[:, None] - s)
    return np.mod(s, size), vals


def _apply_axis(mat: sp.csr_matrix, arr: np.ndarray, axis: int) -> np.ndarray:
    moved = np.moveaxis(arr, axis, 0)
    shape = moved.shape
    out = mat @ moved.reshape(shape[0], -1)
    return np.moveaxis(np.asarray(out).reshape((mat.shape[0],) + shape[1:]), 0, axis)


def _tensor_points(ops: Sequence[LevelOperator]) -> np.ndarray:
    grids = np.meshgrid(*[op.points for op in ops], indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


@dataclass(frozen=True)
class DyadicComponent:
    """Coefficients ``c_{k,s}`` of ``q_k f`` on the level-``k`` basis."""

    k: tuple[int, ...]
    coefficients: np.ndarray
    sample_count: int


def _evaluate_samples(samples: Callable, pts: np.ndarray, dim: int) -> np.ndarray:
    vals = samples(pts[:, 0] if dim == 1 else pts)
    return np.asarray(vals, dtype=float).reshape(-1)


def periodic_qk_apply(scheme: QuasiInterpScheme, k: Sequence[int], samples: Callable) -> DyadicComponent:
    """Compute the difference component ``q_k f`` from point samples.

    ``samples`` is a vectorized function on ``(N, d)`` points of ``[0, 1)^d``
    (``(N,)`` when ``d == 1``).
    """
    k = tuple(int(v) for v in k)
    if any(v < 0 for v in k):
        raise PreconditionError(f"levels must be nonnegative, got {k}")
    ops = [level_operator(scheme, v) for v in k]
    pts = _tensor_points(ops)
    vals = _evaluate_samples(samples, pts, len(k)).reshape([op.numerators.size for op in ops])
    for axis, op in enumerate(ops):
        vals = _apply_axis(op.matrix, vals, axis)
    return DyadicComponent(k, vals, pts.shape[0])


def levels_upto(m: int, d: int) -> list[tuple[int, ...]]:
    """All ``k`` in ``N_0^d`` with ``|k|_1 <= m`` in lexicographic order."""
    if m < 0:
        return []
    return [k for k in itertools.product(range(m + 1), repeat=d) if sum(k) <= m]


@dataclass(frozen=True)
class RecoveredFunction:
    """``R_m f`` as a callable on ``[0,1)^d`` (periodically extended)."""

    scheme: QuasiInterpScheme
    m: int
    dim: int
    components: tuple[DyadicComponent, ...] = field(repr=False)
    sample_points: np.ndarray = field(repr=False)

    def __call__(self, x) -> np.ndarray:
        pts = np.asarray(x, dtype=float)
        if self.dim == 1:
            pts = pts.reshape(-1, 1)
        pts = np.atleast_2d(pts)
        out = np.zeros(pts.shape[0])
        ell = self.scheme.ell
        cache: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}
        for comp in self.components:
            bases = []
            for axis, kv in enumerate(comp.k):
                key = (axis, kv)
                if key not in cache:
                    cache[key] = basis_values(ell, kv, pts[:, axis])
                bases.append(cache[key])
            for combo in itertools.product(range(ell), repeat=self.dim):
                idx = tuple(bases[i][0][:, c] for i, c in enumerate(combo))
                weight = np.prod([bases[i][1][:, c] for i, c in enumerate(combo)], axis=0)
                out += comp.coefficients[idx] * weight
        return out


def smolyak_recover(scheme: QuasiInterpScheme, m: int, samples: Callable, d: int) -> RecoveredFunction:
    """The sparse-grid recovery operator ``R_m f = sum_{|k|_1 <= m} q_k f``.

    Values of ``samples`` are read once per distinct grid point.
    """
    grid = grid_points(m, d, scheme.ell, scheme=scheme)
    values = _evaluate_samples(samples, grid.points, d)
    lookup = {tuple(row): v for row, v in zip(grid.numerators.tolist(), values)}
    scale = grid.denom

    def cached(pts):
        pts = np.asarray(pts, dtype=float).reshape(len(pts), -1)
        keys = np.rint(pts * scale).astype(np.int64)
        return np.array([lookup[tuple(row)] for row in keys.tolist()])

    comps = tuple(periodic_qk_apply(scheme, k, cached) for k in levels_upto(m, d))
    return RecoveredFunction(scheme, m, d, comps, grid.points)


def recover_separable(
    scheme: QuasiInterpScheme, m: int, factors: Sequence[Callable]
) -> SeparableRecovery:
    """``R_m`` of a product ``f(x) = prod_i g_i(x_i)``, using ``q_k f = prod_i q_{k_i} g_i``."""
    d = len(factors)
    per_axis = []
    for g in factors:
        comps = []
        for kv in range(m + 1):
            op = level_operator(scheme, kv)
            comps.append(op.matrix @ np.asarray(g(op.points), dtype=float))
        per_axis.append(comps)
    return SeparableRecovery(scheme, m, d, per_axis)


@dataclass(frozen=True)
class SeparableRecovery:
    scheme: QuasiInterpScheme
    m: int
    dim: int
    per_axis: list = field(repr=False)

    def axis_values(self, axis: int, x: np.ndarray) -> np.ndarray:
        """``(m+1, P)`` table of ``q_j g_axis`` at points ``x``."""
        rows = []
        for kv, coef in enumerate(self.per_axis[axis]):
            idx, val = basis_values(self.scheme.ell, kv, x)
            rows.append(np.sum(coef[idx] * val, axis=1))
        return np.array(rows)

    def on_grid(self, axes: Sequence[np.ndarray]) -> np.ndarray:
        """Values of ``R_m f`` on the tensor grid ``axes[0] x axes[1] x ...``."""
        tables = [self.axis_values(i, np.asarray(a, dtype=float)) for i, a in enumerate(axes)]
        out = np.zeros([len(a) for a in axes])
        for k in levels_upto(self.m, self.dim):
            term = tables[0][k[0]]
            for i in range(1, self.dim):
                term = np.multiply.outer(term, tables[i][k[i]])
            out += term
        return out

    def __call__(self, x) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(x, dtype=float).reshape(-1, self.dim))
        tables = [self.axis_values(i, pts[:, i]) for i in range(self.dim)]
        out = np.zeros(pts.shape[0])
        for k in levels_upto(self.m, self.dim):
            out += np.prod([tables[i][k[i]] for i in range(self.dim)], axis=0)
        return out


@dataclass(frozen=True)
class SmolyakGrid:
    """Deduplicated sample set with exact numerators over ``denom``."""

    m: int
    dim: int
    ell: int
    numerators: np.ndarray
    denom: int

    @property
    def points(self) -> np.ndarray:
        return self.numerators / self.denom

    @property
    def size(self) -> int:
        return int(self.numerators.shape[0])


def grid_points(
    m: int,
    d: int,
    ell: int,
    positive_levels: bool = False,
    scheme: QuasiInterpScheme | None = None,
) -> SmolyakGrid:
    """The Smolyak grid ``union_{|k|_1 = m} h_k I(k)``.

    By default levels range over ``N_0^d``, which makes the grid equal to
    the sample set of ``R_m``.  ``positive_levels=True`` restricts to
    ``k in N^d``; the grid is then empty (with a warning) when ``m < d``.
    For odd ``ell`` pass ``scheme`` to get the union of the half-shifted
    sample sets actually read by ``R_m``.
    """
    if positive_levels:
        levels = [k for k in itertools.product(range(1, m + 1), repeat=d) if sum(k) == m]
        if not levels:
            warnings.warn(f"Smolyak grid with m={m} < d={d} over positive levels is empty", stacklevel=2)
            return SmolyakGrid(m, d, ell, np.zeros((0, d), dtype=np.int64), ell * 2 ** max(m, 0))
    else:
        levels = [k for k in itertools.product(range(m + 1), repeat=d) if sum(k) == m]
    top = max(m, 0)
    if scheme is not None and scheme.half_shift:
        denom = 2 * _lattice_size(ell, top)
        keys = set()
        for k in levels_upto(m, d):
            ops = [level_operator(scheme, v) for v in k]
            axes = [op.numerators * (denom // op.denom) for op in ops]
            keys.update(itertools.product(*[a.tolist() for a in axes]))
        nums = np.array(sorted(keys), dtype=np.int64).reshape(-1, d)
        return SmolyakGrid(m, d, ell, nums, denom)
    denom = _lattice_size(ell, top)
    keys = set()
    for k in levels:
        axes = [np.arange(_lattice_size(ell, v)) * 2 ** (top - v) for v in k]
        keys.update(itertools.product(*[a.tolist() for a in axes]))
    nums = np.array(sorted(keys), dtype=np.int64).reshape(-1, d)
    return SmolyakGrid(m, d, ell, nums, denom)


def cube_functional(scheme: QuasiInterpScheme, k: int) -> tuple[np.ndarray, np.ndarray, int]:
    """Weights of ``f -> int_0^1 q_k f`` on the points read by ``q_k``."""
    op = level_operator(scheme, k)
    # every N_{k,s} integrates to h_k over the torus
    weights = np.asarray(op.matrix.sum(axis=0)).ravel() / _lattice_size(scheme.ell, k)
    return op.numerators, weights, op.denom
