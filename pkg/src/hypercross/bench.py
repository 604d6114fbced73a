"""Convergence tables, rate regression and byte-stable emission.

Every method maps to one library operation:

==================  ==========================================================
``tg``              :func:`hypercross.quad1d.tg_rule_for_budget`
``gauss-full``      :func:`hypercross.orthopoly.gauss_rule_for`
``hypercross``      :func:`hypercross.sparse_quad.build_hypercross`
``assembled``       :func:`hypercross.assembled_quad.assemble` (``assemble_partitioned`` with ``theta``)
``fibonacci``       :func:`hypercross.cube_rules.fibonacci_rule`
``smolyak-bspline`` :func:`hypercross.cube_rules.smolyak_bspline_cube_rule`
``recover``         :func:`hypercross.bspline_recover.recover_separable`
==================  ==========================================================

``hypercross`` and ``recover`` are indexed by a level (``xi`` or ``m``);
the others by a node budget ``n``.  For rate fits a level ``l`` is read
as the budget scale ``2^l``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
import warnings
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import assembled_quad as aq
from .bspline_recover import (
    builtin_scheme,
    grid_points,
    recover_separable,
    scheme_for_smoothness,
)
from .corpus_oracle import CorpusFn, corpus_member
from .cube_rules import (
    fibonacci_index_within,
    fibonacci_rule,
    periodize,
    smolyak_bspline_cube_rule,
)
from .errors import ConvergenceError, PreconditionError
from .orthopoly import gauss_rule_for
from .quad1d import fooling_bump_1d, tg_rule, tg_rule_for_budget
from .sparse_quad import build_hypercross, fooling_bump_nd, gauss_ladder, tg_ladder
from .weights import FreudWeight, RateParams, Weight, parse_weight

METHODS: Mapping[str, str] = {
    "tg": "truncated Gauss rule in d=1 (quad1d.tg_rule_for_budget)",
    "gauss-full": "full Gauss rule in d=1 (orthopoly.gauss_rule_for)",
    "hypercross": "Smolyak combination of a truncated-Gauss ladder (sparse_quad.build_hypercross)",
    "assembled": "shifted-cube assembled rule on R^d (assembled_quad.assemble[_partitioned])",
    "fibonacci": "Fibonacci lattice rule on the unit cube, d=2 (cube_rules.fibonacci_rule)",
    "smolyak-bspline": "exact integral of the sparse B-spline recovery (cube_rules.smolyak_bspline_cube_rule)",
    "recover": "sparse-grid B-spline recovery, dense-probe L2 error (bspline_recover.recover_separable)",
}
LEVEL_METHODS = {"hypercross": "xi", "recover": "m"}
FORMATS = ("csv", "json", "plotdata")
DEFAULT_BUDGETS = tuple(2**j for j in range(5, 13))
DEFAULT_LEVELS = tuple(range(3, 13))
SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ConvergenceRow:
    """One budget (or level) of a convergence run."""

    n: int
    nodes_used: int
    abs_error: float
    seconds: float = field(default=0.0, compare=False)
    extra: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not self.abs_error >= 0.0:
            raise PreconditionError(f"abs_error must be nonnegative, got {self.abs_error}")


@dataclass(frozen=True)
class ConvergenceTable:
    method: str
    fn: str
    weight: str
    reference: float
    rows: tuple[ConvergenceRow, ...]
    columns: tuple[str, ...] = ()
    params: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        budgets = [row.n for row in self.rows]
        if budgets != sorted(budgets):
            raise PreconditionError("rows must be sorted by budget")

    @property
    def index_name(self) -> str:
        return LEVEL_METHODS.get(self.method, "n")

    @property
    def scales(self) -> np.ndarray:
        """Budget scale used in rate fits: ``n``, or ``2^level`` for level methods."""
        n = np.array([row.n for row in self.rows], dtype=float)
        return 2.0**n if self.method in LEVEL_METHODS else n


@dataclass(frozen=True)
class MethodOptions:
    """Method parameters shared by the CLI and the tests."""

    theta: float = 0.5
    ladder: str = "tg"
    by_degree: bool = False
    truncation: str = "largest_zero"
    sonin_case: str = "i"
    alpha: float | None = None
    r: int = 1
    base: str = "fibonacci"
    partition_theta: float | None = None
    schedule_mode: str = "paper"
    delta: float | None = None
    psi: int | None = None
    scheme: str | None = None
    probe: int | None = None


def _reference(fn: CorpusFn, weight_spec: str, cube: bool) -> float:
    try:
        ref = fn.cube_reference() if cube else fn.reference()
    except ConvergenceError as exc:
        raise ConvergenceError(
            f"no reference for {fn.id}: {exc}; run `hypercross corpus --fn {fn.id} "
            f"--weight {weight_spec} --reference` to diagnose the oracle"
        ) from None
    return ref.value


def _probe_errors(fn: CorpusFn, rec, probe: int) -> tuple[float, float]:
    """Discrete L2 and max errors on the midpoint grid with ``probe`` points per axis."""
    x = (np.arange(probe) + 0.5) / probe
    diff = rec.on_grid([x] * fn.dim)
    exact = np.ones(())
    for g in fn.factors:
        exact = np.multiply.outer(exact, g.value(x))
    diff = diff - exact
    return float(np.sqrt(np.mean(diff**2))), float(np.max(np.abs(diff)))


def _require_dim(fn: CorpusFn, method: str, d: int | None = None, at_most: int | None = None) -> None:
    if d is not None and fn.dim != d:
        raise PreconditionError(f"method {method!r} needs d={d}, got {fn.id}")
    if at_most is not None and fn.dim > at_most:
        raise PreconditionError(f"method {method!r} supports d <= {at_most}, got {fn.id}")


def _cube_base(opts: MethodOptions, d: int, r: int):
    if opts.base == "fibonacci":
        if d != 2:
            raise PreconditionError("the Fibonacci base exists only for d=2")
        return aq.fibonacci_family(r, opts.psi)
    if opts.base == "smolyak-bspline":
        return aq.smolyak_family(r, d, opts.psi)
    raise PreconditionError(f"unknown base family {opts.base!r}")


def _tg(w: Weight, n: int, opts: MethodOptions):
    if opts.by_degree:
        return tg_rule(w, n, opts.theta, opts.truncation, opts.sonin_case)
    return tg_rule_for_budget(w, n, opts.theta, opts.truncation, opts.sonin_case)


def _ladder(w: Weight, k_max: int, opts: MethodOptions):
    if opts.ladder == "tg":
        return tg_ladder(w, k_max, opts.theta, opts.truncation, opts.sonin_case, opts.alpha)
    if opts.ladder == "gauss":
        return gauss_ladder(w, k_max, opts.alpha)
    raise PreconditionError(f"unknown ladder {opts.ladder!r}; expected 'tg' or 'gauss'")


def _row(method: str, fn: CorpusFn, w: Weight, n: int, opts: MethodOptions, cache: dict):
    """``(nodes_used, value, extra)``; for ``recover`` the value is the L2 error itself."""
    if method == "tg":
        _require_dim(fn, method, d=1)
        rule = _tg(w, n, opts)
        return rule.size, rule.integrate(fn), {}
    if method == "gauss-full":
        _require_dim(fn, method, d=1)
        rule = gauss_rule_for(w, n)
        return rule.m, rule.integrate(fn), {}
    if method == "hypercross":
        ladder = cache.get("ladder")
        if ladder is None or ladder.k_max < math.floor(n):
            top = max(math.floor(n), cache.get("k_top", 0), 0)
            ladder = _ladder(w, top, opts)
            cache["ladder"] = ladder
        rule = build_hypercross(ladder, n, fn.dim)
        extra = {"raw_count": rule.raw_count, "merged_count": rule.merged_count}
        return rule.merged_count, rule.integrate(fn), extra
    if method == "assembled":
        if not isinstance(w.univariate(), FreudWeight):
            raise PreconditionError("the assembled rule needs a Freud weight")
        r = opts.r
        alpha = float(r) if opts.alpha is None else opts.alpha
        base = _cube_base(opts, fn.dim, r)
        sched = aq.schedule(n, alpha, w, opts.delta, opts.schedule_mode, d=fn.dim)
        if opts.partition_theta is None:
            rule = aq.assemble(sched, base, w)
        else:
            rule = aq.assemble_partitioned(sched, base, w, opts.partition_theta)
        return rule.size, rule.integrate(fn), {"xi_n": sched.xi_n}
    if method in ("fibonacci", "smolyak-bspline"):
        if method == "fibonacci":
            _require_dim(fn, method, d=2)
            rule = fibonacci_rule(fibonacci_index_within(n), opts.r)
        else:
            _require_dim(fn, method, at_most=3)
            rule = smolyak_bspline_cube_rule(n, opts.r, fn.dim)
        if opts.psi:
            rule = periodize(rule, opts.psi)
        return rule.size, rule.integrate(fn), {}
    if method == "recover":
        _require_dim(fn, method, at_most=3)
        if not fn.periodic:
            raise PreconditionError(f"recovery targets 1-periodic members, {fn.id} is not periodic")
        scheme = builtin_scheme(opts.scheme) if opts.scheme else scheme_for_smoothness(opts.r)
        probe = opts.probe or (4096 if fn.dim <= 2 else 128)
        rec = recover_separable(scheme, n, [g.value for g in fn.factors])
        used = grid_points(n, fn.dim, scheme.ell, scheme=scheme).size
        l2, linf = _probe_errors(fn, rec, probe)
        return used, l2, {"linf_error": linf}
    raise PreconditionError(f"unknown method {method!r}; choose from {sorted(METHODS)}")


def _columns(method: str) -> tuple[str, ...]:
    if method in _LAYOUTS:
        return tuple(name for name, kind in _LAYOUTS[method] if kind == "extra")
    return ()


def run_convergence(
    method: str,
    fn_id: str,
    budgets: Sequence[int] | None = None,
    weight: Weight | str = "gauss:d=1",
    options: MethodOptions | None = None,
    reference: float | None = None,
) -> ConvergenceTable:
    """Error table of ``method`` on a corpus member over increasing budgets.

    Parameters
    ----------
    method : str
        One of :data:`METHODS`.
    fn_id : str
        Corpus id, e.g. ``"tail:r=1,d=1"``; its dimension fixes ``d``.
    budgets : sequence of int, optional
        Node budgets, or levels for ``hypercross``/``recover``.
    weight : Weight or str
        Measure for the weighted methods; ignored by the cube methods.
    reference : float, optional
        Overrides the oracle reference.

    Raises
    ------
    ConvergenceError
        When no reference can be certified; the message names the
        ``corpus`` command that reproduces the oracle failure.
    """
    if method not in METHODS:
        raise PreconditionError(f"unknown method {method!r}; choose from {sorted(METHODS)}")
    opts = options or MethodOptions()
    w = parse_weight(weight) if isinstance(weight, str) else weight
    spec = w.spec() if not isinstance(weight, str) else weight
    fn = corpus_member(fn_id, w)
    w = fn.weight
    if budgets is None:
        budgets = DEFAULT_LEVELS if method in LEVEL_METHODS else DEFAULT_BUDGETS
    budgets = sorted(budgets)
    if method == "recover":
        ref = 0.0
    elif reference is not None:
        ref = float(reference)
    else:
        ref = _reference(fn, spec, cube=method in ("fibonacci", "smolyak-bspline"))
    rows, cache = [], {"k_top": math.floor(max(budgets, default=0))}
    for n in budgets:
        start = time.perf_counter()
        used, value, extra = _row(method, fn, w, n, opts, cache)
        rows.append(ConvergenceRow(n, used, abs(value - ref), time.perf_counter() - start, extra))
    params = {k: v for k, v in vars(opts).items() if v is not None}
    return ConvergenceTable(method, fn.id, spec, ref, tuple(rows), _columns(method), params)


def evaluate_method(
    method: str, fn_id: str, n: int, weight: Weight | str = "gauss:d=1", options: MethodOptions | None = None
) -> tuple[float, int]:
    """``(value, nodes_used)`` of one method application at budget ``n``."""
    if method not in METHODS:
        raise PreconditionError(f"unknown method {method!r}; choose from {sorted(METHODS)}")
    w = parse_weight(weight) if isinstance(weight, str) else weight
    fn = corpus_member(fn_id, w)
    used, value, _ = _row(method, fn, fn.weight, n, options or MethodOptions(), {})
    return value, used


def indexed_rule_1d(
    method: str, n: int, weight: Weight | str = "gauss:d=1", options: MethodOptions | None = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(signed indices k, nodes, weights)`` of a ``tg`` or ``gauss-full`` rule."""
    opts = options or MethodOptions()
    w = (parse_weight(weight) if isinstance(weight, str) else weight).univariate()
    if method == "tg":
        rule = _tg(w, n, opts)
        return rule.kept_indices, rule.kept_nodes, rule.kept_weights
    if method == "gauss-full":
        rule = gauss_rule_for(w, n)
        return rule.indices, rule.nodes, rule.weights
    raise PreconditionError(f"indexed 1-D dumps exist for tg and gauss-full, not {method!r}")


def node_set(
    method: str, n: int, weight: Weight | str = "gauss:d=1", d: int | None = None, options: MethodOptions | None = None
) -> tuple[np.ndarray, np.ndarray | None]:
    """``(nodes (N, d), weights)`` of a method at budget ``n``; ``recover`` returns its sample grid and no weights."""
    opts = options or MethodOptions()
    w = parse_weight(weight) if isinstance(weight, str) else weight
    d = w.dim if d is None else d
    w = w.with_dim(d)
    if method == "tg":
        rule = _tg(w.univariate(), n, opts)
        return rule.kept_nodes.reshape(-1, 1), rule.kept_weights
    if method == "gauss-full":
        rule = gauss_rule_for(w.univariate(), n)
        return rule.nodes.reshape(-1, 1), rule.weights
    if method == "hypercross":
        rule = build_hypercross(_ladder(w, max(math.floor(n), 0), opts), n, d)
        return rule.nodes, rule.weights
    if method == "assembled":
        alpha = float(opts.r) if opts.alpha is None else opts.alpha
        sched = aq.schedule(n, alpha, w, opts.delta, opts.schedule_mode, d=d)
        base = _cube_base(opts, d, opts.r)
        if opts.partition_theta is None:
            rule = aq.assemble(sched, base, w)
        else:
            rule = aq.assemble_partitioned(sched, base, w, opts.partition_theta)
        return rule.nodes, rule.weights
    if method == "fibonacci":
        if d != 2:
            raise PreconditionError("the Fibonacci rule exists only for d=2")
        rule = fibonacci_rule(fibonacci_index_within(n), opts.r)
    elif method == "smolyak-bspline":
        rule = smolyak_bspline_cube_rule(n, opts.r, d)
    elif method == "recover":
        scheme = builtin_scheme(opts.scheme) if opts.scheme else scheme_for_smoothness(opts.r)
        return grid_points(n, d, scheme.ell, scheme=scheme).points, None
    else:
        raise PreconditionError(f"unknown method {method!r}; choose from {sorted(METHODS)}")
    if opts.psi:
        rule = periodize(rule, opts.psi)
    return rule.nodes, rule.weights


# --- rate regression -------------------------------------------------------


@dataclass(frozen=True)
class RateFit:
    """``error ~ C n^{-alpha} (log n)^beta`` with ``beta`` held fixed."""

    model: str
    alpha: float
    alpha_stderr: float
    constant: float
    beta: float
    residual: float
    n_range: tuple[float, float]
    rows_used: int
    scales: tuple[float, ...] = field(repr=False, default=())

    def predict(self, n) -> np.ndarray:
        n = np.asarray(n, dtype=float)
        return self.constant * n ** (-self.alpha) * np.log(n) ** self.beta


def fit_rate(table: ConvergenceTable | Sequence[tuple[float, float]], beta_fixed: float = 0.0) -> RateFit:
    """Least squares of ``log e - beta log log n`` on ``log n``.

    ``table`` is a :class:`ConvergenceTable` or ``(n, error)`` pairs.
    Rows with nonpositive error are dropped with a warning; fewer than
    five surviving rows is an error.
    """
    if isinstance(table, ConvergenceTable):
        n = table.scales
        err = np.array([row.abs_error for row in table.rows], dtype=float)
    else:
        pairs = np.asarray(table, dtype=float).reshape(-1, 2)
        n, err = pairs[:, 0], pairs[:, 1]
    keep = err > 0.0
    if not keep.all():
        warnings.warn(f"dropping {int((~keep).sum())} rows with nonpositive error", stacklevel=2)
    n, err = n[keep], err[keep]
    if n.size < 5:
        raise PreconditionError(f"rate fit needs at least 5 rows with positive error, got {n.size}")
    if beta_fixed != 0.0 and np.any(n <= 1.0):
        raise PreconditionError("the log correction needs n > 1")
    y = np.log(err) - (beta_fixed * np.log(np.log(n)) if beta_fixed != 0.0 else 0.0)
    x = np.log(n)
    design = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    dof = max(n.size - 2, 1)
    sigma2 = float(resid @ resid) / dof
    cov = sigma2 * np.linalg.inv(design.T @ design)
    model = "pure_power" if beta_fixed == 0.0 else "power_log"
    return RateFit(
        model,
        float(-coef[1]),
        float(math.sqrt(cov[1, 1])),
        float(math.exp(coef[0])),
        float(beta_fixed),
        float(math.sqrt(float(resid @ resid) / n.size)),
        (float(n.min()), float(n.max())),
        int(n.size),
        tuple(float(v) for v in n),
    )


# --- fooling tables --------------------------------------------------------


def fooling_table(budgets: Sequence[int], r: int, weight: Weight | str = "gauss:d=1", d: int = 1) -> ConvergenceTable:
    """Certified lower-bound integrals of fooling bumps.

    ``d = 1`` fools the truncated Gauss rule for budget ``n``; ``d > 1``
    fools the hypercross rule of the largest integer level with at most
    ``n`` merged nodes.  ``abs_error`` is the certified weighted integral,
    which any rule on those nodes misses.
    """
    w = parse_weight(weight) if isinstance(weight, str) else weight
    spec = weight if isinstance(weight, str) else w.spec()
    w1 = w.univariate()
    if not isinstance(w1, FreudWeight):
        raise PreconditionError("fooling bumps need a Freud weight")
    rows = []
    ladder = None
    for n in sorted(budgets):
        start = time.perf_counter()
        if d == 1:
            nodes = tg_rule_for_budget(w1, n).kept_nodes
            bump = fooling_bump_1d(nodes, n, r, w1)
            peak = float(np.max(np.abs(bump(nodes)))) if nodes.size else 0.0
        else:
            level, nodes = 0, None
            while True:
                if ladder is None or ladder.k_max < level:
                    ladder = tg_ladder(w1, level + 2)
                rule = build_hypercross(ladder, level, d)
                if rule.merged_count > n:
                    break
                nodes, level = rule.nodes, level + 1
            if nodes is None:
                raise PreconditionError(f"no hypercross rule fits n={n} in d={d}")
            bump = fooling_bump_nd(nodes, r, w1.with_dim(d))
            peak = float(np.max(np.abs(bump(nodes))))
        extra = {"norm": bump.norm, "norm_error": bump.norm_error, "max_node_value": peak}
        rows.append(ConvergenceRow(n, int(np.atleast_1d(nodes).shape[0]), bump.certified, time.perf_counter() - start, extra))
    rate = RateParams(r, w1.lam).r_lambda
    return ConvergenceTable("fool", f"fool:r={r},d={d}", spec, 0.0, tuple(rows), _columns("fool"), {"r_lambda": rate})


# --- emission --------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


_LAYOUTS: Mapping[str, tuple[tuple[str, str], ...]] = {
    "hypercross": (("xi", "n"), ("raw_count", "extra"), ("merged_count", "extra"), ("abs_error", "error")),
    "recover": (("m", "n"), ("grid_size", "used"), ("l2_error", "error"), ("linf_error", "extra")),
    "assembled": (("n", "n"), ("n_used", "used"), ("xi_n", "extra"), ("abs_error", "error")),
    "fool": (
        ("n", "n"),
        ("n_used", "used"),
        ("norm", "extra"),
        ("norm_error", "extra"),
        ("max_node_value", "extra"),
        ("certified", "error"),
    ),
}
_ERROR_COLUMNS = ("abs_error", "l2_error", "certified")


def _layout(table: ConvergenceTable) -> tuple[tuple[str, str], ...]:
    if table.method in _LAYOUTS:
        return _LAYOUTS[table.method]
    return (("n", "n"), ("n_used", "used"), *[(c, "extra") for c in table.columns], ("abs_error", "error"))


def _header(table: ConvergenceTable, timing: bool) -> list[str]:
    cols = [name for name, _ in _layout(table)]
    return cols + ["seconds"] if timing else cols


def _row_values(table: ConvergenceTable, row: ConvergenceRow, timing: bool) -> list:
    pick = {"n": lambda _: row.n, "used": lambda _: row.nodes_used, "error": lambda _: row.abs_error}
    vals = [pick[kind](name) if kind in pick else row.extra[name] for name, kind in _layout(table)]
    return vals + [row.seconds] if timing else vals


def to_csv(table: ConvergenceTable | RateFit, timing: bool = False) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if isinstance(table, RateFit):
        writer.writerow(["model", "alpha", "alpha_stderr", "constant", "beta", "residual", "n_min", "n_max", "rows"])
        f = table
        writer.writerow([f.model, *map(_fmt, (f.alpha, f.alpha_stderr, f.constant, f.beta, f.residual, *f.n_range)), f.rows_used])
        return buf.getvalue()
    writer.writerow(_header(table, timing))
    for row in table.rows:
        writer.writerow([_fmt(v) for v in _row_values(table, row, timing)])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    return v


def to_json(table: ConvergenceTable | RateFit, timing: bool = False) -> str:
    if isinstance(table, RateFit):
        f = table
        doc = {
            "schema_version": SCHEMA_VERSION,
            "kind": "fit",
            "model": f.model,
            "alpha": f.alpha,
            "alpha_stderr": f.alpha_stderr,
            "constant": f.constant,
            "beta": f.beta,
            "residual": f.residual,
            "n_range": list(f.n_range),
            "rows_used": f.rows_used,
        }
    else:
        header = _header(table, timing)
        doc = {
            "schema_version": SCHEMA_VERSION,
            "kind": "convergence",
            "method": table.method,
            "fn": table.fn,
            "weight": table.weight,
            "reference": table.reference,
            "params": {k: _jsonable(v) for k, v in sorted(table.params.items())},
            "columns": header,
            "rows": [dict(zip(header, map(_jsonable, _row_values(table, row, timing)))) for row in table.rows],
        }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def to_plotdata(table: ConvergenceTable | RateFit) -> str:
    """``log2(scale) log2(error)`` per row; a fit emits its model at the fitted scales."""
    if isinstance(table, RateFit):
        xs = np.asarray(table.scales, dtype=float)
        ys = table.predict(xs)
    else:
        xs = table.scales
        ys = np.array([row.abs_error for row in table.rows], dtype=float)
    with np.errstate(divide="ignore"):
        lines = [f"{_fmt(math.log2(x))} {_fmt(np.log2(y))}" for x, y in zip(xs, ys)]
    return "\n".join(lines) + "\n"


def emit(table: ConvergenceTable | RateFit, fmt: str = "csv", path=None, timing: bool = False) -> str:
    """Serialize ``table`` and optionally write it to ``path``; returns the text.

    Output is byte-stable for identical inputs unless ``timing`` adds the
    wall-clock column.
    """
    if fmt == "csv":
        text = to_csv(table, timing)
    elif fmt == "json":
        text = to_json(table, timing)
    elif fmt == "plotdata":
        text = to_plotdata(table)
    else:
        raise PreconditionError(f"unknown format {fmt!r}; choose from {FORMATS}")
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def _number(text: str):
    try:
        return int(text)
    except ValueError:
        return float(text)


def parse_csv(text: str) -> tuple[list[str], list[dict[str, float]]]:
    """Inverse of :func:`to_csv` for tables: ``(header, rows)``."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    rows = [{k: _number(v) for k, v in zip(header, rec)} for rec in reader]
    return header, rows


def table_from_csv(text: str, method: str | None = None) -> ConvergenceTable:
    """Rebuild a table from CSV; the header identifies the method layout."""
    header, rows = parse_csv(text)
    core = [h for h in header if h != "seconds"]
    if method is None:
        method = next((m for m, lay in _LAYOUTS.items() if [c for c, _ in lay] == core), "table")
    if method in _LAYOUTS:
        layout = _LAYOUTS[method]
    else:
        layout = (("n", "n"), ("n_used", "used"), *[(c, "extra") for c in core[2:-1]], ("abs_error", "error"))
    names = {kind: name for name, kind in layout if kind != "extra"}
    extras = tuple(name for name, kind in layout if kind == "extra")
    if [c for c, _ in layout] != core:
        raise PreconditionError(f"unrecognized table header {header}")
    used_col = names.get("used", "merged_count")
    out = tuple(
        ConvergenceRow(r[names["n"]], r[used_col], r[names["error"]], r.get("seconds", 0.0), {c: r[c] for c in extras})
        for r in rows
    )
    return ConvergenceTable(method, "", "", 0.0, out, extras if method not in _LAYOUTS else ())


def schema() -> dict:
    """The published JSON schema for :func:`to_json` documents."""
    text = resources.files("hypercross").joinpath("schema/bench.schema.json").read_text(encoding="utf-8")
    return json.loads(text)
