"""``hypercross`` command-line driver.

Exit codes: 0 success, 2 precondition failure, 3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import random
import sys
from collections.abc import Sequence
from dataclasses import replace

import numpy as np

from . import bench
from .corpus_oracle import corpus, corpus_member
from .errors import (
    ConvergenceError,
    HypercrossError,
    IntegrandError,
    MemoryGuardError,
    PreconditionError,
)
from .weights import parse_weight

EXIT_PRECONDITION = 2
EXIT_NONCONVERGENCE = 3


def parse_budgets(text: str, level: bool = False) -> list[int]:
    """``"32,64"``, ``"32..2048"`` (doubling) or, for levels, ``"3..12"`` (unit steps)."""
    out: list[int] = []
    for item in filter(None, (t.strip() for t in text.split(","))):
        lo, sep, hi = item.partition("..")
        try:
            if not sep:
                out.append(int(item))
                continue
            a, b = int(lo), int(hi)
        except ValueError:
            raise PreconditionError(f"malformed budget list item {item!r}") from None
        if a > b or (not level and a < 1):
            raise PreconditionError(f"bad budget range {item!r}")
        v = a
        while v <= b:
            out.append(v)
            v = v + 1 if level else 2 * v
    if not out:
        raise PreconditionError("empty budget list")
    return sorted(set(out))


class _RandomUsed(HypercrossError):
    pass


@contextlib.contextmanager
def seedless_guard(active: bool):
    """Make every numpy and stdlib RNG entry point raise while active."""
    if not active:
        yield
        return

    def forbid(*_args, **_kwargs):
        raise _RandomUsed("--seedless: a random number generator was requested")

    targets = [(np.random, name) for name in ("default_rng", "seed", "random", "rand", "randn", "normal", "uniform", "RandomState")]
    targets += [(random, name) for name in ("random", "seed", "uniform", "randint", "choice", "shuffle", "gauss")]
    saved = [(mod, name, getattr(mod, name)) for mod, name in targets]
    try:
        for mod, name, _ in saved:
            setattr(mod, name, forbid)
        yield
    finally:
        for mod, name, orig in saved:
            setattr(mod, name, orig)


def _method_help() -> str:
    width = max(map(len, bench.METHODS))
    return "methods:\n" + "\n".join(f"  {k:<{width}}  {v}" for k, v in bench.METHODS.items())


def _global(parser: argparse.ArgumentParser, default_format: str = "csv") -> None:
    g = parser.add_argument_group("global options")
    g.add_argument("--weight", default="gauss:d=1", help="weight spec, e.g. gauss:d=2, freud:lambda=4,a=1 or sonin:beta=0.5")
    g.add_argument("--out", default=None, help="output file (default: stdout)")
    g.add_argument("--format", choices=bench.FORMATS, default=default_format)
    g.add_argument("--seedless", action="store_true", help="fail if any random number generator is touched")


def _method_options(parser: argparse.ArgumentParser) -> None:
    g = parser.add_argument_group("method options")
    g.add_argument("--r", type=int, default=1, help="smoothness order (rate target and base-rule order)")
    g.add_argument("--theta", type=float, default=None, help="truncation theta (tg, hypercross) or partition theta in (1,2) (assembled)")
    g.add_argument("--truncation", choices=("largest_zero", "mrs"), default="largest_zero")
    g.add_argument("--ladder", choices=("tg", "gauss"), default="tg", help="1-D ladder of the hypercross rule")
    g.add_argument("--sonin-case", choices=("i", "ii"), default="i")
    g.add_argument("--alpha", type=float, default=None, help="target rate (assembled schedule, ladder metadata)")
    g.add_argument("--base", choices=("fibonacci", "smolyak-bspline"), default="fibonacci")
    g.add_argument("--mode", choices=("paper", "tight"), default="paper", help="assembled budget normalizer")
    g.add_argument("--delta", type=float, default=None, help="assembled decay parameter (default: largest feasible)")
    g.add_argument("--psi", type=int, default=None, help="periodization order for cube base rules")
    g.add_argument("--scheme", choices=("linear", "quadratic", "cubic"), default=None)
    g.add_argument("--probe", type=int, default=None, help="probe points per axis for recovery errors")


def _options(args, method: str) -> bench.MethodOptions:
    theta = args.theta
    kw = {
        "ladder": args.ladder,
        "r": args.r,
        "truncation": args.truncation,
        "sonin_case": args.sonin_case,
        "alpha": args.alpha,
        "base": args.base,
        "schedule_mode": args.mode,
        "delta": args.delta,
        "psi": args.psi,
        "scheme": args.scheme,
        "probe": args.probe,
    }
    if method == "assembled":
        kw["partition_theta"] = theta
        if kw["psi"] is None:
            kw["psi"] = args.r + 1
    elif theta is not None:
        kw["theta"] = theta
    return bench.MethodOptions(**kw)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hypercross",
        description="Weighted quadrature and sparse recovery benchmarks.",
        epilog=_method_help(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = argparse.RawDescriptionHelpFormatter

    p = sub.add_parser("nodes", help="emit nodes and weights of a rule", epilog=_method_help(), formatter_class=fmt)
    p.add_argument("--method", choices=sorted(bench.METHODS), default=None)
    p.add_argument("--hypercross", action="store_true", help="shorthand for --method hypercross")
    p.add_argument("--n", type=int, default=None, help="node budget (level for recover)")
    p.add_argument("--m", type=int, default=None, help="degree of a tg or gauss-full rule")
    p.add_argument("--xi", type=float, default=None, help="hypercross level")
    p.add_argument("--d", type=int, default=None, help="dimension (default: from --weight)")
    _method_options(p)
    _global(p)

    p = sub.add_parser("integrate", help="apply a rule to a corpus member", epilog=_method_help(), formatter_class=fmt)
    p.add_argument("--method", "--rule", dest="method", choices=sorted(bench.METHODS), required=True)
    p.add_argument("--fn", required=True, help="corpus id, e.g. cos:d=2")
    p.add_argument("--n", type=int, default=None, help="node budget (level for hypercross)")
    p.add_argument("--m", type=int, default=None, help="degree of a tg or gauss-full rule")
    _method_options(p)
    _global(p, default_format="json")

    p = sub.add_parser("converge", help="convergence table over budgets", epilog=_method_help(), formatter_class=fmt)
    p.add_argument("--method", choices=sorted(bench.METHODS), required=True)
    p.add_argument("--fn", required=True)
    p.add_argument("--n", default=None, help="budgets: 32,64 or 32..4096 (levels: 3..12)")
    p.add_argument("--timing", action="store_true", help="add the wall-clock column (not byte-stable)")
    p.add_argument("--figure", default=None, help="also save a log-log figure (needs matplotlib)")
    _method_options(p)
    _global(p)

    p = sub.add_parser("recover", help="sparse-grid B-spline recovery errors over levels m")
    p.add_argument("--fn", required=True, help="periodic corpus id, e.g. pcore2:r=2,d=2")
    p.add_argument("--m", default="3..9", help="levels, e.g. 4..9")
    p.add_argument("--d", type=int, default=None, help="dimension when --fn omits d=")
    p.add_argument("--timing", action="store_true")
    p.add_argument("--figure", default=None)
    _method_options(p)
    _global(p)

    p = sub.add_parser("fit", help="rate regression of a CSV convergence table")
    p.add_argument("--input", required=True, help="CSV table ('-' for stdin)")
    p.add_argument("--beta", type=float, default=0.0, help="fixed log exponent")
    _global(p)

    p = sub.add_parser("fool", help="certified fooling-bump integrals for rule node sets")
    p.add_argument("--n", default="64,256,1024")
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--timing", action="store_true")
    _global(p)

    p = sub.add_parser("corpus", help="list corpus members (with references on request)")
    p.add_argument("--d", type=int, default=None, help="dimension (default: from --weight)")
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--fn", default=None, help="a single member id")
    p.add_argument("--reference", action="store_true", help="also report the reference method")
    _global(p, default_format="json")
    return parser


def _write(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _g17(v: float) -> str:
    return f"{v:.17g}"


def _emit_points(cols: list[str], rows: list[list], fmt: str) -> str:
    if fmt == "json":
        return json.dumps({"columns": cols, "rows": rows}, indent=2) + "\n"
    if fmt == "plotdata":
        coords = [i for i, c in enumerate(cols) if c.startswith("x") or c == "node"]
        return "".join(" ".join(_g17(row[i]) for i in coords) + "\n" for row in rows)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    writer.writerows([[str(v) if isinstance(v, int) else _g17(v) for v in row] for row in rows])
    return buf.getvalue()


def _nodes(args) -> str:
    method = "hypercross" if args.hypercross else args.method
    if method is None:
        raise PreconditionError("nodes needs --method or --hypercross")
    opts = _options(args, method)
    if method in ("tg", "gauss-full") and (args.d in (None, 1)):
        if args.m is not None:
            opts = replace(opts, by_degree=True)
        size = args.m if args.m is not None else args.n
        if size is None:
            raise PreconditionError(f"{method} needs --n (budget) or --m (degree)")
        k, x, w = bench.indexed_rule_1d(method, size, args.weight, opts)
        rows = [[int(a), float(b), float(c)] for a, b, c in zip(k, x, w)]
        return _emit_points(["k", "node", "weight"], rows, args.format)
    size = args.xi if method == "hypercross" and args.xi is not None else args.n
    if size is None:
        raise PreconditionError(f"{method} needs --n" + (" or --xi" if method == "hypercross" else ""))
    nodes, weights = bench.node_set(method, size, args.weight, args.d, opts)
    d = nodes.shape[1]
    cols = [f"x{i + 1}" for i in range(d)] + ([] if weights is None else ["weight"])
    if weights is None:
        rows = [list(map(float, row)) for row in nodes]
    else:
        rows = [list(map(float, row)) + [float(w)] for row, w in zip(nodes, weights)]
    return _emit_points(cols, rows, args.format)


def _corpus_listing(args) -> str:
    w = parse_weight(args.weight)
    d = w.dim if args.d is None else args.d
    members = [corpus_member(args.fn, w)] if args.fn else corpus(w.with_dim(d), d, args.r)
    records = []
    for fn in members:
        ref = fn.reference()
        rec = {
            "id": fn.id,
            "dim": fn.dim,
            "r": fn.r,
            "periodic": fn.periodic,
            "integral": ref.value,
            "integral_error_bound": ref.error_bound,
        }
        if args.reference:
            rec["reference_method"] = ref.method
        records.append(rec)
    if args.format == "json":
        return json.dumps(records, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(records[0]), lineterminator="\n")
    writer.writeheader()
    for rec in records:
        writer.writerow({k: (_g17(v) if isinstance(v, float) else v) for k, v in rec.items()})
    return buf.getvalue()


def _with_dim(fid: str, d: int | None) -> str:
    if d is None:
        return fid
    if "d=" in fid:
        if f"d={d}" not in fid.split(":", 1)[-1].split(","):
            raise PreconditionError(f"--d {d} contradicts {fid!r}")
        return fid
    return f"{fid},d={d}" if ":" in fid else f"{fid}:d={d}"


def _run(args) -> int:
    cmd = args.command
    if cmd == "nodes":
        _write(_nodes(args), args.out)
    elif cmd == "integrate":
        opts = _options(args, args.method)
        if args.m is not None:
            if args.method not in ("tg", "gauss-full"):
                raise PreconditionError("--m (degree) applies to tg and gauss-full")
            opts = replace(opts, by_degree=True)
        size = args.m if args.m is not None else args.n
        if size is None:
            raise PreconditionError("integrate needs --n or --m")
        value, used = bench.evaluate_method(args.method, args.fn, size, args.weight, opts)
        table = bench.run_convergence(args.method, args.fn, [size], args.weight, opts)
        doc = {"value": value, "abs_error": table.rows[0].abs_error, "n_nodes": used,
               "reference": table.reference, "method": args.method, "fn": table.fn}
        if args.format == "json":
            text = json.dumps(doc, indent=2) + "\n"
        else:
            text = ",".join(doc) + "\n" + ",".join(v if isinstance(v, str) else _g17(v) if isinstance(v, float) else str(v) for v in doc.values()) + "\n"
        _write(text, args.out)
    elif cmd in ("converge", "recover"):
        method = args.method if cmd == "converge" else "recover"
        budgets_text = args.n if cmd == "converge" else args.m
        level = method in bench.LEVEL_METHODS
        budgets = parse_budgets(budgets_text, level) if budgets_text else None
        fid = args.fn if cmd == "converge" else _with_dim(args.fn, args.d)
        table = bench.run_convergence(method, fid, budgets, args.weight, _options(args, method))
        _write(bench.emit(table, args.format, timing=args.timing), args.out)
        if args.figure:
            from .plotting import save_figure

            save_figure(table, args.figure)
    elif cmd == "fit":
        if args.input == "-":
            text = sys.stdin.read()
        else:
            with open(args.input, encoding="utf-8") as fh:
                text = fh.read()
        table = bench.table_from_csv(text)
        fit = bench.fit_rate(table, args.beta)
        _write(bench.emit(fit, args.format), args.out)
    elif cmd == "fool":
        table = bench.fooling_table(parse_budgets(args.n), args.r, args.weight, args.d)
        _write(bench.emit(table, args.format, timing=args.timing), args.out)
    elif cmd == "corpus":
        _write(_corpus_listing(args), args.out)
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with seedless_guard(args.seedless):
            return _run(args)
    except (PreconditionError, MemoryGuardError, _RandomUsed) as exc:
        print(f"hypercross: error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (ConvergenceError, IntegrandError) as exc:
        print(f"hypercross: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except OSError as exc:
        print(f"hypercross: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
