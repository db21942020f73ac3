"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 invalid input, 3 numerical warning
or numerical failure.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
import warnings
from contextlib import contextmanager
from typing import Iterator, Sequence

import numpy as np

from . import graph as gc
from .edge_secular import secular_edge_many
from .errors import (
    BudgetExceeded,
    DivisionNearZero,
    PoleProximity,
    QGraphError,
    RankTolDegenerate,
    ScaledOverflow,
)
from .fd import MIN_MESH, fd_spectrum_below
from .isospectral import necessary_check, search_isospectral, trace_report, trace_sum
from .mfunction import m_matrix, secular_vertex
from .point import SpectralPoint
from .spectrum import ScanConfig, SuspectedMissedRoot, compare_spectra, find_spectrum

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2, 3

_NUMERIC_ERRORS = (BudgetExceeded, DivisionNearZero, PoleProximity, RankTolDegenerate, ScaledOverflow)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse would exit with 2
        raise UsageError(message)


def fmt(x: float) -> str:
    """Round-trip float formatting for CSV cells."""
    return format(float(x), ".17g")


def _positive(text: str) -> float:
    try:
        val = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (math.isfinite(val) and val > 0):
        raise argparse.ArgumentTypeError(f"must be positive and finite: {text!r}")
    return val


def _finite(text: str) -> float:
    try:
        val = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(val):
        raise argparse.ArgumentTypeError(f"must be finite: {text!r}")
    return val


def _spectral(text: str) -> float | complex:
    try:
        val = complex(text.replace(" ", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (math.isfinite(val.real) and math.isfinite(val.imag)):
        raise argparse.ArgumentTypeError(f"must be finite: {text!r}")
    return val.real if val.imag == 0 else val


@contextmanager
def _output(path: str | None) -> Iterator[io.TextIOBase]:
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _json_number(x: float | complex):
    if isinstance(x, complex):
        return [x.real, x.imag]
    if math.isinf(x):
        return "inf"
    return float(x)


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def cmd_validate(args) -> int:
    g = gc.load(args.graph)
    print(
        f"OK: {g.num_vertices} vertices, {g.num_edges} edges, degrees {list(g.degrees)}, "
        f"total length {g.total_length:.12g}"
    )
    for msg in gc.rational_independence_advisory(g.lengths, args.max_coeff).warnings:
        print(f"advisory: rational relation {msg}")
    return EXIT_OK


def cmd_mmatrix(args) -> int:
    g = gc.load(args.graph)
    p = SpectralPoint.from_lambda(args.lam)
    M = m_matrix(g, p).entries
    with _output(args.out) as out:
        if args.format == "json":
            doc = {
                "lambda": _json_number(p.lam),
                "mu": _json_number(p.mu if not p.is_real or p.lam < 0 else p.mu.real),
                "entries": [[_json_number(v.item()) for v in row] for row in M],
            }
            out.write(json.dumps(doc, indent=2) + "\n")
        else:
            cells = [[_text_cell(v.item()) for v in row] for row in M]
            width = max(len(c) for row in cells for c in row)
            for row in cells:
                out.write("  ".join(c.rjust(width) for c in row) + "\n")
    return EXIT_OK


def _text_cell(v: float | complex) -> str:
    if isinstance(v, complex):
        return f"{v.real:.12g}{v.imag:+.12g}j"
    return f"{v:.12g}"


def _grid(start: float, stop: float, step: float) -> np.ndarray:
    if stop < start:
        raise UsageError("--to must not be smaller than --from")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(n)


def cmd_secular(args) -> int:
    g = gc.load(args.graph)
    lams = _grid(args.start, args.stop, args.step)
    want_vertex = args.formulation in ("vertex", "both")
    want_edge = args.formulation in ("edge", "both")
    edge_vals = secular_edge_many(g, lams) if want_edge else None
    with _output(args.out) as out:
        out.write("lambda,mu_or_kappa,value,formulation\n")
        for i, lam in enumerate(lams):
            root = math.sqrt(abs(lam))
            if want_vertex:
                try:
                    cell = fmt(secular_vertex(g, float(lam)))
                except PoleProximity:
                    cell = ""
                out.write(f"{fmt(lam)},{fmt(root)},{cell},vertex\n")
            if want_edge:
                out.write(f"{fmt(lam)},{fmt(root)},{fmt(edge_vals[i])},edge\n")
    return EXIT_OK


def cmd_spectrum(args) -> int:
    g = gc.load(args.graph)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", SuspectedMissedRoot)
        if args.method == "fd":
            spec = fd_spectrum_below(g, args.mesh, args.lambda_max)
        else:
            spec = find_spectrum(g, args.lambda_max, ScanConfig(workers=args.workers))
    with _output(args.out) as out:
        out.write("lambda,multiplicity,method\n")
        for lam, mult in spec.eigenvalues:
            out.write(f"{fmt(lam)},{mult},{spec.method.value}\n")
    notes = list(spec.warnings) + [str(w.message) for w in caught if str(w.message) not in spec.warnings]
    for msg in notes:
        print(f"warning: suspected missed root: {msg}", file=sys.stderr)
    return EXIT_NUMERIC if notes else EXIT_OK


def _report_dict(rep) -> dict:
    mm = rep.first_mismatch
    return {
        "verdict": rep.verdict,
        "isospectral": rep.isospectral,
        "cutoff": rep.cutoff,
        "compared": rep.compared,
        "max_deviation": rep.max_deviation,
        "counts": list(rep.counts),
        "tol": rep.tol,
        "first_mismatch": None
        if mm is None
        else {
            "index": mm.index,
            "kind": mm.kind,
            "lambda1": mm.lambda1,
            "lambda2": mm.lambda2,
            "multiplicity1": mm.multiplicity1,
            "multiplicity2": mm.multiplicity2,
        },
    }


def cmd_compare(args) -> int:
    g1, g2 = gc.load(args.graph1), gc.load(args.graph2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SuspectedMissedRoot)
        s1 = find_spectrum(g1, args.lambda_max)
        s2 = find_spectrum(g2, args.lambda_max)
    rep = compare_spectra(s1, s2, args.tol)
    with _output(args.out) as out:
        if args.json:
            out.write(json.dumps(_report_dict(rep), indent=2) + "\n")
        else:
            out.write(rep.summary() + "\n")
    return EXIT_NUMERIC if (s1.warnings or s2.warnings) else EXIT_OK


def cmd_traces(args) -> int:
    g = gc.load(args.graph)
    if args.other is None:
        doc = {"power_sums": [{"m": m, "sum": trace_sum(g, m)} for m in range(1, args.m + 1)]}
    else:
        g2 = gc.load(args.other)
        rep = trace_report(g, g2, args.m)
        check = necessary_check(g, g2)
        doc = {
            "power_sums": [
                {"m": r.m, "lhs": r.lhs_sum, "rhs": r.rhs_sum, "residual": r.residual} for r in rep.rows
            ],
            "sigma_check": {
                "passed": check.passed,
                "first_violation": check.first_violation,
                "sigma1": sorted(check.sigma1.values),
                "sigma2": sorted(check.sigma2.values),
            },
        }
    with _output(args.out) as out:
        out.write(json.dumps(doc, indent=2) + "\n")
    return EXIT_OK


def cmd_search(args) -> int:
    g = gc.load(args.graph)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SuspectedMissedRoot)
        found = search_isospectral(g, args.lambda_max, args.tol, prescreen=not args.no_prescreen)
    doc = {
        "couplings": [_json_number(a) for a in g.couplings],
        "lambda_max": args.lambda_max,
        "candidates": [
            {"couplings": [_json_number(a) for a in alphas], "report": _report_dict(rep)}
            for alphas, rep in found
        ],
    }
    with _output(args.out) as out:
        out.write(json.dumps(doc, indent=2) + "\n")
    return EXIT_OK


def cmd_examples(args) -> int:
    if args.action == "list":
        for name in gc.FIXTURE_NAMES:
            print(name)
        return EXIT_OK
    if not args.name:
        raise UsageError("examples emit needs a fixture name")
    text = gc.emit_fixture(args.name)
    with _output(args.out) as out:
        out.write(text)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qgraph-iso", description="Spectra and isospectrality of quantum graphs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("validate", help="check a graph file")
    s.add_argument("graph")
    s.add_argument("--max-coeff", type=int, default=10, help="bound for the rational-relation scan")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("mmatrix", help="print M(lambda)")
    s.add_argument("graph")
    s.add_argument("--lambda", dest="lam", type=_spectral, required=True, help="real or complex, e.g. 2.5 or 1+2j")
    s.add_argument("--format", choices=("json", "text"), default="json")
    s.add_argument("--out")
    s.set_defaults(func=cmd_mmatrix)

    s = sub.add_parser("secular", help="tabulate secular functions")
    s.add_argument("graph")
    s.add_argument("--from", dest="start", type=_finite, required=True)
    s.add_argument("--to", dest="stop", type=_finite, required=True)
    s.add_argument("--step", type=_positive, required=True)
    s.add_argument("--formulation", choices=("vertex", "edge", "both"), default="edge")
    s.add_argument("--out")
    s.set_defaults(func=cmd_secular)

    s = sub.add_parser("spectrum", help="eigenvalues up to a cutoff")
    s.add_argument("graph")
    s.add_argument("--lambda-max", type=_positive, required=True)
    s.add_argument("--method", choices=("edge", "fd"), default="edge")
    s.add_argument("--mesh", type=int, default=256, help="fd nodes per unit length")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out")
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("compare", help="compare the spectra of two graphs")
    s.add_argument("graph1")
    s.add_argument("graph2")
    s.add_argument("--lambda-max", type=_positive, required=True)
    s.add_argument("--tol", type=_positive, default=1e-7)
    s.add_argument("--json", action="store_true", help="full JSON report")
    s.add_argument("--out")
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("traces", help="power sums of the scaled couplings")
    s.add_argument("graph")
    s.add_argument("other", nargs="?", help="second graph: report residuals and the sigma check")
    s.add_argument("-m", type=int, required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_traces)

    s = sub.add_parser("search", help="search permuted couplings for isospectral partners")
    s.add_argument("graph")
    s.add_argument("--lambda-max", type=_positive, required=True)
    s.add_argument("--tol", type=_positive, default=1e-7)
    s.add_argument("--no-prescreen", action="store_true")
    s.add_argument("--out")
    s.set_defaults(func=cmd_search)

    s = sub.add_parser("examples", help="list or emit fixture graphs")
    s.add_argument("action", choices=("list", "emit"))
    s.add_argument("name", nargs="?")
    s.add_argument("--out")
    s.set_defaults(func=cmd_examples)
    return p


def _check_flags(args) -> None:
    if getattr(args, "mesh", MIN_MESH) < MIN_MESH:
        raise UsageError(f"--mesh must be >= {MIN_MESH}")
    if getattr(args, "workers", 1) < 1:
        raise UsageError("--workers must be >= 1")
    if args.command == "traces" and args.m < 1:
        raise UsageError("-m must be >= 1")
    if args.command == "validate" and args.max_coeff < 1:
        raise UsageError("--max-coeff must be >= 1")


def run(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        _check_flags(args)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _NUMERIC_ERRORS as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except QGraphError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())
