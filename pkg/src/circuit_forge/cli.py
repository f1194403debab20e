"""Command-line interface: ``circuit-forge <command> [flags]``.

Data goes to stdout as CSV or JSON lines; diagnostics go to stderr.
Exit codes: 2 bad input, 3 cap or precondition, 4 girth promise broken,
5 not totally unimodular, 6 generation failed, 1 a verification mismatch.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from collections import Counter
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from . import formats
from .decomposition import REPORT_FIELDS, bound_report, enumerate_near_min_circuits
from .errors import (
    CircuitForgeError,
    EntryError,
    FormatError,
    GenerationError,
    GirthViolationError,
    TUViolationError,
)
from .exact import parse_alpha
from .gf2 import enumerate_circuits, sort_circuits
from .graphs import (
    cographic_matroid,
    enumerate_cycles,
    enumerate_min_cutsets,
    is_min_cutset,
    random_graph,
    small_cut,
)
from .ksum import evaluate_udt, random_udt
from .lattice import (
    conformal_decompose,
    enumerate_short_vectors,
    find_bad_minor,
    matrix_circuits,
    norm2,
    TU_CAP,
)

EXIT_OK, EXIT_MISMATCH, EXIT_INPUT, EXIT_CAP, EXIT_GIRTH, EXIT_TU, EXIT_GEN = 0, 1, 2, 3, 4, 5, 6

DEFAULT_CAPS = {"oracle": 24, "cut": 16, "tu": TU_CAP}


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


# --- helpers -----------------------------------------------------------------------


def _labels(text: str | None) -> list[int]:
    if not text:
        return []
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise CliError(f"bad label list {text!r}", EXIT_INPUT) from None


def _caps(text: str | None) -> dict[str, int]:
    caps = dict(DEFAULT_CAPS)
    if not text:
        return caps
    for item in text.split(","):
        key, _, val = item.partition("=")
        key = key.strip()
        if key not in caps or not val.strip().isdigit():
            raise CliError(f"bad cap {item!r}; use e.g. oracle=24,cut=16,tu=8", EXIT_INPUT)
        caps[key] = int(val)
    return caps


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror}", EXIT_INPUT) from None


def _parse(path: str, parser):
    try:
        return parser(_read(path))
    except FormatError as exc:
        raise CliError(f"{path}: {exc}", EXIT_INPUT) from None


def _load_udt(path: str):
    try:
        return formats.parse_udt(_read(path), Path(path).parent)
    except FormatError as exc:
        raise CliError(f"{path}: {exc}", EXIT_INPUT) from None


def _join(labels: Iterable) -> str:
    return " ".join(str(x) for x in labels)


def emit(rows: Sequence[dict], fields: Sequence[str], fmt: str, out) -> None:
    if fmt == "jsonl":
        for row in rows:
            out.write(json.dumps({k: row[k] for k in fields}) + "\n")
        return
    w = csv.DictWriter(out, fieldnames=list(fields), lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: row[k] for k in fields})


def _circuit_rows(circuits, weights=None) -> list[dict]:
    rows = []
    for c in sort_circuits(circuits):
        w = len(c) if weights is None else sum(weights[e] for e in c)
        rows.append({"size": len(c), "weight": w, "elements": _join(sorted(c))})
    return rows


# --- commands ----------------------------------------------------------------------


def cmd_circuits(args, out) -> int:
    caps = _caps(args.caps)
    sources = [x for x in (args.matrix, args.graph, args.udt) if x]
    if len(sources) != 1:
        raise CliError("give exactly one of --matrix, --graph, --udt", EXIT_INPUT)
    req = _labels(args.required)
    if args.graph:
        G = _parse(args.graph, formats.parse_wgr)
        if args.cuts:
            found = enumerate_min_cutsets(G, req, args.max_size, cap=caps["cut"])
        else:
            found = enumerate_cycles(G, req, args.max_size)
        emit(_circuit_rows(found, G.weights()), ("size", "weight", "elements"), args.format, out)
        return EXIT_OK
    M = _parse(args.matrix, formats.parse_gf2m) if args.matrix else evaluate_udt(_load_udt(args.udt))
    found = enumerate_circuits(M, weight_cap=args.max_size, required=req, cap=caps["oracle"])
    emit(_circuit_rows(found), ("size", "weight", "elements"), args.format, out)
    return EXIT_OK


def cmd_near_min(args, out) -> int:
    caps = _caps(args.caps)
    if args.r is None:
        raise CliError("near-min needs --r", EXIT_INPUT)
    T = _load_udt(args.udt)
    alpha = args.alpha
    match = None
    if args.report:
        rep = bound_report(T, args.r, alpha, cap=caps["oracle"])
        row = rep.row()
        fields = list(REPORT_FIELDS)
        if args.verify == "oracle":
            got = enumerate_near_min_circuits(T, args.r, alpha, cap=caps["oracle"])
            match = _oracle_match(T, got, args.r, alpha, caps)
            row["oracle_match"] = "true" if match else "false"
            fields.append("oracle_match")
        for w in rep.warnings:
            print(f"warning: {w}", file=sys.stderr)
        emit([row], fields, args.format, out)
    else:
        got = enumerate_near_min_circuits(T, args.r, alpha, cap=caps["oracle"])
        if args.verify == "oracle":
            match = _oracle_match(T, got, args.r, alpha, caps)
            print(f"oracle_match={'true' if match else 'false'}", file=sys.stderr)
        emit(_circuit_rows(got), ("size", "weight", "elements"), args.format, out)
    return EXIT_MISMATCH if match is False else EXIT_OK


def _oracle_match(T, got, r, alpha, caps) -> bool:
    M = evaluate_udt(T)
    limit = Fraction(alpha) * r
    want = [c for c in enumerate_circuits(M, cap=caps["oracle"]) if len(c) <= limit]
    return list(got) == want


def cmd_smallcut(args, out) -> int:
    G = _parse(args.graph, formats.parse_wgr)
    R = frozenset(_labels(args.R))
    alpha = args.alpha
    if alpha.denominator != 1:
        raise CliError("smallcut needs an integer --alpha", EXIT_CAP)
    counts: Counter = Counter()
    for i in range(args.trials):
        counts[small_cut(G, R, int(alpha), args.seed + i)] += 1
    rows = []
    for cut in sort_circuits(counts):
        rows.append(
            {
                "elements": _join(sorted(cut)),
                "count": counts[cut],
                "frequency": f"{counts[cut] / args.trials:.6f}",
                "valid": "true" if R <= cut and is_min_cutset(G, cut) else "false",
            }
        )
    emit(rows, ("elements", "count", "frequency", "valid"), args.format, out)
    return EXIT_OK


def cmd_lattice(args, out) -> int:
    caps = _caps(args.caps)
    A = _parse(args.tum, formats.parse_tum)
    want_any = args.tu or args.circuits or args.shortvec or args.decompose or args.require_tu
    rows = []
    if args.tu or args.require_tu or not want_any:
        n, m = A.shape
        if min(n, m) > caps["tu"]:
            raise CliError(f"min(n, m) = {min(n, m)} exceeds the TU cap {caps['tu']}", EXIT_CAP)
        bad = find_bad_minor(A)
        if bad is not None and args.require_tu:
            rows_, cols_, det = bad
            raise CliError(f"rows {list(rows_)} x columns {list(cols_)} have determinant {det}", EXIT_TU)
        rows.append({"record": "tu", "value": "true" if bad is None else "false", "norm2": ""})
    if args.circuits or not want_any:
        for u in matrix_circuits(A):
            rows.append({"record": "circuit", "value": _join(u), "norm2": norm2(u)})
    if args.shortvec:
        if args.lambda2 is None:
            raise CliError("--shortvec needs --lambda2", EXIT_INPUT)
        for v in enumerate_short_vectors(A, args.lambda2, args.alpha):
            rows.append({"record": "short", "value": _join(v), "norm2": norm2(v)})
    if args.decompose:
        v = _labels(args.decompose)
        for u in conformal_decompose(A, v):
            rows.append({"record": "part", "value": _join(u), "norm2": norm2(u)})
    emit(rows, ("record", "value", "norm2"), args.format, out)
    return EXIT_OK


def _size_range(text: str) -> tuple[int, int]:
    lo, _, hi = text.partition(":")
    try:
        return int(lo), int(hi or lo)
    except ValueError:
        raise CliError(f"bad size range {text!r}; use lo:hi", EXIT_INPUT) from None


def cmd_gen(args, out) -> int:
    if args.kind == "udt":
        types = tuple(t for t in args.leaf_types.split(",") if t)
        T = random_udt(
            args.leaves, _size_range(args.leaf_size), types, seed=args.seed,
            max_m=args.max_m, three_sum_prob=args.three_sum_prob,
        )
        text = formats.format_udt(T)
    else:
        if args.n is None or args.m is None:
            raise CliError("graph generation needs --n and --m", EXIT_INPUT)
        G = random_graph(args.n, args.m, args.seed, max_weight=args.max_weight, allow_parallel=args.parallel)
        if args.kind == "wgr":
            text = formats.format_wgr(G)
        elif args.kind == "gf2m-graphic":
            from .graphs import graphic_matroid

            text = formats.format_gf2m(graphic_matroid(G))
        else:
            text = formats.format_gf2m(cographic_matroid(G))
    if args.out:
        Path(args.out).write_text(text)
    else:
        out.write(text)
    return EXIT_OK


def cmd_verify_bounds(args, out) -> int:
    caps = _caps(args.caps)
    trees = []
    if args.udt:
        trees = [(p, _load_udt(p)) for p in args.udt]
    else:
        types = tuple(t for t in args.leaf_types.split(",") if t)
        for i in range(args.trials):
            T = random_udt(
                2 + i % 3, _size_range(args.leaf_size), types, seed=args.seed + i, max_m=args.max_m
            )
            trees.append((f"seed={args.seed + i}", T))
    rows = []
    failed = False
    for name, T in trees:
        r = args.r
        if r is None:
            circuits = enumerate_circuits(evaluate_udt(T), cap=caps["oracle"])
            if not circuits:
                print(f"{name}: no circuits, skipped", file=sys.stderr)
                continue
            r = min(len(c) for c in circuits) - 1
        rep = bound_report(T, r, args.alpha, cap=caps["oracle"])
        failed |= not rep.passed
        rows.append(rep.row())
    emit(rows, REPORT_FIELDS, args.format, out)
    return EXIT_MISMATCH if failed else EXIT_OK


# --- parser ------------------------------------------------------------------------


def _alpha(text: str) -> Fraction:
    try:
        return parse_alpha(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive(text: str) -> int:
    val = int(text)
    if val < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return val


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="base seed; trial i uses seed + i")
    common.add_argument("--alpha", type=_alpha, default=Fraction(1), help="rational alpha >= 1, e.g. 3/2")
    common.add_argument("--r", type=int, default=None, help="girth parameter r")
    common.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    common.add_argument("--trials", type=_positive, default=1)
    common.add_argument("--verify", choices=("none", "oracle"), default="none")
    common.add_argument("--caps", default=None, help="oracle=24,cut=16,tu=8")

    p = argparse.ArgumentParser(prog="circuit-forge", description="Near-minimum circuit enumeration toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("circuits", parents=[common], help="list circuits, cycles or cut-sets")
    c.add_argument("--matrix", help="GF2M file")
    c.add_argument("--graph", help="WGR file")
    c.add_argument("--udt", help="UDT file")
    c.add_argument("--cuts", action="store_true", help="with --graph: minimal cut-sets instead of cycles")
    c.add_argument("--max-size", type=int, default=None, help="size (or weight) cap")
    c.add_argument("--required", default=None, help="labels every circuit must contain")
    c.set_defaults(func=cmd_circuits)

    n = sub.add_parser("near-min", parents=[common], help="circuits of size <= alpha*r of a UDT")
    n.add_argument("--udt", required=True)
    n.add_argument("--report", action="store_true", help="emit the bound report row instead")
    n.set_defaults(func=cmd_near_min)

    s = sub.add_parser("smallcut", parents=[common], help="Small Cut frequency table")
    s.add_argument("--graph", required=True)
    s.add_argument("--R", default=None, help="required edge labels")
    s.set_defaults(func=cmd_smallcut)

    lat = sub.add_parser("lattice", parents=[common], help="TU checks, circuits, short vectors")
    lat.add_argument("--tum", required=True)
    lat.add_argument("--tu", action="store_true", help="report the TU verdict")
    lat.add_argument("--require-tu", action="store_true", help="exit 5 unless the matrix is TU")
    lat.add_argument("--circuits", action="store_true")
    lat.add_argument("--shortvec", action="store_true")
    lat.add_argument("--lambda2", type=int, default=None, help="squared-norm girth promise")
    lat.add_argument("--decompose", default=None, help="comma-separated lattice vector")
    lat.set_defaults(func=cmd_lattice)

    g = sub.add_parser("gen", parents=[common], help="write a random instance")
    g.add_argument("--kind", choices=("udt", "wgr", "gf2m-graphic", "gf2m-cographic"), default="udt")
    g.add_argument("--out", default=None)
    g.add_argument("--leaves", type=_positive, default=2)
    g.add_argument("--leaf-size", default="5:8")
    g.add_argument("--leaf-types", default="graphic,cographic,R10,F7")
    g.add_argument("--max-m", type=int, default=20)
    g.add_argument("--three-sum-prob", type=float, default=0.5)
    g.add_argument("--n", type=int, default=None)
    g.add_argument("--m", type=int, default=None)
    g.add_argument("--max-weight", type=_positive, default=1)
    g.add_argument("--parallel", action="store_true")
    g.set_defaults(func=cmd_gen)

    v = sub.add_parser("verify-bounds", parents=[common], help="bound report rows")
    v.add_argument("--udt", nargs="*", default=None)
    v.add_argument("--leaf-size", default="5:8")
    v.add_argument("--leaf-types", default="graphic,cographic,R10,F7")
    v.add_argument("--max-m", type=int, default=20)
    v.set_defaults(func=cmd_verify_bounds)
    return p


def _code_for(exc: CircuitForgeError) -> int:
    if isinstance(exc, FormatError):
        return EXIT_INPUT
    if isinstance(exc, GirthViolationError):
        return EXIT_GIRTH
    if isinstance(exc, (TUViolationError, EntryError)):
        return EXIT_TU
    if isinstance(exc, GenerationError):
        return EXIT_GEN
    return EXIT_CAP


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    buf = io.StringIO()
    try:
        code = args.func(args, buf)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except GirthViolationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.witness is not None:
            w = exc.witness
            print(f"witness: {_join(sorted(w) if isinstance(w, (set, frozenset)) else w)}", file=sys.stderr)
        return EXIT_GIRTH
    except CircuitForgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _code_for(exc)
    except (ValueError, OverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    out.write(buf.getvalue())
    return code


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
