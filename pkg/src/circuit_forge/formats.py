"""Plain-text formats: GF2M matrices, WGR graphs, UDT trees and TUM matrices.

Parsing is strict.  Any problem raises FormatError with a 1-based line and
column pointing at the offending token.
"""

from __future__ import annotations

import re
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import CircuitForgeError, FormatError
from .gf2 import BinaryMatroid
from .graphs import WeightedGraph
from .ksum import LEAF_TYPES, Leaf, TreeEdge, Udt

_TOKEN = re.compile(r"\S+")


class _Lines:
    """Cursor over the non-empty lines of a text, keeping positions."""

    def __init__(self, text: str, line_offset: int = 0):
        self.items = []
        for i, raw in enumerate(text.splitlines(), start=1 + line_offset):
            toks = [(m.start() + 1, m.group()) for m in _TOKEN.finditer(raw)]
            if toks:
                self.items.append((i, toks))
        self.pos = 0

    def done(self) -> bool:
        return self.pos >= len(self.items)

    def last_line(self) -> int:
        return self.items[-1][0] if self.items else 1

    def take(self, what: str) -> tuple[int, list[tuple[int, str]]]:
        if self.done():
            raise FormatError(f"unexpected end of input, expected {what}", self.last_line() + 1, 1)
        item = self.items[self.pos]
        self.pos += 1
        return item

    def peek(self):
        return None if self.done() else self.items[self.pos]

    def expect_end(self) -> None:
        if not self.done():
            line, toks = self.items[self.pos]
            raise FormatError("trailing content after the end of the data", line, toks[0][0])


def _int(tok: tuple[int, str], line: int, what: str, lo: int | None = None, choices=None) -> int:
    col, text = tok
    try:
        val = int(text)
    except ValueError:
        raise FormatError(f"{what} must be an integer, got {text!r}", line, col) from None
    if lo is not None and val < lo:
        raise FormatError(f"{what} must be at least {lo}, got {val}", line, col)
    if choices is not None and val not in choices:
        raise FormatError(f"{what} must be one of {sorted(choices)}, got {val}", line, col)
    return val


def _count(line: int, toks: list, n: int, what: str) -> None:
    if len(toks) != n:
        col = toks[n][0] if len(toks) > n else (toks[-1][0] + len(toks[-1][1]) if toks else 1)
        raise FormatError(f"{what}: expected {n} fields, found {len(toks)}", line, col)


def _wrap(line: int, col: int, fn: Callable):
    try:
        return fn()
    except FormatError:
        raise
    except (CircuitForgeError, ValueError) as exc:
        raise FormatError(str(exc), line, col) from exc


# --- GF2M --------------------------------------------------------------------------


def _read_gf2m(cur: _Lines) -> BinaryMatroid:
    line, toks = cur.take("header 'height m'")
    _count(line, toks, 2, "GF2M header")
    height = _int(toks[0], line, "height", lo=0)
    m = _int(toks[1], line, "m", lo=0)
    rows = []
    for _ in range(height):
        ln, tk = cur.take("a matrix row")
        _count(ln, tk, m, "matrix row")
        rows.append([_int(t, ln, "matrix entry", choices={0, 1}) for t in tk])
    ln, tk = cur.take("the label line")
    _count(ln, tk, m, "label line")
    labels = [_int(t, ln, "label", lo=0) for t in tk]
    cols = tuple(sum(rows[i][j] << i for i in range(height)) for j in range(m))
    return _wrap(ln, 1, lambda: BinaryMatroid(tuple(labels), cols, height))


def parse_gf2m(text: str) -> BinaryMatroid:
    cur = _Lines(text)
    M = _read_gf2m(cur)
    cur.expect_end()
    return M


def format_gf2m(M: BinaryMatroid) -> str:
    lines = [f"{M.height} {M.m}"]
    lines += [" ".join(str(M.columns[j] >> i & 1) for j in range(M.m)) for i in range(M.height)]
    lines.append(" ".join(str(x) for x in M.labels))
    return "\n".join(lines) + "\n"


# --- WGR ---------------------------------------------------------------------------


def parse_wgr(text: str) -> WeightedGraph:
    cur = _Lines(text)
    line, toks = cur.take("header 'n m'")
    _count(line, toks, 2, "WGR header")
    n = _int(toks[0], line, "n", lo=0)
    m = _int(toks[1], line, "m", lo=0)
    edges = []
    for _ in range(m):
        ln, tk = cur.take("an edge line 'u v label weight'")
        _count(ln, tk, 4, "edge line")
        u = _int(tk[0], ln, "u", lo=0)
        v = _int(tk[1], ln, "v", lo=0)
        for t, x in ((tk[0], u), (tk[1], v)):
            if x >= n:
                raise FormatError(f"vertex {x} out of range for n = {n}", ln, t[0])
        edges.append((u, v, _int(tk[2], ln, "label", lo=0), _int(tk[3], ln, "weight", lo=1)))
    cur.expect_end()
    return _wrap(1, 1, lambda: WeightedGraph.from_edges(n, edges))


def format_wgr(G: WeightedGraph) -> str:
    lines = [f"{G.n} {G.m}"] + [f"{e.u} {e.v} {e.label} {e.weight}" for e in G.edges]
    return "\n".join(lines) + "\n"


# --- UDT ---------------------------------------------------------------------------


def parse_udt(text: str, base_dir: Path | str | None = None) -> Udt:
    cur = _Lines(text)
    leaves = []
    edges = []
    while not cur.done():
        line, toks = cur.take("a vertex or edge line")
        head_col, head = toks[0]
        if head == "vertex":
            if edges:
                raise FormatError("vertex lines must precede edge lines", line, head_col)
            _count(line, toks, 4, "vertex line")
            vid = _int(toks[1], line, "vertex id", lo=0)
            kind = toks[2][1]
            if kind not in LEAF_TYPES:
                raise FormatError(f"unknown vertex type {kind!r}", line, toks[2][0])
            payload_col, payload = toks[3]
            if payload == "inline":
                M = _read_gf2m(cur)
            else:
                path = Path(payload)
                if base_dir is not None and not path.is_absolute():
                    path = Path(base_dir) / path
                try:
                    sub = path.read_text()
                except OSError as exc:
                    raise FormatError(f"cannot read {payload}: {exc.strerror}", line, payload_col) from None
                try:
                    M = parse_gf2m(sub)
                except FormatError as exc:
                    raise FormatError(f"in {payload}: {exc}", line, payload_col) from None
            leaves.append(Leaf(vid, kind, M))
        elif head == "edge":
            if len(toks) < 4:
                _count(line, toks, 4, "edge line")
            u = _int(toks[1], line, "u", lo=0)
            v = _int(toks[2], line, "v", lo=0)
            k = _int(toks[3], line, "k", choices={1, 2, 3})
            want = {1: 0, 2: 1, 3: 3}[k]
            _count(line, toks, 4 + want, f"edge line for a {k}-sum")
            shared = frozenset(_int(t, line, "label", lo=0) for t in toks[4:])
            if len(shared) != want:
                raise FormatError("repeated shared label", line, toks[4][0])
            edges.append(TreeEdge(u, v, shared))
        else:
            raise FormatError(f"expected 'vertex' or 'edge', got {head!r}", line, head_col)
    if not leaves:
        raise FormatError("no vertices", cur.last_line(), 1)
    return _wrap(1, 1, lambda: Udt(tuple(leaves), tuple(edges)))


def format_udt(T: Udt) -> str:
    parts = []
    for leaf in T.leaves:
        parts.append(f"vertex {leaf.id} {leaf.kind} inline\n" + format_gf2m(leaf.matroid))
    k_of = {0: 1, 1: 2, 3: 3}
    for e in T.edges:
        labels = "".join(f" {x}" for x in sorted(e.shared))
        parts.append(f"edge {e.u} {e.v} {k_of[len(e.shared)]}{labels}\n")
    return "".join(parts)


# --- TUM ---------------------------------------------------------------------------


def parse_tum(text: str) -> np.ndarray:
    cur = _Lines(text)
    line, toks = cur.take("header 'n m'")
    _count(line, toks, 2, "TUM header")
    n = _int(toks[0], line, "n", lo=0)
    m = _int(toks[1], line, "m", lo=0)
    rows = []
    for _ in range(n):
        ln, tk = cur.take("a matrix row")
        _count(ln, tk, m, "matrix row")
        rows.append([_int(t, ln, "entry", choices={-1, 0, 1}) for t in tk])
    cur.expect_end()
    return np.array(rows, dtype=np.int64).reshape(n, m)


def format_tum(A) -> str:
    A = np.asarray(A, dtype=np.int64)
    n, m = A.shape
    lines = [f"{n} {m}"] + [" ".join(str(int(x)) for x in row) for row in A]
    return "\n".join(lines) + "\n"
