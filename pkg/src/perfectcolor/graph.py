"""Graph representation, file ingestion, and proper-coloring checks.

Conventions used across the package:

* Vertices are stored 0-based internally.  File formats (DIMACS ``.col``
  and plain edge lists) label vertices 1..n, and the parsers translate.
* Colors are 1-based integers in ``[1, k]`` everywhere, including in the
  internal bitmask representation, where color ``c`` occupies bit ``c - 1``.
* A coloring is a sequence of length ``n`` whose entry at index ``v`` is
  the color of vertex ``v``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import cached_property
from typing import IO, Iterable, Sequence


class GraphParseError(ValueError):
    """Malformed graph input; remembers the offending 1-based line number."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class InstanceRejectedError(ValueError):
    """The (graph, k) pair does not satisfy the k > 3*max_degree requirement."""


@dataclass(frozen=True)
class Graph:
    """Immutable undirected graph with a fixed vertex ordering.

    The vertex ordering used throughout the sampler is simply the numeric
    order 0..n-1 (i.e. the label order of the input file).
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    adj: tuple[tuple[int, ...], ...]

    @staticmethod
    def from_edges(n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        """Build a graph on vertices 0..n-1 from an iterable of 0-based pairs.

        Rejects self-loops and out-of-range endpoints; duplicate edges are
        collapsed.
        """
        norm = set()
        for u, w in edges:
            if u == w:
                raise GraphParseError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= w < n):
                raise GraphParseError(f"edge ({u},{w}) out of range for n={n}")
            norm.add((u, w) if u < w else (w, u))
        sorted_edges = tuple(sorted(norm))
        nbrs: list[list[int]] = [[] for _ in range(n)]
        for u, w in sorted_edges:
            nbrs[u].append(w)
            nbrs[w].append(u)
        return Graph(n, sorted_edges, tuple(tuple(sorted(a)) for a in nbrs))

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def max_degree(self) -> int:
        return max((len(a) for a in self.adj), default=0)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adj[v]

    def earlier_neighbors(self, v: int) -> tuple[int, ...]:
        """Neighbors that precede v in the vertex ordering."""
        return tuple(w for w in self.adj[v] if w < v)

    def later_neighbors(self, v: int) -> tuple[int, ...]:
        """Neighbors that follow v in the vertex ordering."""
        return tuple(w for w in self.adj[v] if w > v)

    def degree(self, v: int) -> int:
        return len(self.adj[v])


def max_degree(g: Graph) -> int:
    """Maximum vertex degree; 0 for edgeless graphs."""
    return g.max_degree


def validate_instance(g: Graph, k: int) -> None:
    """Check that k colors are enough for the sampler's guarantee.

    Raises InstanceRejectedError unless k >= 1 and k > 3*max_degree(g).
    """
    if k < 1:
        raise InstanceRejectedError(f"k={k} < 1")
    d = max_degree(g)
    if k <= 3 * d:
        raise InstanceRejectedError(f"k={k} <= 3Δ={3 * d}; need k > 3Δ (Δ={d})")


def is_proper(g: Graph, chi: Sequence[int]) -> bool:
    """True iff no edge has both endpoints the same color.

    ``chi`` must assign a color to every vertex.
    """
    if len(chi) != g.n:
        raise ValueError(f"coloring has {len(chi)} entries for {g.n} vertices")
    for u, w in g.edges:
        if chi[u] == chi[w]:
            return False
    return True


def graph_hash(g: Graph) -> str:
    """Short stable fingerprint of (n, edge set), used in reports."""
    payload = f"{g.n};" + ";".join(f"{u},{w}" for u, w in g.edges)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def _text_lines(source: str | bytes | IO) -> list[str]:
    if isinstance(source, bytes):
        return source.decode("utf-8", errors="replace").splitlines()
    if isinstance(source, str):
        return source.splitlines()
    data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8", errors="replace")
    return data.splitlines()


def _parse_dimacs(lines: list[str]) -> Graph:
    n = None
    edges: list[tuple[int, int]] = []
    for idx, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "p":
            if n is not None:
                raise GraphParseError("duplicate problem line", idx)
            if len(parts) != 4 or parts[1] != "edge":
                raise GraphParseError(f"expected 'p edge n m', got {line!r}", idx)
            try:
                n = int(parts[2])
                int(parts[3])
            except ValueError:
                raise GraphParseError(f"non-integer problem line {line!r}", idx) from None
            if n < 0:
                raise GraphParseError(f"negative vertex count {n}", idx)
        elif parts[0] == "e":
            if n is None:
                raise GraphParseError("edge before problem line", idx)
            if len(parts) != 3:
                raise GraphParseError(f"expected 'e u v', got {line!r}", idx)
            try:
                u, w = int(parts[1]), int(parts[2])
            except ValueError:
                raise GraphParseError(f"non-integer endpoints in {line!r}", idx) from None
            if u == w:
                raise GraphParseError(f"self-loop at vertex {u}", idx)
            if not (1 <= u <= n and 1 <= w <= n):
                raise GraphParseError(f"vertex index out of range in {line!r}", idx)
            edges.append((u - 1, w - 1))
        else:
            raise GraphParseError(f"unrecognized line {line!r}", idx)
    if n is None:
        raise GraphParseError("missing problem line")
    return Graph.from_edges(n, edges)


def _parse_edgelist(lines: list[str]) -> Graph:
    # A comment of the form "# n N" (written by serialize_graph) pins the
    # vertex count, so isolated trailing vertices survive a round trip.
    n = 0
    edges: list[tuple[int, int]] = []
    for idx, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 2 and parts[0] == "n" and parts[1].isdigit():
                n = max(n, int(parts[1]))
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphParseError(f"expected 'u v', got {line!r}", idx)
        try:
            u, w = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphParseError(f"non-integer endpoints in {line!r}", idx) from None
        if u < 1 or w < 1:
            raise GraphParseError(f"vertex labels must be >= 1 in {line!r}", idx)
        if u == w:
            raise GraphParseError(f"self-loop at vertex {u}", idx)
        n = max(n, u, w)
        edges.append((u - 1, w - 1))
    return Graph.from_edges(n, edges)


def load_graph(source: str | bytes | IO, fmt: str = "dimacs") -> Graph:
    """Parse a graph from text, bytes, or a file object.

    ``fmt`` is "dimacs" (lines ``c ...``, ``p edge n m``, ``e u v``) or
    "edgelist" (one ``u v`` pair per line, ``#`` comments), both with
    1-based vertex labels and tolerant of extra whitespace.
    """
    lines = _text_lines(source)
    if fmt == "dimacs":
        return _parse_dimacs(lines)
    if fmt == "edgelist":
        return _parse_edgelist(lines)
    raise ValueError(f"unknown graph format {fmt!r}")


def serialize_graph(g: Graph, fmt: str = "dimacs") -> str:
    """Inverse of load_graph on (n, edge set), for both formats."""
    if fmt == "dimacs":
        out = [f"p edge {g.n} {len(g.edges)}"]
        out += [f"e {u + 1} {w + 1}" for u, w in g.edges]
        return "\n".join(out) + "\n"
    if fmt == "edgelist":
        out = [f"# n {g.n}"]
        out += [f"{u + 1} {w + 1}" for u, w in g.edges]
        return "\n".join(out) + "\n"
    raise ValueError(f"unknown graph format {fmt!r}")


def load_graph_file(path: str, fmt: str | None = None) -> Graph:
    """Load from a path, sniffing the format when ``fmt`` is None.

    ``.col`` files are treated as DIMACS; otherwise the file is DIMACS when
    its first non-comment line is a problem line, else an edge list.
    """
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if fmt is None:
        if path.endswith(".col"):
            fmt = "dimacs"
        else:
            fmt = "edgelist"
            for line in text.splitlines():
                stripped = line.strip()
                if not stripped:
                    continue
                if stripped.startswith(("p ", "c ", "e ")) or stripped in ("c",):
                    fmt = "dimacs"
                break
    return load_graph(text, fmt)
