"""Undirected graphs with optional self loops, stored as bit-packed adjacency rows.

Vertices are dense 0-based ints assigned at ingestion; original external ids
live in ``labels`` and only matter for file io and reporting.  Graphs are
immutable; ``induced`` and ``toggle_loops`` return fresh graphs.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .gf2 import SymMatrix, _rank_rows


@dataclass(frozen=True)
class Graph:
    n: int
    adjacency: SymMatrix
    labels: tuple = field(default=())

    def __post_init__(self):
        if self.adjacency.dim != self.n:
            raise ValueError("adjacency dimension != n")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(range(1, self.n + 1)))
        elif len(self.labels) != self.n:
            raise ValueError("labels length != n")

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: Iterable[tuple[int, int]] = (),
        loops: Iterable[int] = (),
        labels: Sequence | None = None,
    ) -> "Graph":
        """Build a graph from 0-based vertex pairs.  Repeated edges collapse."""
        rows = [0] * n
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise KeyError(f"edge ({u}, {v}) out of range")
            rows[u] |= 1 << v
            rows[v] |= 1 << u
        for v in loops:
            if not 0 <= v < n:
                raise KeyError(f"loop vertex {v} out of range")
            rows[v] |= 1 << v
        adim = SymMatrix(tuple(rows), tuple(range(n)))
        return cls(n, adim, tuple(labels) if labels is not None else ())

    @property
    def rows(self) -> tuple[int, ...]:
        return self.adjacency.rows

    def has_edge(self, u: int, v: int) -> bool:
        return bool((self.rows[u] >> v) & 1)

    def has_loop(self, v: int) -> bool:
        return self.has_edge(v, v)

    def edges(self) -> list[tuple[int, int]]:
        """All edges as ordered pairs u <= v, loops included."""
        out = []
        for u in range(self.n):
            row = self.rows[u] >> u
            v = u
            while row:
                if row & 1:
                    out.append((u, v))
                row >>= 1
                v += 1
        return out

    def _check_vertices(self, vs: Iterable[int]) -> list[int]:
        vs = sorted(set(vs))
        for v in vs:
            if not 0 <= v < self.n:
                raise KeyError(f"unknown vertex {v}")
        return vs

    def induced(self, vertices: Iterable[int]) -> "Graph":
        """Subgraph induced by the given vertices, re-densified in id order."""
        vs = self._check_vertices(vertices)
        rows = []
        for v in vs:
            old = self.rows[v]
            bits = 0
            for j, w in enumerate(vs):
                if (old >> w) & 1:
                    bits |= 1 << j
            rows.append(bits)
        sub = SymMatrix(tuple(rows), tuple(range(len(vs))))
        return Graph(len(vs), sub, tuple(self.labels[v] for v in vs))

    def toggle_loops(self, vertices: Iterable[int]) -> "Graph":
        """The graph with self loops flipped on the given vertices."""
        vs = self._check_vertices(vertices)
        rows = list(self.rows)
        for v in vs:
            rows[v] ^= 1 << v
        return Graph(self.n, SymMatrix(tuple(rows), self.adjacency.index_map), self.labels)

    def rank_nullity(self) -> tuple[int, int]:
        r = _rank_rows(self.rows)
        return r, self.n - r


# ---------------------------------------------------------------------------
# Generators (seeded, reproducible); used by the CLI `gen` command and tests.


def path_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    edges = [(i, i + 1) for i in range(n - 1)]
    if n > 2:
        edges.append((n - 1, 0))
    return Graph.from_edges(n, edges)


def complete_graph(n: int) -> Graph:
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def random_tree(n: int, rng: random.Random) -> Graph:
    edges = [(rng.randrange(i), i) for i in range(1, n)]
    return Graph.from_edges(n, edges)


def random_graph(n: int, rng: random.Random, edge_p: float = 0.5, loop_p: float = 0.0) -> Graph:
    edges = [
        (i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < edge_p
    ]
    loops = [v for v in range(n) if rng.random() < loop_p]
    return Graph.from_edges(n, edges, loops)


def random_partial_ktree(
    n: int, k: int, rng: random.Random, drop_p: float = 0.3, loop_p: float = 0.0
) -> Graph:
    """Random subgraph of a k-tree: treewidth <= k, so nice bags have <= k+1 vertices."""
    cliques = [list(range(min(n, k + 1)))]
    edges = {(i, j) for i in range(min(n, k + 1)) for j in range(i + 1, min(n, k + 1))}
    for v in range(k + 1, n):
        base = rng.choice(cliques)
        sub = rng.sample(base, min(k, len(base)))
        for u in sub:
            edges.add((min(u, v), max(u, v)))
        cliques.append(sub + [v])
    kept = [e for e in sorted(edges) if rng.random() >= drop_p]
    loops = [v for v in range(n) if rng.random() < loop_p]
    return Graph.from_edges(n, kept, loops)
