"""Tree decompositions: ingestion, validation, nice-form conversion, vertex
ordering, and a min-fill heuristic for graphs that arrive without one.

Nice decompositions here follow the empty-root / empty-leaf convention: the
root bag and every leaf bag are empty, so every vertex is introduced exactly
once and forgotten exactly once.  The vertex order numbers vertices by their
forget time in a bottom-up traversal; all scenario bookkeeping depends on it.

File formats are PACE-style ``.gr`` / ``.td`` with one extension: an edge
line ``v v`` in a ``.gr`` file declares a self loop at v.
"""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

from .gf2 import bit_positions
from .graph import Graph

log = logging.getLogger(__name__)

LEAF, INTRODUCE, FORGET, JOIN = range(4)
KIND_NAMES = ("leaf", "introduce", "forget", "join")

DEFAULT_BAG_LIMIT = 8
BAG_WARN_THRESHOLD = 5


class FormatError(ValueError):
    """A malformed input file; carries the offending line number."""

    def __init__(self, message: str, line_no: int):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class InvalidDecomposition(ValueError):
    pass


class BagSizeError(ValueError):
    pass


@dataclass(frozen=True)
class TreeDecomposition:
    bags: tuple[frozenset[int], ...]
    edges: tuple[tuple[int, int], ...]

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags), default=0) - 1

    @property
    def node_count(self) -> int:
        return len(self.bags)


@dataclass(frozen=True)
class Violation:
    kind: str
    witness: object
    message: str

    def __str__(self) -> str:
        return self.message


def validate(g: Graph, td: TreeDecomposition) -> Violation | None:
    """Check the three tree-decomposition conditions; None means valid.

    The report names the first violated condition with a witness.  Tree-ness
    of the node graph is checked first since the conditions presuppose it.
    """
    nb = td.node_count
    if nb == 0:
        return Violation("structure", None, "decomposition has no nodes")
    adj: list[list[int]] = [[] for _ in range(nb)]
    for i, j in td.edges:
        if not (0 <= i < nb and 0 <= j < nb):
            return Violation("structure", (i, j), f"tree edge ({i}, {j}) out of range")
        adj[i].append(j)
        adj[j].append(i)
    if len(td.edges) != nb - 1:
        return Violation(
            "structure", None, f"{len(td.edges)} tree edges for {nb} nodes (need {nb - 1})"
        )
    seen = [False] * nb
    stack = [0]
    seen[0] = True
    count = 1
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if not seen[y]:
                seen[y] = True
                count += 1
                stack.append(y)
    if count != nb:
        w = seen.index(False)
        return Violation("structure", w, f"tree edges do not connect node {w}")

    in_some_bag = [False] * g.n
    for b in td.bags:
        for v in b:
            if not 0 <= v < g.n:
                return Violation("structure", v, f"bag vertex {v} unknown")
            in_some_bag[v] = True
    for v in range(g.n):
        if not in_some_bag[v]:
            return Violation(
                "vertex_uncovered", v, f"vertex {g.labels[v]} appears in no bag"
            )

    for u, v in g.edges():
        if not any(u in b and v in b for b in td.bags):
            return Violation(
                "edge_uncovered",
                (u, v),
                f"edge {g.labels[u]} {g.labels[v]} inside no bag",
            )

    for v in range(g.n):
        nodes = [i for i in range(nb) if v in td.bags[i]]
        node_set = set(nodes)
        seen_v = {nodes[0]}
        stack = [nodes[0]]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y in node_set and y not in seen_v:
                    seen_v.add(y)
                    stack.append(y)
        if len(seen_v) != len(nodes):
            return Violation(
                "bags_disconnected",
                v,
                f"bags containing vertex {g.labels[v]} do not form a subtree",
            )
    return None


# ---------------------------------------------------------------------------
# Nice decompositions.


class NiceTreeDecomposition:
    """Rooted decomposition with typed nodes (leaf / introduce / forget / join).

    Nodes are stored in arrays; ``children[i]`` lists child node ids.  Bags
    are tuples of internal vertex ids sorted ascending.
    """

    def __init__(self):
        self.kind: list[int] = []
        self.vertex: list[int] = []
        self.bags: list[tuple[int, ...]] = []
        self.children: list[tuple[int, ...]] = []
        self.root: int = -1

    def _node(self, kind: int, vertex: int, bag: tuple[int, ...], children: tuple[int, ...]) -> int:
        self.kind.append(kind)
        self.vertex.append(vertex)
        self.bags.append(bag)
        self.children.append(children)
        return len(self.kind) - 1

    def leaf(self) -> int:
        return self._node(LEAF, -1, (), ())

    def intro(self, child: int, a: int) -> int:
        bag = tuple(sorted(self.bags[child] + (a,)))
        return self._node(INTRODUCE, a, bag, (child,))

    def forget(self, child: int, a: int) -> int:
        bag = tuple(v for v in self.bags[child] if v != a)
        return self._node(FORGET, a, bag, (child,))

    def join(self, c1: int, c2: int) -> int:
        return self._node(JOIN, -1, self.bags[c1], (c1, c2))

    @property
    def node_count(self) -> int:
        return len(self.kind)

    @property
    def k(self) -> int:
        return max((len(b) for b in self.bags), default=0)

    @property
    def width(self) -> int:
        return self.k - 1

    def postorder(self) -> list[int]:
        out: list[int] = []
        stack: list[tuple[int, bool]] = [(self.root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                out.append(node)
            else:
                stack.append((node, True))
                for c in reversed(self.children[node]):
                    stack.append((c, False))
        return out

    def as_td(self) -> TreeDecomposition:
        edges = []
        for i, cs in enumerate(self.children):
            for c in cs:
                edges.append((i, c))
        return TreeDecomposition(tuple(frozenset(b) for b in self.bags), tuple(edges))

    def check(self, g: Graph) -> None:
        """Assert every structural invariant; raises InvalidDecomposition."""
        if not self.bags[self.root] == ():
            raise InvalidDecomposition("root bag not empty")
        forgotten: dict[int, int] = {}
        for i in self.postorder():
            kind, bag, cs = self.kind[i], self.bags[i], self.children[i]
            if kind == LEAF:
                if bag or cs:
                    raise InvalidDecomposition(f"node {i}: bad leaf")
            elif kind == INTRODUCE:
                (c,) = cs
                a = self.vertex[i]
                if a in self.bags[c] or set(bag) != set(self.bags[c]) | {a}:
                    raise InvalidDecomposition(f"node {i}: bad introduce")
            elif kind == FORGET:
                (c,) = cs
                a = self.vertex[i]
                if a in bag or set(self.bags[c]) != set(bag) | {a}:
                    raise InvalidDecomposition(f"node {i}: bad forget")
                forgotten[a] = forgotten.get(a, 0) + 1
            else:
                c1, c2 = cs
                if not (bag == self.bags[c1] == self.bags[c2]):
                    raise InvalidDecomposition(f"node {i}: join bags differ")
        if set(forgotten) != set(range(g.n)) or any(c != 1 for c in forgotten.values()):
            raise InvalidDecomposition("vertices not forgotten exactly once")
        bad = validate(g, self.as_td())
        if bad is not None:
            raise InvalidDecomposition(f"nice decomposition invalid: {bad}")


@dataclass(frozen=True)
class VertexOrder:
    """Positions assigned by forget time: rank_of[v] is v's number, 0-based."""

    rank_of: tuple[int, ...]

    @property
    def by_position(self) -> tuple[int, ...]:
        out = [0] * len(self.rank_of)
        for v, p in enumerate(self.rank_of):
            out[p] = v
        return tuple(out)


def vertex_order(ntd: NiceTreeDecomposition, n: int) -> VertexOrder:
    """Number vertices by bottom-up forget order (Algorithm-1 style)."""
    rank = [-1] * n
    c = 0
    for i in ntd.postorder():
        if ntd.kind[i] == FORGET:
            a = ntd.vertex[i]
            if rank[a] != -1:
                raise InvalidDecomposition(f"vertex {a} forgotten twice")
            rank[a] = c
            c += 1
    if c != n or any(r < 0 for r in rank):
        raise InvalidDecomposition("some vertex is never forgotten")
    return VertexOrder(tuple(rank))


def make_nice(g: Graph, td: TreeDecomposition, check: bool = True) -> NiceTreeDecomposition:
    """Convert a valid decomposition into nice form with O(n + nodes) nodes."""
    bad = validate(g, td)
    if bad is not None:
        raise InvalidDecomposition(str(bad))
    nb = td.node_count
    adj: list[list[int]] = [[] for _ in range(nb)]
    for i, j in td.edges:
        adj[i].append(j)
        adj[j].append(i)

    # Root the input tree at node 0 and collect children, deterministically.
    parent = [-1] * nb
    order = [0]
    parent[0] = 0
    for x in order:
        for y in adj[x]:
            if parent[y] == -1:
                parent[y] = x
                order.append(y)
    parent[0] = -1
    kids: list[list[int]] = [[] for _ in range(nb)]
    for x in order[1:]:
        kids[parent[x]].append(x)

    ntd = NiceTreeDecomposition()

    def chain_to(top: int, target: frozenset[int]) -> int:
        have = set(ntd.bags[top])
        for a in sorted(have - target):
            top = ntd.forget(top, a)
        for a in sorted(target - have):
            top = ntd.intro(top, a)
        return top

    # Iterative postorder over the input tree; tops[i] = nice subtree with bag i.
    tops: dict[int, int] = {}
    stack: list[tuple[int, bool]] = [(0, False)]
    while stack:
        node, expanded = stack.pop()
        if not expanded:
            stack.append((node, True))
            for c in reversed(kids[node]):
                stack.append((c, False))
            continue
        bag = td.bags[node]
        pieces = [chain_to(tops[c], bag) for c in kids[node]]
        if not pieces:
            top = ntd.leaf()
            for a in sorted(bag):
                top = ntd.intro(top, a)
        else:
            top = pieces[0]
            for p in pieces[1:]:
                top = ntd.join(top, p)
        tops[node] = top

    top = tops[0]
    for a in sorted(td.bags[0]):
        top = ntd.forget(top, a)
    ntd.root = top
    if check:
        ntd.check(g)
    return ntd


# ---------------------------------------------------------------------------
# Min-fill heuristic.


def heuristic_td(g: Graph) -> TreeDecomposition:
    """Tree decomposition from the min-fill elimination heuristic.

    Ties are broken by smallest external vertex id, so runs are reproducible.
    """
    n = g.n
    if n == 0:
        return TreeDecomposition((frozenset(),), ())
    nbrs: list[set[int]] = [
        set(bit_positions(g.rows[v])) - {v} for v in range(n)
    ]

    def fill_cost(v: int) -> int:
        ns = sorted(nbrs[v])
        cost = 0
        for i, a in enumerate(ns):
            na = nbrs[a]
            for b in ns[i + 1 :]:
                if b not in na:
                    cost += 1
        return cost

    stamp = [0] * n
    heap: list[tuple[int, object, int, int]] = []
    for v in range(n):
        heapq.heappush(heap, (fill_cost(v), g.labels[v], v, 0))

    bags: list[frozenset[int]] = []
    elim_pos = [-1] * n
    elim_nbrs: list[list[int]] = []
    eliminated = [False] * n
    for step in range(n):
        while True:
            cost, _, v, st = heapq.heappop(heap)
            if not eliminated[v] and st == stamp[v]:
                break
        ns = sorted(nbrs[v])
        bags.append(frozenset([v] + ns))
        elim_pos[v] = step
        elim_nbrs.append(ns)
        eliminated[v] = True
        touched = set(ns)
        for i, a in enumerate(ns):
            nbrs[a].discard(v)
            for b in ns[i + 1 :]:
                nbrs[a].add(b)
                nbrs[b].add(a)
        for a in ns:
            touched |= nbrs[a]
        for w in touched:
            if not eliminated[w]:
                stamp[w] += 1
                heapq.heappush(heap, (fill_cost(w), g.labels[w], w, stamp[w]))

    edges = []
    rootless = []
    for step, ns in enumerate(elim_nbrs):
        if ns:
            up = min(elim_pos[w] for w in ns)
            edges.append((step, up))
        else:
            rootless.append(step)
    for a, b in zip(rootless, rootless[1:]):
        edges.append((a, b))
    return TreeDecomposition(tuple(bags), tuple(edges))


def path_td(n: int) -> TreeDecomposition:
    """The natural width-1 decomposition of the n-vertex path graph."""
    if n == 0:
        return TreeDecomposition((frozenset(),), ())
    if n == 1:
        return TreeDecomposition((frozenset([0]),), ())
    bags = tuple(frozenset([i, i + 1]) for i in range(n - 1))
    edges = tuple((i, i + 1) for i in range(n - 2))
    return TreeDecomposition(bags, edges)


def check_bag_guard(k: int, limit: int = DEFAULT_BAG_LIMIT) -> None:
    if k > limit:
        raise BagSizeError(
            f"maximum bag size {k} exceeds the limit {limit}; "
            f"the scenario table would need about 2^{(3 * k + 1) * k // 2} entries per node"
        )
    if k > BAG_WARN_THRESHOLD:
        log.warning(
            "bag size %d: scenario tables can reach 2^%d entries per node; expect a long run",
            k,
            (3 * k + 1) * k // 2,
        )


# ---------------------------------------------------------------------------
# PACE-style file formats.


def parse_gr(text: str) -> Graph:
    """Parse a .gr graph file.  A line ``v v`` declares a self loop at v."""
    n = -1
    m_declared = 0
    edges: list[tuple[int, int]] = []
    loops: list[int] = []
    seen: set[tuple[int, int]] = set()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "p":
            if n >= 0:
                raise FormatError("duplicate problem line", line_no)
            if len(parts) != 4 or parts[1] != "tw":
                raise FormatError("problem line must be 'p tw <n> <m>'", line_no)
            try:
                n, m_declared = int(parts[2]), int(parts[3])
            except ValueError:
                raise FormatError("problem line has non-integer counts", line_no)
            continue
        if n < 0:
            raise FormatError("edge line before problem line", line_no)
        if len(parts) != 2:
            raise FormatError(f"expected 'u v', got {line!r}", line_no)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise FormatError(f"non-integer vertex in {line!r}", line_no)
        if not (1 <= u <= n and 1 <= v <= n):
            raise FormatError(f"vertex out of range 1..{n} in {line!r}", line_no)
        key = (min(u, v), max(u, v))
        if key in seen:
            log.warning("line %d: repeated edge %s %s collapsed", line_no, u, v)
            continue
        seen.add(key)
        if u == v:
            loops.append(u - 1)
        else:
            edges.append((u - 1, v - 1))
    if n < 0:
        raise FormatError("missing problem line", 1)
    if len(seen) != m_declared:
        log.warning("header declares %d edges, found %d", m_declared, len(seen))
    return Graph.from_edges(n, edges, loops)


def write_gr(g: Graph) -> str:
    lines = []
    es = g.edges()
    lines.append(f"p tw {g.n} {len(es)}")
    for u, v in es:
        lines.append(f"{g.labels[u]} {g.labels[v]}")
    return "\n".join(lines) + "\n"


def parse_td(text: str, n_vertices: int | None = None) -> TreeDecomposition:
    """Parse a .td decomposition file (bags hold 1-based vertex ids)."""
    nb = -1
    n_decl = 0
    bag_map: dict[int, frozenset[int]] = {}
    edges: list[tuple[int, int]] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "s":
            if nb >= 0:
                raise FormatError("duplicate solution line", line_no)
            if len(parts) != 5 or parts[1] != "td":
                raise FormatError("solution line must be 's td <N> <w+1> <n>'", line_no)
            try:
                nb, _, n_decl = int(parts[2]), int(parts[3]), int(parts[4])
            except ValueError:
                raise FormatError("solution line has non-integer counts", line_no)
            continue
        if nb < 0:
            raise FormatError("content before solution line", line_no)
        if parts[0] == "b":
            try:
                idx = int(parts[1])
                verts = [int(x) for x in parts[2:]]
            except (ValueError, IndexError):
                raise FormatError(f"malformed bag line {line!r}", line_no)
            if not 1 <= idx <= nb:
                raise FormatError(f"bag id {idx} out of range 1..{nb}", line_no)
            if idx in bag_map:
                raise FormatError(f"duplicate bag {idx}", line_no)
            limit = n_vertices if n_vertices is not None else n_decl
            for v in verts:
                if not 1 <= v <= limit:
                    raise FormatError(f"bag vertex {v} out of range 1..{limit}", line_no)
            bag_map[idx] = frozenset(v - 1 for v in verts)
            continue
        if len(parts) != 2:
            raise FormatError(f"expected tree edge 'i j', got {line!r}", line_no)
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise FormatError(f"non-integer node id in {line!r}", line_no)
        if not (1 <= i <= nb and 1 <= j <= nb):
            raise FormatError(f"tree edge node out of range 1..{nb}", line_no)
        edges.append((i - 1, j - 1))
    if nb < 0:
        raise FormatError("missing solution line", 1)
    bags = tuple(bag_map.get(i, frozenset()) for i in range(1, nb + 1))
    missing = [i + 1 for i in range(nb) if i + 1 not in bag_map]
    if missing:
        log.warning("bags %s not listed; treated as empty", missing)
    return TreeDecomposition(bags, tuple(edges))


def write_td(td: TreeDecomposition, n_vertices: int) -> str:
    lines = [f"s td {td.node_count} {td.width + 1} {n_vertices}"]
    for i, bag in enumerate(td.bags, start=1):
        verts = " ".join(str(v + 1) for v in sorted(bag))
        lines.append(f"b {i} {verts}".rstrip())
    for i, j in td.edges:
        lines.append(f"{i + 1} {j + 1}")
    return "\n".join(lines) + "\n"
