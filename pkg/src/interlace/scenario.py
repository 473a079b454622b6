"""Scenarios: compact descriptors of how an extension interacts with an
eliminated graph, plus the join / introduce / forget / ignore algebra.

A scenario of an extension U is a pair: an ordered linearly independent list
of vectors over U (the surviving unruled column space of the eliminated
matrix, in minimal-basis form) and a symmetric U x U matrix (the extension
block after elimination).

Canonical form, used everywhere so that scenario equality is tuple equality:
vectors are packed ints with bit 0 = the minimum vertex of U, and the basis
is kept in column-scan order: walk the eliminated matrix's columns in vertex
order and keep each column that is independent of the ones already kept.

The scan order is load-bearing, not cosmetic.  Forgetting an extension
vertex must replay the elimination pivot that the enlarged run would have
used, and that pivot is the column of the smallest-numbered vertex reaching
the forgotten one, i.e. the first kept vector with that component set; a
value-sorted basis picks the wrong pivot on graphs where a larger vertex
carries a smaller column.  Joins stay well defined because the vertex order
of a nice decomposition places the whole left subtree before the right one,
so a joined scan is exactly "left basis, then surviving right vectors".

The fast core works on bare ``(basis_tuple, uu_rows_tuple)`` pairs; the
public functions wrap them in :class:`Scenario` objects carrying vertex ids.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Iterable, Iterator

from .gf2 import (
    MAX_SCENARIO_WIDTH,
    BitVec,
    SymMatrix,
    _eliminate_loop_inplace,
    _sge_positions_inplace,
    bit_positions,
)
from .graph import Graph

Core = tuple[tuple[int, ...], tuple[int, ...]]

EMPTY_CORE: Core = ((), ())

# Enumerating all scenarios for k = 4 would already mean ~23 million; refuse.
MAX_ENUMERATION_K = 3


class ExtensionTooLarge(ValueError):
    pass


# ---------------------------------------------------------------------------
# Span bookkeeping on packed vectors.


def _reduce(v: int, echelon: dict[int, int]) -> int:
    while v:
        top = 1 << (v.bit_length() - 1)
        e = echelon.get(top)
        if e is None:
            return v
        v ^= e
    return 0


def _echelon_insert(v: int, echelon: dict[int, int]) -> bool:
    """Reduce v against echelon; insert the residue if nonzero.  True if independent."""
    r = _reduce(v, echelon)
    if r == 0:
        return False
    echelon[1 << (r.bit_length() - 1)] = r
    return True


def _echelon_of(vectors: Iterable[int]) -> dict[int, int]:
    ech: dict[int, int] = {}
    for v in vectors:
        _echelon_insert(v, ech)
    return ech


def _in_span(v: int, vectors: Iterable[int]) -> bool:
    return _reduce(v, _echelon_of(vectors)) == 0


def _scan_basis(candidates: Iterable[int]) -> tuple[int, ...]:
    """Walk candidates in the given order, keeping each vector independent of
    the ones kept so far.  The kept order is the basis order."""
    ech: dict[int, int] = {}
    out = []
    for v in candidates:
        if _echelon_insert(v, ech):
            out.append(v)
    return tuple(out)


# ---------------------------------------------------------------------------
# The algebra on bare cores.  Positions are indices into the extension's
# vertex order; position 0 is the minimum vertex.


def join_core(s1: Core, s2: Core, gu_rows: tuple[int, ...]) -> Core:
    """Join with s1 the side whose eliminated vertices precede s2's in the
    vertex order; its basis scans first."""
    b1, uu1 = s1
    b2, uu2 = s2
    basis = _scan_basis(b1 + b2)
    uu = tuple(r1 ^ r2 ^ rg for r1, r2, rg in zip(uu1, uu2, gu_rows))
    return basis, uu


def join_core_full_rank(s1: Core, s2: Core, gu_rows: tuple[int, ...]) -> tuple[Core, bool]:
    basis, uu = join_core(s1, s2, gu_rows)
    preserves = len(basis) == len(s1[0]) + len(s2[0])
    return (basis, uu), preserves


def _insert_zero_bit(x: int, p: int) -> int:
    low = x & ((1 << p) - 1)
    return ((x >> p) << (p + 1)) | low


def introduce_core(s: Core, p: int, a_row: int) -> Core:
    """Add an extension vertex at position p whose new-extension adjacency row
    (own loop bit included) is a_row."""
    basis, uu = s
    k = len(uu)
    new_basis = tuple(_insert_zero_bit(v, p) for v in basis)
    new_rows = []
    for i, row in enumerate(uu):
        r = _insert_zero_bit(row, p)
        pos = i if i < p else i + 1
        if (a_row >> pos) & 1:
            r |= 1 << p
        new_rows.append(r)
    new_rows.insert(p, a_row & ((1 << (k + 1)) - 1))
    return new_basis, tuple(new_rows)


def forget_core(s: Core) -> tuple[Core, int, bool]:
    """Move the minimum extension vertex into the eliminated graph.

    Returns (scenario over the remaining extension, rank delta r, keeps) where
    the nullity delta is 1 - r and ``keeps`` says whether full-rank status
    survives (always in cases r=2 and r=1; in case r=0 only when the vertex's
    leftover column is independent of the surviving ones).
    """
    basis, uu = s
    k = len(uu)
    if k == 0:
        raise ValueError("cannot forget from an empty extension")

    odd = [v for v in basis if v & 1]
    if odd:
        # Some unruled column reaches the vertex.  The enlarged elimination
        # pivots on the first such column (the smallest-numbered carrier);
        # simulate that deferred pivot on the survivors, keeping their order.
        w = odd[0]
        w_hi = w & ~1
        rest = []
        for v in basis:
            if v == w:
                continue
            if v & 1:
                v ^= w_hi
            rest.append(v >> 1)
        new_basis = _scan_basis(rest)
        if len(new_basis) != len(rest):
            raise AssertionError("forget pivot simulation lost independence")
        rows = list(uu)
        for i in bit_positions(w_hi):
            mask_i = 1 << i
            for r in range(k):
                if rows[r] & 1:
                    rows[r] ^= mask_i
            rows[i] ^= rows[0]
        new_uu = tuple(r >> 1 for r in rows[1:])
        return (new_basis, new_uu), 2, True

    if uu[0] & 1:
        # Self loop in the extension block: eliminate it there, then drop.
        rows = list(uu)
        _eliminate_loop_inplace(rows, 0)
        new_basis = tuple(v >> 1 for v in basis)
        new_uu = tuple(r >> 1 for r in rows[1:])
        return (new_basis, new_uu), 1, True

    # Unruled vertex: its extension column survives as a fresh candidate.
    # The vertex outranks everything eliminated before it, so the candidate
    # scans last.
    stripped = [v >> 1 for v in basis]
    abar = 0
    for r in range(1, k):
        if uu[r] & 1:
            abar |= 1 << (r - 1)
    appended = abar != 0 and not _in_span(abar, stripped)
    if appended:
        stripped.append(abar)
    new_uu = tuple(r >> 1 for r in uu[1:])
    return (tuple(stripped), new_uu), 0, appended


def ignore_at_core(s: Core, p: int) -> Core:
    """Drop position p from the extension entirely (the vertex never joins
    the graph).  Stripped vectors that become dependent drop out; the
    survivors keep their order."""
    basis, uu = s
    low_mask = (1 << p) - 1

    def strip(x: int) -> int:
        return ((x >> (p + 1)) << p) | (x & low_mask)

    new_basis = _scan_basis(strip(v) for v in basis)
    new_uu = tuple(strip(row) for i, row in enumerate(uu) if i != p)
    return new_basis, new_uu


def ignore_core(s: Core) -> Core:
    return ignore_at_core(s, 0)


def ignore_keeps_full_rank(s: Core) -> bool:
    """Dropping the minimum vertex keeps the unruled columns independent iff
    no combination of them concentrates on that vertex alone."""
    return not _in_span(1, s[0])


# ---------------------------------------------------------------------------
# Public types.


@dataclass(frozen=True)
class Scenario:
    u_order: tuple[int, ...]
    basis: tuple[BitVec, ...]
    uu: SymMatrix

    def __post_init__(self):
        k = len(self.u_order)
        if k > MAX_SCENARIO_WIDTH:
            raise ExtensionTooLarge(f"extension size {k} exceeds {MAX_SCENARIO_WIDTH}")
        if self.uu.dim != k or any(len(v) != k for v in self.basis):
            raise ValueError("scenario components disagree on extension size")

    @classmethod
    def from_core(cls, core: Core, u_order: Iterable[int]) -> "Scenario":
        u_order = tuple(u_order)
        k = len(u_order)
        basis, uu = core
        return cls(
            u_order,
            tuple(BitVec(v, k) for v in basis),
            SymMatrix(uu, u_order),
        )

    @property
    def core(self) -> Core:
        return tuple(v.bits for v in self.basis), self.uu.rows

    @property
    def k(self) -> int:
        return len(self.u_order)


@dataclass(frozen=True)
class FullRankScenario:
    s: Scenario
    full_rank: bool


def scenario_key(s: Scenario) -> bytes:
    """Canonical byte encoding: k, basis size, basis vectors, uu lower triangle."""
    basis, uu = s.core
    k = s.k
    out = bytearray(struct.pack("<BB", k, len(basis)))
    for v in basis:
        out += struct.pack("<H", v)
    tri = 0
    pos = 0
    for i in range(k):
        for j in range(i + 1):
            if (uu[i] >> j) & 1:
                tri |= 1 << pos
            pos += 1
    out += tri.to_bytes((pos + 7) // 8, "little")
    return bytes(out)


def scenario_from_key(key: bytes, u_order: Iterable[int]) -> Scenario:
    k, nb = struct.unpack_from("<BB", key, 0)
    off = 2
    basis = []
    for _ in range(nb):
        (v,) = struct.unpack_from("<H", key, off)
        basis.append(v)
        off += 2
    tri = int.from_bytes(key[off:], "little")
    rows = [0] * k
    pos = 0
    for i in range(k):
        for j in range(i + 1):
            if (tri >> pos) & 1:
                rows[i] |= 1 << j
                rows[j] |= 1 << i
            pos += 1
    return Scenario.from_core((tuple(basis), tuple(rows)), u_order)


# ---------------------------------------------------------------------------
# Scenario extraction and the public algebra.


def _bag_rows(g: Graph, vertices: tuple[int, ...]) -> tuple[int, ...]:
    """Adjacency of g restricted to the given vertices, packed small."""
    rows = []
    for v in vertices:
        big = g.rows[v]
        bits = 0
        for j, w in enumerate(vertices):
            if (big >> w) & 1:
                bits |= 1 << j
        rows.append(bits)
    return tuple(rows)


def scenario_of(g: Graph, vprime: Iterable[int], u: Iterable[int]) -> Scenario:
    """The scenario of g[vprime] extended by u, per symmetric elimination.

    Requires every vprime vertex to precede every u vertex (vertex ids are
    the order).
    """
    vp = sorted(set(vprime))
    uo = sorted(set(u))
    if set(vp) & set(uo):
        raise ValueError("vprime and u must be disjoint")
    if vp and uo and vp[-1] > uo[0]:
        raise ValueError("every vprime vertex must precede every extension vertex")
    k = len(uo)
    if k > MAX_SCENARIO_WIDTH:
        raise ExtensionTooLarge(f"extension size {k} exceeds {MAX_SCENARIO_WIDTH}")
    verts = tuple(vp + uo)
    rows = list(_bag_rows(g, verts))
    m = len(vp)
    _sge_positions_inplace(rows, range(m))
    cols = []
    for c in range(m):
        vec = 0
        for i in range(k):
            if (rows[m + i] >> c) & 1:
                vec |= 1 << i
        cols.append(vec)
    basis = _scan_basis(cols)
    uu = tuple(rows[m + i] >> m for i in range(k))
    return Scenario.from_core((basis, uu), uo)


def _graph_on_u(gu: Graph, u_order: tuple[int, ...]) -> tuple[int, ...]:
    if gu.n != len(u_order):
        raise ValueError("graph on U has wrong vertex count")
    return gu.rows


def join(s1: Scenario, s2: Scenario, gu: Graph) -> Scenario:
    """The unique scenario of a disjoint union of two extended graphs."""
    if s1.u_order != s2.u_order:
        raise ValueError("scenarios are over different extensions")
    rows = _graph_on_u(gu, s1.u_order)
    return Scenario.from_core(join_core(s1.core, s2.core, rows), s1.u_order)


def introduce(s: Scenario, a: int, g_utilde: Graph) -> Scenario:
    """Extend the extension by vertex a (not connected to the eliminated part).

    g_utilde is the graph on U + {a}; its vertex i corresponds to the i-th
    vertex of the enlarged extension in order.
    """
    if a in s.u_order:
        raise ValueError(f"vertex {a} already in the extension")
    new_order = tuple(sorted(s.u_order + (a,)))
    p = new_order.index(a)
    rows = _graph_on_u(g_utilde, new_order)
    return Scenario.from_core(introduce_core(s.core, p, rows[p]), new_order)


def forget(s: Scenario, a: int, gu: Graph | None = None) -> tuple[Scenario, int, int]:
    """Move extension vertex a (the minimum of U) into the eliminated graph.

    Returns (new scenario, rank delta, nullity delta).  The bag graph is
    accepted for call-site symmetry with join/introduce, but the result is
    determined by the scenario alone.
    """
    if not s.u_order or a != s.u_order[0]:
        raise ValueError("only the minimum extension vertex can be forgotten")
    core, r, _ = forget_core(s.core)
    return Scenario.from_core(core, s.u_order[1:]), r, 1 - r


def ignore(s: Scenario, a: int) -> Scenario:
    """Drop vertex a from the extension without adding it to the graph."""
    if a not in s.u_order:
        raise ValueError(f"vertex {a} not in the extension")
    p = s.u_order.index(a)
    rest = s.u_order[:p] + s.u_order[p + 1 :]
    return Scenario.from_core(ignore_at_core(s.core, p), rest)


def join_full_rank(
    fs1: FullRankScenario, fs2: FullRankScenario, gu: Graph
) -> tuple[Scenario, bool]:
    """Join two full-rank scenarios; the flag reports whether full rank survives."""
    if not (fs1.full_rank and fs2.full_rank):
        raise ValueError("join_full_rank requires both inputs flagged full rank")
    s1, s2 = fs1.s, fs2.s
    if s1.u_order != s2.u_order:
        raise ValueError("scenarios are over different extensions")
    rows = _graph_on_u(gu, s1.u_order)
    core, preserves = join_core_full_rank(s1.core, s2.core, rows)
    return Scenario.from_core(core, s1.u_order), preserves


# ---------------------------------------------------------------------------
# Enumeration.


def _independent_lists(k: int) -> Iterator[tuple[int, ...]]:
    """All ordered linearly independent lists of nonzero vectors in Z_2^k.

    Order matters: a scenario's basis is in column-scan order, and any order
    of an independent set is realizable by laying the carrying vertices out
    accordingly."""

    def extend(prefix: list[int], ech: dict[int, int]):
        yield tuple(prefix)
        for v in range(1, 1 << k):
            e2 = dict(ech)
            if _echelon_insert(v, e2):
                prefix.append(v)
                yield from extend(prefix, e2)
                prefix.pop()

    yield from extend([], {})


def _symmetric_rows(k: int) -> Iterator[tuple[int, ...]]:
    pairs = [(i, j) for i in range(k) for j in range(i + 1)]
    for code in range(1 << len(pairs)):
        rows = [0] * k
        for p, (i, j) in enumerate(pairs):
            if (code >> p) & 1:
                rows[i] |= 1 << j
                rows[j] |= 1 << i
        yield tuple(rows)


def iter_scenario_cores(k: int) -> Iterator[Core]:
    if k > MAX_ENUMERATION_K:
        raise ExtensionTooLarge(f"scenario enumeration limited to k <= {MAX_ENUMERATION_K}")
    for basis in _independent_lists(k):
        for uu in _symmetric_rows(k):
            yield basis, uu


def enumerate_scenarios(k: int) -> list[Scenario]:
    """All canonical scenarios for a k-vertex extension (vertices 0..k-1)."""
    order = tuple(range(k))
    return [Scenario.from_core(c, order) for c in iter_scenario_cores(k)]


def scenario_count_bound(k: int) -> int:
    return 1 << ((3 * k + 1) * k // 2)
