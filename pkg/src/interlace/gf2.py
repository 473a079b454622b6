"""Bit-packed GF(2) vectors, symmetric matrices, and symmetric elimination steps.

Matrices are stored row-wise as Python ints: bit ``j`` of ``rows[i]`` is the
``(i, j)`` entry.  Addition is XOR, multiplication is AND.  The elimination
steps (`eliminate_loop`, `eliminate_edge`) mirror each column operation with
the corresponding row operation so that symmetric matrices stay symmetric,
and they never swap rows or columns: the row/column order encodes the vertex
order and must survive elimination.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

# Scenario vectors must fit this many bits.  Extensions wider than this are
# refused long before here by the bag-size guard, so this is a structural
# backstop, not a tuning knob.
MAX_SCENARIO_WIDTH = 16


def bit_positions(x: int) -> Iterator[int]:
    """Yield the positions of set bits of x, ascending."""
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


@dataclass(frozen=True)
class BitVec:
    """A GF(2) vector of fixed length, packed into an int (bit i = position i)."""

    bits: int
    n: int

    def __post_init__(self):
        if self.bits >> self.n:
            raise ValueError("bits set beyond vector length")

    @classmethod
    def from_bits(cls, seq: Iterable[int]) -> "BitVec":
        bits = 0
        n = 0
        for b in seq:
            if b:
                bits |= 1 << n
            n += 1
        return cls(bits, n)

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError(i)
        return (self.bits >> i) & 1

    def to_tuple(self) -> tuple[int, ...]:
        return tuple((self.bits >> i) & 1 for i in range(self.n))


@dataclass(frozen=True)
class SymMatrix:
    """A symmetric square GF(2) matrix whose rows/columns are labelled by vertices."""

    rows: tuple[int, ...]
    index_map: tuple[int, ...]

    def __post_init__(self):
        if len(self.rows) != len(self.index_map):
            raise ValueError("index_map length must match row count")

    @classmethod
    def from_rows(
        cls,
        rows: Sequence[int] | Sequence[Sequence[int]],
        index_map: Sequence[int] | None = None,
        check: bool = True,
    ) -> "SymMatrix":
        packed = []
        for r in rows:
            if isinstance(r, int):
                packed.append(r)
            else:
                bits = 0
                for j, b in enumerate(r):
                    if b:
                        bits |= 1 << j
                packed.append(bits)
        if index_map is None:
            index_map = range(len(packed))
        m = cls(tuple(packed), tuple(index_map))
        if check and not m.is_symmetric():
            raise ValueError("matrix is not symmetric")
        return m

    @property
    def dim(self) -> int:
        return len(self.rows)

    def at(self, i: int, j: int) -> int:
        """Entry by position."""
        return (self.rows[i] >> j) & 1

    def position(self, vertex: int) -> int:
        try:
            return self.index_map.index(vertex)
        except ValueError:
            raise KeyError(f"vertex {vertex} not in matrix") from None

    def entry(self, u: int, v: int) -> int:
        """Entry by vertex id."""
        return self.at(self.position(u), self.position(v))

    def is_symmetric(self) -> bool:
        n = self.dim
        return all(
            self.at(i, j) == self.at(j, i) for i in range(n) for j in range(i + 1, n)
        )

    def to_lists(self) -> list[list[int]]:
        return [[self.at(i, j) for j in range(self.dim)] for i in range(self.dim)]


def _rank_rows(rows: Sequence[int]) -> int:
    """GF(2) rank via plain Gaussian elimination (row swaps allowed)."""
    work = [r for r in rows if r]
    rank = 0
    while work:
        pivot = work.pop()
        if pivot == 0:
            continue
        rank += 1
        top = 1 << (pivot.bit_length() - 1)
        work = [(r ^ pivot) if (r & top) else r for r in work]
        work = [r for r in work if r]
    return rank


def rank(m: SymMatrix) -> int:
    """GF(2) rank.  Symmetry is not required; this is ordinary elimination."""
    return _rank_rows(m.rows)


def nullity(m: SymMatrix) -> int:
    return m.dim - rank(m)


def _eliminate_loop_inplace(rows: list[int], a: int) -> None:
    """Elimination step using a self loop at position a; rows mutated.

    For each neighbour u of a: add column a to column u, then (in the
    modified matrix) row a to row u.
    """
    if not (rows[a] >> a) & 1:
        raise ValueError("eliminate_loop requires a self loop at the pivot")
    mask_a = 1 << a
    nbrs = [u for u in bit_positions(rows[a]) if u != a]
    for u in nbrs:
        mask_u = 1 << u
        for r in range(len(rows)):
            if rows[r] & mask_a:
                rows[r] ^= mask_u
        rows[u] ^= rows[a]


def _eliminate_edge_inplace(rows: list[int], a: int, b: int) -> None:
    """Elimination step using edge ab, where a has no self loop; rows mutated.

    Stage one clears row/column a except at b (adding column/row b to a's
    other neighbours); stage two clears row/column b except at a using the
    now-sparse column/row a, which also removes a self loop at b.
    """
    if (rows[a] >> a) & 1:
        raise ValueError("eliminate_edge requires an unlooped pivot")
    if not (rows[a] >> b) & 1:
        raise ValueError("eliminate_edge requires ab to be an edge")
    mask_b = 1 << b
    nbrs = [u for u in bit_positions(rows[a]) if u != b]
    for u in nbrs:
        mask_u = 1 << u
        for r in range(len(rows)):
            if rows[r] & mask_b:
                rows[r] ^= mask_u
        rows[u] ^= rows[b]
    # Column/row a is now e_b; use it to clear row/column b outside (a, b).
    others = [t for t in bit_positions(rows[b]) if t != a and t != b]
    for t in others:
        rows[b] ^= 1 << t
        rows[t] ^= mask_b
    if (rows[b] >> b) & 1:
        rows[b] ^= mask_b


def eliminate_loop(m: SymMatrix, a: int) -> SymMatrix:
    """Return M*a, the elimination step using the self loop at vertex a."""
    rows = list(m.rows)
    _eliminate_loop_inplace(rows, m.position(a))
    return SymMatrix(tuple(rows), m.index_map)


def eliminate_edge(m: SymMatrix, a: int, b: int) -> SymMatrix:
    """Return M*ab, the elimination step using edge ab (a unlooped)."""
    rows = list(m.rows)
    _eliminate_edge_inplace(rows, m.position(a), m.position(b))
    return SymMatrix(tuple(rows), m.index_map)


def _sge_positions_inplace(rows: list[int], positions: Sequence[int]) -> None:
    """Symmetric Gaussian elimination using a set of row/column positions.

    Positions are processed in ascending order.  A looped position is
    eliminated with its loop; an unlooped one with its minimum neighbour
    among the still-unprocessed positions, if any; otherwise it is skipped.
    """
    pending = sorted(positions)
    for idx, v in enumerate(pending):
        if (rows[v] >> v) & 1:
            _eliminate_loop_inplace(rows, v)
            continue
        row_v = rows[v]
        partner = -1
        for u in pending[idx + 1 :]:
            if (row_v >> u) & 1:
                partner = u
                break
        if partner >= 0:
            _eliminate_edge_inplace(rows, v, partner)


def sge_with_set(m: SymMatrix, vprime: Iterable[int]) -> SymMatrix:
    """Symmetric Gaussian elimination on m using the vertex set vprime.

    The vertex order is the order of m.index_map.
    """
    rows = list(m.rows)
    _sge_positions_inplace(rows, [m.position(v) for v in vprime])
    return SymMatrix(tuple(rows), m.index_map)
