"""Brute-force reference implementations.

Everything here is deliberately naive: the polynomial is evaluated straight
from its defining sum over disjoint vertex-set pairs, and scenarios are
extracted with a dense list-of-lists eliminator that applies the closed-form
entry updates rather than the packed column/row operations of the fast path.
Only the GF(2) rank routine is shared with the optimized code.
"""

from __future__ import annotations

from fractions import Fraction

from .evaluator import Assignment
from .gf2 import _rank_rows
from .graph import Graph
from .scenario import Scenario, SymMatrix
from .gf2 import BitVec

ORACLE_EVAL_MAX_N = 14
ORACLE_COEFF_MAX_N = 10


class OracleSizeError(ValueError):
    pass


def _pair_rank(g: Graph, a_mask: int, b_mask: int) -> tuple[int, int]:
    """Rank and nullity of (g with loops toggled on B) induced on A | B."""
    s_mask = a_mask | b_mask
    rows = []
    m = s_mask
    while m:
        low = m & -m
        v = low.bit_length() - 1
        row = g.rows[v] & s_mask
        if (b_mask >> v) & 1:
            row ^= low
        rows.append(row)
        m ^= low
    r = _rank_rows(rows)
    return r, len(rows) - r


def _mask_products(values, n: int) -> list:
    prod = [Fraction(1)] * (1 << n)
    for mask in range(1, 1 << n):
        low = mask & -mask
        prod[mask] = prod[mask ^ low] * values[low.bit_length() - 1]
    return prod


def oracle_evaluate(g: Graph, asg: Assignment):
    """The defining sum of the interlace polynomial, term by term.

    3^n terms; refuses n > 14.  The 0^0 = 1 convention applies to both u at
    rank 0 and v at nullity 0, so v = 0 needs no special casing.
    """
    n = g.n
    if n > ORACLE_EVAL_MAX_N:
        raise OracleSizeError(f"oracle_evaluate handles n <= {ORACLE_EVAL_MAX_N}, got {n}")
    xprod = _mask_products([Fraction(x) for x in asg.x], n)
    yprod = _mask_products([Fraction(y) for y in asg.y], n)
    u = Fraction(asg.u)
    v = Fraction(asg.v)
    upow = [Fraction(1)]
    vpow = [Fraction(1)]
    for _ in range(n):
        upow.append(upow[-1] * u)
        vpow.append(vpow[-1] * v)
    full = (1 << n) - 1
    total = Fraction(0)
    for a_mask in range(1 << n):
        comp = full & ~a_mask
        xa = xprod[a_mask]
        b_mask = comp
        while True:
            r, nl = _pair_rank(g, a_mask, b_mask)
            total += xa * yprod[b_mask] * upow[r] * vpow[nl]
            if b_mask == 0:
                break
            b_mask = (b_mask - 1) & comp
    return total


def oracle_coefficients(g: Graph, d: int) -> dict[tuple[int, int, int, int], int]:
    """Monomials of the d-truncation as {(A mask, B mask, deg u, deg v): coeff}."""
    n = g.n
    if n > ORACLE_COEFF_MAX_N:
        raise OracleSizeError(f"oracle_coefficients handles n <= {ORACLE_COEFF_MAX_N}, got {n}")
    full = (1 << n) - 1
    out: dict[tuple[int, int, int, int], int] = {}
    for a_mask in range(1 << n):
        na = a_mask.bit_count()
        if na > d:
            continue
        comp = full & ~a_mask
        b_mask = comp
        while True:
            if na + b_mask.bit_count() <= d:
                r, nl = _pair_rank(g, a_mask, b_mask)
                key = (a_mask, b_mask, r, nl)
                out[key] = out.get(key, 0) + 1
            if b_mask == 0:
                break
            b_mask = (b_mask - 1) & comp
    return out


# ---------------------------------------------------------------------------
# Dense scenario extraction (Definition-level, unoptimized).


def _dense_adjacency(g: Graph, verts: list[int]) -> list[list[int]]:
    return [[1 if g.has_edge(u, v) else 0 for v in verts] for u in verts]


def _dense_loop_step(m: list[list[int]], a: int) -> list[list[int]]:
    n = len(m)
    out = [[0] * n for _ in range(n)]
    for y in range(n):
        for x in range(n):
            if y == a or x == a:
                out[y][x] = 1 if (y == a and x == a) else 0
            else:
                out[y][x] = m[y][x] ^ (m[a][x] & m[y][a])
    return out


def _dense_edge_step(m: list[list[int]], a: int, b: int) -> list[list[int]]:
    n = len(m)
    out = [[0] * n for _ in range(n)]
    for y in range(n):
        for x in range(n):
            if y in (a, b) or x in (a, b):
                out[y][x] = 1 if {y, x} == {a, b} else 0
            else:
                out[y][x] = (
                    m[y][x]
                    ^ (m[a][x] & m[y][b])
                    ^ (m[y][a] & m[b][x])
                    ^ (m[a][x] & m[y][a] & m[b][b])
                )
    return out


def _dense_sge(m: list[list[int]], use: list[int]) -> list[list[int]]:
    pending = sorted(use)
    for idx, v in enumerate(pending):
        if m[v][v]:
            m = _dense_loop_step(m, v)
            continue
        partner = -1
        for u in pending[idx + 1 :]:
            if m[v][u]:
                partner = u
                break
        if partner >= 0:
            m = _dense_edge_step(m, v, partner)
    return m


def _dense_in_span(vec: list[int], basis: list[list[int]]) -> bool:
    rows = [row[:] for row in basis]
    target = vec[:]
    width = len(vec)
    r = 0
    for col in range(width):
        pivot = None
        for i in range(r, len(rows)):
            if rows[i][col]:
                pivot = i
                break
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        for i in range(len(rows)):
            if i != r and rows[i][col]:
                rows[i] = [x ^ y for x, y in zip(rows[i], rows[r])]
        if target[col]:
            target = [x ^ y for x, y in zip(target, rows[r])]
        r += 1
    return not any(target)


def _col_value(col: list[int]) -> int:
    # Position 0 (the minimum extension vertex) is least significant.
    val = 0
    for i, bit in enumerate(col):
        if bit:
            val |= 1 << i
    return val


def oracle_scenario(g: Graph, vprime, u) -> Scenario:
    """Scenario extraction done literally on the full dense matrix."""
    vp = sorted(set(vprime))
    uo = sorted(set(u))
    if set(vp) & set(uo):
        raise ValueError("vprime and u must be disjoint")
    if vp and uo and vp[-1] > uo[0]:
        raise ValueError("every vprime vertex must precede every extension vertex")
    verts = vp + uo
    mm = len(vp)
    k = len(uo)
    m = _dense_sge(_dense_adjacency(g, verts), list(range(mm)))
    # Scan columns in vertex order, keeping those independent of earlier keeps.
    cols = [[m[mm + i][c] for i in range(k)] for c in range(mm)]
    basis: list[list[int]] = []
    for col in cols:
        if any(col) and not _dense_in_span(col, basis):
            basis.append(col)
    uu_rows = [[m[mm + i][mm + j] for j in range(k)] for i in range(k)]
    return Scenario(
        tuple(uo),
        tuple(BitVec.from_bits(col) for col in basis),
        SymMatrix.from_rows(uu_rows, uo),
    )


def oracle_scenario_full_rank(g: Graph, vprime, u) -> bool:
    """Whether the unruled eliminated columns are linearly independent
    (the multiset, so duplicates and zero columns break it)."""
    vp = sorted(set(vprime))
    uo = sorted(set(u))
    verts = vp + uo
    mm = len(vp)
    k = len(uo)
    m = _dense_sge(_dense_adjacency(g, verts), list(range(mm)))
    unruled = []
    for c in range(mm):
        if m[c][c]:
            continue
        if any(m[c][x] for x in range(mm) if x != c):
            continue
        unruled.append([m[mm + i][c] for i in range(k)])
    packed = [_col_value(col) for col in unruled]
    if any(p == 0 for p in packed):
        return False
    return _rank_rows(packed) == len(packed)
