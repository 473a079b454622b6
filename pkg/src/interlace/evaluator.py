"""The dynamic program over a nice tree decomposition.

Per tree node the engine keeps a sparse table mapping (loop-toggle subset D
of the bag, scenario of the bag) to a value in the active domain: exact
rationals for evaluation, residues for the modular mode, truncated
multivariate polynomials, univariate polynomials in v for the symbolic
fallback, or circuit handles for compilation.  Only nonzero parts are stored;
absent parts are zero, which is what makes realistic inputs fast.

Scenarios are interned to small ints and every scenario-algebra step is
memoised, so the per-node cost is dictionary lookups plus domain arithmetic.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .graph import Graph
from .scenario import (
    EMPTY_CORE,
    Core,
    forget_core,
    ignore_core,
    ignore_keeps_full_rank,
    introduce_core,
    iter_scenario_cores,
    join_core,
    join_core_full_rank,
)
from .tdecomp import (
    DEFAULT_BAG_LIMIT,
    FORGET,
    INTRODUCE,
    JOIN,
    LEAF,
    NiceTreeDecomposition,
    check_bag_guard,
    vertex_order,
)

log = logging.getLogger(__name__)

Rational = Fraction


@dataclass(frozen=True)
class Assignment:
    """An evaluation point: per-vertex x/y values plus the ordinary u and v."""

    x: tuple[Rational, ...]
    y: tuple[Rational, ...]
    u: Rational
    v: Rational

    @classmethod
    def uniform(cls, n: int, x=1, y=1, u=1, v=1) -> "Assignment":
        return cls(
            (Fraction(x),) * n, (Fraction(y),) * n, Fraction(u), Fraction(v)
        )


@dataclass
class EngineStats:
    nodes: int = 0
    parts_max: int = 0
    parts_total: int = 0

    def record(self, table_size: int) -> None:
        self.nodes += 1
        self.parts_total += table_size
        if table_size > self.parts_max:
            self.parts_max = table_size


class _ScenarioSpace:
    """Interns scenario cores to ints and memoises the algebra on the ints."""

    def __init__(self):
        self.core_of: list[Core] = [EMPTY_CORE]
        self._ids: dict[Core, int] = {EMPTY_CORE: 0}
        self.empty = 0
        self._join: dict[tuple[int, int, int], tuple[int, bool]] = {}
        self._intro: dict[tuple[int, int, int], int] = {}
        self._forget: dict[int, tuple[int, int, bool]] = {}
        self._ignore: dict[int, tuple[int, bool]] = {}
        self._gu_ids: dict[tuple[int, ...], int] = {}

    def sid(self, core: Core) -> int:
        i = self._ids.get(core)
        if i is None:
            i = len(self.core_of)
            self.core_of.append(core)
            self._ids[core] = i
        return i

    def gu_id(self, rows: tuple[int, ...]) -> int:
        i = self._gu_ids.get(rows)
        if i is None:
            i = len(self._gu_ids)
            self._gu_ids[rows] = i
        return i

    def join(self, s1: int, s2: int, rows: tuple[int, ...], gu: int) -> tuple[int, bool]:
        key = (s1, s2, gu)
        hit = self._join.get(key)
        if hit is None:
            core, keeps = join_core_full_rank(self.core_of[s1], self.core_of[s2], rows)
            hit = (self.sid(core), keeps)
            self._join[key] = hit
        return hit

    def introduce(self, s: int, p: int, arow: int) -> int:
        key = (s, p, arow)
        hit = self._intro.get(key)
        if hit is None:
            hit = self.sid(introduce_core(self.core_of[s], p, arow))
            self._intro[key] = hit
        return hit

    def forget(self, s: int) -> tuple[int, int, bool]:
        hit = self._forget.get(s)
        if hit is None:
            core, r, keeps = forget_core(self.core_of[s])
            hit = (self.sid(core), r, keeps)
            self._forget[s] = hit
        return hit

    def ignore(self, s: int) -> tuple[int, bool]:
        hit = self._ignore.get(s)
        if hit is None:
            core = self.core_of[s]
            hit = (self.sid(ignore_core(core)), ignore_keeps_full_rank(core))
            self._ignore[s] = hit
        return hit


_SPACE = _ScenarioSpace()


def _sorted_bags(ntd: NiceTreeDecomposition, pos: tuple[int, ...]) -> list[tuple[int, ...]]:
    return [tuple(sorted(b, key=pos.__getitem__)) for b in ntd.bags]


def _bag_rows_toggled(g: Graph, bag: tuple[int, ...], d_mask: int) -> tuple[int, ...]:
    rows = []
    for i, v in enumerate(bag):
        big = g.rows[v]
        bits = 0
        for j, w in enumerate(bag):
            if (big >> w) & 1:
                bits |= 1 << j
        if (d_mask >> i) & 1:
            bits ^= 1 << i
        rows.append(bits)
    return tuple(rows)


def run_dp(
    g: Graph,
    ntd: NiceTreeDecomposition,
    domain,
    *,
    full_rank: bool = False,
    threads: int = 1,
    full_enum: bool = False,
    stats: EngineStats | None = None,
    out_tables: dict | None = None,
):
    """Run the parts dynamic program bottom-up; returns the root value."""
    space = _SPACE
    pos = vertex_order(ntd, g.n).rank_of
    bags = _sorted_bags(ntd, pos)
    empty = space.empty
    one = domain.one
    zero = domain.zero
    add = domain.add
    mul = domain.mul
    scale = domain.scale
    is_zero = domain.is_zero

    gu_cache: dict[tuple[tuple[int, ...], int], tuple[tuple[int, ...], int]] = {}

    def bag_graph(bag: tuple[int, ...], d_mask: int) -> tuple[tuple[int, ...], int]:
        key = (bag, d_mask)
        hit = gu_cache.get(key)
        if hit is None:
            rows = _bag_rows_toggled(g, bag, d_mask)
            hit = (rows, space.gu_id(rows))
            gu_cache[key] = hit
        return hit

    def expand_full(tab: dict, bag_len: int) -> dict:
        full = {}
        for d_mask in range(1 << bag_len):
            for core in iter_scenario_cores(bag_len):
                key = (d_mask, space.sid(core))
                full[key] = tab.get(key, zero)
        return full

    tables: dict[int, dict] = {}
    for i in ntd.postorder():
        kind = ntd.kind[i]
        if kind == LEAF:
            tab = {(0, empty): one}
        elif kind == INTRODUCE:
            (j,) = ntd.children[i]
            child = tables.pop(j)
            if full_enum:
                child = expand_full(child, len(bags[j]))
            a = ntd.vertex[i]
            bag = bags[i]
            p = bag.index(a)
            low_mask = (1 << p) - 1
            arow = 0
            for q, w in enumerate(bag):
                if q != p and (g.rows[a] >> w) & 1:
                    arow |= 1 << q
            if g.has_loop(a):
                arow |= 1 << p
            tab = {}
            for (d_mask, sid), val in child.items():
                d_base = ((d_mask & ~low_mask) << 1) | (d_mask & low_mask)
                s0 = space.introduce(sid, p, arow)
                s1 = space.introduce(sid, p, arow ^ (1 << p))
                tab[(d_base, s0)] = val
                tab[(d_base | (1 << p), s1)] = val
        elif kind == FORGET:
            (j,) = ntd.children[i]
            child = tables.pop(j)
            if full_enum:
                child = expand_full(child, len(bags[j]))
            a = ntd.vertex[i]
            if bags[j][0] != a:
                raise AssertionError("forgotten vertex is not the bag minimum")
            tab = {}
            for (d_mask, sid), val in child.items():
                d_up = d_mask >> 1
                sid_f, r, keeps = space.forget(sid)
                if d_mask & 1:
                    if full_rank and not keeps:
                        continue
                    key = (d_up, sid_f)
                    term = scale(val, a, "y", r)
                    prev = tab.get(key)
                    tab[key] = term if prev is None else add(prev, term)
                else:
                    sid_i, ign_keeps = space.ignore(sid)
                    if not full_rank or ign_keeps:
                        key = (d_up, sid_i)
                        prev = tab.get(key)
                        tab[key] = val if prev is None else add(prev, val)
                    if not full_rank or keeps:
                        key = (d_up, sid_f)
                        term = scale(val, a, "x", r)
                        prev = tab.get(key)
                        tab[key] = term if prev is None else add(prev, term)
        else:  # JOIN
            j1, j2 = ntd.children[i]
            left = tables.pop(j1)
            right = tables.pop(j2)
            if full_enum:
                left = expand_full(left, len(bags[j1]))
                right = expand_full(right, len(bags[j2]))
            bag = bags[i]
            by_d_left: dict[int, list] = {}
            for (d_mask, sid), val in left.items():
                by_d_left.setdefault(d_mask, []).append((sid, val))
            by_d_right: dict[int, list] = {}
            for (d_mask, sid), val in right.items():
                by_d_right.setdefault(d_mask, []).append((sid, val))
            tab = {}

            def join_block(items) -> dict:
                part: dict = {}
                for d_mask, s1, v1, rights, gu_rows, gu in items:
                    for s2, v2 in rights:
                        sid3, keeps = space.join(s1, s2, gu_rows, gu)
                        if full_rank and not keeps:
                            continue
                        key = (d_mask, sid3)
                        term = mul(v1, v2)
                        prev = part.get(key)
                        part[key] = term if prev is None else add(prev, term)
                return part

            work = []
            for d_mask, lefts in by_d_left.items():
                rights = by_d_right.get(d_mask)
                if not rights:
                    continue
                gu_rows, gu = bag_graph(bag, d_mask)
                for s1, v1 in lefts:
                    work.append((d_mask, s1, v1, rights, gu_rows, gu))
            if threads > 1 and len(work) > 64:
                nw = min(threads, len(work))
                chunks = [work[w::nw] for w in range(nw)]
                with ThreadPoolExecutor(max_workers=nw) as ex:
                    parts = list(ex.map(join_block, chunks))
                for part in parts:
                    for key, term in part.items():
                        prev = tab.get(key)
                        tab[key] = term if prev is None else add(prev, term)
            else:
                tab = join_block(work)

        if tab:
            drop = [k for k, v in tab.items() if is_zero(v)]
            for k in drop:
                del tab[k]
        tables[i] = tab
        if stats is not None:
            stats.record(len(tab))
        if out_tables is not None:
            out_tables[i] = {
                (d_mask, space.core_of[sid]): val for (d_mask, sid), val in tab.items()
            }

    return tables[ntd.root].get((0, empty), zero)


# ---------------------------------------------------------------------------
# Value domains.


def _fraction(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


class ScalarDomain:
    """Exact rational arithmetic; with include_v=False the v factor is dropped
    entirely (the full-rank sum)."""

    def __init__(self, asg: Assignment, include_v: bool = True):
        self.zero = Fraction(0)
        self.one = Fraction(1)
        u = _fraction(asg.u)
        if include_v:
            v = _fraction(asg.v)
            if v == 0:
                raise ValueError("v must be nonzero in the standard evaluation")
            vs = [v, self.one, self.one / v]
        else:
            vs = [self.one] * 3
        upow = [self.one, u, u * u]
        self._fx = [tuple(_fraction(xa) * upow[r] * vs[r] for r in range(3)) for xa in asg.x]
        self._fy = [tuple(_fraction(ya) * upow[r] * vs[r] for r in range(3)) for ya in asg.y]

    @staticmethod
    def add(a, b):
        return a + b

    @staticmethod
    def mul(a, b):
        return a * b

    def scale(self, val, a: int, kind: str, r: int):
        f = self._fx[a][r] if kind == "x" else self._fy[a][r]
        return val * f

    @staticmethod
    def is_zero(x) -> bool:
        return x == 0


class ModularDomain:
    """Word-size arithmetic mod a user prime.  Hash-grade: collisions mod p
    are possible, so use this for speed checks, not for certified values."""

    def __init__(self, asg: Assignment, p: int, include_v: bool = True):
        if p < 2:
            raise ValueError("modulus must be >= 2")
        self.p = p
        self.zero = 0
        self.one = 1 % p

        def enc(fr) -> int:
            fr = _fraction(fr)
            return fr.numerator * pow(fr.denominator, -1, p) % p

        u = enc(asg.u)
        if include_v:
            v = enc(asg.v)
            if v == 0:
                raise ValueError("v is 0 mod p; pick another modulus")
            vs = [v, 1, pow(v, -1, p)]
        else:
            vs = [1, 1, 1]
        upow = [1, u, u * u % p]
        self._fx = [tuple(enc(xa) * upow[r] * vs[r] % p for r in range(3)) for xa in asg.x]
        self._fy = [tuple(enc(ya) * upow[r] * vs[r] % p for r in range(3)) for ya in asg.y]

    def add(self, a, b):
        return (a + b) % self.p

    def mul(self, a, b):
        return a * b % self.p

    def scale(self, val, a: int, kind: str, r: int):
        f = self._fx[a][r] if kind == "x" else self._fy[a][r]
        return val * f % self.p

    @staticmethod
    def is_zero(x) -> bool:
        return x == 0


class VPolyDomain:
    """Values are polynomials in v (tuples of rational coefficients, index =
    v-degree).  Used as the cross-validation fallback for v = 0: run the DP
    with v symbolic and read off the constant coefficient."""

    def __init__(self, asg: Assignment):
        self.zero: tuple = ()
        self.one = (Fraction(1),)
        u = _fraction(asg.u)
        upow = [Fraction(1), u, u * u]
        self._cx = [tuple(_fraction(xa) * upow[r] for r in range(3)) for xa in asg.x]
        self._cy = [tuple(_fraction(ya) * upow[r] for r in range(3)) for ya in asg.y]

    @staticmethod
    def _trim(c: list) -> tuple:
        while c and c[-1] == 0:
            c.pop()
        return tuple(c)

    def add(self, a, b):
        if len(a) < len(b):
            a, b = b, a
        c = list(a)
        for i, x in enumerate(b):
            c[i] += x
        return self._trim(c)

    def mul(self, a, b):
        if not a or not b:
            return ()
        c = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    c[i + j] += x * y
        return self._trim(c)

    def scale(self, val, a: int, kind: str, r: int):
        f = self._cx[a][r] if kind == "x" else self._cy[a][r]
        scaled = [f * c for c in val]
        shift = 1 - r
        if shift == 1:
            return self._trim([Fraction(0)] + scaled)
        if shift == 0:
            return self._trim(scaled)
        if scaled and scaled[0] != 0:
            raise AssertionError("v-division of a part with a nonzero constant term")
        return self._trim(scaled[1:])

    @staticmethod
    def is_zero(x) -> bool:
        return not x


class TruncPolyDomain:
    """Sparse multivariate polynomials truncated at quasi-degree d.

    Monomial keys are (A mask, B mask, u degree, v degree); coefficients are
    exact ints.  Forgetting with rank delta 2 divides by v, which is exact
    per monomial: every affected part has v-degree >= 1 (asserted)."""

    def __init__(self, d: int):
        self.d = d
        self.zero: dict = {}
        self.one = {(0, 0, 0, 0): 1}

    def add(self, a, b):
        if len(a) < len(b):
            a, b = b, a
        c = dict(a)
        for k, x in b.items():
            s = c.get(k, 0) + x
            if s:
                c[k] = s
            else:
                del c[k]
        return c

    def mul(self, a, b):
        d = self.d
        c: dict = {}
        for (a1, b1, u1, v1), x in a.items():
            for (a2, b2, u2, v2), y in b.items():
                am = a1 | a2
                bm = b1 | b2
                if (am | bm).bit_count() > d:
                    continue
                if a1 & a2 or b1 & b2 or am & bm:
                    raise AssertionError("vertex-indexed parts are multilinear")
                k = (am, bm, u1 + u2, v1 + v2)
                s = c.get(k, 0) + x * y
                if s:
                    c[k] = s
                else:
                    del c[k]
        return c

    def scale(self, val, a: int, kind: str, r: int):
        bit = 1 << a
        dv = 1 - r
        d = self.d
        c: dict = {}
        for (am, bm, du, vv), x in val.items():
            if (am | bm) & bit:
                raise AssertionError("vertex already indexed in this part")
            if (am | bm).bit_count() + 1 > d:
                continue
            nv = vv + dv
            if nv < 0:
                raise AssertionError("v-division of a monomial with v-degree 0")
            if kind == "x":
                k = (am | bit, bm, du + r, nv)
            else:
                k = (am, bm | bit, du + r, nv)
            c[k] = c.get(k, 0) + x
        return c

    @staticmethod
    def is_zero(x) -> bool:
        return not x


# ---------------------------------------------------------------------------
# Public results and entry points.


@dataclass(frozen=True)
class TruncPoly:
    """The d-truncation of the interlace polynomial: all monomials whose
    vertex-indexed degree is at most d."""

    d: int
    n: int
    labels: tuple
    coeffs: Mapping[tuple[int, int, int, int], int] = field(hash=False)

    def monomials(self) -> list[dict]:
        rows = []
        for (am, bm, du, dv), c in self.coeffs.items():
            a_labels = [self.labels[v] for v in range(self.n) if (am >> v) & 1]
            b_labels = [self.labels[v] for v in range(self.n) if (bm >> v) & 1]
            rows.append(
                {
                    "A": sorted(a_labels),
                    "B": sorted(b_labels),
                    "u": du,
                    "v": dv,
                    "coeff": str(c),
                }
            )
        rows.sort(
            key=lambda m: (
                len(m["A"]) + len(m["B"]),
                m["A"],
                m["B"],
                m["u"],
                m["v"],
            )
        )
        return rows

    def dumps(self) -> str:
        import json

        return json.dumps(self.monomials(), indent=0, separators=(",", ":"))


def evaluate(
    g: Graph,
    ntd: NiceTreeDecomposition,
    asg: Assignment,
    *,
    bag_limit: int = DEFAULT_BAG_LIMIT,
    threads: int = 1,
    mod: int | None = None,
    stats: EngineStats | None = None,
    full_enum: bool = False,
):
    """Evaluate the multivariate interlace polynomial at an assignment.

    Exact rational by default; ``mod`` switches to hash-grade arithmetic mod
    the given prime.  v = 0 dispatches to the full-rank variant.
    """
    check_bag_guard(ntd.k, bag_limit)
    if _fraction(asg.v) == 0:
        return evaluate_v0(
            g, ntd, asg, bag_limit=bag_limit, threads=threads, mod=mod, stats=stats
        )
    if mod is None:
        domain = ScalarDomain(asg)
    else:
        domain = ModularDomain(asg, mod)
    return run_dp(
        g, ntd, domain, threads=threads, stats=stats, full_enum=full_enum
    )


def evaluate_v0(
    g: Graph,
    ntd: NiceTreeDecomposition,
    asg: Assignment,
    *,
    bag_limit: int = DEFAULT_BAG_LIMIT,
    threads: int = 1,
    mod: int | None = None,
    stats: EngineStats | None = None,
):
    """Evaluate at v = 0: only full-rank toggled induced subgraphs count."""
    if _fraction(asg.v) != 0:
        raise ValueError("evaluate_v0 requires v = 0; use evaluate instead")
    check_bag_guard(ntd.k, bag_limit)
    if mod is None:
        domain = ScalarDomain(asg, include_v=False)
    else:
        domain = ModularDomain(asg, mod, include_v=False)
    return run_dp(g, ntd, domain, full_rank=True, threads=threads, stats=stats)


def evaluate_v_poly(
    g: Graph,
    ntd: NiceTreeDecomposition,
    asg: Assignment,
    *,
    bag_limit: int = DEFAULT_BAG_LIMIT,
) -> tuple[Fraction, ...]:
    """Evaluate with v carried symbolically; returns coefficients of v^0, v^1, ...

    Cross-validation fallback for the v = 0 mode (read coefficient 0)."""
    check_bag_guard(ntd.k, bag_limit)
    return run_dp(g, ntd, VPolyDomain(asg))


def truncate(
    g: Graph,
    ntd: NiceTreeDecomposition,
    d: int,
    *,
    bag_limit: int = DEFAULT_BAG_LIMIT,
    stats: EngineStats | None = None,
) -> TruncPoly:
    """All monomials of the d-truncation, with exact integer coefficients."""
    if d < 0:
        raise ValueError("truncation degree must be nonnegative")
    check_bag_guard(ntd.k, bag_limit)
    coeffs = run_dp(g, ntd, TruncPolyDomain(d), stats=stats)
    return TruncPoly(d, g.n, g.labels, dict(coeffs))


SPECIAL_FORMS = ("two_var", "vertex_nullity")


def specialize(
    g: Graph,
    ntd: NiceTreeDecomposition,
    form: str,
    at: Mapping[str, object],
    *,
    bag_limit: int = DEFAULT_BAG_LIMIT,
    threads: int = 1,
):
    """Evaluate a named specialization of the polynomial.

    two_var(x, y): per-vertex x_a = 1, y_a = 0, u = x - 1, v = y - 1.
    vertex_nullity(y): two_var with x = 2.
    """
    if form == "two_var":
        x = _fraction(at["x"])
        y = _fraction(at["y"])
    elif form == "vertex_nullity":
        x = Fraction(2)
        y = _fraction(at["y"])
    else:
        raise ValueError(f"unknown form {form!r}; expected one of {SPECIAL_FORMS}")
    asg = Assignment((Fraction(1),) * g.n, (Fraction(0),) * g.n, x - 1, y - 1)
    return evaluate(g, ntd, asg, bag_limit=bag_limit, threads=threads)
