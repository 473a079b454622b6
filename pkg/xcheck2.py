"""Scratch validation: full DP vs oracle on exhaustive small + random graphs."""
import random
import sys
import time
from fractions import Fraction

from interlace.graph import Graph, random_graph
from interlace.tdecomp import heuristic_td, make_nice
from interlace.evaluator import (Assignment, evaluate, evaluate_v0, evaluate_v_poly,
                                 truncate, specialize)
from interlace import oracle as orc
from xcheck import all_graphs


def rand_asg(n, rng, v_zero=False):
    def q():
        return Fraction(rng.randint(-6, 6), rng.randint(1, 4))
    v = Fraction(0) if v_zero else Fraction(0)
    while not v_zero and v == 0:
        v = q()
    return Assignment(tuple(q() for _ in range(n)), tuple(q() for _ in range(n)),
                      q(), v)


def main():
    rng = random.Random(12345)
    t0 = time.time()
    # the convention counterexample graph first
    g = Graph.from_edges(4, [(0, 2), (0, 3), (1, 2)], loops=[2])
    ntd = make_nice(g, heuristic_td(g))
    for _ in range(5):
        asg = rand_asg(4, rng)
        assert evaluate(g, ntd, asg) == orc.oracle_evaluate(g, asg)
    print("counterexample graph ok")

    checked = 0
    for n in range(0, 5):
        for g in all_graphs(n, loops=True):
            ntd = make_nice(g, heuristic_td(g))
            asg = rand_asg(n, rng)
            got = evaluate(g, ntd, asg)
            want = orc.oracle_evaluate(g, asg)
            assert got == want, (g.edges(), asg, got, want)
            # v = 0
            asg0 = Assignment(asg.x, asg.y, asg.u, Fraction(0))
            got0 = evaluate_v0(g, ntd, asg0)
            want0 = orc.oracle_evaluate(g, asg0)
            assert got0 == want0, ("v0", g.edges(), asg0, got0, want0)
            coeffs = evaluate_v_poly(g, ntd, asg0)
            sym0 = coeffs[0] if coeffs else Fraction(0)
            assert sym0 == want0, ("vpoly", g.edges(), got0, sym0)
            checked += 1
        print(f"n={n} exhaustive(loops): ok ({checked} graphs, {time.time()-t0:.1f}s)")

    for trial in range(300):
        n = rng.randint(1, 7)
        g = random_graph(n, rng, edge_p=0.5, loop_p=0.3)
        ntd = make_nice(g, heuristic_td(g))
        asg = rand_asg(n, rng)
        assert evaluate(g, ntd, asg) == orc.oracle_evaluate(g, asg), (g.edges(), trial)
        asg0 = Assignment(asg.x, asg.y, asg.u, Fraction(0))
        assert evaluate_v0(g, ntd, asg0) == orc.oracle_evaluate(g, asg0), ("v0", g.edges())
    print(f"random n<=7: ok ({time.time()-t0:.1f}s)")

    # truncation
    for trial in range(60):
        n = rng.randint(1, 6)
        g = random_graph(n, rng, edge_p=0.5, loop_p=0.3)
        ntd = make_nice(g, heuristic_td(g))
        for d in (0, 1, 2, n):
            tp = truncate(g, ntd, d)
            assert tp.coeffs == orc.oracle_coefficients(g, d), (g.edges(), d)
    print(f"truncation: ok ({time.time()-t0:.1f}s)")

    # all-ones = 3^n
    for trial in range(20):
        n = rng.randint(1, 12)
        g = random_graph(n, rng, edge_p=0.3, loop_p=0.2)
        ntd = make_nice(g, heuristic_td(g))
        if ntd.k > 8:
            continue
        assert evaluate(g, ntd, Assignment.uniform(n)) == 3 ** n
    print(f"all-ones: ok ({time.time()-t0:.1f}s)")

    # specialize two_var on K2 at (3,4) = 11
    g = Graph.from_edges(2, [(0, 1)])
    ntd = make_nice(g, heuristic_td(g))
    assert specialize(g, ntd, "two_var", {"x": 3, "y": 4}) == 11
    # two_var at y=1 -> v=0 route
    val = specialize(g, ntd, "two_var", {"x": 3, "y": 1})
    want = orc.oracle_evaluate(g, Assignment((Fraction(1),) * 2, (Fraction(0),) * 2, Fraction(2), Fraction(0)))
    assert val == want, (val, want)
    print("specialize: ok")


if __name__ == "__main__":
    main()
