from fractions import Fraction as F
from itertools import combinations
from types import SimpleNamespace

import pytest
from hypothesis import assume, given, settings, strategies as st

from kmst.engine import run_pd
from kmst.graph import Graph, generate
from kmst.solver import certificate_from_run, solve
from kmst.verify import (
    DualCertificate,
    OracleCapError,
    brute_force_opt,
    brute_force_table,
    check_dual_feasibility,
    check_lemma4,
    check_prune_lemma,
    check_solution,
    edge_loads,
    lemma4_sides,
    lower_bound,
    lp_lower_bound,
    max_subset_excess,
)

I1 = generate("path", 3, {"cost": 2})
I2 = generate("star", 4, {"cost": 2})


def i1_high_duals():
    r = run_pd(I1, 2)
    return r, {s.members: r.y(s.id) for s in r.nodes}


def test_zero_duals_are_feasible():
    cert = DualCertificate(2, F(0), F(0), {}, F(0))
    assert check_dual_feasibility(I1, cert)
    assert lower_bound(cert) == 0


def test_i1_terminal_duals_are_feasible_and_tight():
    r, y = i1_high_duals()
    cert = certificate_from_run(r, 2)
    assert cert.lambda2 == 2
    assert check_dual_feasibility(I1, cert)
    assert edge_loads(I1, y) == [2, 2]


def test_forcing_lambda2_to_zero_breaks_a_subset_constraint():
    r, y = i1_high_duals()
    res = check_dual_feasibility(I1, DualCertificate(2, F(2), F(0), y, F(0)))
    assert not res
    assert "needs lambda2 >= 2" in res.detail
    excess, witness = max_subset_excess(3, F(2), y)
    assert excess == 2 and 0 < len(witness) < 3


def test_negative_entries_reported():
    res = check_dual_feasibility(I1, DualCertificate(2, F(1), F(-1), {frozenset({0}): F(-1)}, F(0)))
    assert "negative lambda" in res.detail and "y[0]" in res.detail


def test_lower_bound_examples():
    rep = solve(I1, 2)
    assert rep.certificate.lower_bound <= brute_force_opt(I1, 2).opt_cost == 2
    one = solve(I1, 1)
    assert one.certificate.lower_bound <= 0


def test_lemma4_examples():
    assert check_lemma4(I1, [], frozenset({0}), 0, {frozenset({0}): F(1)})
    rep = solve(I1, 2)
    sol, y = rep.solution, rep.certificate.y
    lhs, rhs = lemma4_sides(I1, sol.edges, sol.vertices, sol.final_vertex, y)
    (other,) = sol.vertices - {sol.final_vertex}
    assert rhs == 2 * y[frozenset({other})]
    assert lhs <= rhs
    rep = solve(I2, 4)
    assert check_lemma4(I2, rep.solution.edges, rep.solution.vertices, rep.solution.final_vertex, rep.certificate.y)


def test_prune_lemma_examples():
    assert check_prune_lemma(I1, run_pd(I1, F(1, 2)).nodes)
    assert check_prune_lemma(I1, run_pd(I1, 2).nodes)
    # {2} is neutral, inside the kernel, and joined to the rest by one edge
    fake = [
        SimpleNamespace(members=frozenset({v}), kernel=frozenset({v}), went_neutral=v == 2, children=())
        for v in range(3)
    ] + [
        SimpleNamespace(members=frozenset({0, 1}), kernel=frozenset({0, 1}), went_neutral=False, children=(0, 1)),
        SimpleNamespace(members=frozenset({0, 1, 2}), kernel=frozenset({0, 1, 2}), went_neutral=False, children=(3, 2)),
    ]
    res = check_prune_lemma(I1, fake)
    assert not res and res.data == {"set": 4, "neutral": [2]}


def test_oracle_examples():
    assert brute_force_opt(I1, 2).opt_cost == 2
    assert brute_force_opt(I1, 3).opt_cost == 4
    g = generate("gnp", 6, {"p": "1/2"}, 2)
    assert brute_force_opt(g, 1).opt_cost == 0
    with pytest.raises(OracleCapError):
        brute_force_opt(generate("gnp", 20, {"p": 1}), 10, cap=1000)
    with pytest.raises(ValueError):
        brute_force_opt(Graph.build(3, []), 2)


def test_check_solution_examples():
    for g, k in ((I1, 2), (I2, 4)):
        rep = solve(g, k)
        s = rep.solution
        report = check_solution(g, k, s.edges, s.final_vertex, s.cost, rep.certificate, brute_force_opt(g, k))
        assert report.ok and report.ratio == 1
        assert [c.name for c in report.checks] == [
            "tree", "dual_feasibility", "upper_bound", "lower_bound", "lp_lower_bound", "approximation",
        ]
    rep = solve(I2, 4)
    s = rep.solution
    broken = check_solution(I2, 4, s.edges[1:], s.final_vertex, s.cost, rep.certificate)
    assert not broken.ok and broken.failures()[0].name == "tree"


# n=6, vertex 1 isolated; an optimal 3-tree is {0, 2, 4}.  Sets {0,2,3,4}
# and {0,2,3,4,5} contain it and carry positive duals that none of its
# edges pay for, so lambda1*k - pi(V) overshoots OPT.
PI_V_COUNTEREXAMPLE = Graph.build(6, [(0, 2, 3), (0, 4, 0), (0, 5, 4), (2, 3, 2), (2, 5, 3)])


def test_pi_v_bound_can_exceed_opt():
    g, k = PI_V_COUNTEREXAMPLE, 3
    rep = solve(g, k)
    opt = brute_force_opt(g, k)
    assert rep.certificate.lambda1 == F(5, 4) and rep.certificate.potential_V == 0
    assert lower_bound(rep.certificate) == F(15, 4) > opt.opt_cost == 3
    assert lp_lower_bound(rep.certificate) <= opt.opt_cost
    s = rep.solution
    report = check_solution(g, k, s.edges, s.final_vertex, s.cost, rep.certificate, opt)
    lb = next(c for c in report.checks if c.name == "lower_bound")
    assert not lb.ok and lb.advisory and lb.to_json()["status"] == "warn"
    assert report.ok  # the verdict rests on the weak-duality bound
    assert s.cost <= 2 * opt.opt_cost


def prim(g):
    inside, total = {0}, F(0)
    while len(inside) < g.n:
        c, v = min((c, v if u in inside else u) for u, v, c in g.edges if (u in inside) != (v in inside))
        inside.add(v)
        total += c
    return total


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(0, 100_000))
def test_oracle_on_all_vertices_is_the_mst(n, seed):
    g = generate("gnp", n, {"p": "2/3"}, seed)
    assume(len(g.components()) == 1)
    assert brute_force_opt(g, n).opt_cost == prim(g)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6), st.integers(0, 100_000), st.fractions(min_value=0, max_value=3, max_denominator=4))
def test_laminar_excess_matches_enumeration(n, seed, lam):
    g = generate("gnp", n, {"p": "1/2"}, seed)
    r = run_pd(g, lam)
    y = {s.members: r.y(s.id) for s in r.nodes}
    best = F(0)
    for size in range(1, n):
        for S in map(frozenset, combinations(range(n), size)):
            best = max(best, lam * size - sum(v for T, v in y.items() if T < S))
    assert max_subset_excess(n, lam, y)[0] == best


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 7), st.integers(0, 100_000))
def test_oracle_table_matches_single_queries(n, seed):
    g = generate("gnp", n, {"p": "1/2"}, seed)
    table = brute_force_table(g)
    assert sorted(table) == list(range(1, max(len(c) for c in g.components()) + 1))
    for k, res in table.items():
        assert res == brute_force_opt(g, k)


# The kernel path of the final merge runs through the neutral block
# {2, 3, 7, 9}, absorbed whole, so vertex 3 (itself neutral) ends up as an
# inactive leaf of the spanning tree.  The load inequality behind the
# factor-2 argument assumes no such leaf exists and fails here.
LOAD_COUNTEREXAMPLE = Graph.build(10, [
    (0, 2, 3), (0, 3, 2), (0, 4, 0), (0, 5, 0), (0, 6, 3), (0, 7, 2), (0, 8, 3), (0, 9, 2),
    (1, 2, 4), (1, 3, 4), (1, 6, 0), (1, 7, 2), (1, 8, 3), (2, 4, 4), (2, 8, 2), (2, 9, 0),
    (3, 4, 4), (3, 5, 2), (3, 6, 3), (3, 7, 1), (4, 5, 4), (4, 7, 3), (5, 6, 4), (5, 8, 4),
    (5, 9, 2), (6, 7, 3), (6, 8, 0), (6, 9, 3), (7, 8, 4), (7, 9, 1),
])


def test_load_inequality_can_fail_with_an_inactive_leaf():
    g = LOAD_COUNTEREXAMPLE
    rep = solve(g, 10)
    s = rep.solution
    assert rep.certificate.lambda1 == F(2, 5)
    assert lemma4_sides(g, s.edges, s.vertices, s.final_vertex, rep.certificate.y) == (6, F(28, 5))
    leaf = [e for e in s.edges if 3 in g.edges[e][:2]]
    assert len(leaf) == 1 and rep.run.nodes[3].went_neutral
    assert check_prune_lemma(g, rep.run.nodes)  # graph edges keep {3} attached
    assert s.cost <= 2 * brute_force_opt(g, 10).opt_cost
