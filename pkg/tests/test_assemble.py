from fractions import Fraction as F

import pytest
from hypothesis import assume, given, settings, strategies as st

from kmst.assemble import assemble_k_tree, first_big_merge, pick, tree_edges_on
from kmst.engine import MINUS_ALL, PLUS_ALL, TiePolicy, run_pd
from kmst.graph import Graph, generate, validate_tree
from kmst.solver import solve
from kmst.threshold import find_critical_tie, find_threshold
from kmst.verify import brute_force_opt

I1 = generate("path", 3, {"cost": 2})
I2 = generate("star", 4, {"cost": 2})


def set_with(result, members):
    return next(s.id for s in result.nodes if s.members == frozenset(members))


def test_pick_single_vertex_and_whole_set():
    r = run_pd(I1, 2)
    top = r.tops()[0].id
    for w in range(3):
        assert pick(r, top, w, 1)[0] == {w}
        assert pick(r, top, w, 3)[0] == {0, 1, 2}


def test_pick_follows_merge_history():
    # {b, c} merge first on the free edge, then {a} joins on (a, b)
    a, b, c = 0, 1, 2
    g = Graph.build(3, [(a, b, 2), (b, c, 0)])
    r = run_pd(g, 3)
    x = set_with(r, {a, b, c})
    assert set(r.nodes[x].children) == {a, set_with(r, {b, c})}
    assert pick(r, x, a, 2) == (frozenset({a, b}), b)


def test_pick_rejects_bad_arguments():
    r = run_pd(I1, 2)
    with pytest.raises(ValueError):
        pick(r, 0, 1, 1)
    with pytest.raises(ValueError):
        pick(r, r.tops()[0].id, 0, 4)
    with pytest.raises(ValueError):
        pick(r, r.tops()[0].id, 0, 0)


def test_assemble_i1_pair():
    sol = solve(I1, 2).solution
    assert sol.cost == 2 and len(sol.edges) == 1 and len(sol.vertices) == 2
    assert sol.cost == brute_force_opt(I1, 2).opt_cost


def test_assemble_i2_whole_star():
    sol = solve(I2, 4).solution
    assert sol.cost == 6 and sorted(sol.edges) == [0, 1, 2]
    assert brute_force_opt(I2, 4).opt_cost == 6


def test_exact_fit_at_first_block():
    # two free pairs joined by an expensive edge: the first kernel has k vertices
    g = Graph.build(4, [(0, 1, 0), (2, 3, 0), (1, 2, 4)])
    sol = solve(g, 2).solution
    assert sol.cost == 0 and sol.vertices in ({0, 1}, {2, 3})


def test_solution_json_shape():
    sol = solve(I1, 2).solution
    assert sol.to_json(I1) == {
        "k": 2, "cost": "2", "edges": [[1, 2]], "final_vertex": 2, "lambda1": "1", "potential_V": "0",
    }


instances = st.builds(
    lambda n, seed, p: generate("gnp", n, {"p": p}, seed),
    st.integers(2, 7),
    st.integers(0, 100_000),
    st.sampled_from(["1/3", "1/2", "2/3", "1"]),
)


@settings(max_examples=80, deadline=None)
@given(instances, st.data())
def test_assembled_tree_lies_in_the_winning_kernel(g, data):
    assume(g.m > 0)
    k = data.draw(st.integers(2, max(len(c) for c in g.components())))
    lam = find_threshold(g, k).lambda1
    tie = find_critical_tie(g, k, lam)
    sol = assemble_k_tree(tie, k)
    run = tie.winning_run
    src = run.nodes[first_big_merge(run, k)]
    assert len(sol.vertices) == k and sol.vertices <= src.kernel
    ok, spanned = validate_tree(g, sol.edges)
    assert ok and spanned == sol.vertices
    assert sol.final_vertex in sol.vertices
    assert set(sol.edges) <= set(run.pruned_edges(src.id))
    again = assemble_k_tree(find_critical_tie(g, k, lam), k)
    assert (again.vertices, again.edges, again.final_vertex) == (sol.vertices, sol.edges, sol.final_vertex)


@settings(max_examples=40, deadline=None)
@given(instances, st.fractions(min_value=0, max_value=4, max_denominator=4),
       st.sampled_from([MINUS_ALL, PLUS_ALL, TiePolicy.prefix(2)]))
def test_pick_is_connected_and_contains_w(g, lam, policy):
    r = run_pd(g, lam, policy)
    for s in r.nodes:
        for w in sorted(s.members):
            for k in range(1, s.size + 1):
                verts, last = pick(r, s.id, w, k)
                assert len(verts) == k and w in verts and last in verts
                ok, spanned = validate_tree(g, tree_edges_on(r, verts))
                assert k == 1 or (ok and spanned == verts)
