"""Cutting a tree on exactly ``k`` vertices out of the winning run."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import AbstractSet, Optional

from .engine import EngineError, KernelChain, PDResult, potential_of_all
from .graph import validate_tree
from .numeric import format_rational
from .threshold import CriticalTie


@dataclass(frozen=True)
class KTreeSolution:
    edges: tuple[int, ...]
    vertices: frozenset[int]
    final_vertex: int
    lambda1: Fraction
    potential_V: Fraction
    cost: Fraction
    k: int
    source_node: Optional[int] = None  # merge whose kernel first reached k
    at_critical_tie: Optional[bool] = None

    def to_json(self, graph) -> dict:
        return {
            "k": self.k,
            "cost": format_rational(self.cost),
            "edges": [[graph.edges[e][0], graph.edges[e][1]] for e in self.edges],
            "final_vertex": self.final_vertex,
            "lambda1": format_rational(self.lambda1),
            "potential_V": format_rational(self.potential_V),
        }


def pick(
    result: PDResult,
    node: int,
    w: int,
    k: int,
    within: Optional[AbstractSet[int]] = None,
) -> tuple[frozenset[int], int]:
    """``k`` vertices of set ``node`` containing ``w``, following merge history.

    At each merge the side holding ``w`` is descended into if it is too
    large, taken whole if it fits exactly, or taken whole with the rest drawn
    from the other side starting at the far end of the merge edge.  With
    ``within`` the sets are restricted to those vertices (used for kernels).
    Returns the vertices and the vertex at which the recursion stopped.
    """
    nodes = result.nodes
    edges = result.graph.edges

    def members(x: int) -> frozenset[int]:
        m = nodes[x].members
        return m if within is None else m & within

    if w not in members(node):
        raise ValueError(f"vertex {w} not in set {node}")
    if not 1 <= k <= len(members(node)):
        raise ValueError(f"cannot pick {k} vertices from set {node}")
    picked: set[int] = set()
    need = k
    while True:
        s = nodes[node]
        if not s.children:
            picked.add(w)
            return frozenset(picked), w
        c1, c2 = s.children
        if w not in nodes[c1].members:
            c1, c2 = c2, c1
        m1 = members(c1)
        if len(m1) > need:
            node = c1
            continue
        picked |= m1
        if len(m1) == need:
            return frozenset(picked), w
        need -= len(m1)
        u, v, _ = edges[s.merge_edge]
        if u not in nodes[c1].members:
            u, v = v, u
        if v not in members(c2):
            raise EngineError(f"merge edge of set {node} leaves the restricted vertex set")
        node, w = c2, v


def assemble_from_chain(result: PDResult, chain: KernelChain, k: int) -> tuple[frozenset[int], int]:
    """Whole blocks from the start of ``chain`` until the next would reach
    ``k``; the remainder is picked inside that block from its entry vertex."""
    acc: set[int] = set()
    for j, blk in enumerate(chain.blocks):
        if len(acc) + len(blk.members) < k:
            acc |= blk.members
            continue
        r = k - len(acc)
        entry = chain.links[j - 1][2] if j else min(blk.members)
        within = blk.members if blk.kind == "kernel" else None
        got, last = pick(result, blk.node, entry, r, within)
        return frozenset(acc | got), last
    raise EngineError(f"kernel chain spans only {len(acc)} < {k} vertices")


def first_big_merge(result: PDResult, k: int) -> int:
    """Node created by the earliest merge whose kernel has ``k`` vertices."""
    for ev in result.events:
        if ev.kind == "edge" and len(result.nodes[ev.node].kernel) >= k:
            return ev.node
    raise EngineError(f"no kernel of the winning run reaches {k} vertices")


def tree_edges_on(result: PDResult, vertices: AbstractSet[int]) -> tuple[int, ...]:
    edges = result.graph.edges
    return tuple(sorted(e for e in result.forest if edges[e][0] in vertices and edges[e][1] in vertices))


def assemble_k_tree(tie: CriticalTie, k: int) -> KTreeSolution:
    """Tree on exactly ``k`` vertices from the winning run of ``tie``.

    The chain walked is that of the first merge whose kernel reaches ``k``,
    which is the merge made by the critical tie itself whenever that merge
    is already large enough.  The walk is tried from both endpoint kernels
    and the cheaper tree kept; on equal cost the walk starting at the
    kernel holding the smallest vertex wins.
    """
    run = tie.winning_run
    cid = first_big_merge(run, k)
    node = run.nodes[cid]
    if node.chain is None:
        raise EngineError(f"set {cid} grew its kernel without merging two active sets")
    chain = node.chain
    if min(chain.blocks[-1].members) < min(chain.blocks[0].members):
        chain = chain.reversed()
    best = None
    for walk in (chain, chain.reversed()):
        verts, last = assemble_from_chain(run, walk, k)
        edges = tree_edges_on(run, verts)
        ok, spanned = validate_tree(run.graph, edges)
        if len(verts) != k or (k > 1 and (not ok or spanned != verts)):
            raise EngineError("assembled vertex set does not induce a tree")
        cost = run.graph.cost(edges)
        if best is None or cost < best[0]:
            best = (cost, verts, last, edges)
    cost, verts, last, edges = best
    critical_event = next(ev for ev in run.events if ev.tie_group == run.ties.index(tie.tie))
    return KTreeSolution(
        edges=edges,
        vertices=verts,
        final_vertex=last,
        lambda1=tie.lambda1,
        potential_V=potential_of_all(run),
        cost=cost,
        k=k,
        source_node=cid,
        at_critical_tie=critical_event.node == cid,
    )
