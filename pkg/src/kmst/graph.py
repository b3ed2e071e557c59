"""Graph model, JSON instance I/O, generators and a tree checker."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Sequence

from .numeric import as_rational, format_rational


class InstanceError(ValueError):
    """Malformed or invalid instance data; the message names the location."""


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on vertices ``0..n-1``.

    Edges are stored canonically: ``u < v``, sorted, one edge per pair.
    The edge index in :attr:`edges` is the edge id used everywhere else.
    """

    n: int
    edges: tuple[tuple[int, int, Fraction], ...]

    @classmethod
    def build(cls, n: int, edges: Iterable[Sequence[Any]]) -> "Graph":
        if isinstance(n, bool) or not isinstance(n, int) or n < 0:
            raise InstanceError(f"n: expected a nonnegative integer, got {n!r}")
        best: dict[tuple[int, int], Fraction] = {}
        for pos, edge in enumerate(edges):
            where = f"edges[{pos}]"
            if not isinstance(edge, (list, tuple)) or len(edge) != 3:
                raise InstanceError(f"{where}: expected [u, v, cost]")
            u, v, raw = edge
            for name, x in (("u", u), ("v", v)):
                if isinstance(x, bool) or not isinstance(x, int):
                    raise InstanceError(f"{where}: vertex {name} must be an integer")
                if not 0 <= x < n:
                    raise InstanceError(f"{where}: vertex {x} out of range 0..{n - 1}")
            if u == v:
                raise InstanceError(f"{where}: self-loop on vertex {u}")
            try:
                cost = as_rational(raw)
            except (TypeError, ValueError) as exc:
                raise InstanceError(f"{where}: bad cost {raw!r}") from exc
            if cost < 0:
                raise InstanceError(f"{where}: negative cost {format_rational(cost)}")
            key = (u, v) if u < v else (v, u)
            if key not in best or cost < best[key]:
                best[key] = cost
        return cls(n, tuple((u, v, c) for (u, v), c in sorted(best.items())))

    @property
    def m(self) -> int:
        return len(self.edges)

    def adjacency(self) -> list[list[tuple[int, int]]]:
        """``adj[u]`` lists ``(neighbour, edge id)`` pairs."""
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.n)]
        for i, (u, v, _) in enumerate(self.edges):
            adj[u].append((v, i))
            adj[v].append((u, i))
        return adj

    def edge_index(self) -> dict[tuple[int, int], int]:
        return {(u, v): i for i, (u, v, _) in enumerate(self.edges)}

    def cost(self, edge_ids: Iterable[int]) -> Fraction:
        return sum((self.edges[i][2] for i in edge_ids), Fraction(0))

    def total_cost(self) -> Fraction:
        return self.cost(range(self.m))

    def components(self) -> list[list[int]]:
        """Connected components, each sorted, ordered by smallest vertex."""
        adj = self.adjacency()
        seen = [False] * self.n
        out = []
        for s in range(self.n):
            if seen[s]:
                continue
            seen[s] = True
            comp, stack = [], [s]
            while stack:
                x = stack.pop()
                comp.append(x)
                for y, _ in adj[x]:
                    if not seen[y]:
                        seen[y] = True
                        stack.append(y)
            out.append(sorted(comp))
        return out

    def to_json(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "edges": [[u, v, format_rational(c)] for u, v, c in self.edges],
        }


def load_instance(data: bytes | str) -> Graph:
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(obj, dict):
        raise InstanceError("top level: expected an object")
    if "n" not in obj or "edges" not in obj:
        raise InstanceError("top level: missing 'n' or 'edges'")
    if not isinstance(obj["edges"], list):
        raise InstanceError("edges: expected a list")
    return Graph.build(obj["n"], obj["edges"])


def dump_instance(g: Graph) -> str:
    return json.dumps(g.to_json()) + "\n"


def component_sizes(g: Graph) -> list[int]:
    return sorted((len(c) for c in g.components()), reverse=True)


def validate_tree(g: Graph, edge_ids: Iterable[int]) -> tuple[bool, frozenset[int]]:
    """Whether the edges form one connected acyclic subgraph, and its vertices."""
    ids = list(edge_ids)
    if len(set(ids)) != len(ids):
        return False, frozenset()
    parent: dict[int, int] = {}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in ids:
        u, v, _ = g.edges[i]
        parent.setdefault(u, u)
        parent.setdefault(v, v)
        ru, rv = find(u), find(v)
        if ru == rv:
            return False, frozenset(parent)
        parent[ru] = rv
    verts = frozenset(parent)
    roots = {find(x) for x in verts}
    return len(roots) <= 1, verts


MODELS = ("gnp", "euclidean-grid", "star", "path")


def generate(model: str, n: int, params: dict[str, Any] | None = None, seed: int = 0) -> Graph:
    """Reproducible test instances.

    ``gnp``: each pair kept with probability ``p``, integer cost drawn from
    ``[min_cost, max_cost]``.  ``euclidean-grid``: points on a ``side x side``
    integer grid, complete graph with L1 distances as costs.  ``star`` and
    ``path``: every edge costs ``cost``.
    """
    params = dict(params or {})
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise InstanceError(f"n must be a positive integer, got {n!r}")
    rng = random.Random(seed)
    if model == "path":
        c = as_rational(params.get("cost", 1))
        return Graph.build(n, [(i, i + 1, c) for i in range(n - 1)])
    if model == "star":
        c = as_rational(params.get("cost", 1))
        return Graph.build(n, [(0, i, c) for i in range(1, n)])
    if model == "gnp":
        p = as_rational(params.get("p", Fraction(1, 2)))
        lo = int(params.get("min_cost", 0))
        hi = int(params.get("max_cost", 4))
        if not 0 <= p <= 1 or lo < 0 or hi < lo:
            raise InstanceError("gnp: need 0 <= p <= 1 and 0 <= min_cost <= max_cost")
        edges = []
        for u in range(n):
            for v in range(u + 1, n):
                # exact Bernoulli(p) from an integer draw
                if rng.randrange(p.denominator) < p.numerator:
                    edges.append((u, v, rng.randint(lo, hi)))
        return Graph.build(n, edges)
    if model == "euclidean-grid":
        side = int(params.get("side", max(2, n)))
        if side < 1 or side * side < n:
            raise InstanceError("euclidean-grid: grid too small for n distinct points")
        cells = rng.sample(range(side * side), n)
        pts = [divmod(c, side) for c in cells]
        edges = [
            (u, v, abs(pts[u][0] - pts[v][0]) + abs(pts[u][1] - pts[v][1]))
            for u in range(n)
            for v in range(u + 1, n)
        ]
        return Graph.build(n, edges)
    raise InstanceError(f"unknown model {model!r}; choose from {', '.join(MODELS)}")
