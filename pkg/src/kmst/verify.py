"""Independent checks of solver output.

Nothing here reuses the engine's bookkeeping: duals arrive as a plain map
from vertex sets to values and every bound is recomputed from scratch.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Any, Iterable, Mapping, Optional, Sequence

from .graph import Graph, validate_tree
from .numeric import format_rational

DEFAULT_ORACLE_CAP = 1 << 16

Family = Mapping[frozenset, Fraction]


class OracleCapError(RuntimeError):
    """The brute-force oracle would enumerate more candidates than allowed."""


class VerificationError(AssertionError):
    pass


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str = ""
    data: dict = field(default_factory=dict)
    # Advisory checks are reported but do not decide the verdict.
    advisory: bool = False

    def __bool__(self) -> bool:
        return self.ok

    def to_json(self) -> dict:
        status = "pass" if self.ok else ("warn" if self.advisory else "fail")
        out: dict[str, Any] = {"check": self.name, "status": status}
        if self.detail:
            out["detail"] = self.detail
        out.update(self.data)
        return out


@dataclass(frozen=True)
class DualCertificate:
    k: int
    lambda1: Fraction
    lambda2: Fraction
    y: dict[frozenset, Fraction]
    potential_V: Fraction

    @property
    def lower_bound(self) -> Fraction:
        return lower_bound(self)

    @property
    def lp_bound(self) -> Fraction:
        return lp_lower_bound(self)


@dataclass(frozen=True)
class OracleResult:
    opt_cost: Fraction
    opt_edges: tuple[int, ...]
    vertices: frozenset[int]


def lower_bound(cert: DualCertificate) -> Fraction:
    """``lambda1 * k - pi(V)``, the certificate value bounding the output
    cost from above by a factor of two.  Not a valid lower bound on OPT in
    general; see :func:`lp_lower_bound`."""
    return cert.lambda1 * cert.k - cert.potential_V


def lp_lower_bound(cert: DualCertificate) -> Fraction:
    """Weak-duality bound ``lambda1 * k - max(lambda2, pi(V))``.

    Unlike :func:`lower_bound` this stays valid when the duals of sets
    strictly between an optimal tree's vertex set and ``V`` are positive,
    since such sets are charged to ``lambda2`` rather than to tree edges.
    """
    return cert.lambda1 * cert.k - max(cert.lambda2, cert.potential_V)


def edge_loads(g: Graph, y: Family) -> list[Fraction]:
    loads = [Fraction(0)] * g.m
    for S, val in y.items():
        if not val:
            continue
        for i, (u, v, _) in enumerate(g.edges):
            if (u in S) != (v in S):
                loads[i] += val
    return loads


class _Laminar:
    """The family as a forest, with every vertex present as a singleton."""

    def __init__(self, n: int, y: Family) -> None:
        sets = {frozenset((v,)): Fraction(0) for v in range(n)}
        for S, val in y.items():
            sets[frozenset(S)] = sets.get(frozenset(S), Fraction(0)) + val
        order = sorted(sets, key=lambda S: (len(S), sorted(S)))
        self.sets = order
        self.y = [sets[S] for S in order]
        self.parent: list[Optional[int]] = [None] * len(order)
        self.children: list[list[int]] = [[] for _ in order]
        for i, S in enumerate(order):
            for j in range(i + 1, len(order)):
                T = order[j]
                if S < T:
                    self.parent[i] = j
                    self.children[j].append(i)
                    break
        for i, S in enumerate(order):
            for j in range(i + 1, len(order)):
                T = order[j]
                if S & T and not (S <= T or T <= S):
                    raise ValueError(f"dual support is not laminar: {sorted(S)} vs {sorted(T)}")
        self.total = list(self.y)  # sum of y over subsets
        for i in range(len(order)):
            p = self.parent[i]
            while p is not None:
                self.total[p] += self.y[i]
                p = self.parent[p]


def max_subset_excess(n: int, lam1: Fraction, y: Family) -> tuple[Fraction, frozenset]:
    """Largest ``lam1*|S| - sum_{T strictly inside S} y_T`` over nonempty
    ``S`` strictly inside ``V``, with a maximising set (``frozenset()`` when
    nothing beats 0)."""
    if n <= 1:
        return Fraction(0), frozenset()
    lam = _Laminar(n, y)
    sets = lam.sets
    deficit = [lam1 * len(S) - lam.total[i] for i, S in enumerate(sets)]
    any_v: list[tuple[Fraction, frozenset]] = []
    strict_v: list[tuple[Fraction, frozenset]] = []
    for i, S in enumerate(sets):
        kids = lam.children[i]
        if kids:
            tot = sum((any_v[c][0] for c in kids), Fraction(0))
            union = frozenset().union(*(any_v[c][1] for c in kids))
            strict = max(
                ((tot - any_v[c][0] + strict_v[c][0], union - any_v[c][1] | strict_v[c][1]) for c in kids),
                key=lambda t: t[0],
            )
        else:
            strict = (Fraction(0), frozenset())
        strict_v.append(strict)
        any_v.append(max((deficit[i], S), strict, key=lambda t: t[0]))
    best: tuple[Fraction, frozenset] = (Fraction(0), frozenset())
    for i, S in enumerate(sets):
        if len(S) < n:
            cand = (deficit[i] + lam.y[i], S)
            if cand[0] > best[0]:
                best = cand
    roots = [i for i in range(len(sets)) if lam.parent[i] is None]
    tot = sum((any_v[r][0] for r in roots), Fraction(0))
    union = frozenset().union(*(any_v[r][1] for r in roots))
    for r in roots:
        cand = (tot - any_v[r][0] + strict_v[r][0], union - any_v[r][1] | strict_v[r][1])
        if cand[0] > best[0]:
            best = cand
    return best


def check_dual_feasibility(g: Graph, cert: DualCertificate) -> CheckResult:
    """Edge constraints exactly, subset constraints through the laminar
    decomposition of the dual support."""
    violations: list[str] = []
    if cert.lambda1 < 0 or cert.lambda2 < 0:
        violations.append("negative lambda")
    for S, val in cert.y.items():
        if val < 0:
            violations.append(f"y{sorted(S)} = {format_rational(val)} < 0")
    for i, load in enumerate(edge_loads(g, cert.y)):
        u, v, c = g.edges[i]
        if load > c:
            violations.append(f"edge ({u},{v}): load {format_rational(load)} > cost {format_rational(c)}")
    try:
        excess, witness = max_subset_excess(g.n, cert.lambda1, cert.y)
    except ValueError as exc:
        violations.append(str(exc))
    else:
        if excess > cert.lambda2:
            violations.append(
                f"subset {sorted(witness)}: needs lambda2 >= {format_rational(excess)}, "
                f"have {format_rational(cert.lambda2)}"
            )
    return CheckResult("dual_feasibility", not violations, "; ".join(violations), {"violations": violations})


def lemma4_sides(g: Graph, edges: Iterable[int], vertices: frozenset, final_vertex: int, y: Family) -> tuple[Fraction, Fraction]:
    loads = edge_loads(g, y)
    lhs = sum((loads[e] for e in edges), Fraction(0))
    rhs = 2 * sum((val for S, val in y.items() if S & vertices and final_vertex not in S), Fraction(0))
    return lhs, rhs


def check_lemma4(g: Graph, edges: Iterable[int], vertices: frozenset, final_vertex: int, y: Family) -> CheckResult:
    """Total load on the picked edges is at most twice the duals of sets that
    touch the picked vertices but avoid the final vertex."""
    lhs, rhs = lemma4_sides(g, list(edges), frozenset(vertices), final_vertex, y)
    return CheckResult(
        "lemma4",
        lhs <= rhs,
        "" if lhs <= rhs else f"{format_rational(lhs)} > {format_rational(rhs)}",
        {"lhs": format_rational(lhs), "rhs": format_rational(rhs)},
    )


def check_prune_lemma(g: Graph, nodes: Sequence) -> CheckResult:
    """No neutral set inside a kernel is joined to the rest of that kernel by
    exactly one graph edge.

    ``nodes`` need ``members``, ``kernel``, ``went_neutral`` and ``children``.
    """
    by_id = {i: s for i, s in enumerate(nodes)}
    for sid, s in by_id.items():
        K = s.kernel
        stack = list(s.children)
        while stack:
            d = stack.pop()
            N = by_id[d]
            stack.extend(N.children)
            if not N.went_neutral or not N.members <= K or N.members == K:
                continue
            cut = sum(
                1 for u, v, _ in g.edges
                if (u in N.members and v in K and v not in N.members)
                or (v in N.members and u in K and u not in N.members)
            )
            if cut == 1:
                return CheckResult(
                    "prune_lemma", False,
                    f"neutral set {sorted(N.members)} hangs off kernel {sorted(K)} of set {sid} by one edge",
                    {"set": sid, "neutral": sorted(N.members)},
                )
    return CheckResult("prune_lemma", True)


def _kruskal(g: Graph, verts: frozenset) -> Optional[tuple[Fraction, tuple[int, ...]]]:
    parent = {v: v for v in verts}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    chosen = []
    cost = Fraction(0)
    for i in sorted(range(g.m), key=lambda i: (g.edges[i][2], i)):
        u, v, c = g.edges[i]
        if u in verts and v in verts:
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[ru] = rv
                chosen.append(i)
                cost += c
    if len(chosen) != len(verts) - 1:
        return None
    return cost, tuple(sorted(chosen))


def oracle_candidates(g: Graph, k: int) -> int:
    return sum(comb(len(c), j) for c in g.components() for j in range(k, len(c) + 1))


def _best_of_size(g: Graph, comp: Sequence[int], size: int) -> Optional[OracleResult]:
    best: Optional[OracleResult] = None
    for sub in combinations(comp, size):
        verts = frozenset(sub)
        if size == 1:
            found: Optional[tuple[Fraction, tuple[int, ...]]] = (Fraction(0), ())
        else:
            found = _kruskal(g, verts)
            if found is None:
                continue
        if best is None or found[0] < best.opt_cost:
            best = OracleResult(found[0], found[1], verts)
    return best


def _pick_best(per_size: Sequence[tuple[int, Optional[OracleResult]]], k: int) -> OracleResult:
    best: Optional[OracleResult] = None
    for size, found in per_size:
        if size >= k and found is not None and (best is None or found.opt_cost < best.opt_cost):
            best = found
    assert best is not None
    return best


def brute_force_opt(g: Graph, k: int, cap: int = DEFAULT_ORACLE_CAP) -> OracleResult:
    """Cheapest tree spanning at least ``k`` vertices, by enumerating vertex
    subsets and taking the MST of each connected induced subgraph."""
    comps = [c for c in g.components() if len(c) >= k]
    if k < 1 or not comps:
        raise ValueError(f"no component with {k} vertices")
    count = oracle_candidates(g, k)
    if count > cap:
        raise OracleCapError(f"{count} candidate subsets exceed the cap of {cap}")
    per_size = [(size, _best_of_size(g, comp, size)) for comp in comps for size in range(k, len(comp) + 1)]
    return _pick_best(per_size, k)


def brute_force_table(g: Graph, cap: int = DEFAULT_ORACLE_CAP) -> dict[int, OracleResult]:
    """``brute_force_opt`` for every feasible ``k`` at once, enumerating each
    subset a single time."""
    comps = g.components()
    count = oracle_candidates(g, 1)
    if count > cap:
        raise OracleCapError(f"{count} candidate subsets exceed the cap of {cap}")
    per_size = [(size, _best_of_size(g, comp, size)) for comp in comps for size in range(1, len(comp) + 1)]
    top = max((len(c) for c in comps), default=0)
    return {k: _pick_best(per_size, k) for k in range(1, top + 1)}


@dataclass
class VerificationReport:
    checks: list[CheckResult]
    cost: Optional[Fraction] = None
    opt_cost: Optional[Fraction] = None

    @property
    def ok(self) -> bool:
        return all(c.ok or c.advisory for c in self.checks)

    @property
    def ratio(self) -> Optional[Fraction]:
        if self.cost is None or self.opt_cost is None:
            return None
        if self.opt_cost == 0:
            return Fraction(1) if self.cost == 0 else None
        return self.cost / self.opt_cost

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c and not c.advisory]

    def to_json(self) -> dict:
        r = self.ratio
        return {
            "ok": self.ok,
            "checks": [c.to_json() for c in self.checks],
            "cost": None if self.cost is None else format_rational(self.cost),
            "opt_cost": None if self.opt_cost is None else format_rational(self.opt_cost),
            "ratio": None if r is None else format_rational(r),
            "ratio_decimal": None if r is None else f"{float(r):.6f}",
        }


def check_solution(
    g: Graph,
    k: int,
    edges: Sequence[int],
    final_vertex: int,
    claimed_cost: Fraction,
    cert: DualCertificate,
    oracle: Optional[OracleResult] = None,
) -> VerificationReport:
    """Tree validity, certificate feasibility, the upper bound
    ``cost <= 2*(lambda1*k - pi(V))`` and, given an oracle, the lower bounds
    and the factor-2 guarantee.

    ``lambda1*k - pi(V) <= OPT`` does not hold in general: sets strictly
    between an optimal tree's vertex set and ``V`` may carry positive duals
    that no optimal edge pays for.  That check is advisory; the verdict
    uses the weak-duality bound instead.
    """
    checks: list[CheckResult] = []
    cost = g.cost(edges)
    if k == 1:
        verts = frozenset((final_vertex,)) if not edges else frozenset()
        ok = not edges and 0 <= final_vertex < g.n
    else:
        ok, verts = validate_tree(g, edges)
        ok = ok and len(edges) == k - 1 and len(verts) == k and final_vertex in verts
    if not ok:
        detail = f"not a tree on exactly {k} vertices"
    elif claimed_cost != cost:
        detail = f"claimed cost {format_rational(claimed_cost)} != {format_rational(cost)}"
    else:
        detail = ""
    checks.append(CheckResult("tree", not detail, detail, {"vertices": len(verts)}))
    checks.append(check_dual_feasibility(g, cert))
    bound = lower_bound(cert)
    up = cost <= 2 * bound
    checks.append(CheckResult(
        "upper_bound", up,
        "" if up else f"cost {format_rational(cost)} > 2*({format_rational(bound)}) (picked-tree bound)",
        {"bound": format_rational(2 * bound)},
    ))
    opt = None
    if oracle is not None:
        opt = oracle.opt_cost
        lb = bound <= opt
        checks.append(CheckResult(
            "lower_bound", lb,
            "" if lb else f"certificate {format_rational(bound)} exceeds OPT {format_rational(opt)}",
            advisory=True,
        ))
        lp = lp_lower_bound(cert) <= opt
        checks.append(CheckResult(
            "lp_lower_bound", lp,
            "" if lp else f"weak-duality bound {format_rational(lp_lower_bound(cert))} exceeds OPT {format_rational(opt)}",
        ))
        ap = cost <= 2 * opt
        checks.append(CheckResult(
            "approximation", ap,
            "" if ap else f"cost {format_rational(cost)} > 2*OPT = {format_rational(2 * opt)} (factor-2 guarantee)",
        ))
    return VerificationReport(checks, cost, opt)


def brute_force_kernels(
    g: Graph,
    members: frozenset[int],
    tree_edges: Iterable[int],
    neutral: Iterable[frozenset[int]],
) -> list[frozenset[int]]:
    """All smallest ``K`` within ``members`` that induce a connected subtree
    of ``tree_edges``, contain every vertex outside the ``neutral`` proper
    subsets, and contain each neutral subset wholly or not at all."""
    blocks = [N for N in neutral if N < members]
    required = members - frozenset().union(*blocks)
    tree = [g.edges[e][:2] for e in tree_edges]
    rest = sorted(members - required)
    best: list[frozenset[int]] = []
    for size in range(len(rest) + 1):
        for extra in combinations(rest, size):
            K = required | frozenset(extra)
            if not K or any(N & K and not N <= K for N in blocks):
                continue
            ok, spanned = validate_tree(g, [e for e in tree_edges if g.edges[e][0] in K and g.edges[e][1] in K])
            if len(K) == 1 or (ok and spanned == K):
                best.append(K)
        if best:
            return best
    return best
