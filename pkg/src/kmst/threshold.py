"""Parametric search for the budget at which a large pruned tree appears.

``outcome(lam)`` is BIG when some pruned tree of the run at ``lam`` spans at
least ``k`` vertices.  Resolving ties minus-style reproduces the run just
below ``lam`` and plus-style the run just above it, so a threshold is a
``lam`` whose minus run is SMALL and whose plus run is BIG.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .engine import (
    EDGE,
    MINUS_ALL,
    PLUS_ALL,
    SET,
    Diverges,
    EngineError,
    PDResult,
    TiePolicy,
    TieRecord,
    run_pd,
    run_pd_symbolic,
)
from .graph import Graph
from .numeric import format_rational


class InfeasibleError(ValueError):
    """No connected component has ``k`` vertices."""


@dataclass(frozen=True)
class SearchStep:
    lo: Fraction
    hi: Fraction
    lam_c: Optional[Fraction]
    minus_big: Optional[bool]
    plus_big: Optional[bool]

    def to_json(self) -> dict:
        fmt = lambda q: None if q is None else format_rational(q)
        return {
            "interval": [fmt(self.lo), fmt(self.hi)],
            "lambda_c": fmt(self.lam_c),
            "minus": None if self.minus_big is None else ("BIG" if self.minus_big else "SMALL"),
            "plus": None if self.plus_big is None else ("BIG" if self.plus_big else "SMALL"),
        }


@dataclass
class ThresholdResult:
    lambda1: Fraction
    below_result: PDResult  # minus-all run at lambda1
    above_result: PDResult  # plus-all run at lambda1
    trace: list[SearchStep] = field(default_factory=list)
    left: Optional[Fraction] = None  # (left, lambda1) has a uniform event order
    right: Optional[Fraction] = None  # so does (lambda1, right)

    @property
    def delta(self) -> Fraction:
        """Half the distance to the nearest neighbouring breakpoint."""
        gaps = [self.right - self.lambda1]
        if self.left is not None:
            gaps.append(self.lambda1 - self.left)
        return min(gaps) / 2


def check_feasible(g: Graph, k: int) -> None:
    if isinstance(k, bool) or not isinstance(k, int) or k < 1:
        raise ValueError(f"k must be a positive integer, got {k!r}")
    if not any(len(c) >= k for c in g.components()):
        raise InfeasibleError(f"no component with {k} vertices")


def _uniform_edge(g: Graph, a: Fraction, b: Fraction, keep_left: bool) -> Fraction:
    # shrink (a, b) towards the fixed end until the event order is uniform
    while True:
        d = run_pd_symbolic(g, a, b)
        if not isinstance(d, Diverges):
            return b if keep_left else a
        if keep_left:
            b = d.lam_c
        else:
            a = d.lam_c


def find_threshold(g: Graph, k: int) -> ThresholdResult:
    check_feasible(g, k)
    if k < 2:
        raise ValueError("k = 1 needs no threshold")
    trace: list[SearchStep] = []
    zero = Fraction(0)
    hi = 1 + g.total_cost()

    above0 = run_pd(g, zero, PLUS_ALL)
    if above0.is_big(k):
        trace.append(SearchStep(zero, zero, zero, False, True))
        res = ThresholdResult(zero, run_pd(g, zero, MINUS_ALL), above0, trace)
        res.right = _uniform_edge(g, zero, hi, keep_left=True)
        return res

    if not run_pd(g, hi, MINUS_ALL).is_big(k):
        raise EngineError(f"no pruned tree reaches {k} vertices at lambda = {hi}")

    lo = zero
    # invariant: just right of lo is SMALL, just left of hi is BIG
    while True:
        d = run_pd_symbolic(g, lo, hi)
        if not isinstance(d, Diverges):
            raise EngineError(f"uniform interval ({lo}, {hi}) cannot separate SMALL from BIG")
        lam = d.lam_c
        below = run_pd(g, lam, MINUS_ALL)
        above = run_pd(g, lam, PLUS_ALL)
        minus_big, plus_big = below.is_big(k), above.is_big(k)
        trace.append(SearchStep(lo, hi, lam, minus_big, plus_big))
        if not minus_big and plus_big:
            res = ThresholdResult(lam, below, above, trace)
            res.left = _uniform_edge(g, lo, lam, keep_left=False)
            res.right = _uniform_edge(g, lam, hi, keep_left=True)
            return res
        if minus_big:
            hi = lam
        else:
            lo = lam


@dataclass
class CriticalTie:
    """The first tie whose minus-style resolution loses the large tree.

    ``case`` is ``"I"`` when a set going neutral (``x``) competes with an
    edge going tight (``e``), ``"II"`` when two edges between the same pair
    of components compete (``e`` minus-preferred, ``f`` plus-preferred),
    and ``"III"`` when the two edges join different pairs of components.
    Case III arises when merging along one edge changes the status of a
    component the other edge touches before the other edge is processed.
    ``winning_run`` resolves the first ``index - 1`` ties minus-style and is
    BIG; ``losing_run`` resolves ``index`` of them that way and is SMALL.
    """

    index: int
    case: str
    lambda1: Fraction
    tie: TieRecord
    winning_run: PDResult
    losing_run: PDResult
    e: int
    x: Optional[int] = None
    f: Optional[int] = None
    merging: tuple[int, int] = (-1, -1)


def find_critical_tie(g: Graph, k: int, lambda1: Fraction) -> CriticalTie:
    prev = run_pd(g, lambda1, PLUS_ALL)
    if not prev.is_big(k):
        raise EngineError("plus-style run at the threshold has no large pruned tree")
    i = 1
    while True:
        if prev.decisions < i:
            raise EngineError("every tie resolved minus-style and the run is still BIG")
        cur = run_pd(g, lambda1, TiePolicy.prefix(i))
        if not cur.is_big(k):
            break
        prev = cur
        i += 1
    tie = prev.decision(i)
    return _classify(g, i, lambda1, tie, prev, cur)


def _classify(g: Graph, i: int, lam: Fraction, tie: TieRecord, win: PDResult, lose: PDResult) -> CriticalTie:
    (mk, mref), (pk, pref) = tie.minus_choice, tie.plus_choice
    group = win.ties.index(tie)
    event = next(ev for ev in win.events if ev.tie_group == group)
    if pk != EDGE or event.kind != "edge":
        raise EngineError(f"critical tie {i}: plus-style choice is not an edge event")
    a, b = event.merged
    ma, mb = win.nodes[a].members, win.nodes[b].members
    if mk == SET:
        return CriticalTie(i, "I", lam, tie, win, lose, e=pref, x=mref, merging=(a, b))
    u, v, _ = g.edges[mref]
    if (u in ma and v in mb) or (u in mb and v in ma):
        return CriticalTie(i, "II", lam, tie, win, lose, e=mref, f=pref, merging=(a, b))
    return CriticalTie(i, "III", lam, tie, win, lose, e=mref, f=pref, merging=(a, b))
