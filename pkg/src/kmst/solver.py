"""End-to-end pipeline: threshold, critical tie, assembly, certificate."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .assemble import KTreeSolution, assemble_k_tree
from .engine import MINUS_ALL, PDResult, laminar_max_excess, potential_of_all, run_pd
from .graph import Graph
from .threshold import CriticalTie, ThresholdResult, check_feasible, find_critical_tie, find_threshold
from .verify import DualCertificate


@dataclass
class SolveReport:
    solution: KTreeSolution
    certificate: DualCertificate
    run: PDResult  # the run whose duals back the certificate
    threshold: Optional[ThresholdResult] = None
    tie: Optional[CriticalTie] = None


def certificate_from_run(run: PDResult, k: int) -> DualCertificate:
    return DualCertificate(
        k=k,
        lambda1=run.lam,
        lambda2=laminar_max_excess(run),
        y={s.members: run.y(s.id) for s in run.nodes},
        potential_V=potential_of_all(run),
    )


def solve(g: Graph, k: int) -> SolveReport:
    """A tree on exactly ``k`` vertices costing at most twice the optimum."""
    check_feasible(g, k)
    if k == 1:
        run = run_pd(g, Fraction(0), MINUS_ALL)
        sol = KTreeSolution((), frozenset((0,)), 0, Fraction(0), potential_of_all(run), Fraction(0), 1)
        return SolveReport(sol, certificate_from_run(run, 1), run)
    thr = find_threshold(g, k)
    tie = find_critical_tie(g, k, thr.lambda1)
    sol = assemble_k_tree(tie, k)
    return SolveReport(sol, certificate_from_run(tie.winning_run, k), tie.winning_run, thr, tie)


def certificate_for(g: Graph, k: int, lambda1: Fraction) -> tuple[DualCertificate, PDResult]:
    """Rebuild the certificate behind a solution from its threshold alone."""
    check_feasible(g, k)
    if k == 1:
        run = run_pd(g, lambda1, MINUS_ALL)
    else:
        run = find_critical_tie(g, k, lambda1).winning_run
    return certificate_from_run(run, k), run
