"""Optimal and k-best 2D assignment.

Used by the filter's data association (ranked global hypotheses) and by the
GOSPA metric. Costs are negative log-likelihoods; +inf marks forbidden pairs.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import Infeasible


@dataclass(frozen=True)
class Assignment:
    """One-to-one row-to-column mapping with its total cost."""

    cols: tuple  # cols[i] is the column assigned to row i
    cost: float


def _solve(cost: np.ndarray) -> Assignment | None:
    try:
        rows, cols = linear_sum_assignment(cost)
    except ValueError:
        return None
    total = float(cost[rows, cols].sum())
    if not np.isfinite(total):
        return None
    out = np.empty(cost.shape[0], dtype=int)
    out[rows] = cols
    return Assignment(cols=tuple(int(c) for c in out), cost=total)


def solve_lap(cost) -> Assignment:
    """Minimum-cost assignment of every row to a distinct column.

    Requires at least as many columns as rows; raises Infeasible when no
    finite-cost complete assignment exists.
    """
    cost = np.asarray(cost, dtype=float)
    if cost.ndim != 2 or cost.shape[0] == 0:
        raise ValueError(f"cost matrix must be 2D and non-empty, got {cost.shape}")
    if cost.shape[0] > cost.shape[1]:
        raise ValueError("cost matrix needs at least as many columns as rows")
    best = _solve(cost)
    if best is None:
        raise Infeasible("no finite-cost complete assignment exists")
    return best


def kbest(cost, k: int) -> list[Assignment]:
    """The k lowest-cost distinct assignments in non-decreasing cost order.

    Murty's partitioning over the optimal solver; equal-cost assignments are
    ordered lexicographically by their row-to-column vector so the output is
    deterministic. Returns fewer than k when fewer assignments exist.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    cost = np.asarray(cost, dtype=float)
    first = solve_lap(cost)

    # heap of (cost, counter, assignment, problem matrix); counter breaks ties
    counter = 0
    heap = [(first.cost, counter, first, cost)]
    results: list[Assignment] = []
    seen = {first.cols}

    while heap:
        c, _, assignment, problem = heapq.heappop(heap)
        # stop once k solutions are collected and the tie class is exhausted
        if len(results) >= k and c > results[-1].cost:
            break
        results.append(assignment)

        # partition: force pairs 0..j-1, forbid pair j
        fixed = problem
        for row, col in enumerate(assignment.cols):
            sub = fixed.copy()
            sub[row, col] = np.inf
            cand = _solve(sub)
            if cand is not None and cand.cols not in seen:
                seen.add(cand.cols)
                counter += 1
                heapq.heappush(heap, (cand.cost, counter, cand, sub))
            forced = fixed.copy()
            kept = forced[row, col]
            forced[row, :] = np.inf
            forced[row, col] = kept
            fixed = forced

    results.sort(key=lambda a: (a.cost, a.cols))
    return results[:k]
