"""Selfish routing on the four-segment diamond network with an optional cross link.

Segments A and D cost ``f + beta``, segments B and C cost ``alpha * f`` where
``f`` is the number of travellers on the segment. Routes::

    "A-B"    left route
    "C-D"    right route
    "C-X-B"  C, then the cross link, then B (only when the link exists)
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Mapping

LEFT, RIGHT, CROSS = "A-B", "C-D", "C-X-B"
ROUTE_SEGMENTS = {LEFT: ("A", "B"), RIGHT: ("C", "D"), CROSS: ("C", "X", "B")}


def _zero(f: float) -> float:
    return 0.0


@dataclass(frozen=True)
class TransportNetwork:
    alpha: float
    beta: float
    travelers: int
    cross_cost: Callable[[float], float] = field(default=_zero, compare=False)

    def __post_init__(self) -> None:
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")
        if int(self.travelers) != self.travelers or self.travelers < 1:
            raise ValueError("travelers must be a positive integer")

    def segment_cost(self, segment: str, f: float) -> float:
        if segment in ("A", "D"):
            return f + self.beta
        if segment in ("B", "C"):
            return self.alpha * f
        return self.cross_cost(f)


def routes(with_cross_link: bool) -> tuple[str, ...]:
    return (LEFT, RIGHT, CROSS) if with_cross_link else (LEFT, RIGHT)


def route_costs(t: TransportNetwork, assignment: Mapping[str, int]) -> dict[str, float]:
    """Per-traveller cost of every route under ``assignment`` (route -> count).

    The assignment need not place every traveller on the network.
    """
    load: dict[str, int] = {}
    for route, n in assignment.items():
        for seg in ROUTE_SEGMENTS[route]:
            load[seg] = load.get(seg, 0) + n
    return {
        route: sum(t.segment_cost(seg, load.get(seg, 0)) for seg in segs)
        for route, segs in ROUTE_SEGMENTS.items()
        if route in assignment
    }


def total_cost(t: TransportNetwork, assignment: Mapping[str, int]) -> float:
    costs = route_costs(t, assignment)
    return sum(n * costs[r] for r, n in assignment.items())


def _moved(assignment: Mapping[str, int], src: str, dst: str) -> dict[str, int]:
    out = dict(assignment)
    out[src] -= 1
    out[dst] += 1
    return out


def is_nash(t: TransportNetwork, assignment: Mapping[str, int]) -> bool:
    """No traveller can strictly lower their own cost by switching alone."""
    costs = route_costs(t, assignment)
    for src, n in assignment.items():
        if n == 0:
            continue
        for dst in assignment:
            if dst != src and route_costs(t, _moved(assignment, src, dst))[dst] < costs[src]:
                return False
    return True


def nash_assignment(t: TransportNetwork, with_cross_link: bool) -> dict[str, int]:
    """Greedy loading followed by best-response moves until none improves.

    Travellers enter one at a time onto the currently cheapest route (ties go
    to the earlier route in :func:`routes`). Improving single-traveller moves
    are then applied in a fixed order; the game has an exact potential, so the
    loop terminates at a pure Nash equilibrium.
    """
    names = routes(with_cross_link)
    assignment = {r: 0 for r in names}
    for _ in range(t.travelers):
        best = min(names, key=lambda r: route_costs(t, {**assignment, r: assignment[r] + 1})[r])
        assignment[best] += 1
    improved = True
    while improved:
        improved = False
        costs = route_costs(t, assignment)
        for src in names:
            if assignment[src] == 0:
                continue
            for dst in names:
                if dst == src:
                    continue
                if route_costs(t, _moved(assignment, src, dst))[dst] < costs[src]:
                    assignment = _moved(assignment, src, dst)
                    improved = True
                    break
            if improved:
                break
    return assignment


def social_optimum(t: TransportNetwork, with_cross_link: bool) -> dict[str, int]:
    """Assignment of all travellers with the least total cost (exhaustive)."""
    names = routes(with_cross_link)
    best, best_cost = None, float("inf")
    for counts in itertools.product(range(t.travelers + 1), repeat=len(names) - 1):
        rest = t.travelers - sum(counts)
        if rest < 0:
            continue
        cand = dict(zip(names, (*counts, rest)))
        cost = total_cost(t, cand)
        if cost < best_cost:
            best, best_cost = cand, cost
    return best


def simultaneous_switch(t: TransportNetwork) -> dict[str, int]:
    """Outcome when the cross link opens and every traveller reacts at once.

    Starting from the equilibrium without the link, each traveller compares
    their current cost with the cross route cost they would face if they alone
    switched. Everyone for whom the cross route looks cheaper switches at the
    same time.
    """
    before = {**nash_assignment(t, False), CROSS: 0}
    costs = route_costs(t, before)
    after = dict(before)
    for src in (LEFT, RIGHT):
        if before[src] and route_costs(t, _moved(before, src, CROSS))[CROSS] < costs[src]:
            after[CROSS] += before[src]
            after[src] = 0
    return after


@dataclass(frozen=True)
class TransportOutcome:
    with_cross_link: bool
    nash: dict[str, int]
    nash_costs: dict[str, float]
    nash_total: float
    optimum: dict[str, int]
    optimum_costs: dict[str, float]
    optimum_total: float

    @property
    def per_traveler_cost(self) -> float:
        """Largest cost paid by any traveller at the equilibrium."""
        return max(self.nash_costs[r] for r, n in self.nash.items() if n > 0)

    @property
    def price_of_anarchy(self) -> float:
        return self.nash_total / self.optimum_total


def transport_equilibrium(t: TransportNetwork, with_cross_link: bool) -> TransportOutcome:
    nash = nash_assignment(t, with_cross_link)
    opt = social_optimum(t, with_cross_link)
    return TransportOutcome(
        with_cross_link=with_cross_link,
        nash=nash,
        nash_costs=route_costs(t, nash),
        nash_total=total_cost(t, nash),
        optimum=opt,
        optimum_costs=route_costs(t, opt),
        optimum_total=total_cost(t, opt),
    )
