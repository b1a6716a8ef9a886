"""End-to-end driver: normalize, peel, iterate, resolve at the root, expand."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .classify import BranchClass, Kind, classify_all, find_minimally_unsettled
from .instance import Instance, Solution, Tour, ceil_div, lower_bound, normalize, tour_cost
from .rewrite import OpRecord, WorkingTree, from_normalized, simplify, working_lb
from .strategies import (
    CertificateViolation,
    TourSet,
    peel_heavy_clients,
    resolve_root_chain,
    resolve_root_one_branch,
    resolve_short_chain,
    resolve_sibling_pair,
    resolve_trident,
)

__all__ = [
    "SolverInvariantError",
    "ExpansionError",
    "Resolved",
    "RootReady",
    "IterationOutcome",
    "SolveReport",
    "iteration_step",
    "resolve_root",
    "expand_tours",
    "solve",
]

log = logging.getLogger("treecvrp")


class SolverInvariantError(AssertionError):
    """A case analysis of the algorithm did not hold; carries a tree dump."""


class ExpansionError(AssertionError):
    pass


@dataclass(frozen=True)
class Resolved:
    tourset: TourSet
    case: str


@dataclass(frozen=True)
class RootReady:
    pass


IterationOutcome = Resolved | RootReady


@dataclass(frozen=True)
class SolveReport:
    solution: Solution
    iterations: int
    traces: tuple[dict, ...]
    lower_bound: int
    accounted_cost: int
    tour_costs: tuple[tuple[int, int], ...] = field(default=())
    oplog: tuple[OpRecord, ...] = field(default=(), repr=False)

    @property
    def margin(self) -> int:
        return 4 * self.lower_bound - 3 * self.solution.cost


def _dump(t: WorkingTree) -> str:
    rows = []
    for v in t.preorder():
        if v == t.root:
            continue
        rows.append(f"{v}<-{t.parent[v]} l={t.length[v]} d={t.sub[v]} f={t.f(v)}")
    return "; ".join(rows)


def iteration_step(t: WorkingTree, classes: dict[int, BranchClass] | None = None) -> IterationOutcome:
    """One round: simplify, then resolve the lowest unsettled branch if any."""
    simplify(t)
    # condense and unite may build a leaf holding exactly Q
    extra = peel_heavy_clients(t)
    if extra.tours:
        return Resolved(extra, "peel")
    classes = classify_all(t)
    b = find_minimally_unsettled(t, classes)
    if b is None:
        return RootReady()
    kids = t.kids[b]
    chains = [classes[c].label for c in kids if classes[c].kind is Kind.LONG]
    ones = [c for c in kids if classes[c].kind is Kind.ONE]
    if len(chains) >= 2:
        return Resolved(resolve_sibling_pair(t, chains[0], chains[1]), "sibling-pair")
    if len(ones) >= 3:
        return Resolved(resolve_trident(t, b), "trident")
    if classes[b].kind is Kind.SHORT:
        return Resolved(resolve_short_chain(t, classes[b].label), "short-chain")
    raise SolverInvariantError(f"no case applies at branch {b}: {_dump(t)}")


def resolve_root(t: WorkingTree) -> list[TourSet]:
    """Resolve every root branch; each must be a 1-branch or a long chain."""
    classes = classify_all(t)
    if log.isEnabledFor(logging.DEBUG):
        log.debug("root branches: %s", {t.label(c): classes[c].kind.value for c in t.kids[t.root]})
    out = []
    for c in list(t.kids[t.root]):
        cls = classes[c]
        if cls.kind is Kind.ONE:
            if t.kids[c]:
                raise SolverInvariantError(f"root 1-branch {c} not condensed")
            out.append(resolve_root_one_branch(t, c))
        elif cls.kind is Kind.LONG:
            out.append(resolve_root_chain(t, cls.label))
        else:
            raise SolverInvariantError(f"unsettled root branch {c}: {_dump(t)}")
    if t.kids[t.root] or t.sub[t.root]:
        raise SolverInvariantError("demand left after root resolution")
    return out


def expand_tours(inst: Instance, sets: list[TourSet]) -> tuple[Solution, list[tuple[int, int]]]:
    """Turn working tours into tours over original clients.

    Returns the solution and per-tour ``(original cost, accounted cost)``.
    """
    tours = []
    costs = []
    for ts in sets:
        for tr in ts.tours:
            amounts: dict[str, int] = {}
            for client, a in tr.served:
                amounts[client] = amounts.get(client, 0) + a
            if sum(amounts.values()) != tr.load:
                raise ExpansionError(f"roster mismatch in {ts.tag} tour {tr.pickups}")
            c = tour_cost(inst, amounts)
            if c > tr.cost:
                raise ExpansionError(f"{ts.tag} tour costs {c} > accounted {tr.cost}")
            tours.append(Tour(amounts))
            costs.append((c, tr.cost))
    total = sum(c for c, _ in costs)
    return Solution(tuple(tours), total, lower_bound(inst)), costs


def solve(inst: Instance, check: bool = False) -> SolveReport:
    """Run the full algorithm; raises on any certificate or invariant failure.

    With ``check`` set the working tree's structure is re-verified after
    every iteration (slow; meant for tests).
    """
    n = normalize(inst)
    t = from_normalized(n, allow_heavy=True)
    lb = lower_bound(inst)
    if working_lb(t) != lb:
        raise SolverInvariantError("normalization changed the lower bound")
    sets: list[TourSet] = []
    traces: list[dict] = []

    def record(ts: TourSet, it: int) -> None:
        sets.append(ts)
        row = ts.trace()
        row["iteration"] = it
        traces.append(row)
        log.debug("iteration %d %s cost=%d dlb=%d", it, ts.tag, ts.cost, ts.delta_lb)

    peel = peel_heavy_clients(t)
    if peel.tours:
        record(peel, 0)
    budget = ceil_div(t.sub[t.root], t.q) + 2
    it = 0
    while True:
        if it > budget:
            raise SolverInvariantError("iteration budget exceeded")
        it += 1
        out = iteration_step(t)
        if check:
            t.check()
        if isinstance(out, RootReady):
            for ts in resolve_root(t):
                record(ts, it)
            break
        record(out.tourset, it)
    if t.roster_total() or t.sub[t.root]:
        raise SolverInvariantError("roster not exhausted")
    sol, costs = expand_tours(inst, sets)
    accounted = sum(ts.cost for ts in sets)
    if 3 * sol.cost > 4 * lb:
        raise CertificateViolation("solve", sol.cost, lb, "3*cost > 4*LB")
    return SolveReport(sol, it, tuple(traces), lb, accounted, tuple(costs), tuple(t.log))
