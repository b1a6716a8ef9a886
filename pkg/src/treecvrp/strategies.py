"""Certified tour sets built on a simplified working tree.

Every strategy picks pickups ``(leaf, amount)`` on the working tree, prices the
tours there, removes the demand, and measures the drop of the working lower
bound. The set is accepted only if ``3 * cost <= 4 * delta_lb``.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .classify import ChainLabel
from .rewrite import RewriteError, WorkingTree, remove_demand, working_lb

__all__ = [
    "WorkTour",
    "TourSet",
    "CertificateViolation",
    "check_certificate",
    "emit",
    "edge_use",
    "cascade",
    "literal_cascade",
    "reserve_cascade",
    "cascade_ok",
    "chain_cost_formula",
    "chain_lb_formula",
    "peel_heavy_clients",
    "resolve_root_chain",
    "resolve_sibling_pair",
    "resolve_trident",
    "resolve_short_chain",
    "resolve_root_one_branch",
]


@dataclass
class WorkTour:
    pickups: list[tuple[int, int]]
    cost: int = 0
    served: list[tuple[str, int]] = field(default_factory=list)
    delta_lb: int | None = None

    @property
    def load(self) -> int:
        return sum(a for _, a in self.pickups)


@dataclass
class TourSet:
    tours: list[WorkTour]
    cost: int
    delta_lb: int
    tag: str

    @property
    def margin(self) -> int:
        return 4 * self.delta_lb - 3 * self.cost

    def trace(self) -> dict:
        return {
            "strategy": self.tag,
            "cost": self.cost,
            "delta_lb": self.delta_lb,
            "margin": self.margin,
            "tours": [[[v, a] for v, a in tr.pickups] for tr in self.tours],
        }


class CertificateViolation(AssertionError):
    def __init__(self, tag: str, cost: int, delta_lb: int, reason: str) -> None:
        super().__init__(f"{tag}: {reason} (cost={cost}, delta_lb={delta_lb})")
        self.tag = tag
        self.cost = cost
        self.delta_lb = delta_lb
        self.reason = reason


def check_certificate(ts: TourSet, q: int | None = None) -> None:
    """Raise :class:`CertificateViolation` unless ``ts`` is a valid certified set.

    A zero cost is accepted when ``delta_lb`` is zero too (all edges on the
    routes have length zero); an empty set never is.
    """
    if not ts.tours:
        raise CertificateViolation(ts.tag, ts.cost, ts.delta_lb, "empty tour set")
    for tr in ts.tours:
        if not tr.pickups or tr.load <= 0:
            raise CertificateViolation(ts.tag, ts.cost, ts.delta_lb, "empty tour")
        if q is not None and tr.load > q:
            raise CertificateViolation(ts.tag, ts.cost, ts.delta_lb, f"tour load {tr.load} > Q")
    if ts.delta_lb < 0:
        raise CertificateViolation(ts.tag, ts.cost, ts.delta_lb, "lower bound increased")
    if 3 * ts.cost > 4 * ts.delta_lb:
        raise CertificateViolation(ts.tag, ts.cost, ts.delta_lb, "3*cost > 4*delta_lb")


def emit(t: WorkingTree, plan: list[list[tuple[int, int]]], tag: str, per_tour: bool = False) -> TourSet:
    """Price ``plan`` on ``t``, remove its demand and certify the result."""
    tours = [WorkTour(list(pk), t.route_cost(v for v, _ in pk)) for pk in plan]
    before = working_lb(t)
    last = before
    for tr in tours:
        for v, a in tr.pickups:
            tr.served.extend(remove_demand(t, v, a))
        if per_tour:
            now = working_lb(t)
            tr.delta_lb = last - now
            last = now
    after = working_lb(t)
    ts = TourSet(tours, sum(tr.cost for tr in tours), before - after, tag)
    check_certificate(ts, t.q)
    return ts


def edge_use(t: WorkingTree, tours) -> Counter:
    """How many tours traverse each edge (keyed by child vertex)."""
    use: Counter = Counter()
    for tr in tours:
        pk = tr.pickups if isinstance(tr, WorkTour) else tr
        seen: set[int] = set()
        for v, _ in pk:
            while v != t.root and v not in seen:
                seen.add(v)
                v = t.parent[v]
        use.update(seen)
    return use


# --------------------------------------------------------------------------
# cascades


def literal_cascade(t: WorkingTree, label: ChainLabel) -> list[list[tuple[int, int]]]:
    """Greedy cascade: start at the lowest leaf with demand left, then keep
    filling from the rank-2 leaf of the lowest level with demand left."""
    q = t.q
    order = label.leaves_bottom_up()
    level = {label.tops[0]: 0}
    for i in range(label.p - 1):
        level[label.rank1[i]] = i
        level[label.rank2[i]] = i
    rem = {v: t.sub[v] for v in order}
    tours: list[list[tuple[int, int]]] = []
    while any(rem.values()) and len(tours) <= label.p:
        first = next(v for v in order if rem[v])
        pk = [(first, rem[first])]
        load = rem[first]
        rem[first] = 0
        while load < q:
            live = [v for v in order if rem[v]]
            if not live:
                break
            b = label.rank2[level[live[0]]]
            if not rem[b]:
                break
            x = min(q - load, rem[b])
            pk.append((b, x))
            rem[b] -= x
            load += x
        tours.append(pk)
    return tours


def reserve_cascade(t: WorkingTree, label: ChainLabel) -> list[list[tuple[int, int]]]:
    """Cascade that keeps one tour in reserve for the overflow of every level.

    Tour one takes ``v_1^0`` and fills from ``v_1^2``. Each level ``i >= 2``
    gets a full tour ``a_i`` plus ``Q - d(a_i)`` of ``b_i``. The reserve tour
    takes ``v_1^1``, what is left at ``v_1^2`` and the overflow of every upper
    level; it is the only tour that may be partial and is listed last.
    """
    q = t.q
    d = t.sub
    a0, a1, a2 = label.level_edges(1)
    first = [(a0, d[a0]), (a2, q - d[a0])]
    reserve = [(a1, d[a1]), (a2, d[a0] + d[a2] - q)]
    middle = []
    for i in range(1, label.p - 1):
        x, y = label.rank1[i], label.rank2[i]
        middle.append([(x, d[x]), (y, q - d[x])])
        reserve.append((y, d[x] + d[y] - q))
    return [first, *middle, reserve]


def cascade_ok(t: WorkingTree, label: ChainLabel, tours) -> bool:
    """``p`` tours, all but the last full, all demand covered, counts ``i/1/2``."""
    q = t.q
    p = label.p
    if len(tours) != p:
        return False
    loads = [sum(a for _, a in pk) for pk in tours]
    if any(x != q for x in loads[:-1]) or not 0 < loads[-1] <= q:
        return False
    got: Counter = Counter()
    for pk in tours:
        for v, a in pk:
            got[v] += a
    if any(got[v] != t.sub[v] for v in label.leaves_bottom_up()):
        return False
    use = edge_use(t, tours)
    for i in range(1, p):
        e0, e1, e2 = label.level_edges(i)
        if (use[e0], use[e1], use[e2]) != (i, 1, 2):
            return False
    return use[label.stem] == p


def cascade(t: WorkingTree, label: ChainLabel) -> list[list[tuple[int, int]]]:
    """Tours covering the whole chain; see :func:`literal_cascade`.

    The greedy version can run out of a level's rank-2 demand and end with an
    extra tour. When its output breaks the structural contract the reserve
    version, which always meets it, is used instead.
    """
    tours = literal_cascade(t, label)
    if cascade_ok(t, label, tours):
        return tours
    tours = reserve_cascade(t, label)
    if not cascade_ok(t, label, tours):
        raise RewriteError(f"chain label violates the chain invariants: {label}")
    return tours


def chain_cost_formula(t: WorkingTree, label: ChainLabel) -> int:
    """Working cost of a cascade for a chain hanging at the root."""
    p = label.p
    total = p * t.length[label.stem]
    for i in range(1, p):
        e0, e1, e2 = label.level_edges(i)
        total += i * t.length[e0] + 2 * t.length[e2] + t.length[e1]
    return 2 * total


def chain_lb_formula(t: WorkingTree, label: ChainLabel) -> int:
    """Lower-bound contribution of a whole chain hanging at the root."""
    p = label.p
    total = p * t.length[label.stem]
    for i in range(1, p):
        e0, e1, e2 = label.level_edges(i)
        total += i * t.length[e0] + t.length[e2] + t.length[e1]
    return 2 * total


# --------------------------------------------------------------------------
# strategies


def peel_heavy_clients(t: WorkingTree) -> TourSet:
    """Full-capacity out-and-back tours at leaves holding at least ``Q``."""
    plan = []
    for v in t.leaves():
        for _ in range(t.sub[v] // t.q):
            plan.append([(v, t.q)])
    if not plan:
        return TourSet([], 0, 0, "peel")
    ts = emit(t, plan, "peel", per_tour=True)
    for tr in ts.tours:
        if tr.cost != tr.delta_lb:
            raise CertificateViolation("peel", tr.cost, tr.delta_lb, "peel tour not exact")
    return ts


def resolve_root_chain(t: WorkingTree, label: ChainLabel) -> TourSet:
    if t.parent.get(label.stem) != t.root:
        raise RewriteError("root-chain resolution needs a stem at the depot")
    return emit(t, cascade(t, label), "root-chain")


def resolve_sibling_pair(t: WorkingTree, a: ChainLabel, b: ChainLabel) -> TourSet:
    if t.parent.get(a.stem) != t.parent.get(b.stem) or a.stem == b.stem:
        raise RewriteError("sibling-pair resolution needs two sibling stems")
    return emit(t, cascade(t, a) + cascade(t, b), "sibling-pair")


def resolve_trident(t: WorkingTree, stem: int) -> TourSet:
    leaves = sorted((c for c in t.kids[stem] if not t.kids[c]), key=lambda c: (-t.length[c], c))
    if len(leaves) < 3:
        raise RewriteError("trident needs three leaf children")
    x, y, z = leaves[:3]
    a = t.dist(stem)
    if a <= t.length[x] + t.length[y] + t.length[z]:
        plan = [[(v, t.sub[v])] for v in (x, y, z)]
    else:
        plan = [[(x, t.sub[x]), (z, min(t.q - t.sub[x], t.sub[z]))]]
    return emit(t, plan, "trident")


def resolve_short_chain(t: WorkingTree, label: ChainLabel) -> TourSet:
    x, y = label.rank1[-1], label.rank2[-1]
    return emit(t, [[(x, t.sub[x])], [(y, t.sub[y])]], "short-chain")


def resolve_root_one_branch(t: WorkingTree, stem: int) -> TourSet:
    if t.parent.get(stem) != t.root or t.kids[stem]:
        raise RewriteError("root one-branch must be a leaf at the depot")
    ts = emit(t, [[(stem, t.sub[stem])]], "root-one")
    if ts.cost != ts.delta_lb:
        raise CertificateViolation(ts.tag, ts.cost, ts.delta_lb, "root tour not exact")
    return ts
