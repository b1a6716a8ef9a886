"""Rooted-tree CVRP instances, lower bound, tour costing and verification.

Demands stay in their original integer units; capacity ``Q`` is carried
explicitly so every capacity comparison is an exact integer comparison.
Edges are identified by their child vertex (each non-depot vertex has exactly
one parent edge); functions taking an edge also accept a ``(parent, child)``
pair.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping

__all__ = [
    "InstanceError",
    "Instance",
    "NormalizedInstance",
    "Tour",
    "Solution",
    "VerificationReport",
    "parse_instance",
    "serialize_instance",
    "instance_to_dict",
    "instance_from_dict",
    "parse_solution",
    "serialize_solution",
    "normalize",
    "subtree_demand",
    "edge_traffic",
    "lower_bound",
    "tour_cost",
    "verify_solution",
    "ceil_div",
]


class InstanceError(ValueError):
    """Raised for documents or objects violating the instance invariants."""


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


@dataclass(frozen=True, eq=False)
class Instance:
    """Immutable CVRP instance on a tree rooted at ``depot``.

    ``parent`` and ``length`` are keyed by child vertex; ``demand`` may omit
    zero-demand vertices. The mappings must not be mutated after construction.
    """

    depot: str
    capacity: int
    parent: Mapping[str, str]
    length: Mapping[str, int]
    demand: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not isinstance(self.capacity, int) or isinstance(self.capacity, bool):
            raise InstanceError("capacity must be an integer")
        if self.capacity < 1:
            raise InstanceError(f"capacity must be >= 1, got {self.capacity}")
        if self.depot in self.parent:
            raise InstanceError("depot cannot have a parent")
        if set(self.parent) != set(self.length):
            raise InstanceError("every edge needs exactly one length")
        for v, l in self.length.items():
            if not isinstance(l, int) or isinstance(l, bool) or l < 0:
                raise InstanceError(f"edge to {v!r} has invalid length {l!r}")
        vertices = self.vertex_set
        for v, d in self.demand.items():
            if v not in vertices:
                raise InstanceError(f"demand given for unknown vertex {v!r}")
            if not isinstance(d, int) or isinstance(d, bool) or d < 0:
                raise InstanceError(f"vertex {v!r} has invalid demand {d!r}")
        for p in self.parent.values():
            if p not in vertices:
                raise InstanceError(f"unknown parent vertex {p!r}")
        # every vertex must reach the depot without revisiting anything
        if len(self.preorder) != len(vertices):
            raise InstanceError("not a tree: parent map contains a cycle")

    @cached_property
    def vertex_set(self) -> frozenset[str]:
        return frozenset(self.parent) | {self.depot}

    @cached_property
    def children(self) -> dict[str, list[str]]:
        kids: dict[str, list[str]] = {v: [] for v in self.vertex_set}
        for c, p in self.parent.items():
            kids[p].append(c)
        for lst in kids.values():
            lst.sort()
        return kids

    @cached_property
    def preorder(self) -> list[str]:
        """Depot-first depth-first order, children visited in sorted order."""
        order: list[str] = []
        stack = [self.depot]
        kids = self.children
        seen: set[str] = set()
        while stack:
            v = stack.pop()
            if v in seen:
                break
            seen.add(v)
            order.append(v)
            stack.extend(reversed(kids[v]))
        return order

    @cached_property
    def subtree_demands(self) -> dict[str, int]:
        sub = {v: self.demand.get(v, 0) for v in self.vertex_set}
        for v in reversed(self.preorder):
            if v != self.depot:
                sub[self.parent[v]] += sub[v]
        return sub

    @cached_property
    def depth(self) -> dict[str, int]:
        """Distance ``l(P[v, r])`` from every vertex to the depot."""
        dist = {self.depot: 0}
        for v in self.preorder[1:]:
            dist[v] = dist[self.parent[v]] + self.length[v]
        return dist

    @property
    def vertices(self) -> list[str]:
        return self.preorder

    @property
    def total_demand(self) -> int:
        return sum(self.demand.values())

    @property
    def clients(self) -> list[str]:
        return [v for v in self.preorder if self.demand.get(v, 0) > 0]

    def d(self, v: str) -> int:
        return self.demand.get(v, 0)

    def is_leaf(self, v: str) -> bool:
        return not self.children[v]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.depot == other.depot
            and self.capacity == other.capacity
            and dict(self.parent) == dict(other.parent)
            and dict(self.length) == dict(other.length)
            and {k: v for k, v in self.demand.items() if v}
            == {k: v for k, v in other.demand.items() if v}
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class NormalizedInstance:
    """An instance whose clients are exactly its leaves.

    ``roster`` maps each leaf to the original client its demand belongs to.
    """

    instance: Instance
    roster: Mapping[str, str]


@dataclass(frozen=True)
class Tour:
    """Amount of demand covered at each original client by one vehicle."""

    amounts: Mapping[str, int]

    @property
    def load(self) -> int:
        return sum(self.amounts.values())

    @property
    def clients(self) -> list[str]:
        return sorted(c for c, a in self.amounts.items() if a > 0)


@dataclass(frozen=True)
class Solution:
    tours: tuple[Tour, ...]
    cost: int
    lower_bound: int

    @property
    def ratio(self) -> Fraction | None:
        """``cost / LB`` as an exact fraction, ``None`` when ``LB == 0``."""
        if self.lower_bound == 0:
            return None
        return Fraction(self.cost, self.lower_bound)

    @property
    def ratio_text(self) -> str:
        """Unreduced ``cost/LB`` text, e.g. ``"18/16"``."""
        return f"{self.cost}/{self.lower_bound}"

    @property
    def certified(self) -> bool:
        return 3 * self.cost <= 4 * self.lower_bound

    @property
    def margin(self) -> int:
        return 4 * self.lower_bound - 3 * self.cost


@dataclass
class VerificationReport:
    load_ok: bool = True
    coverage_ok: bool = True
    cost_ok: bool = True
    ratio_ok: bool = True
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        """Feasible and correctly costed; the ratio flag is advisory."""
        return self.load_ok and self.coverage_ok and self.cost_ok


# --------------------------------------------------------------------------
# documents


def instance_from_dict(doc: object) -> Instance:
    if not isinstance(doc, dict):
        raise InstanceError("instance document must be a JSON object")
    missing = {"capacity", "depot", "edges"} - set(doc)
    if missing:
        raise InstanceError(f"missing keys: {sorted(missing)}")
    depot = doc["depot"]
    if not isinstance(depot, str):
        raise InstanceError("depot must be a string")
    edges = doc["edges"]
    if not isinstance(edges, list):
        raise InstanceError("edges must be a list")
    parent: dict[str, str] = {}
    length: dict[str, int] = {}
    seen_pairs: set[frozenset[str]] = set()
    for e in edges:
        if not isinstance(e, dict) or {"parent", "child", "length"} - set(e):
            raise InstanceError(f"malformed edge {e!r}")
        p, c, l = e["parent"], e["child"], e["length"]
        if not isinstance(p, str) or not isinstance(c, str):
            raise InstanceError(f"edge endpoints must be strings: {e!r}")
        if p == c:
            raise InstanceError(f"not a tree: self-loop at {p!r}")
        pair = frozenset((p, c))
        if pair in seen_pairs:
            raise InstanceError(f"duplicate edge {p!r}-{c!r}")
        seen_pairs.add(pair)
        if c in parent:
            raise InstanceError(f"not a tree: vertex {c!r} has two parents")
        if c == depot:
            raise InstanceError("not a tree: depot cannot be a child")
        parent[c] = p
        length[c] = l
    demands = doc.get("demands", {})
    if not isinstance(demands, dict):
        raise InstanceError("demands must be an object")
    return Instance(
        depot=depot,
        capacity=doc["capacity"],
        parent=parent,
        length=length,
        demand=dict(demands),
    )


def instance_to_dict(inst: Instance) -> dict:
    edges = [
        {"parent": inst.parent[c], "child": c, "length": inst.length[c]}
        for c in inst.parent
    ]
    return {
        "capacity": inst.capacity,
        "depot": inst.depot,
        "edges": edges,
        "demands": {v: d for v, d in inst.demand.items() if d},
    }


def parse_instance(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except (json.JSONDecodeError, TypeError) as exc:
        raise InstanceError(f"malformed JSON: {exc}") from exc
    return instance_from_dict(doc)


def serialize_instance(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), sort_keys=True, indent=2) + "\n"


def solution_to_dict(sol: Solution) -> dict:
    return {
        "tours": [dict(t.amounts) for t in sol.tours],
        "cost": sol.cost,
        "lower_bound": sol.lower_bound,
        "ratio": sol.ratio_text,
        "certified": sol.certified,
    }


def serialize_solution(sol: Solution) -> str:
    return json.dumps(solution_to_dict(sol), sort_keys=True, indent=2) + "\n"


def parse_solution(text: str) -> Solution:
    """Read a solution document; ``ratio``/``certified`` are derived, not read."""
    try:
        doc = json.loads(text)
    except (json.JSONDecodeError, TypeError) as exc:
        raise InstanceError(f"malformed JSON: {exc}") from exc
    if not isinstance(doc, dict) or {"tours", "cost", "lower_bound"} - set(doc):
        raise InstanceError("solution needs tours, cost and lower_bound")
    tours = []
    for t in doc["tours"]:
        if not isinstance(t, dict):
            raise InstanceError(f"malformed tour {t!r}")
        for c, a in t.items():
            if not isinstance(a, int) or isinstance(a, bool):
                raise InstanceError(f"non-integer amount for {c!r}")
        tours.append(Tour(dict(t)))
    cost, lb = doc["cost"], doc["lower_bound"]
    if not isinstance(cost, int) or not isinstance(lb, int):
        raise InstanceError("cost and lower_bound must be integers")
    return Solution(tuple(tours), cost, lb)


# --------------------------------------------------------------------------
# quantities


def _edge_child(inst: Instance, e: str | tuple[str, str]) -> str:
    if isinstance(e, tuple):
        p, c = e
        if inst.parent.get(c) != p:
            raise InstanceError(f"unknown edge {e!r}")
        return c
    if e not in inst.parent:
        raise InstanceError(f"unknown edge {e!r}")
    return e


def subtree_demand(inst: Instance, v: str) -> int:
    """Total demand ``d(T_v)`` of the subtree rooted at ``v``."""
    try:
        return inst.subtree_demands[v]
    except KeyError:
        raise InstanceError(f"unknown vertex {v!r}") from None


def edge_traffic(inst: Instance, e: str | tuple[str, str]) -> int:
    """Minimum number of tours crossing the edge: ``ceil(d(T_v) / Q)``."""
    c = _edge_child(inst, e)
    return ceil_div(inst.subtree_demands[c], inst.capacity)


def lower_bound(inst: Instance) -> int:
    """Sum over edges of ``2 * l(e) * f(e)``."""
    q = inst.capacity
    sub = inst.subtree_demands
    return sum(2 * l * ceil_div(sub[c], q) for c, l in inst.length.items())


def tour_cost(inst: Instance, clients: Iterable[str]) -> int:
    """Cost of the cheapest closed walk from the depot through ``clients``.

    In a tree this is twice the weight of the union of the depot paths.
    """
    covered: set[str] = set()
    total = 0
    for c in clients:
        if c not in inst.vertex_set:
            raise InstanceError(f"unknown vertex {c!r}")
        v = c
        while v != inst.depot and v not in covered:
            covered.add(v)
            total += inst.length[v]
            v = inst.parent[v]
    return 2 * total


def verify_solution(inst: Instance, sol: Solution) -> VerificationReport:
    """Check a solution against the instance without trusting any of its claims."""
    rep = VerificationReport()
    covered: dict[str, int] = {}
    total = 0
    for i, tour in enumerate(sol.tours):
        load = 0
        for c, a in tour.amounts.items():
            if c not in inst.vertex_set:
                rep.coverage_ok = False
                rep.violations.append(f"tour {i}: unknown client {c!r}")
                continue
            if a < 0:
                rep.coverage_ok = False
                rep.violations.append(f"tour {i}: negative amount at {c!r}")
                continue
            load += a
            covered[c] = covered.get(c, 0) + a
        if load > inst.capacity:
            rep.load_ok = False
            rep.violations.append(f"tour {i}: load {load} exceeds capacity {inst.capacity}")
        total += tour_cost(inst, [c for c in tour.amounts if c in inst.vertex_set and tour.amounts[c] > 0])
    for v in inst.vertex_set:
        want, got = inst.d(v), covered.get(v, 0)
        if want != got:
            rep.coverage_ok = False
            rep.violations.append(f"client {v!r}: demand {want}, covered {got}")
    if total != sol.cost:
        rep.cost_ok = False
        rep.violations.append(f"stated cost {sol.cost} != recomputed {total}")
    lb = lower_bound(inst)
    if 3 * total > 4 * lb:
        rep.ratio_ok = False
        rep.violations.append(f"ratio check failed: 3*{total} > 4*{lb}")
    return rep


# --------------------------------------------------------------------------
# normalization


def _fresh(name: str, taken: set[str]) -> str:
    cand = f"{name}'"
    while cand in taken:
        cand += "'"
    return cand


def normalize(inst: Instance) -> NormalizedInstance:
    """Rewrite ``inst`` so that clients are exactly the leaves.

    Internal demand moves to zero-length pendant leaves, zero-demand leaves are
    deleted, and non-root vertices of degree two are spliced out. The lower
    bound is unchanged by every step.
    """
    parent = dict(inst.parent)
    length = dict(inst.length)
    demand = {v: d for v, d in inst.demand.items() if d > 0}
    roster: dict[str, str] = {}
    taken = set(inst.vertex_set)
    kids = {v: list(cs) for v, cs in inst.children.items()}

    for v in inst.preorder:
        d = demand.get(v, 0)
        if d and (kids[v] or v == inst.depot):
            leaf = _fresh(v, taken)
            taken.add(leaf)
            parent[leaf] = v
            length[leaf] = 0
            kids[v].append(leaf)
            kids[leaf] = []
            demand[leaf] = d
            del demand[v]
            roster[leaf] = v
        elif d:
            roster[v] = v

    # prune zero-demand leaves, bottom-up
    for v in reversed(list(inst.preorder)):
        u = v
        while u != inst.depot and u in kids and not kids[u] and demand.get(u, 0) == 0:
            p = parent.pop(u)
            del length[u]
            kids[p].remove(u)
            del kids[u]
            u = p

    # splice non-root vertices with a single child
    order = [v for v in inst.preorder if v in kids]
    for v in order:
        if v != inst.depot and v in kids and len(kids[v]) == 1:
            (c,) = kids[v]
            p = parent.pop(v)
            length[c] += length.pop(v)
            parent[c] = p
            idx = kids[p].index(v)
            kids[p][idx] = c
            del kids[v]

    # keep the original edge listing order where possible
    ordered = [c for c in inst.parent if c in parent] + [c for c in parent if c not in inst.parent]
    new = Instance(
        depot=inst.depot,
        capacity=inst.capacity,
        parent={c: parent[c] for c in ordered},
        length={c: length[c] for c in ordered},
        demand=demand,
    )
    return NormalizedInstance(new, roster)
