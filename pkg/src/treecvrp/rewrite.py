"""Mutable working tree and the safe rewrite operations.

Every operation leaves the lower bound unchanged and maps any feasible
solution of the rewritten tree back to one of the original tree of no greater
cost. Each leaf carries a roster of ``[client, amount]`` entries recording
which original clients its demand belongs to, so tours found on the working
tree expand to tours on the original instance.

Vertices are small integers; the depot is ``0``. An edge is identified by its
child vertex.
"""

from __future__ import annotations

import heapq
import json
from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable

from .instance import NormalizedInstance, ceil_div

__all__ = [
    "RewriteError",
    "OpRecord",
    "WorkingTree",
    "from_normalized",
    "op_condense",
    "op_unzip",
    "op_group",
    "op_unite",
    "op_slide",
    "op_splice",
    "applicable_op",
    "find_applicable",
    "all_applicable",
    "simplify",
    "remove_demand",
    "working_lb",
    "replay",
    "is_simplified",
]

OP_KINDS = ("splice", "condense", "unite", "unzip", "slide", "group")


class RewriteError(ValueError):
    pass


@dataclass
class OpRecord:
    """One applied operation; ``args`` are the arguments it was applied with."""

    kind: str
    args: tuple
    created: tuple = ()
    before: dict = field(default_factory=dict)
    after: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(
            {
                "kind": self.kind,
                "args": list(self.args),
                "created": list(self.created),
                "before": self.before,
                "after": self.after,
            },
            sort_keys=True,
        )


class WorkingTree:
    """Rooted tree with integer lengths, leaf demands in ``(0, Q)`` and rosters."""

    def __init__(self, capacity: int) -> None:
        self.q = capacity
        self.root = 0
        self.parent: dict[int, int] = {}
        self.kids: dict[int, list[int]] = {0: []}
        self.length: dict[int, int] = {}
        self.sub: dict[int, int] = {0: 0}
        self.roster: dict[int, deque] = {}
        self.name: dict[int, str] = {0: "r"}
        self.log: list[OpRecord] = []
        self.dirty: set[int] = set()
        self._heap: list[int] = []
        self._next = 1

    # -- basic queries -----------------------------------------------------

    def __contains__(self, v: int) -> bool:
        return v in self.kids

    def __len__(self) -> int:
        return len(self.kids)

    def f(self, v: int) -> int:
        """Traffic on the parent edge of ``v``."""
        return ceil_div(self.sub[v], self.q)

    def is_leaf(self, v: int) -> bool:
        return v != self.root and not self.kids[v]

    def demand(self, v: int) -> int:
        return self.sub[v] if self.is_leaf(v) else 0

    def leaves(self) -> list[int]:
        return [v for v in self.postorder() if self.is_leaf(v)]

    def dist(self, v: int) -> int:
        """``l(P[v, r])``."""
        total = 0
        while v != self.root:
            total += self.length[v]
            v = self.parent[v]
        return total

    def postorder(self, start: int | None = None) -> list[int]:
        start = self.root if start is None else start
        out: list[int] = []
        stack = [(start, False)]
        while stack:
            v, done = stack.pop()
            if done:
                out.append(v)
                continue
            stack.append((v, True))
            for c in reversed(self.kids[v]):
                stack.append((c, False))
        return out

    def preorder(self, start: int | None = None) -> list[int]:
        start = self.root if start is None else start
        out: list[int] = []
        stack = [start]
        while stack:
            v = stack.pop()
            out.append(v)
            stack.extend(reversed(self.kids[v]))
        return out

    def route_cost(self, leaves: Iterable[int]) -> int:
        """Twice the weight of the union of root paths of ``leaves``."""
        seen: set[int] = set()
        total = 0
        for v in leaves:
            while v != self.root and v not in seen:
                seen.add(v)
                total += self.length[v]
                v = self.parent[v]
        return 2 * total

    def path_edges(self, v: int) -> list[int]:
        out = []
        while v != self.root:
            out.append(v)
            v = self.parent[v]
        return out

    def roster_total(self) -> int:
        return sum(a for r in self.roster.values() for _, a in r)

    def label(self, v: int) -> str:
        return self.name.get(v, f"#{v}")

    # -- copying and comparison -------------------------------------------

    def copy(self) -> "WorkingTree":
        t = WorkingTree(self.q)
        t.parent = dict(self.parent)
        t.kids = {v: list(c) for v, c in self.kids.items()}
        t.length = dict(self.length)
        t.sub = dict(self.sub)
        t.roster = {v: deque([c, a] for c, a in r) for v, r in self.roster.items()}
        t.name = dict(self.name)
        t._next = self._next
        t.dirty = set(self.dirty)
        t._heap = list(self._heap)
        return t

    def snapshot(self) -> tuple:
        """Canonical structural state, used to compare trees."""
        return (
            self.q,
            tuple(sorted((v, tuple(c)) for v, c in self.kids.items())),
            tuple(sorted(self.length.items())),
            tuple(sorted(self.sub.items())),
            tuple(sorted((v, tuple(tuple(e) for e in r)) for v, r in self.roster.items())),
        )

    def check(self) -> None:
        """Assert structural invariants; used by tests and debug runs."""
        for v, cs in self.kids.items():
            for c in cs:
                assert self.parent[c] == v, (c, v)
        assert set(self.parent) == set(self.kids) - {self.root}
        for v in self.postorder():
            if v == self.root:
                expect = sum(self.sub[c] for c in self.kids[v])
            elif self.kids[v]:
                expect = sum(self.sub[c] for c in self.kids[v])
                assert v not in self.roster
            else:
                expect = sum(a for _, a in self.roster[v])
                assert 0 < expect, f"leaf {v} without demand"
            assert self.sub[v] == expect, (v, self.sub[v], expect)

    # -- primitive mutations (all mark dirty) ------------------------------

    def _mark(self, v: int) -> None:
        if v in self.kids and v not in self.dirty:
            self.dirty.add(v)
            heapq.heappush(self._heap, v)

    def _touch(self, v: int) -> None:
        self._mark(v)
        p = self.parent.get(v)
        if p is not None:
            self._mark(p)

    def _new_vertex(self, name: str) -> int:
        v = self._next
        self._next += 1
        self.kids[v] = []
        self.name[v] = name
        return v

    def _attach(self, c: int, p: int, length: int, at: int | None = None) -> None:
        self.parent[c] = p
        self.length[c] = length
        if at is None:
            self.kids[p].append(c)
        else:
            self.kids[p].insert(at, c)
        self._touch(c)

    def _detach(self, c: int) -> int:
        p = self.parent.pop(c)
        idx = self.kids[p].index(c)
        del self.kids[p][idx]
        del self.length[c]
        self._mark(p)
        return idx

    def _delete(self, v: int) -> None:
        del self.kids[v]
        self.sub.pop(v, None)
        self.roster.pop(v, None)
        self.dirty.discard(v)


# --------------------------------------------------------------------------
# construction


def from_normalized(n: NormalizedInstance, allow_heavy: bool = False) -> WorkingTree:
    """Build a working tree mirroring ``n``.

    Leaf demands must lie below ``Q`` unless ``allow_heavy`` is set, in which
    case the caller is expected to peel heavy leaves before simplifying.
    """
    inst = n.instance
    q = inst.capacity
    t = WorkingTree(q)
    ids = {inst.depot: 0}
    t.name[0] = inst.depot
    for v in inst.preorder[1:]:
        i = t._new_vertex(v)
        ids[v] = i
    for v in inst.preorder[1:]:
        t._attach(ids[v], ids[inst.parent[v]], inst.length[v])
    for v in reversed(inst.preorder):
        i = ids[v]
        if v != inst.depot and not inst.children[v]:
            d = inst.d(v)
            if d <= 0:
                raise RewriteError(f"leaf {v!r} has no demand; normalize first")
            if d >= q and not allow_heavy:
                raise RewriteError(f"leaf {v!r} has demand {d} >= Q={q}; peel first")
            t.sub[i] = d
            t.roster[i] = deque([[n.roster.get(v, v), d]])
        else:
            if inst.d(v) and v != inst.depot:
                raise RewriteError(f"internal vertex {v!r} has demand; normalize first")
            t.sub[i] = sum(t.sub[c] for c in t.kids[i])
    t.log.clear()
    return t


def working_lb(t: WorkingTree) -> int:
    q = t.q
    sub = t.sub
    return sum(2 * l * -(-sub[v] // q) for v, l in t.length.items())


def _edge(t: WorkingTree, e) -> int:
    if isinstance(e, tuple):
        u, v = e
        if t.parent.get(v) != u:
            raise RewriteError(f"unknown edge {e!r}")
        return v
    if e not in t.parent:
        raise RewriteError(f"unknown edge {e!r}")
    return e


def _vertex(t: WorkingTree, v: int) -> int:
    if v not in t.kids:
        raise RewriteError(f"unknown vertex {v!r}")
    return v


# --------------------------------------------------------------------------
# safe operations


def op_splice(t: WorkingTree, v: int) -> bool:
    """Merge the two edges at a non-root vertex with exactly one child."""
    _vertex(t, v)
    if v == t.root or len(t.kids[v]) != 1:
        return False
    (c,) = t.kids[v]
    before = {"length": [t.length[v], t.length[c]]}
    lv = t.length[v]
    u = t.parent[v]
    t._detach(c)
    idx = t._detach(v)
    t._attach(c, u, lv + before["length"][1], at=idx)
    t._delete(v)
    t.log.append(OpRecord("splice", (v,), (), before, {"length": t.length[c]}))
    return True


def op_condense(t: WorkingTree, e) -> bool:
    """Collapse a traffic-one branch into a single leaf."""
    v = _edge(t, e)
    if not t.kids[v] or t.f(v) != 1:
        return False
    total = t.length[v]
    roster: deque = deque()
    inner = t.preorder(v)[1:]
    for w in inner:
        total += t.length[w]
        if not t.kids[w]:
            roster.extend(t.roster[w])
    before = {"length": t.length[v], "demand": t.sub[v]}
    for w in inner:
        del t.parent[w]
        del t.length[w]
        t._delete(w)
    t.kids[v] = []
    t.length[v] = total
    t.roster[v] = roster
    t._touch(v)
    t.log.append(
        OpRecord("condense", (v,), (), before, {"length": total, "removed": len(inner)})
    )
    return True


def op_unzip(t: WorkingTree, e) -> bool:
    """Delete ``v`` when its edge traffic equals the sum of its child traffics."""
    v = _edge(t, e)
    kids = t.kids[v]
    if not kids or t.f(v) != sum(t.f(c) for c in kids):
        return False
    u = t.parent[v]
    lv = t.length[v]
    before = {"length": lv, "child_lengths": [t.length[c] for c in kids]}
    moved = list(kids)
    for c in moved:
        t._detach(c)
    idx = t._detach(v)
    for k, c in enumerate(moved):
        t._attach(c, u, lv + before["child_lengths"][k], at=idx + k)
    t._delete(v)
    t.log.append(
        OpRecord("unzip", (v,), (), before, {"child_lengths": [t.length[c] for c in moved]})
    )
    return True


def _group_ok(t: WorkingTree, u: int, triple) -> bool:
    if len(t.kids[u]) < 4 or len(set(triple)) != 3:
        return False
    if any(t.parent.get(v) != u or t.kids[v] for v in triple):
        return False
    s = sum(t.sub[v] for v in triple)
    return 3 * t.q < 2 * s < 4 * t.q


def op_group(t: WorkingTree, u: int, triple) -> bool:
    """Hang three leaves with total demand in ``(1.5Q, 2Q)`` under a new vertex."""
    _vertex(t, u)
    triple = tuple(triple)
    if not _group_ok(t, u, triple):
        return False
    g = t._new_vertex(f"g{t._next}")
    lengths = {str(v): t.length[v] for v in triple}
    t.sub[g] = sum(t.sub[v] for v in triple)
    t._attach(g, u, 0)
    for v in triple:
        l = t.length[v]
        t._detach(v)
        t._attach(v, g, l)
    t.log.append(OpRecord("group", (u, triple), (g,), {"lengths": lengths}, {"demand": t.sub[g]}))
    return True


def op_unite(t: WorkingTree, v1: int, v2: int) -> bool:
    """Replace sibling leaves with combined demand at most ``Q`` by one leaf."""
    _vertex(t, v1)
    _vertex(t, v2)
    if v1 == v2 or t.kids[v1] or t.kids[v2] or v1 == t.root or v2 == t.root:
        raise RewriteError("unite needs two distinct leaves")
    u = t.parent[v1]
    if t.parent[v2] != u:
        raise RewriteError("unite needs sibling leaves")
    d1, d2 = t.sub[v1], t.sub[v2]
    if d1 + d2 > t.q:
        return False
    l1, l2 = t.length[v1], t.length[v2]
    roster = deque(t.roster[v1])
    roster.extend(t.roster[v2])
    idx = t._detach(v1)
    t._detach(v2)
    t._delete(v1)
    t._delete(v2)
    w = t._new_vertex(f"u{t._next}")
    t.sub[w] = d1 + d2
    t.roster[w] = roster
    t._attach(w, u, l1 + l2, at=min(idx, len(t.kids[u])))
    t.log.append(
        OpRecord(
            "unite",
            (v1, v2),
            (w,),
            {"lengths": [l1, l2], "demands": [d1, d2]},
            {"length": l1 + l2, "demand": d1 + d2},
        )
    )
    return True


def op_slide(t: WorkingTree, e0, e1, e2) -> bool:
    """Move the subtree of ``w2`` under its sibling ``w1`` when ``f(e0) == f(e1)``."""
    v = _edge(t, e0)
    w1 = _edge(t, e1)
    w2 = _edge(t, e2)
    if t.parent[w1] != v or t.parent[w2] != v or w1 == w2:
        raise RewriteError("slide needs two distinct child edges of e0")
    if t.f(v) != t.f(w1) or not t.kids[w1]:
        return False
    l2 = t.length[w2]
    t._detach(w2)
    t._attach(w2, w1, l2)
    t.sub[w1] += t.sub[w2]
    t._touch(w1)
    t.log.append(OpRecord("slide", (v, w1, w2), (), {"length": l2}, {"f": t.f(w1)}))
    return True


# --------------------------------------------------------------------------
# candidate selection and the fixpoint


def _unite_pair(t: WorkingTree, x: int):
    leaves = [c for c in t.kids[x] if not t.kids[c]]
    if len(leaves) < 2:
        return None
    leaves.sort(key=lambda c: (t.sub[c], c))
    a, b = leaves[0], leaves[1]
    if t.sub[a] + t.sub[b] <= t.q:
        return (a, b)
    return None


def _group_triple(t: WorkingTree, x: int):
    kids = t.kids[x]
    if len(kids) < 4:
        return None
    leaves = [c for c in kids if not t.kids[c]]
    if len(leaves) < 3:
        return None
    q2 = 2 * t.q
    ds = sorted(t.sub[c] for c in leaves)
    # with unite exhausted every triple exceeds 1.5Q, so only the upper bound can fail
    if ds[0] + ds[1] + ds[2] >= q2:
        return None
    leaves.sort(key=lambda c: (-t.length[c], c))
    q3 = 3 * t.q
    for trip in combinations(leaves, 3):
        s2 = 2 * (t.sub[trip[0]] + t.sub[trip[1]] + t.sub[trip[2]])
        if q3 < s2 < 2 * q2:
            return trip
    return None


def applicable_op(t: WorkingTree, x: int):
    """First operation anchored at ``x`` in priority order, as ``(kind, args)``."""
    kids = t.kids[x]
    if x != t.root:
        if len(kids) == 1:
            return ("splice", (x,))
        if kids and t.f(x) == 1:
            return ("condense", (x,))
    pair = _unite_pair(t, x)
    if pair:
        return ("unite", pair)
    if x != t.root and kids:
        fx = t.f(x)
        fs = [t.f(c) for c in kids]
        if fx == sum(fs):
            return ("unzip", (x,))
        top = max(fs)
        if top == fx and len(kids) >= 2:
            w1 = min(c for c, fc in zip(kids, fs) if fc == top)
            if t.kids[w1]:
                w2 = min((c for c in kids if c != w1), key=lambda c: (t.length[c], c))
                return ("slide", (x, w1, w2))
    trip = _group_triple(t, x)
    if trip:
        return ("group", (x, trip))
    return None


_APPLY = {
    "splice": lambda t, a: op_splice(t, *a),
    "condense": lambda t, a: op_condense(t, *a),
    "unite": lambda t, a: op_unite(t, *a),
    "unzip": lambda t, a: op_unzip(t, *a),
    "slide": lambda t, a: op_slide(t, *a),
    "group": lambda t, a: op_group(t, a[0], a[1]),
}


def apply_op(t: WorkingTree, kind: str, args) -> bool:
    return _APPLY[kind](t, args)


def all_applicable(t: WorkingTree, x: int) -> list[tuple[str, tuple]]:
    """Every operation anchored at ``x`` whose precondition holds, any order."""
    kids = t.kids[x]
    out: list[tuple[str, tuple]] = []
    if x != t.root and len(kids) == 1:
        out.append(("splice", (x,)))
    if x != t.root and kids:
        fx = t.f(x)
        if fx == 1:
            out.append(("condense", (x,)))
        if fx == sum(t.f(c) for c in kids):
            out.append(("unzip", (x,)))
        for w1 in kids:
            if t.kids[w1] and t.f(w1) == fx:
                out.extend(("slide", (x, w1, w2)) for w2 in kids if w2 != w1)
    leaves = [c for c in kids if not t.kids[c]]
    for a, b in combinations(leaves, 2):
        if t.sub[a] + t.sub[b] <= t.q:
            out.append(("unite", (a, b)))
    if len(kids) >= 4:
        out.extend(("group", (x, trip)) for trip in combinations(leaves, 3) if _group_ok(t, x, trip))
    return out


def find_applicable(t: WorkingTree):
    """Full scan in post-order; ``None`` iff the tree is at a fixpoint."""
    for x in t.postorder():
        op = applicable_op(t, x)
        if op:
            return op
    return None


def is_simplified(t: WorkingTree) -> bool:
    if find_applicable(t) is not None:
        return False
    return all(0 < t.sub[v] < t.q for v in t.leaves())


def simplify(t: WorkingTree, max_ops: int | None = None) -> list[OpRecord]:
    """Apply safe operations until none is available; return the applied log.

    Only vertices whose neighbourhood changed since the last fixpoint are
    re-examined; every mutation marks the affected vertices.
    """
    start = len(t.log)
    limit = max_ops if max_ops is not None else 64 * (len(t.kids) + 8) ** 2
    count = 0
    heap = t._heap
    while heap:
        x = heapq.heappop(heap)
        if x not in t.dirty:
            continue
        t.dirty.discard(x)
        if x not in t.kids:
            continue
        op = applicable_op(t, x)
        if op is None:
            continue
        if not apply_op(t, *op):
            raise RewriteError(f"selected operation {op} did not apply")
        t._mark(x)
        count += 1
        if count > limit:
            raise RewriteError("simplify exceeded its operation budget")
    return t.log[start:]


# --------------------------------------------------------------------------
# demand removal and replay


def remove_demand(t: WorkingTree, leaf: int, amount: int) -> list[tuple[str, int]]:
    """Cover ``amount`` units at ``leaf``; return the roster entries consumed."""
    if leaf not in t.kids or t.kids[leaf] or leaf == t.root:
        raise RewriteError(f"{leaf!r} is not a leaf")
    d = t.sub[leaf]
    if not 0 < amount <= d:
        raise RewriteError(f"cannot remove {amount} from leaf with demand {d}")
    consumed: list[tuple[str, int]] = []
    roster = t.roster[leaf]
    left = amount
    while left:
        entry = roster[0]
        take = min(left, entry[1])
        consumed.append((entry[0], take))
        entry[1] -= take
        left -= take
        if entry[1] == 0:
            roster.popleft()
    v = leaf
    while True:
        t.sub[v] -= amount
        t._mark(v)
        if v == t.root:
            break
        v = t.parent[v]
    t.log.append(OpRecord("remove", (leaf, amount), (), {"demand": d}, {"demand": d - amount}))
    v = leaf
    while v != t.root and not t.kids[v] and t.sub[v] == 0:
        p = t.parent[v]
        t._detach(v)
        t._delete(v)
        v = p
    return consumed


def replay(initial: WorkingTree, log: Iterable[OpRecord]) -> WorkingTree:
    """Re-apply ``log`` to a copy of ``initial`` and return the result."""
    t = initial.copy()
    for rec in log:
        nxt = t._next
        if rec.kind == "remove":
            remove_demand(t, *rec.args)
        elif not apply_op(t, rec.kind, rec.args):
            raise RewriteError(f"replayed {rec.kind}{rec.args} did not apply")
        if rec.created and tuple(range(nxt, t._next)) != tuple(rec.created):
            raise RewriteError(f"replayed {rec.kind} created different vertices")
    return t
