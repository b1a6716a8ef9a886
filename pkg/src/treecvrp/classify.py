"""Branch taxonomy on a simplified working tree.

A branch is named by its stem's child vertex. Chain labels follow the level /
rank scheme: ``tops[i-1]`` is the spine vertex ``v_i^0`` (``tops[0]`` is the
longest level-one leaf, ``tops[-1]`` the stem vertex), and ``rank1[i-1]``,
``rank2[i-1]`` are the two remaining leaves of level ``i`` with
``l(rank1) >= l(rank2)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .rewrite import RewriteError, WorkingTree

__all__ = [
    "ChainLabel",
    "Kind",
    "BranchClass",
    "recognize_chain",
    "is_long",
    "classify_branch",
    "classify_all",
    "find_minimally_unsettled",
]


@dataclass(frozen=True)
class ChainLabel:
    p: int
    tops: tuple[int, ...]
    rank1: tuple[int, ...]
    rank2: tuple[int, ...]
    long: bool = True

    @property
    def stem(self) -> int:
        return self.tops[-1]

    def leaves_bottom_up(self) -> list[int]:
        """``v_1^0, v_1^1, v_1^2, v_2^1, v_2^2, ...``"""
        out = [self.tops[0], self.rank1[0], self.rank2[0]]
        for i in range(1, self.p - 1):
            out += [self.rank1[i], self.rank2[i]]
        return out

    def level_edges(self, i: int) -> tuple[int, int, int]:
        """``(e_i^0, e_i^1, e_i^2)`` as child vertices, ``1 <= i <= p-1``."""
        return self.tops[i - 1], self.rank1[i - 1], self.rank2[i - 1]

    def validate(self, t: WorkingTree) -> None:
        """Check the demand and length invariants of the label against ``t``."""
        q = t.q
        d = t.sub
        a, b, c = self.tops[0], self.rank1[0], self.rank2[0]
        if not t.length[a] >= t.length[b] >= t.length[c]:
            raise AssertionError("level-1 ranks not ordered by length")
        if not d[a] + d[c] > q:
            raise AssertionError("level-1 rank 0 and 2 could be united")
        s = d[a] + d[b] + d[c]
        if not 3 * q < 2 * s <= 4 * q:
            raise AssertionError("level-1 demand outside (1.5Q, 2Q]")
        for i in range(1, self.p - 1):
            x, y = self.rank1[i], self.rank2[i]
            if t.length[x] < t.length[y]:
                raise AssertionError(f"level-{i + 1} ranks not ordered by length")
            s = d[x] + d[y]
            if not (q < s and 2 * s <= 3 * q):
                raise AssertionError(f"level-{i + 1} demand outside (Q, 1.5Q]")
        for k in range(2, self.p + 1):
            if t.f(self.tops[k - 1]) != k:
                raise AssertionError(f"spine edge at level {k} has wrong traffic")


class Kind(enum.Enum):
    ONE = "one-branch"
    LONG = "long-chain"
    SHORT = "short-chain"
    OTHER = "other"


@dataclass(frozen=True)
class BranchClass:
    kind: Kind
    label: ChainLabel | None = None

    @property
    def settled(self) -> bool:
        return self.kind in (Kind.ONE, Kind.LONG)


def _rank(t: WorkingTree, vs) -> list[int]:
    return sorted(vs, key=lambda v: (-t.length[v], v))


def _chain_here(t: WorkingTree, v: int, child_label: ChainLabel | None, child: int | None):
    """Try the chain predicate at ``v`` given the label of its internal child."""
    kids = t.kids[v]
    q = t.q
    d = t.sub
    if child is None:
        a, b, c = _rank(t, kids)
        s = d[a] + d[b] + d[c]
        if t.f(v) != 2 or not 3 * q < 2 * s:
            return None
        if d[a] + d[b] <= q or d[a] + d[c] <= q or d[b] + d[c] <= q:
            return None
        return ChainLabel(2, (a, v), (b,), (c,))
    if child_label is None:
        return None
    x, y = _rank(t, [w for w in kids if w != child])
    s = d[x] + d[y]
    p = child_label.p + 1
    if not (q < s and 2 * s <= 3 * q) or t.f(v) != p:
        return None
    return ChainLabel(
        p,
        child_label.tops + (v,),
        child_label.rank1 + (x,),
        child_label.rank2 + (y,),
    )


def _split(t: WorkingTree, v: int):
    """Whether ``v`` has a chain shape, plus its single internal child if any."""
    kids = t.kids[v]
    if len(kids) != 3:
        return False, None
    inner = [c for c in kids if t.kids[c]]
    if not inner:
        return True, None
    if len(inner) == 1:
        return True, inner[0]
    return False, None


def recognize_chain(t: WorkingTree, stem) -> ChainLabel | None:
    """Label of the chain whose stem is ``stem``; long flag included."""
    v = stem[1] if isinstance(stem, tuple) else stem
    if v not in t.parent:
        raise RewriteError(f"unknown edge {stem!r}")
    ok, child = _split(t, v)
    if not ok:
        return None
    sub = recognize_chain(t, child) if child is not None else None
    lab = _chain_here(t, v, sub, child)
    if lab is None:
        return None
    return ChainLabel(lab.p, lab.tops, lab.rank1, lab.rank2, is_long(t, lab))


def is_long(t: WorkingTree, label: ChainLabel) -> bool:
    """Every level ``i >= 2`` has ``l(e_i^2) < l(P[v_{i+1}^0, r])``."""
    for i in range(2, label.p):
        if not t.length[label.rank2[i - 1]] < t.dist(label.tops[i]):
            return False
    return True


def classify_branch(t: WorkingTree, stem) -> BranchClass:
    v = stem[1] if isinstance(stem, tuple) else stem
    if v not in t.parent:
        raise RewriteError(f"unknown edge {stem!r}")
    if t.f(v) == 1:
        return BranchClass(Kind.ONE)
    lab = recognize_chain(t, v)
    if lab is None:
        return BranchClass(Kind.OTHER)
    return BranchClass(Kind.LONG if lab.long else Kind.SHORT, lab)


def classify_all(t: WorkingTree) -> dict[int, BranchClass]:
    """Classes of every branch, computed bottom-up in one pass."""
    dist = {t.root: 0}
    for v in t.preorder()[1:]:
        dist[v] = dist[t.parent[v]] + t.length[v]
    labels: dict[int, ChainLabel | None] = {}
    out: dict[int, BranchClass] = {}
    for v in t.postorder():
        if v == t.root:
            continue
        lab = None
        ok, child = _split(t, v)
        if ok:
            lab = _chain_here(t, v, labels.get(child) if child is not None else None, child)
            if lab is not None:
                if lab.p == 2:
                    long = True
                else:
                    below = labels[child]
                    long = below.long and t.length[lab.rank2[-1]] < dist[v]
                lab = ChainLabel(lab.p, lab.tops, lab.rank1, lab.rank2, long)
        labels[v] = lab
        if t.f(v) == 1:
            out[v] = BranchClass(Kind.ONE)
        elif lab is None:
            out[v] = BranchClass(Kind.OTHER)
        else:
            out[v] = BranchClass(Kind.LONG if lab.long else Kind.SHORT, lab)
    return out


def find_minimally_unsettled(t: WorkingTree, classes: dict[int, BranchClass] | None = None):
    """First unsettled branch in post-order; all its child branches are settled."""
    if classes is None:
        classes = classify_all(t)
    for v in t.postorder():
        if v != t.root and not classes[v].settled:
            return v
    return None
