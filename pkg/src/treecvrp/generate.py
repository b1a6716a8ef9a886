"""Seeded random instances for tests and benchmarks."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .instance import Instance, InstanceError

__all__ = ["SHAPES", "GenParams", "generate", "suite_params"]

SHAPES = ("random-tree", "caterpillar", "chain-stack")


@dataclass(frozen=True)
class GenParams:
    """Generator settings. ``n`` counts the depot.

    In the chain-stack shape the chain leaves get demands below ``q`` chosen to
    satisfy the chain conditions; ``max_demand`` bounds the filler clients.
    """

    n: int = 20
    max_len: int = 10
    max_demand: int = 10
    q: int = 10
    seed: int = 0
    shape: str = "random-tree"

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InstanceError("n must be >= 1")
        if self.q < 1:
            raise InstanceError("q must be >= 1")
        if self.max_len < 0:
            raise InstanceError("max_len must be >= 0")
        if not 1 <= self.max_demand <= 3 * self.q:
            raise InstanceError("max_demand must lie in [1, 3q]")
        if self.shape not in SHAPES:
            raise InstanceError(f"unknown shape {self.shape!r}; pick one of {SHAPES}")


class _Builder:
    def __init__(self, rng: random.Random, max_len: int) -> None:
        self.rng = rng
        self.max_len = max_len
        self.parent: dict[str, str] = {}
        self.length: dict[str, int] = {}
        self.demand: dict[str, int] = {}

    def add(self, p: str, d: int = 0, length: int | None = None) -> str:
        v = f"v{len(self.parent) + 1}"
        self.parent[v] = p
        self.length[v] = self.rng.randint(0, self.max_len) if length is None else length
        if d:
            self.demand[v] = d
        return v

    def build(self, q: int) -> Instance:
        return Instance("r", q, self.parent, self.length, self.demand)


def _client_demand(rng: random.Random, p: GenParams) -> int:
    return rng.randint(1, p.max_demand)


def _random_tree(rng: random.Random, p: GenParams) -> Instance:
    b = _Builder(rng, p.max_len)
    names = ["r"]
    for _ in range(p.n - 1):
        names.append(b.add(rng.choice(names)))
    kids = set(b.parent.values())
    for v in names[1:]:
        if v not in kids:
            b.demand[v] = _client_demand(rng, p)
        elif rng.random() < 0.2:
            b.demand[v] = _client_demand(rng, p)
    return b.build(p.q)


def _caterpillar(rng: random.Random, p: GenParams) -> Instance:
    b = _Builder(rng, p.max_len)
    spine = ["r"]
    for _ in range((p.n - 1) // 2):
        spine.append(b.add(spine[-1]))
    while len(b.parent) < p.n - 1:
        b.add(rng.choice(spine), _client_demand(rng, p))
    if len(spine) > 1 and spine[-1] not in b.parent.values():
        b.demand[spine[-1]] = _client_demand(rng, p)
    return b.build(p.q)


def _split_two(rng: random.Random, s: int, q: int):
    """Two demands in ``[1, q-1]`` summing to ``s``, or ``None``."""
    lo, hi = max(1, s - q + 1), min(q - 1, s - 1)
    if lo > hi:
        return None
    x = rng.randint(lo, hi)
    return x, s - x


def _base_level(rng: random.Random, q: int, strict: bool):
    """Three leaf demands below ``q``, pairwise above ``q``, total in ``(1.5q, 2q]``.

    With ``strict`` the total stays below ``2q`` so the chain can grow.
    """
    top = 2 * q - 1 if strict else 2 * q
    for _ in range(500):
        s = rng.randint(3 * q // 2 + 1, top) if 3 * q // 2 + 1 <= top else None
        if s is None:
            return None
        a = rng.randint(1, q - 1) if q > 1 else 1
        rest = _split_two(rng, s - a, q)
        if rest is None:
            continue
        ds = (a, *rest)
        if all(ds[i] + ds[j] > q for i in range(3) for j in range(i + 1, 3)) and max(ds) < q:
            return ds
    return None


def _chain(rng: random.Random, b: _Builder, at: str, p_max: int, q: int) -> int:
    """Hang a chain of at most ``p_max`` levels under ``at``; return its size."""
    base = _base_level(rng, q, strict=p_max > 2) or _base_level(rng, q, strict=False)
    if base is None:
        return 0
    levels = [base]
    total = sum(base)
    while len(levels) + 1 < p_max:
        i = len(levels) + 1  # the new level's spine vertex carries traffic i + 1
        hi = min(3 * q // 2, (i + 1) * q - total)
        if hi <= q:
            break
        s = rng.randint(q + 1, hi)
        pair = _split_two(rng, s, q)
        if pair is None:
            break
        levels.append(pair)
        total += s
    # build from the top: stem first, each level hangs below the previous spine vertex
    stem = b.add(at)
    spine = stem
    for lvl in reversed(levels[1:]):
        for d in lvl:
            b.add(spine, d)
        spine = b.add(spine)
    for d in levels[0]:
        b.add(spine, d)
    return 3 * (len(levels) + 1) - 2


def _chain_stack(rng: random.Random, p: GenParams) -> Instance:
    b = _Builder(rng, p.max_len)
    left = p.n - 1
    hosts = ["r"]
    while left >= 4:
        if left >= 5 and rng.random() < 0.3:
            hosts.append(b.add(rng.choice(hosts)))
            left -= 1
        p_max = (left + 2) // 3
        # the first chain is as tall as the budget allows, later ones vary
        if len(b.parent) > len(hosts) and rng.random() < 0.5:
            p_max = rng.randint(2, p_max)
        used = _chain(rng, b, rng.choice(hosts), p_max, p.q)
        if not used:
            break
        left -= used
    while left > 0:
        b.add(rng.choice(hosts), _client_demand(rng, p))
        left -= 1
    # a host vertex without children would be a demandless leaf
    kids = set(b.parent.values())
    for h in hosts[1:]:
        if h not in kids:
            b.demand[h] = _client_demand(rng, p)
    return b.build(p.q)


_SHAPE_FN = {"random-tree": _random_tree, "caterpillar": _caterpillar, "chain-stack": _chain_stack}


def generate(p: GenParams) -> Instance:
    """Deterministic instance for ``p``; same parameters give identical bytes."""
    rng = random.Random(f"{p.shape}:{p.seed}:{p.n}:{p.q}:{p.max_len}:{p.max_demand}")
    return _SHAPE_FN[p.shape](rng, p)


def suite_params(seed: int, shape: str, n_max: int = 300, q_max: int = 60) -> GenParams:
    """Draw size, capacity, lengths and demand range from ``seed``."""
    rng = random.Random(f"suite:{shape}:{seed}")
    q = rng.randint(1, q_max)
    return GenParams(
        n=rng.randint(1, n_max),
        max_len=rng.choice((0, 1, 3, 10, 30, 100)),
        max_demand=rng.randint(1, 3 * q),
        q=q,
        seed=seed,
        shape=shape,
    )
