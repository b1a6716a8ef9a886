"""Ground truth for small instances and the tour-partitioning baseline."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

from .instance import Instance, Solution, Tour, lower_bound, tour_cost

__all__ = ["OracleLimitError", "GranuleInstance", "exact_opt", "exact_solution", "itp_baseline"]

DEFAULT_LIMIT = 10


class OracleLimitError(ValueError):
    pass


@dataclass(frozen=True)
class GranuleInstance:
    """``inst`` with every client split into unit granules."""

    instance: Instance
    limit: int = DEFAULT_LIMIT

    def __post_init__(self) -> None:
        if self.instance.total_demand > self.limit:
            raise OracleLimitError(
                f"{self.instance.total_demand} granules exceed the limit of {self.limit}"
            )

    @cached_property
    def granules(self) -> list[str]:
        inst = self.instance
        return [c for c in inst.clients for _ in range(inst.d(c))]


def exact_solution(inst: Instance, limit: int = DEFAULT_LIMIT) -> Solution:
    """Cheapest partition of the granules into blocks of at most ``Q``.

    Granules of one client are interchangeable, so subsets are tracked as
    per-client counts. Only integral splits are searched: the value is an
    upper bound on the true optimum and at least the lower bound.
    """
    GranuleInstance(inst, limit)
    clients = inst.clients
    full = tuple(inst.d(c) for c in clients)
    q = inst.capacity
    k = len(clients)
    support_cost: dict[int, int] = {}

    def cost_of(block: tuple[int, ...]) -> int:
        mask = sum(1 << i for i, x in enumerate(block) if x)
        if mask not in support_cost:
            support_cost[mask] = tour_cost(inst, [clients[i] for i in range(k) if mask >> i & 1])
        return support_cost[mask]

    def blocks(rem: tuple[int, ...]):
        """Loads not above ``Q`` that take one unit from the first open client."""
        first = next(i for i, x in enumerate(rem) if x)
        out = []

        def grow(i: int, cur: list[int], load: int) -> None:
            if i == k:
                out.append(tuple(cur))
                return
            lo = 1 if i == first else 0
            for x in range(lo, min(rem[i], q - load) + 1):
                cur.append(x)
                grow(i + 1, cur, load + x)
                cur.pop()

        grow(0, [], 0)
        return out

    @lru_cache(maxsize=None)
    def best(rem: tuple[int, ...]) -> tuple[int, tuple[int, ...] | None]:
        if not any(rem):
            return 0, None
        top: tuple[int, tuple[int, ...] | None] = (-1, None)
        for b in blocks(rem):
            rest = tuple(r - x for r, x in zip(rem, b))
            c = cost_of(b) + best(rest)[0]
            if top[1] is None or c < top[0]:
                top = (c, b)
        return top

    total, _ = best(full)
    tours = []
    rem = full
    while any(rem):
        b = best(rem)[1]
        tours.append(Tour({clients[i]: x for i, x in enumerate(b) if x}))
        rem = tuple(r - x for r, x in zip(rem, b))
    best.cache_clear()
    return Solution(tuple(tours), total, lower_bound(inst))


def exact_opt(inst: Instance, limit: int = DEFAULT_LIMIT) -> int:
    return exact_solution(inst, limit).cost


def itp_baseline(inst: Instance) -> Solution:
    """Walk the clients in depth-first order and cut the walk every ``Q`` units."""
    q = inst.capacity
    tours: list[Tour] = []
    cur: dict[str, int] = {}
    room = q
    for v in inst.preorder:
        left = inst.d(v)
        while left:
            take = min(left, room)
            cur[v] = cur.get(v, 0) + take
            left -= take
            room -= take
            if room == 0:
                tours.append(Tour(cur))
                cur, room = {}, q
    if cur:
        tours.append(Tour(cur))
    total = sum(tour_cost(inst, t.amounts) for t in tours)
    return Solution(tuple(tours), total, lower_bound(inst))
