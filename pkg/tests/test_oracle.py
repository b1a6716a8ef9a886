import pytest
from hypothesis import given
from hypothesis import strategies as st

from treecvrp.instance import Instance, lower_bound, tour_cost, verify_solution
from treecvrp.oracle import OracleLimitError, exact_opt, exact_solution, itp_baseline
from treecvrp.solver import solve

from conftest import instances, two_chain_instance


def test_single_client():
    assert exact_opt(Instance("r", 10, {"v": "r"}, {"v": 5}, {"v": 10}), limit=10) == 10


def test_two_full_clients():
    inst = Instance("r", 2, {"a": "r", "b": "r"}, {"a": 3, "b": 4}, {"a": 2, "b": 2})
    assert exact_opt(inst) == 2 * (3 + 4)


def test_scaled_two_chain_sandwich():
    base = two_chain_instance()
    inst = Instance("r", 2, base.parent, base.length, {"a": 1, "b": 1, "c": 1})
    opt = exact_opt(inst)
    rep = solve(inst)
    assert lower_bound(inst) <= opt <= rep.solution.cost


def test_limit():
    with pytest.raises(OracleLimitError):
        exact_opt(two_chain_instance())


def test_exact_solution_is_feasible():
    base = two_chain_instance()
    inst = Instance("r", 4, base.parent, base.length, {"a": 3, "b": 2, "c": 3})
    sol = exact_solution(inst)
    assert verify_solution(inst, sol).ok


def test_baseline_examples():
    single = Instance("r", 10, {"v": "r"}, {"v": 5}, {"v": 7})
    assert itp_baseline(single).cost == 10
    pair = Instance("r", 10, {"a": "r", "b": "r"}, {"a": 1, "b": 2}, {"a": 5, "b": 5})
    assert len(itp_baseline(pair).tours) == 1
    inst = two_chain_instance()
    sol = itp_baseline(inst)
    assert verify_solution(inst, sol).ok and sol.cost >= lower_bound(inst)


@given(instances(max_n=50))
def test_baseline_always_feasible(inst):
    assert verify_solution(inst, itp_baseline(inst)).ok


@given(instances(max_n=12).filter(lambda i: i.total_demand <= 8), st.randoms(use_true_random=False))
def test_opt_invariant_under_relabeling(inst, rnd):
    names = sorted(inst.vertex_set - {inst.depot})
    shuffled = names[:]
    rnd.shuffle(shuffled)
    m = dict(zip(names, shuffled))
    m[inst.depot] = inst.depot
    other = Instance(
        inst.depot,
        inst.capacity,
        {m[v]: m[p] for v, p in inst.parent.items()},
        {m[v]: l for v, l in inst.length.items()},
        {m[v]: d for v, d in inst.demand.items()},
    )
    assert exact_opt(inst) == exact_opt(other)


def brute_force(inst):
    """Every set partition of labelled granules, no symmetry reduction."""
    g = [c for c in inst.clients for _ in range(inst.d(c))]
    best = None

    def go(i, blocks):
        nonlocal best
        if i == len(g):
            c = sum(tour_cost(inst, set(b)) for b in blocks)
            best = c if best is None else min(best, c)
            return
        for b in blocks:
            if len(b) < inst.capacity:
                b.append(g[i])
                go(i + 1, blocks)
                b.pop()
        blocks.append([g[i]])
        go(i + 1, blocks)
        blocks.pop()

    go(0, [])
    return best or 0


@given(instances(max_n=8).filter(lambda i: i.total_demand <= 6))
def test_opt_matches_brute_force(inst):
    assert exact_opt(inst) == brute_force(inst)
