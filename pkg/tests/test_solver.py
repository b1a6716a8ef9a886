from hypothesis import given

from treecvrp.instance import Instance, normalize, serialize_solution, verify_solution
from treecvrp.rewrite import from_normalized, simplify
from treecvrp.solver import Resolved, RootReady, expand_tours, iteration_step, resolve_root, solve
from treecvrp.rewrite import remove_demand
from treecvrp.strategies import TourSet, WorkTour

from conftest import instances, short_chain_instance, two_chain_instance
from test_strategies import two_chains_under, trident


def test_empty_instance():
    rep = solve(Instance("r", 4, {}, {}, {}))
    assert rep.solution.tours == () and rep.solution.cost == 0 and rep.lower_bound == 0


def test_single_full_client():
    rep = solve(Instance("r", 10, {"v": "r"}, {"v": 5}, {"v": 10}))
    assert len(rep.solution.tours) == 1
    assert rep.solution.cost == rep.lower_bound == 10


def test_two_chain_fixture():
    inst = two_chain_instance()
    rep = solve(inst, check=True)
    assert (rep.solution.cost, rep.lower_bound) == (18, 16)
    assert str(rep.solution.ratio) == "9/8"
    assert verify_solution(inst, rep.solution).ok


def test_sibling_pair_dispatch():
    # a light third child keeps f(u) below the sum of child traffics, so no unzip
    inst = two_chains_under(2)
    parent = dict(inst.parent, z="u")
    t = from_normalized(normalize(Instance("r", 10, parent, dict(inst.length, z=1), dict(inst.demand, z=2))))
    out = iteration_step(t)
    assert isinstance(out, Resolved) and out.case == "sibling-pair"


def test_trident_dispatch():
    t = from_normalized(normalize(trident(1, (1, 1, 1, 1), (7, 7, 7, 7))))
    out = iteration_step(t)
    assert isinstance(out, Resolved) and out.case == "trident"


def test_short_chain_dispatch():
    t = from_normalized(normalize(short_chain_instance(1, 1, 1)))
    out = iteration_step(t)
    assert isinstance(out, Resolved) and out.case == "short-chain"
    assert out.tourset.margin == 0


def test_resolve_root_mixed():
    inst = two_chain_instance()
    parent = dict(inst.parent, v="r", w="r")
    length = dict(inst.length, v=4, w=2)
    demand = dict(inst.demand, v=3, w=9)
    t = from_normalized(normalize(Instance("r", 10, parent, length, demand)))
    simplify(t)
    assert isinstance(iteration_step(t), RootReady)
    sets = resolve_root(t)
    assert sorted(ts.tag for ts in sets) == ["root-chain", "root-one", "root-one"]
    assert len(t) == 1


def test_expansion_of_united_leaf():
    inst = Instance("r", 10, {"a": "r", "b": "r"}, {"a": 1, "b": 1}, {"a": 3, "b": 4})
    t = from_normalized(normalize(inst))
    simplify(t)
    (leaf,) = t.leaves()
    tours = []
    for amount in (5, 2):
        tr = WorkTour([(leaf, amount)], t.route_cost([leaf]))
        tr.served = remove_demand(t, leaf, amount)
        tours.append(tr)
    sol, costs = expand_tours(inst, [TourSet(tours, 8, 4, "test")])
    assert [dict(tr.amounts) for tr in sol.tours] == [{"a": 3, "b": 2}, {"b": 2}]
    assert all(c <= acc for c, acc in costs)


@given(instances(max_n=60))
def test_solve_is_certified_and_sound(inst):
    rep = solve(inst, check=True)
    sol = rep.solution
    assert verify_solution(inst, sol).ok
    assert 3 * sol.cost <= 4 * rep.lower_bound
    assert sol.cost <= rep.accounted_cost
    assert all(c <= acc for c, acc in rep.tour_costs)
    peel_count = sum(len(tr["tours"]) for tr in rep.traces if tr["strategy"] == "peel")
    assert rep.iterations <= -(-inst.total_demand // inst.capacity) + peel_count + 1


@given(instances(max_n=60))
def test_solve_is_deterministic(inst):
    assert serialize_solution(solve(inst).solution) == serialize_solution(solve(inst).solution)
