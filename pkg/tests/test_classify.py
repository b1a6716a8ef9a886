import pytest
from hypothesis import given

from treecvrp.classify import (
    Kind,
    classify_all,
    classify_branch,
    find_minimally_unsettled,
    is_long,
    recognize_chain,
)
from treecvrp.generate import GenParams, generate
from treecvrp.instance import Instance, normalize
from treecvrp.rewrite import from_normalized, simplify
from treecvrp.strategies import peel_heavy_clients

from conftest import instances, short_chain_instance, two_chain_instance


def tree(inst):
    return from_normalized(normalize(inst))


def by_name(t, name):
    return next(v for v, n in t.name.items() if n == name)


def three_chain(top_len=1, rank2_len=3):
    """Two leaves (d=6,5; l=4,rank2_len) stacked above the two-chain fixture."""
    return Instance(
        "r",
        10,
        {"h": "r", "x": "h", "y": "h", "s": "h", "a": "s", "b": "s", "c": "s"},
        {"h": top_len, "x": 4, "y": rank2_len, "s": 1, "a": 3, "b": 2, "c": 1},
        {"x": 6, "y": 5, "a": 6, "b": 6, "c": 6},
    )


def test_two_chain_label():
    t = tree(two_chain_instance())
    s = by_name(t, "s")
    lab = recognize_chain(t, s)
    assert lab.p == 2 and lab.long
    assert [t.name[v] for v in lab.leaves_bottom_up()] == ["a", "b", "c"]
    lab.validate(t)
    assert classify_branch(t, s).kind is Kind.LONG


def test_heavy_triple_is_not_a_chain():
    inst = Instance("r", 10, {"s": "r", "a": "s", "b": "s", "c": "s"}, {"s": 1, "a": 1, "b": 1, "c": 1},
                    {"a": 7, "b": 7, "c": 7})
    t = tree(inst)
    assert recognize_chain(t, by_name(t, "s")) is None


def test_three_chain_label():
    t = tree(three_chain(top_len=2, rank2_len=1))
    lab = recognize_chain(t, by_name(t, "h"))
    assert lab.p == 3
    assert [t.name[v] for v in lab.rank1] == ["b", "x"]
    assert [t.name[v] for v in lab.rank2] == ["c", "y"]
    lab.validate(t)
    assert lab.long and is_long(t, lab)


def test_short_three_chain():
    t = tree(three_chain(top_len=2, rank2_len=3))
    lab = recognize_chain(t, by_name(t, "h"))
    assert lab.p == 3 and not lab.long
    assert classify_branch(t, by_name(t, "h")).kind is Kind.SHORT


def test_single_leaf_and_four_leaf_branch():
    inst = Instance(
        "r", 10,
        {"v": "r", "s": "r", "a": "s", "b": "s", "c": "s", "d": "s"},
        {"v": 1, "s": 1, "a": 1, "b": 1, "c": 1, "d": 1},
        {"v": 7, "a": 7, "b": 7, "c": 7, "d": 7},
    )
    t = tree(inst)
    assert classify_branch(t, by_name(t, "v")).kind is Kind.ONE
    assert classify_branch(t, by_name(t, "s")).kind is Kind.OTHER
    assert find_minimally_unsettled(t) == by_name(t, "s")


def test_settled_root_gives_none():
    inst = two_chain_instance()
    parent = dict(inst.parent, v="r")
    length = dict(inst.length, v=4)
    demand = dict(inst.demand, v=3)
    t = tree(Instance("r", 10, parent, length, demand))
    assert find_minimally_unsettled(t) is None


def test_nested_short_chain_is_found_first():
    # an 'Other' vertex above the short chain: the chain is deeper, so it is returned
    base = short_chain_instance(a=1, b=2, c=2)
    parent = dict(base.parent, s="o", o="r", z="o")
    length = dict(base.length, o=1, z=1)
    demand = dict(base.demand, z=9)
    t = tree(Instance("r", 10, parent, length, demand))
    classes = classify_all(t)
    s = by_name(t, "s")
    assert classes[s].kind is Kind.SHORT
    assert find_minimally_unsettled(t, classes) == s


@pytest.mark.parametrize("seed", range(20))
def test_chain_stack_generates_deep_chain(seed):
    p = GenParams(n=13, q=10, max_demand=9, shape="chain-stack", seed=seed)
    t = from_normalized(normalize(generate(p)))
    simplify(t)
    labels = [c.label for c in classify_all(t).values() if c.label]
    assert max(l.p for l in labels) >= 3


@given(instances())
def test_labels_are_sound_and_two_branches_are_chains(inst):
    t = from_normalized(normalize(inst), allow_heavy=True)
    while True:
        peel_heavy_clients(t)
        simplify(t)
        if all(t.sub[v] < t.q for v in t.leaves()):
            break
    classes = classify_all(t)
    for v, cls in classes.items():
        if cls.label is not None:
            cls.label.validate(t)
            assert recognize_chain(t, v) == cls.label
        if t.f(v) == 2:
            assert cls.label is not None and cls.label.p == 2
    if find_minimally_unsettled(t, classes) is None:
        assert all(classes[c].settled for c in t.kids[t.root])
