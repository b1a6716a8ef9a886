import pytest
from hypothesis import given
from hypothesis import strategies as st

from treecvrp.generate import SHAPES, GenParams, generate, suite_params
from treecvrp.instance import InstanceError, lower_bound, serialize_instance


@pytest.mark.parametrize("shape", SHAPES)
def test_deterministic(shape):
    p = GenParams(n=50, shape=shape, seed=1)
    assert serialize_instance(generate(p)) == serialize_instance(generate(p))


def test_depot_only():
    inst = generate(GenParams(n=1))
    assert inst.vertex_set == {"r"} and lower_bound(inst) == 0


@pytest.mark.parametrize(
    "kw", [dict(n=0), dict(q=0), dict(max_demand=31), dict(max_len=-1), dict(shape="star")]
)
def test_invalid_params(kw):
    with pytest.raises(InstanceError):
        GenParams(**kw)


@given(st.integers(1, 2000), st.sampled_from(SHAPES))
def test_suite_instances_are_valid(seed, shape):
    p = suite_params(seed, shape)
    assert 1 <= p.n <= 300 and 1 <= p.q <= 60 and p.max_demand <= 3 * p.q
    inst = generate(p)
    assert len(inst.vertex_set) == p.n
    for v in inst.vertex_set - {"r"}:
        if not inst.children[v]:
            assert inst.d(v) > 0
        # chain leaves are sized by the chain conditions, always below q
        cap = max(p.max_demand, p.q - 1) if shape == "chain-stack" else p.max_demand
        assert inst.d(v) <= cap
