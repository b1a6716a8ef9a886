from __future__ import annotations

import pytest
from hypothesis import settings
from hypothesis import strategies as st

from treecvrp.generate import SHAPES, GenParams, generate
from treecvrp.instance import Instance

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def two_chain_instance() -> Instance:
    """Stem of length 1 above three leaves (lengths 3, 2, 1), demand 6 each, Q=10."""
    return Instance(
        "r",
        10,
        {"s": "r", "a": "s", "b": "s", "c": "s"},
        {"s": 1, "a": 3, "b": 2, "c": 1},
        {"a": 6, "b": 6, "c": 6},
    )


def short_chain_instance(a: int = 1, b: int = 1, c: int = 1) -> Instance:
    """3-chain whose top level has rank-1 length ``c`` and rank-2 length ``b``,
    hanging ``a`` below the depot; short whenever ``b >= a``."""
    return Instance(
        "r",
        10,
        {"s": "r", "x": "s", "y": "s", "m": "s", "p": "m", "q": "m", "t": "m"},
        {"s": a, "x": c, "y": b, "m": 1, "p": 3, "q": 2, "t": 1},
        {"x": 6, "y": 6, "p": 6, "q": 6, "t": 6},
    )


@pytest.fixture
def two_chain() -> Instance:
    return two_chain_instance()


@pytest.fixture
def short_chain() -> Instance:
    return short_chain_instance()


@st.composite
def instances(draw, max_n: int = 40, shapes=SHAPES) -> Instance:
    q = draw(st.integers(1, 30))
    p = GenParams(
        n=draw(st.integers(1, max_n)),
        max_len=draw(st.sampled_from([0, 1, 5, 20])),
        max_demand=draw(st.integers(1, 3 * q)),
        q=q,
        seed=draw(st.integers(0, 2**64 - 1)),
        shape=draw(st.sampled_from(shapes)),
    )
    return generate(p)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, text = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'} - {text}")
