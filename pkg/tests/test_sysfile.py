import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rotspec.graph import CylinderPotential, TransitionGraph
from rotspec.sysfile import SystemFormatError, emit_system, parse_system

FULL2 = """
[meta]
alphabet=2
name=fullshift2

[vertices]
0

[edges]
0 -> 0 label=0 phi=0
0 -> 0 label=1 phi=1
"""

GOLDEN = """
[meta]
alphabet=2
[vertices]
0
1
[edges]
0 -> 0 label=0 phi=0
0 -> 1 label=1 phi=1
1 -> 0 label=0 phi=0   # back to the start
"""


def test_full_shift_document():
    G, phi = parse_system(FULL2)
    assert (G.n_vertices, G.n_edges, phi.dim) == (1, 2, 1)
    assert phi.values[:, 0].tolist() == [0.0, 1.0]


def test_golden_document():
    G, _ = parse_system(GOLDEN)
    assert (G.n_vertices, G.n_edges) == (2, 3)
    assert [(s, t) for s, t, _ in G.edges] == [(0, 0), (0, 1), (1, 0)]


def test_dangling_vertex():
    doc = "[vertices]\n0\n1\n[edges]\n0 -> 2 label=0\n"
    with pytest.raises(SystemFormatError, match="dangling"):
        parse_system(doc)


def test_phi_length_mismatch():
    doc = "[vertices]\n0\n[edges]\n0 -> 0 phi=1,2\n0 -> 0 phi=1\n"
    with pytest.raises(SystemFormatError):
        parse_system(doc)


def test_partial_phi_rejected():
    doc = "[vertices]\n0\n[edges]\n0 -> 0 phi=1\n0 -> 0\n"
    with pytest.raises(SystemFormatError):
        parse_system(doc)


@pytest.mark.parametrize(
    "doc",
    [
        "[edges]\n0 -> 0\n",  # no vertex section
        "[vertices]\n0\n[edges]\n0 => 0\n",
        "[vertices]\n0\n[bogus]\n",
        "[vertices]\n0\n[edges]\n0 -> 0 phi=x\n",
        "stray line\n",
    ],
)
def test_malformed(doc):
    with pytest.raises(SystemFormatError):
        parse_system(doc)


def test_round_trip_examples():
    for doc in (FULL2, GOLDEN):
        G, phi = parse_system(doc)
        G2, phi2 = parse_system(emit_system(G, phi))
        assert G2.edges == G.edges and G2.vertex_names == G.vertex_names
        assert np.array_equal(phi2.values, phi.values)


@st.composite
def systems(draw):
    n = draw(st.integers(1, 5))
    m = draw(st.integers(1, 3))
    n_edges = draw(st.integers(1, 8))
    edges = tuple(
        (draw(st.integers(0, n - 1)), draw(st.integers(0, n - 1)), draw(st.sampled_from("012")))
        for _ in range(n_edges)
    )
    vals = draw(
        st.lists(
            st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), min_size=m, max_size=m),
            min_size=n_edges,
            max_size=n_edges,
        )
    )
    names = tuple(f"v{i}" for i in range(n))
    return TransitionGraph(n, edges, names), CylinderPotential(np.array(vals))


@settings(max_examples=60, deadline=None)
@given(systems())
def test_round_trip_is_bit_identical(system):
    G, phi = system
    G2, phi2 = parse_system(emit_system(G, phi))
    assert G2.edges == G.edges and G2.vertex_names == G.vertex_names
    assert phi2.values.tobytes() == phi.values.tobytes()
