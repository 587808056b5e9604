import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import pair_product, random_irreducible
from rotspec.graph import (
    CylinderPotential,
    enumerate_periodic_orbits,
    full_shift,
    golden_mean,
    label_potential,
    topological_entropy,
    word_to_orbit,
)
from rotspec.localized import ExteriorPoint, entropy_of_combination, localized_entropy
from rotspec.rotation import CaratheodoryDecomposition, caratheodory_decompose, rotation_set
from rotspec.thermo import measure_entropy, measure_rotation_vector, pressure

FULL2 = full_shift(2)
X0 = label_potential(FULL2)


def binary_entropy(p):
    return -p * math.log(p) - (1 - p) * math.log(1 - p)


def test_midpoint():
    r = localized_entropy(FULL2, X0, [0.5])
    assert r.H == pytest.approx(math.log(2), abs=1e-12)
    assert r.v_star == pytest.approx([0.0], abs=1e-9)
    assert not r.boundary


def test_three_quarters():
    r = localized_entropy(FULL2, X0, [0.75])
    assert r.H == pytest.approx(0.562335, abs=1e-6)
    assert r.v_star == pytest.approx([math.log(3)], abs=1e-6)
    assert r.certificate.kernel == pytest.approx([0.25, 0.75], abs=1e-7)


@pytest.mark.parametrize("w", [0.0, 1.0])
def test_endpoints_are_boundary(w):
    r = localized_entropy(FULL2, X0, [w])
    assert r.boundary and r.H <= 1e-6


def test_exterior_raises():
    with pytest.raises(ExteriorPoint):
        localized_entropy(FULL2, X0, [1.2])


def test_degenerate_rotation_set_runs_in_quotient():
    phi = CylinderPotential(np.hstack([X0.values, X0.values]))
    r = localized_entropy(FULL2, phi, [0.5, 0.5])
    assert r.H == pytest.approx(math.log(2), abs=1e-9)
    assert r.classification.value == "relative-interior"


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 0.99))
def test_binary_entropy_oracle(w):
    assert localized_entropy(FULL2, X0, [w]).H == pytest.approx(binary_entropy(w), abs=1e-6)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 0.45))
def test_golden_mean_oracle(w):
    # oracle: maximize the Markov entropy over the one-parameter family of
    # chains on the golden mean graph with edge frequency w on the 1-edge
    gm = golden_mean()
    # stationary mass of vertex 1 is w; from vertex 0 the 1-edge has probability w / (1 - w)
    p = w / (1 - w)
    h = (1 - w) * binary_entropy(p)
    assert localized_entropy(gm, label_potential(gm), [w]).H == pytest.approx(h, abs=1e-6)


def interior_points(P, rng, n):
    V = P.vertices
    for _ in range(n):
        c = rng.dirichlet(np.ones(len(V)))
        yield 0.9 * (c @ V) + 0.1 * V.mean(axis=0)


@pytest.mark.parametrize("system", ["pair", "random4"])
def test_duality_gap_and_certificate(system):
    graph, phi = pair_product() if system == "pair" else random_irreducible()
    P = rotation_set(graph, phi)
    rng = np.random.default_rng(5)
    for w in interior_points(P, rng, 8):
        r = localized_entropy(graph, phi, w, polytope=P)
        mu = r.certificate
        assert np.linalg.norm(measure_rotation_vector(mu, phi) - w) <= 1e-7
        assert abs(r.H - measure_entropy(mu)) <= 1e-8
        assert pressure(graph, phi, r.v_star).pressure - r.v_star @ w - r.H <= 1e-8
        assert 0 < r.H <= topological_entropy(graph) + 1e-12


@pytest.mark.parametrize("system", ["pair", "random4"])
def test_concavity(system):
    graph, phi = pair_product() if system == "pair" else random_irreducible()
    P = rotation_set(graph, phi)
    rng = np.random.default_rng(6)
    pts = list(interior_points(P, rng, 6))
    H = lambda w: localized_entropy(graph, phi, w, polytope=P).H
    for w1, w2 in zip(pts[::2], pts[1::2]):
        for t in (0.25, 0.5, 0.75):
            assert H(t * w1 + (1 - t) * w2) >= t * H(w1) + (1 - t) * H(w2) - 1e-6


def test_entropy_of_combination_examples():
    orbits = [word_to_orbit(FULL2, "0"), word_to_orbit(FULL2, "1")]
    dec = CaratheodoryDecomposition(np.array([0.5, 0.5]), tuple(orbits), np.array([[0.0], [1.0]]))
    assert entropy_of_combination(FULL2, dec) == 0.0
    orbits = enumerate_periodic_orbits(FULL2, 3)[:3]
    dec = CaratheodoryDecomposition(np.full(3, 1 / 3), tuple(orbits), np.array([o.rotation_vector(X0) for o in orbits]))
    assert entropy_of_combination(FULL2, dec) == 0.0


def test_entropy_of_combination_golden():
    gm = golden_mean()
    phi = label_potential(gm)
    orbits = enumerate_periodic_orbits(gm, 5)
    R = np.array([o.rotation_vector(phi) for o in orbits])
    dec = caratheodory_decompose(rotation_set(gm, phi), orbits, R, [0.3])
    assert entropy_of_combination(gm, dec) == 0.0
