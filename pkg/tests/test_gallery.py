import math

import numpy as np
import pytest

from rotspec import gallery
from rotspec.graph import LoopFamily, full_shift, sofic_closure, topological_entropy
from rotspec.rotation import PointClass, classify_point, rotation_set
from rotspec.spectrum import subshift_from_forbidden
from rotspec.thermo import bernoulli, measure_rotation_vector

LOG2 = math.log(2)
LOG_PHI = math.log((1 + math.sqrt(5)) / 2)


def claim(result, text):
    return next(c for c in result.claims if c.claim == text)


# ----------------------------------------------------------------------------
# Boundary lemmas


@pytest.mark.parametrize("d,word", [(2, "0"), (2, "01"), (3, "012")])
def test_singleton(d, word):
    r = gallery.boundary_example_singleton(d, word)
    assert r.passed
    assert r.details["spectrum"] == (0.0,) or list(r.details["spectrum"]) == [0.0]
    assert claim(r, "w lies on the boundary").measured == 1.0


def test_full_interval_golden():
    Y = subshift_from_forbidden(full_shift(2), ["11"], 1)
    r = gallery.boundary_example_full_interval(2, Y)
    assert r.passed
    assert abs(claim(r, "H(w) equals h_top(Y)").measured - LOG_PHI) <= 1e-6
    assert claim(r, "own spectrum max gap").measured <= 0.02


def test_full_interval_sub_full_shift():
    Y = subshift_from_forbidden(full_shift(3), ["2"], 0)
    r = gallery.boundary_example_full_interval(3, Y)
    assert r.passed
    assert abs(claim(r, "H(w) equals h_top(Y)").measured - LOG2) <= 1e-6


def test_full_interval_rejects_zero_entropy():
    Y = subshift_from_forbidden(full_shift(2), ["1"], 0)
    with pytest.raises(gallery.GalleryError):
        gallery.boundary_example_full_interval(2, Y)


def test_full_interval_rejects_non_transitive():
    # 0^inf and 1^inf with no way between them
    Y = subshift_from_forbidden(full_shift(2), ["01", "10"], 1)
    with pytest.raises(gallery.GalleryError):
        gallery.boundary_example_full_interval(2, Y)


def test_own_spectrum_values_cover_interval():
    Y = subshift_from_forbidden(full_shift(2), ["11"], 1)
    vals = np.sort(gallery.own_spectrum_values(Y, full_shift(2), 64))
    assert vals[0] == 0.0 and vals[-1] == pytest.approx(LOG_PHI, abs=1e-6)
    assert np.max(np.diff(vals)) <= 0.02


# ----------------------------------------------------------------------------
# Surgery


@pytest.fixture(scope="module")
def cases():
    return gallery.surgery_cases(7)


@pytest.mark.parametrize("name", ["vertex00", "no11", "no00", "fixed-points"])
@pytest.mark.parametrize("eps", [0.2, 0.05])
def test_surgery(cases, name, eps):
    G, phi, measures = cases
    mu = measures[name]
    mu.check()
    r = gallery.perturb_to_interior(G, phi, mu, eps)
    assert r.before is PointClass.BOUNDARY
    assert r.after is PointClass.INTERIOR
    assert r.sup_norm < eps
    # bumps are set, not accumulated: every window family is disjoint
    for i, a in enumerate(r.windows):
        for b in r.windows[i + 1 :]:
            assert not a & b
    assert np.all(np.linalg.norm(r.bumps, axis=1) <= r.sup_norm + 1e-15)


def test_surgery_psi_agrees_with_phi_off_windows(cases):
    G, phi, measures = cases
    r = gallery.perturb_to_interior(G, phi, measures["no11"], 0.2)
    rng = np.random.default_rng(0)
    covered = set().union(*r.windows)
    for _ in range(200):
        word = [int(rng.integers(G.n_edges))]
        while len(word) < r.window:
            word.append(int(rng.choice(G.out_edges(G.edges[word[-1]][1]))))
        if tuple(word) not in covered:
            assert np.array_equal(r.psi_value(word), phi.values[word[0]])


def test_surgery_materialized_check(cases):
    G, phi, measures = cases
    r = gallery.perturb_to_interior(G, phi, measures["vertex00"], 2.0)
    assert r.materialized is not None
    assert r.materialized[2] is PointClass.INTERIOR


def test_surgery_identity_for_interior_measure(cases):
    G, phi, _ = cases
    mu = gallery._two_state_chain(G, 0.5, 0.5)
    r = gallery.perturb_to_interior(G, phi, mu, 0.1)
    assert r.identity and r.sup_norm == 0.0
    assert r.before is PointClass.INTERIOR


def test_surgery_relative_interior_to_interior():
    F = full_shift(2)
    from rotspec.graph import CylinderPotential, label_potential

    x0 = label_potential(F).values
    phi = CylinderPotential(np.hstack([x0, x0]))
    mu = bernoulli(F, [0.5, 0.5])
    assert classify_point(rotation_set(F, phi), measure_rotation_vector(mu, phi)) is PointClass.RELATIVE_INTERIOR
    r = gallery.perturb_to_interior(F, phi, mu, 0.2)
    assert r.after is PointClass.INTERIOR


def test_surgery_empty_budget(cases):
    G, phi, measures = cases
    with pytest.raises(ValueError, match="empty perturbation budget"):
        gallery.perturb_to_interior(G, phi, measures["vertex00"], 0.0)


def test_surgery_cases_are_seeded():
    a = gallery.surgery_cases(3)[2]
    b = gallery.surgery_cases(3)[2]
    c = gallery.surgery_cases(4)[2]
    assert np.array_equal(a["no11"].kernel, b["no11"].kernel)
    assert not np.array_equal(a["no11"].kernel, c["no11"].kernel)


# ----------------------------------------------------------------------------
# Coordinate extension


def test_extension_pair():
    r = gallery.extension_worked_example("pair")
    assert r.after is PointClass.INTERIOR
    assert r.point == pytest.approx([0.5, 0.25])
    assert r.scan.H.min() == 0.0 and r.scan.H.max() >= LOG2 - 0.02
    assert all(c.passed for c in r.claims)


def test_extension_repeat_needs_surgery():
    r = gallery.extension_worked_example("repeat")
    assert r.before is PointClass.RELATIVE_INTERIOR
    assert r.surgery is not None
    assert r.after is PointClass.INTERIOR
    assert all(c.passed for c in r.claims)


def test_extension_constant():
    r = gallery.extension_worked_example("constant")
    assert r.before is PointClass.RELATIVE_INTERIOR and r.after is PointClass.RELATIVE_INTERIOR
    assert r.surgery is None
    assert all(c.passed for c in r.claims)


# ----------------------------------------------------------------------------
# Truncated loop families


def test_figure1_small_table():
    spec = gallery.Figure1Spec(n=1)
    families, closures, rows = gallery.build_figure1_system(spec)
    assert len(rows) == 1 and rows[0].loops == len(spec.loops(1))
    assert 0 < rows[0].entropy < LOG2
    assert rows[0].entropy == pytest.approx(topological_entropy(closures[1]))


def test_figure1_monotone_in_n():
    _, _, rows = gallery.build_figure1_system(gallery.Figure1Spec(n=6))
    ent = [r.entropy for r in rows]
    assert all(b >= a - 1e-12 for a, b in zip(ent, ent[1:]))


def test_figure1_decreasing_in_j():
    sweep = gallery.figure1_sweep(gallery.Figure1Spec(n=6), range(1, 7))
    sups = [s for _, s, _ in sweep]
    bounds = [b for _, _, b in sweep]
    assert all(b <= a + 1e-12 for a, b in zip(sups, sups[1:]))
    assert sups[-1] < sups[0]
    assert all(s <= b + 1e-9 for s, b in zip(sups, bounds))


def test_figure1_series_bound_oracle():
    # oracle: bisect the finite loop-length series of a deep truncation
    spec = gallery.Figure1Spec(j1=2, j2=2, n=6)
    lengths = [len(g) for g in spec.loops(300)]
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = (lo + hi) / 2
        lo, hi = (mid, hi) if sum(mid**L for L in lengths) < 1 else (lo, mid)
    bound = gallery.series_entropy_bound(spec)
    assert bound == pytest.approx(-math.log(lo), abs=1e-9)
    for n in range(1, 7):
        if not spec.loops(n):
            continue  # no return edge exists yet
        h = topological_entropy(sofic_closure(LoopFamily(tuple(spec.loops(n))), spec.d))
        assert h <= bound + 1e-12


def test_figure1_inequality():
    claims, sweep = gallery.figure1_claims(gallery.Figure1Spec(), range(1, 7), 0.4, 0.5, 0.05)
    assert all(c.passed for c in claims)


def test_figure1_errors():
    with pytest.raises(ValueError):
        gallery.Figure1Spec(n=0)
    with pytest.raises(ValueError):
        gallery.Figure1Spec(j1=0)
    with pytest.raises(ValueError):
        gallery.Figure1Spec(stream1="(2)", d=2)


def test_stream_parsing():
    assert gallery.stream_prefix("01(10)", 7) == "0110101"
    assert gallery.stream_prefix("(0)", 3) == "000"


def test_claims_csv():
    r = gallery.boundary_example_singleton(2, "0")
    text = gallery.claims_csv(r.claims)
    assert text.splitlines()[0] == "example_id,claim,measured,expected,tolerance,pass"
    assert len(text.splitlines()) == len(r.claims) + 1
