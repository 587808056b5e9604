import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from rotspec.lp import Infeasible, Unbounded, linprog_eq


def test_small_example():
    # max x + y subject to x + 2y + s = 4, x <= 3 -> x=3, y=0.5
    c = [-1, -1, 0, 0]
    A = [[1, 2, 1, 0], [1, 0, 0, 1]]
    r = linprog_eq(c, A, [4, 3])
    assert r.value == pytest.approx(-3.5)
    assert r.x[:2] == pytest.approx([3, 0.5])


def test_infeasible():
    with pytest.raises(Infeasible):
        linprog_eq([1, 1], [[1, 1]], [-1])


def test_unbounded():
    with pytest.raises(Unbounded):
        linprog_eq([-1, 0], [[1, -1]], [0])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_matches_scipy(seed):
    rng = np.random.default_rng(seed)
    m, n = rng.integers(1, 4), rng.integers(3, 7)
    A = rng.integers(-3, 4, size=(m, n)).astype(float)
    x0 = rng.uniform(0, 2, size=n)
    b = A @ x0  # feasible by construction
    c = rng.integers(-2, 3, size=n).astype(float)
    ref = linprog(c, A_eq=A, b_eq=b, bounds=[(0, None)] * n, method="highs")
    if ref.status == 3:
        with pytest.raises(Unbounded):
            linprog_eq(c, A, b)
        return
    r = linprog_eq(c, A, b)
    assert r.value == pytest.approx(ref.fun, abs=1e-8)
    assert np.allclose(A @ r.x, b, atol=1e-8) and (r.x >= -1e-12).all()
