"""Dense two-phase simplex with Bland's rule.

Problems here are tiny (tens to a few hundred columns), and Bland's
smallest-index pivoting makes the returned basis reproducible, which the
decomposition tie-breaks rely on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EPS = 1e-11


class Infeasible(ValueError):
    """The constraint set is empty."""


class Unbounded(ValueError):
    """The objective is unbounded on the constraint set."""


@dataclass
class LPResult:
    x: np.ndarray
    value: float
    basis: list[int]


def _pivot(T: np.ndarray, basis: list[int], row: int, col: int) -> None:
    T[row] /= T[row, col]
    col_vals = T[:, col].copy()
    col_vals[row] = 0.0
    T -= np.outer(col_vals, T[row])
    basis[row] = col


def _run(T: np.ndarray, basis: list[int], ncols: int, max_iter: int) -> None:
    """Minimize the objective stored in the last row of ``T``."""
    for _ in range(max_iter):
        cost = T[-1, :ncols]
        entering = np.flatnonzero(cost < -EPS)
        if entering.size == 0:
            return
        col = int(entering[0])
        column = T[:-1, col]
        pos = column > EPS
        if not pos.any():
            raise Unbounded("objective unbounded")
        ratios = np.full(column.shape, np.inf)
        ratios[pos] = T[:-1, -1][pos] / column[pos]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + EPS * max(1.0, abs(best)))
        row = int(min(ties, key=lambda r: basis[r]))
        _pivot(T, basis, row, col)
    raise RuntimeError("simplex iteration cap reached")


def linprog_eq(c, A_eq, b_eq, max_iter: int = 50_000) -> LPResult:
    """Minimize ``c @ x`` subject to ``A_eq @ x = b_eq`` and ``x >= 0``."""
    A = np.array(A_eq, dtype=float)
    b = np.array(b_eq, dtype=float)
    c = np.array(c, dtype=float)
    m, n = A.shape
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1

    # phase I: artificials n..n+m-1
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = b
    T[-1, :n] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = list(range(n, n + m))
    _run(T, basis, n + m, max_iter)
    if -T[-1, -1] > 1e-9 * max(1.0, np.abs(b).max(initial=0.0)):
        raise Infeasible("constraints are infeasible")

    # drive artificials out of the basis; drop redundant rows
    keep = []
    for r in range(m):
        if basis[r] >= n:
            cands = np.flatnonzero(np.abs(T[r, :n]) > 1e-9)
            if cands.size:
                _pivot(T, basis, r, int(cands[0]))
                keep.append(r)
        else:
            keep.append(r)
    T = np.vstack([T[keep][:, list(range(n)) + [n + m]], np.zeros((1, n + 1))])
    basis = [basis[r] for r in keep]

    # phase II
    T[-1, :n] = c
    for r, j in enumerate(basis):
        T[-1] -= c[j] * T[r]
    _run(T, basis, n, max_iter)
    x = np.zeros(n)
    for r, j in enumerate(basis):
        x[j] = T[r, -1]
    x[np.abs(x) < EPS] = 0.0
    return LPResult(x, float(c @ x), basis)
