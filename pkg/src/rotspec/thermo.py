"""Pressure, equilibrium Markov measures and their entropy / rotation vectors.

For an edge-constant potential ``psi`` on an irreducible graph the pressure
is ``log lambda(B)`` with ``B[i, j] = sum over edges i->j of exp(psi(e))``,
and the unique equilibrium state is the Markov measure built from the left
and right Perron vectors of ``B``.  Entropies are in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import CylinderPotential, PeriodicOrbit, TransitionGraph, higher_block_recode

SHIFT = 1e-3
EIG_TOL = 1e-12
MAX_ITER = 100_000


class ReducibleGraph(ValueError):
    """Thermodynamic operations need a strongly connected graph."""


class ConvergenceError(RuntimeError):
    """An iterative solver did not reach its tolerance."""


@dataclass(frozen=True)
class MarkovMeasure:
    """Stationary Markov measure on the edge shift of ``graph``.

    ``kernel[e]`` is the probability of taking edge ``e`` from its source;
    ``stationary[v]`` is the mass of vertex ``v``.
    """

    graph: TransitionGraph
    kernel: np.ndarray
    stationary: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.kernel, dtype=float)
        p = np.asarray(self.stationary, dtype=float)
        if k.shape != (self.graph.n_edges,) or p.shape != (self.graph.n_vertices,):
            raise ValueError("kernel/stationary shapes do not match the graph")
        object.__setattr__(self, "kernel", k)
        object.__setattr__(self, "stationary", p)

    @property
    def edge_frequencies(self) -> np.ndarray:
        return self.stationary[self.graph.sources] * self.kernel

    def check(self, row_tol: float = 1e-12, stat_tol: float = 1e-10) -> None:
        g = self.graph
        rows = np.zeros(g.n_vertices)
        np.add.at(rows, g.sources, self.kernel)
        live = self.stationary > 0
        if np.any(self.kernel < 0) or np.any(np.abs(rows[live] - 1) > row_tol):
            raise ValueError("kernel rows must be probability vectors")
        if abs(self.stationary.sum() - 1) > stat_tol:
            raise ValueError("stationary vector must sum to 1")
        inflow = np.zeros(g.n_vertices)
        np.add.at(inflow, g.targets, self.edge_frequencies)
        if np.max(np.abs(inflow - self.stationary)) > stat_tol:
            raise ValueError("measure is not stationary")

    def word_probability(self, word) -> float:
        """Probability of the cylinder given by a word of edge ids."""
        word = list(word)
        if not word:
            return 1.0
        g = self.graph
        prob = self.stationary[g.edges[word[0]][0]]
        for a, b in zip(word, word[1:]):
            if g.edges[a][1] != g.edges[b][0]:
                return 0.0
        return float(prob * np.prod(self.kernel[word]))

    def support_edges(self) -> list[int]:
        return [int(e) for e in np.flatnonzero(self.edge_frequencies > 0)]


@dataclass(frozen=True)
class PressureReport:
    direction: np.ndarray
    pressure: float
    left: np.ndarray
    right: np.ndarray
    equilibrium: MarkovMeasure
    iterations: int
    residual: float


def _perron_vector(M: np.ndarray, tol: float, max_iter: int) -> tuple[float, np.ndarray, int, float]:
    """Perron root and nonnegative eigenvector of ``M``.

    A dense eigensolve supplies the starting vector; power iteration on the
    shifted matrix ``M + c * I`` then polishes it until the componentwise
    relative residual ``|M r - lam r| / (M r + lam r)`` is below ``tol``.
    The shift ``c = SHIFT * lam0`` (``lam0`` the dense estimate) makes
    periodic graphs primitive, moves the root by exactly ``c``, and stays
    small relative to the root however the entries of ``M`` are scaled.
    """
    n = M.shape[0]
    vals, vecs = np.linalg.eig(M)
    top = int(np.argmax(vals.real))
    r = np.abs(vecs[:, top].real)
    if not np.any(r > 0):
        r = np.ones(n)
    r /= r.sum()
    c = SHIFT * max(float(vals[top].real), np.finfo(float).tiny)
    resid = np.inf
    for it in range(max_iter + 1):
        Mr = M @ r
        lam = Mr.sum()
        scale = Mr + lam * r
        resid = float(np.max(np.abs(Mr - lam * r) / np.where(scale > 0, scale, 1.0)))
        if resid <= tol:
            return lam, r, it, resid
        y = Mr + c * r
        r = y / y.sum()
    raise ConvergenceError(f"power iteration stalled at residual {resid:.3e}")


def weighted_matrix(graph: TransitionGraph, weights: np.ndarray) -> np.ndarray:
    return graph.adjacency(weights)


def pressure(
    graph: TransitionGraph,
    phi: CylinderPotential,
    v,
    tol: float = EIG_TOL,
    max_iter: int = MAX_ITER,
) -> PressureReport:
    """Pressure of ``<v, phi>`` and its equilibrium state.

    Raises
    ------
    ReducibleGraph
        If ``graph`` is not strongly connected.
    ConvergenceError
        If power iteration fails to converge.
    """
    if not graph.irreducible:
        raise ReducibleGraph("pressure needs an irreducible graph")
    phi.check(graph)
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.shape != (phi.dim,):
        raise ValueError(f"direction has length {v.size}, potential has dimension {phi.dim}")
    psi = phi.values @ v
    top = psi.max()
    B = graph.adjacency(np.exp(psi - top))
    lam, r, it, resid = _perron_vector(B, tol, max_iter)
    _, l, _, _ = _perron_vector(B.T, tol, max_iter)
    l = l / (l @ r)

    src, tgt = graph.sources, graph.targets
    weights = np.exp(psi - top)
    with np.errstate(divide="ignore", invalid="ignore"):
        kernel = weights * r[tgt] / (lam * r[src])
    kernel = np.where(np.isfinite(kernel), kernel, 0.0)
    # renormalise rows against rounding; rows of massless vertices become uniform
    rows = np.zeros(graph.n_vertices)
    np.add.at(rows, src, kernel)
    degree = np.bincount(src, minlength=graph.n_vertices).astype(float)
    dead = rows[src] <= 0
    kernel = np.where(dead, 1.0 / degree[src], kernel / np.where(dead, 1.0, rows[src]))
    stationary = l * r
    stationary = stationary / stationary.sum()
    mu = MarkovMeasure(graph, kernel, stationary)
    return PressureReport(v, math.log(lam) + top, l, r, mu, it, resid)


def measure_entropy(mu: MarkovMeasure) -> float:
    """``-sum_e q_e log P_e`` where ``q`` are edge frequencies."""
    q = mu.edge_frequencies
    k = mu.kernel
    mask = (q > 0) & (k > 0)
    return max(0.0, float(-(q[mask] * np.log(k[mask])).sum()))


def measure_rotation_vector(mu: MarkovMeasure, phi: CylinderPotential) -> np.ndarray:
    if phi.values.shape[0] != mu.graph.n_edges:
        raise ValueError("potential and measure live on different graphs")
    return mu.edge_frequencies @ phi.values


def pressure_hessian(mu: MarkovMeasure, phi: CylinderPotential) -> np.ndarray:
    """Asymptotic covariance of ``phi`` under ``mu`` (Hessian of pressure).

    Uses the vertex fundamental matrix ``Z = (I - K + 1 pi^T)^-1`` so the
    cost is cubic in vertices rather than edges.
    """
    g = mu.graph
    q = mu.edge_frequencies
    F = phi.values - q @ phi.values
    V = g.n_vertices
    K = np.zeros((V, V))
    np.add.at(K, (g.sources, g.targets), mu.kernel)
    pi = mu.stationary
    Z = np.linalg.pinv(np.eye(V) - K + np.outer(np.ones(V), pi))
    # DF: mass-weighted F summed into target vertices; SF: expected F leaving each vertex
    DF = np.zeros((V, F.shape[1]))
    np.add.at(DF, g.targets, q[:, None] * F)
    SF = np.zeros((V, F.shape[1]))
    np.add.at(SF, g.sources, mu.kernel[:, None] * F)
    C1 = DF.T @ Z @ SF
    C0 = F.T @ (q[:, None] * F)
    H = C0 + C1 + C1.T
    return 0.5 * (H + H.T)


def orbit_measure(
    graph: TransitionGraph, orbit: PeriodicOrbit, window_cap: int = 12
) -> tuple[TransitionGraph, MarkovMeasure]:
    """Periodic-point measure of ``orbit`` as a deterministic Markov measure.

    If the orbit revisits a vertex, the graph is recoded until the orbit is
    vertex-simple; the returned graph is the one the measure lives on.
    """
    orbit.validate(graph)
    g, cyc = graph, list(orbit.cycle)
    k = 1
    while len({g.edges[e][0] for e in cyc}) < len(cyc):
        k += 1
        if k > window_cap:
            raise ValueError("orbit stays non-simple up to the window cap")
        g, _ = higher_block_recode(graph, k)
        index = {w: i for i, w in enumerate(g.edge_words)}
        rep = list(orbit.cycle) * (k + 1)
        cyc = [index[tuple(rep[i : i + k])] for i in range(orbit.period)]
    kernel = np.zeros(g.n_edges)
    stationary = np.zeros(g.n_vertices)
    visited = {g.edges[e][0] for e in cyc}
    for v in range(g.n_vertices):
        if v not in visited:
            out = g.out_edges(v)
            kernel[out] = 1.0 / len(out) if out else 0.0
    for e in cyc:
        kernel[e] = 1.0
        stationary[g.edges[e][0]] = 1.0 / len(cyc)
    return g, MarkovMeasure(g, kernel, stationary)


def lift_measure(mu: MarkovMeasure, recoded: TransitionGraph) -> MarkovMeasure:
    """Push a Markov measure on a base graph to a higher-block recoding of it."""
    base = mu.graph
    if recoded.edge_words is None:
        raise ValueError("recoded graph carries no edge words")
    k = len(recoded.edge_words[0])
    kernel = np.array([mu.kernel[w[-1]] for w in recoded.edge_words])
    stationary = np.zeros(recoded.n_vertices)
    for e, w in enumerate(recoded.edge_words):
        s = recoded.edges[e][0]
        prefix = w[:-1]
        stationary[s] = mu.word_probability(prefix) if prefix else mu.stationary[base.edges[w[0]][0]]
    if k == 1:
        stationary = mu.stationary.copy()
    return MarkovMeasure(recoded, kernel, stationary)


def bernoulli(graph: TransitionGraph, probs) -> MarkovMeasure:
    """Bernoulli measure on a one-vertex graph."""
    if graph.n_vertices != 1:
        raise ValueError("bernoulli measures live on one-vertex graphs")
    return MarkovMeasure(graph, np.asarray(probs, float), np.ones(1))
