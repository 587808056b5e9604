"""Rotation sets of edge-constant potentials.

For an edge-constant potential on an irreducible graph the rotation set is
the convex hull of the rotation vectors of simple cycles.  Its support
function in direction ``v`` is the maximum cycle mean of ``<v, phi>``, which
Karp's recurrence computes without enumerating cycles.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull

from . import lp
from .graph import (
    CYCLE_CAP,
    CapExceeded,
    CylinderPotential,
    TransitionGraph,
    simple_cycles,
)
from .thermo import ReducibleGraph

RANK_TOL = 1e-9
AUTO_CYCLE_CAP = 5_000
DEFAULT_SEED = 20240607


class PointClass(str, enum.Enum):
    INTERIOR = "interior"
    RELATIVE_INTERIOR = "relative-interior"
    BOUNDARY = "boundary"
    EXTERIOR = "exterior"


def _karp_table(graph: TransitionGraph, weights: np.ndarray):
    n = graph.n_vertices
    src, tgt = graph.sources, graph.targets
    D = np.full((n + 1, n), -np.inf)
    pred = np.full((n + 1, n), -1, dtype=int)
    D[0, 0] = 0.0
    for k in range(1, n + 1):
        cand = D[k - 1, src] + weights
        idx = np.flatnonzero(np.isfinite(cand))
        # per target keep the best candidate, lowest edge id on ties
        order = idx[np.lexsort((idx, -cand[idx], tgt[idx]))]
        first = np.r_[True, tgt[order][1:] != tgt[order][:-1]]
        win = order[first]
        D[k, tgt[win]] = cand[win]
        pred[k, tgt[win]] = win
    return D, pred


def max_mean_cycle(graph: TransitionGraph, weights) -> tuple[float, tuple]:
    """Maximum cycle mean and a cycle attaining it (Karp).

    Returns the mean and the cycle as a tuple of edge ids.
    """
    if not graph.irreducible:
        raise ReducibleGraph("support function needs an irreducible graph")
    weights = np.asarray(weights, dtype=float)
    n = graph.n_vertices
    D, pred = _karp_table(graph, weights)
    best, best_v = -np.inf, -1
    for v in range(n):
        if not np.isfinite(D[n, v]):
            continue
        ks = np.flatnonzero(np.isfinite(D[:n, v]))
        val = np.min((D[n, v] - D[ks, v]) / (n - ks))
        if val > best:
            best, best_v = val, v
    # walk back n steps from best_v; any cycle on that walk attains the mean
    walk = []
    v = best_v
    for k in range(n, 0, -1):
        e = pred[k, v]
        walk.append(e)
        v = graph.edges[e][0]
    walk.reverse()
    seen = {}
    for i, e in enumerate(walk):
        s = graph.edges[e][0]
        if s in seen:
            cyc = tuple(walk[seen[s] : i])
            break
        seen[s] = i
    else:
        cyc = tuple(walk[seen[graph.edges[walk[-1]][1]] :])
    mean = float(np.mean(weights[list(cyc)]))
    if abs(mean - best) > 1e-9 * max(1.0, abs(best)):
        raise RuntimeError("critical cycle extraction disagrees with Karp value")
    return mean, cyc


def support_function(graph: TransitionGraph, phi: CylinderPotential, v) -> float:
    """``max over invariant measures of <v, rv(mu)>`` via maximum cycle mean."""
    phi.check(graph)
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.shape != (phi.dim,):
        raise ValueError("direction dimension mismatch")
    return max_mean_cycle(graph, phi.values @ v)[0]


def support_point(graph: TransitionGraph, phi: CylinderPotential, v) -> np.ndarray:
    """Rotation vector of a cycle attaining the support value in direction ``v``."""
    _, cyc = max_mean_cycle(graph, phi.values @ np.asarray(v, dtype=float))
    return phi.values[list(cyc)].mean(axis=0)


@dataclass(frozen=True)
class RotationPolytope:
    """Convex polytope given by vertices, affine hull and supporting halfspaces.

    ``basis`` (m x r) spans the direction space of the affine hull through
    ``origin``.  Halfspaces ``(n, c)`` mean ``n @ x <= c`` and are expressed in
    ambient coordinates with ``n`` in the direction space.  ``facets_exact``
    is False when the halfspaces are sampled support directions only.
    """

    dim: int
    vertices: np.ndarray
    origin: np.ndarray
    basis: np.ndarray
    halfspaces: list = field(default_factory=list)
    facets_exact: bool = True
    seed: int | None = None

    @property
    def affine_dim(self) -> int:
        return self.basis.shape[1]

    @property
    def normal_basis(self) -> np.ndarray:
        """Orthonormal basis of the complement of the direction space."""
        if self.affine_dim == self.dim:
            return np.zeros((self.dim, 0))
        Q, _ = np.linalg.qr(np.hstack([self.basis, np.eye(self.dim)]))
        return Q[:, self.affine_dim : self.dim]

    def support(self, v) -> float:
        return float(np.max(self.vertices @ np.asarray(v, float)))


def _dedupe(points: np.ndarray, decimals: int = 12) -> np.ndarray:
    keys = {}
    for p in points:
        key = tuple(np.round(p, decimals) + 0.0)
        keys.setdefault(key, p)
    return np.array(sorted(keys.values(), key=tuple))


def affine_frame(points: np.ndarray, tol: float = RANK_TOL) -> tuple[np.ndarray, np.ndarray]:
    origin = points[0]
    diffs = points - origin
    if len(points) == 1 or np.all(np.abs(diffs) <= tol):
        return origin, np.zeros((points.shape[1], 0))
    _, s, Vt = np.linalg.svd(diffs, full_matrices=False)
    r = int(np.sum(s > tol))
    return origin, Vt[:r].T


def polytope_from_points(points, tol: float = RANK_TOL, seed: int = DEFAULT_SEED, n_directions: int = 256) -> RotationPolytope:
    """Convex hull of ``points`` with facets (exact for affine dimension <= 3)."""
    pts = _dedupe(np.atleast_2d(np.asarray(points, dtype=float)))
    m = pts.shape[1]
    origin, U = affine_frame(pts, tol)
    r = U.shape[1]
    halfspaces = []
    exact = True
    if r == 1:
        t = (pts - origin) @ U[:, 0]
        halfspaces = [(U[:, 0].copy(), float(origin @ U[:, 0] + t.max())),
                      (-U[:, 0], float(-(origin @ U[:, 0]) - t.min()))]
        keep = [int(np.argmin(t)), int(np.argmax(t))]
        pts = pts[sorted(set(keep))]
    elif 2 <= r <= 3:
        Y = (pts - origin) @ U
        hull = ConvexHull(Y)
        seen = []
        for eq in hull.equations:
            n_local, c_local = eq[:-1], -eq[-1]
            if any(np.allclose(n_local, s[0], atol=1e-10) and abs(c_local - s[1]) < 1e-10 for s in seen):
                continue
            seen.append((n_local, c_local))
            n_amb = U @ n_local
            halfspaces.append((n_amb, float(c_local + n_amb @ origin)))
        pts = pts[np.sort(hull.vertices)]
    elif r > 3:
        exact = False
        rng = np.random.default_rng(seed)
        for _ in range(n_directions):
            u = U @ rng.standard_normal(r)
            u /= np.linalg.norm(u)
            halfspaces.append((u, float(np.max(pts @ u))))
    return RotationPolytope(m, pts, origin, U, halfspaces, exact, seed if not exact else None)


def _oracle_vertices(graph: TransitionGraph, phi: CylinderPotential, tol: float) -> np.ndarray:
    """Vertices found by support-point queries only (no cycle enumeration)."""
    m = phi.dim
    pts = [support_point(graph, phi, np.eye(m)[0])]
    # affine hull: probe directions orthogonal to the current span
    U = np.zeros((m, 0))
    while U.shape[1] < m:
        comp = np.linalg.qr(np.hstack([U, np.eye(m)]))[0][:, U.shape[1] : m]
        grew = False
        for j in range(comp.shape[1]):
            u = comp[:, j]
            hi = support_point(graph, phi, u)
            lo = support_point(graph, phi, -u)
            if (hi - lo) @ u > tol:
                pts += [hi, lo]
                _, U = affine_frame(np.array(pts), tol)
                grew = True
                break
        if not grew:
            break
    r = U.shape[1]
    if r <= 1 or r > 3:
        if r > 3:
            rng = np.random.default_rng(DEFAULT_SEED)
            for _ in range(256):
                pts.append(support_point(graph, phi, U @ rng.standard_normal(r)))
        return np.array(pts)
    # refine facets until every facet normal's support value matches its offset
    for _ in range(10_000):
        P = polytope_from_points(pts, tol)
        new = []
        for n, c in P.halfspaces:
            p = support_point(graph, phi, n)
            if p @ n > c + 1e-10 * max(1.0, abs(c)):
                new.append(p)
        if not new:
            return P.vertices
        pts = list(P.vertices) + new
    raise RuntimeError("facet refinement did not terminate")


def rotation_set(
    graph: TransitionGraph,
    phi: CylinderPotential,
    method: str = "auto",
    cap: int = CYCLE_CAP,
    check: bool = True,
) -> RotationPolytope:
    """Exact rotation set of an edge-constant potential on an irreducible graph.

    ``method="cycles"`` takes the hull of simple-cycle rotation vectors;
    ``method="oracle"`` discovers vertices through support-point queries;
    ``"auto"`` uses cycles unless the enumeration grows too large.
    """
    if not graph.irreducible:
        raise ReducibleGraph("rotation set needs an irreducible graph")
    phi.check(graph)
    if method not in ("auto", "cycles", "oracle"):
        raise ValueError(f"unknown method {method!r}")
    cycles = None
    if method != "oracle":
        try:
            cycles = simple_cycles(graph, cap=min(cap, AUTO_CYCLE_CAP) if method == "auto" else cap)
        except CapExceeded:
            if method == "cycles":
                raise
    if cycles is not None:
        pts = np.array([phi.values[list(c)].mean(axis=0) for c in cycles])
    else:
        pts = _oracle_vertices(graph, phi, RANK_TOL)
    P = polytope_from_points(pts)
    if check and P.facets_exact:
        for n, c in P.halfspaces:
            h = support_function(graph, phi, n)
            if abs(h - c) > 1e-9 * max(1.0, abs(c)):
                raise RuntimeError(f"facet offset {c} disagrees with support value {h}")
    return P


def classify_point(P: RotationPolytope, w, tol: float = 1e-9) -> PointClass:
    """Classify ``w`` against ``P``: interior, relative interior, boundary or exterior."""
    w = np.atleast_1d(np.asarray(w, dtype=float))
    if w.shape != (P.dim,):
        raise ValueError("point dimension mismatch")
    d = w - P.origin
    off_hull = d - P.basis @ (P.basis.T @ d)
    if np.linalg.norm(off_hull) > tol:
        return PointClass.EXTERIOR
    full = PointClass.INTERIOR if P.affine_dim == P.dim else PointClass.RELATIVE_INTERIOR
    if P.affine_dim == 0:
        return full
    if P.facets_exact:
        slacks = np.array([c - n @ w for n, c in P.halfspaces])
        if np.any(slacks < -tol):
            return PointClass.EXTERIOR
        if np.any(slacks <= tol):
            return PointClass.BOUNDARY
        return full
    # vertex representation only: maximize the smallest barycentric weight t
    k = len(P.vertices)
    A = np.vstack([P.vertices.T, np.ones(k)])
    b = np.append(w, 1.0)
    try:
        lp.linprog_eq(np.zeros(k), A, b)
    except lp.Infeasible:
        return PointClass.EXTERIOR
    # variables: lambda (k), t, slack (k) with lambda_i - t - slack_i = 0
    A_eq = np.zeros((A.shape[0] + k, 2 * k + 1))
    A_eq[: A.shape[0], :k] = A
    A_eq[A.shape[0] :, :k] = np.eye(k)
    A_eq[A.shape[0] :, k] = -1.0
    A_eq[A.shape[0] :, k + 1 :] = -np.eye(k)
    c = np.zeros(2 * k + 1)
    c[k] = -1.0
    res = lp.linprog_eq(c, A_eq, np.append(b, np.zeros(k)))
    return full if res.x[k] > tol else PointClass.BOUNDARY


@dataclass(frozen=True)
class CaratheodoryDecomposition:
    coefficients: np.ndarray
    orbits: tuple
    rotation_vectors: np.ndarray

    def recombine(self) -> np.ndarray:
        return self.coefficients @ self.rotation_vectors


class DecompositionError(ValueError):
    """No positive convex combination of the given orbits reaches the target."""


def caratheodory_decompose(
    P: RotationPolytope,
    orbits,
    rotation_vectors,
    w,
    full_dimensional: bool = False,
    budget: int = 200_000,
) -> CaratheodoryDecomposition:
    """Write ``w`` as a positive convex combination of at most ``r + 1`` orbits.

    Index sets are searched in lexicographic order and the first one whose
    barycentric coordinates are all positive is returned, so the result is
    the lexicographically smallest qualifying orbit set.  With
    ``full_dimensional`` the set must span the affine hull of ``P`` (``w``
    then lies in the relative interior of the simplex of the chosen orbits).
    If the search budget runs out, the support of a Bland-rule basic
    feasible solution is returned instead.
    """
    orbits = list(orbits)
    R = np.atleast_2d(np.asarray(rotation_vectors, dtype=float))
    w = np.atleast_1d(np.asarray(w, dtype=float))
    if not orbits:
        raise DecompositionError("empty orbit list")
    if classify_point(P, w) is PointClass.EXTERIOR:
        raise DecompositionError("target lies outside the rotation set")
    r = P.affine_dim
    Y = (R - P.origin) @ P.basis
    y = (w - P.origin) @ P.basis
    off = R - P.origin - Y @ P.basis.T
    usable = [i for i in range(len(orbits)) if np.linalg.norm(off[i]) <= 1e-9]

    try:
        lp.linprog_eq(np.zeros(len(usable)), np.vstack([Y[usable].T, np.ones(len(usable))]), np.append(y, 1.0))
    except lp.Infeasible:
        raise DecompositionError("orbit rotation vectors do not reach the target; raise max_period") from None

    sizes = [r + 1] if full_dimensional else list(range(1, r + 2))
    tried = 0

    def solve(idx):
        M = np.vstack([Y[list(idx)].T, np.ones(len(idx))])
        rhs = np.append(y, 1.0)
        if np.linalg.matrix_rank(M, tol=1e-10) < len(idx):
            return None
        c, *_ = np.linalg.lstsq(M, rhs, rcond=None)
        if np.linalg.norm(M @ c - rhs) > 1e-10 or np.any(c <= 1e-12):
            return None
        return c

    def dfs(prefix, start):
        nonlocal tried
        if len(prefix) in sizes:
            tried += 1
            c = solve(prefix)
            if c is not None:
                return prefix, c
        if len(prefix) == max(sizes) or tried > budget:
            return None
        for j in range(start, len(usable)):
            found = dfs(prefix + [usable[j]], j + 1)
            if found:
                return found
            if tried > budget:
                return None
        return None

    found = dfs([], 0)
    if found is None:
        if full_dimensional and tried <= budget:
            raise DecompositionError("no affinely spanning orbit set surrounds the target")
        res = lp.linprog_eq(np.zeros(len(usable)), np.vstack([Y[usable].T, np.ones(len(usable))]), np.append(y, 1.0))
        idx = [usable[j] for j in np.flatnonzero(res.x > 0)]
        c = res.x[res.x > 0]
    else:
        idx, c = found
    c = np.asarray(c, dtype=float)
    c = c / c.sum()
    return CaratheodoryDecomposition(c, tuple(orbits[i] for i in idx), R[list(idx)])
