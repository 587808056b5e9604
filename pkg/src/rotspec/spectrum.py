"""Entropy spectra of rotation classes.

An auxiliary potential measuring the distance to a target subshift ``X'``
splits the rotation class of ``w`` into fibers ``{mu : rv(mu) = w,
int phi_aux dmu = x}``.  Sweeping ``x`` over ``[0, b]`` and recording the
localized entropy of ``(w, x)`` traces out the entropy spectrum of the class.

Distances use ``d(x, y) = 2**-k`` with ``k`` the smallest ``|i|`` where the
sequences differ, evaluated on a centered window of ``2k + 1`` edges.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from . import lp
from .graph import (
    CylinderPotential,
    PeriodicOrbit,
    TransitionGraph,
    enumerate_periodic_orbits,
    higher_block_recode,
    lift_potential,
    paths,
)
from .localized import entropy_of_combination, localized_entropy
from .rotation import PointClass, caratheodory_decompose, classify_point, rotation_set
from .thermo import measure_entropy, measure_rotation_vector, pressure

DEFAULT_GRID = 64
DEFAULT_TRACE = 128


class WindowTooSmall(ValueError):
    """The window cannot separate the target set from its neighbours."""


class DegeneratePotential(ValueError):
    """The auxiliary potential vanishes on every measure of the class."""


class PreconditionError(ValueError):
    """The target rotation vector does not admit a spectrum scan."""


# ----------------------------------------------------------------------------
# Target subshifts


@dataclass(frozen=True)
class OrbitUnion:
    """Finite union of periodic orbits of the ambient graph."""

    orbits: tuple

    def __post_init__(self):
        orbits = tuple(o if isinstance(o, PeriodicOrbit) else PeriodicOrbit(o) for o in self.orbits)
        if not orbits:
            raise ValueError("empty orbit union")
        object.__setattr__(self, "orbits", orbits)

    @property
    def max_period(self) -> int:
        return max(o.period for o in self.orbits)

    def min_window(self) -> int:
        """Smallest ``k`` with ``2k + 1 >= 2p``."""
        return max(1, self.max_period)

    def language(self, length: int) -> set[tuple]:
        out: set[tuple] = set()
        for o in self.orbits:
            out |= o.words(length)
        return out


@dataclass(frozen=True)
class SubShift:
    """Subshift of the ambient edge shift given by allowed ``(memory + 1)``-blocks.

    Blocks that cannot be extended in both directions are trimmed, so the
    language is exactly the set of subwords of bi-infinite allowed paths.
    """

    blocks: frozenset
    memory: int

    def __post_init__(self):
        blocks = frozenset(tuple(int(e) for e in b) for b in self.blocks)
        if any(len(b) != self.memory + 1 for b in blocks):
            raise ValueError("every block must have length memory + 1")
        object.__setattr__(self, "blocks", self._essential(blocks))
        if not self.blocks:
            raise ValueError("sub-shift is empty")

    def _essential(self, blocks):
        alive = set(blocks)
        while True:
            heads = {b[1:] for b in alive}
            tails = {b[:-1] for b in alive}
            keep = {b for b in alive if b[:-1] in heads and b[1:] in tails}
            if keep == alive:
                return frozenset(alive)
            alive = keep

    def min_window(self) -> int:
        return max(1, self.memory)

    def presentation(self) -> TransitionGraph:
        """Edge graph of the sub-shift: vertices are ``memory``-blocks."""
        blocks = sorted(self.blocks)
        verts = sorted({b[:-1] for b in blocks} | {b[1:] for b in blocks})
        index = {v: i for i, v in enumerate(verts)}
        edges = tuple((index[b[:-1]], index[b[1:]], None) for b in blocks)
        return TransitionGraph(len(verts), edges, tuple(".".join(map(str, v)) or "*" for v in verts),
                               edge_words=tuple(blocks), name="subshift")

    def language(self, length: int) -> set[tuple]:
        n = self.memory + 1
        if length <= n:
            return {b[i : i + length] for b in self.blocks for i in range(n - length + 1)}
        words = {b for b in self.blocks}
        by_prefix: dict[tuple, list[tuple]] = {}
        for b in self.blocks:
            by_prefix.setdefault(b[:-1], []).append(b)
        for _ in range(length - n):
            words = {w + (b[-1],) for w in words for b in by_prefix.get(w[len(w) - n + 1 :], [])}
        return words


def subshift_from_forbidden(graph: TransitionGraph, forbidden, memory: int) -> SubShift:
    """Sub-shift of ``graph`` avoiding the given label words (length <= memory + 1)."""
    forbidden = [tuple(str(a) for a in f) for f in forbidden]
    blocks = []
    for word in paths(graph, memory + 1):
        labels = tuple(str(graph.edges[e][2]) for e in word)
        if not any(
            labels[i : i + len(f)] == f for f in forbidden for i in range(len(labels) - len(f) + 1)
        ):
            blocks.append(word)
    return SubShift(frozenset(blocks), memory)


# ----------------------------------------------------------------------------
# Distance potentials


@dataclass(frozen=True)
class DistancePotentialSpec:
    """Truncated distance to a target subshift on a ``2k + 1`` recoding.

    ``graph`` is the recoded graph and ``potential`` the one-dimensional
    edge potential; :meth:`extend` appends it to a base-graph potential.
    """

    target: OrbitUnion | SubShift
    k: int
    graph: TransitionGraph
    potential: CylinderPotential

    @property
    def values(self) -> np.ndarray:
        return self.potential.values[:, 0]

    def lift(self, phi: CylinderPotential) -> CylinderPotential:
        """Base-graph potential read at the window center."""
        return lift_potential(self.graph, phi, self.k)

    def extend(self, phi: CylinderPotential) -> CylinderPotential:
        return self.lift(phi).stack(self.potential)


def _truncated_distance(word: tuple, k: int, languages: list[set]) -> float:
    # languages[j] holds target words of length 2j - 1
    for j in range(1, k + 2):
        if word[k - j + 1 : k + j] not in languages[j]:
            return 2.0 ** -(j - 1)
    return 0.0


def distance_potential(graph: TransitionGraph, target, k: int) -> DistancePotentialSpec:
    """Distance to ``target`` on the window-``2k + 1`` recoding of ``graph``.

    Parameters
    ----------
    target : OrbitUnion, SubShift or sequence of PeriodicOrbit
    k : int
        Half-width of the window.  Must be at least ``target.min_window()``
        so that the zero set of the potential is exactly the target.

    Raises
    ------
    WindowTooSmall
        If ``k`` is below the zero-set threshold.
    """
    if not isinstance(target, (OrbitUnion, SubShift)):
        target = OrbitUnion(tuple(target))
    if k < 1:
        raise WindowTooSmall("window k must be a positive integer")
    if k < target.min_window():
        raise WindowTooSmall(
            f"k={k} below zero-set threshold {target.min_window()}: words outside the target would read 0"
        )
    if isinstance(target, OrbitUnion):
        for o in target.orbits:
            o.validate(graph)
    languages = [set()] + [target.language(2 * j - 1) for j in range(1, k + 2)]
    recoded, pot = higher_block_recode(
        graph, 2 * k + 1, lambda w: [_truncated_distance(w, k, languages)], label_index=k
    )
    spec = DistancePotentialSpec(target, k, recoded, pot)
    if isinstance(target, OrbitUnion):
        _check_zero_set(spec)
    return spec


def _check_zero_set(spec: DistancePotentialSpec) -> None:
    g = spec.graph
    zero = [e for e in range(g.n_edges) if spec.values[e] == 0.0]
    sub, ids = g.subgraph(zero)
    ess = sub.essential_edges()
    out = np.bincount([sub.edges[e][0] for e in ess], minlength=sub.n_vertices)
    expected = sum(o.period for o in spec.target.orbits)
    if np.any(out > 1) or len(ess) != expected:
        raise WindowTooSmall("zero set of the distance potential is larger than the target orbits")


# ----------------------------------------------------------------------------
# The interval I = [0, b]


def _frequency_constraints(graph: TransitionGraph, phi: CylinderPotential, w):
    E, V = graph.n_edges, graph.n_vertices
    flow = np.zeros((V, E))
    for e, (s, t, _) in enumerate(graph.edges):
        flow[s, e] += 1.0
        flow[t, e] -= 1.0
    A = np.vstack([flow, np.ones((1, E)), phi.values.T])
    b = np.concatenate([np.zeros(V), [1.0], np.asarray(w, dtype=float)])
    return A, b


def fiber_range(graph: TransitionGraph, phi: CylinderPotential, aux: CylinderPotential, w) -> tuple[float, float]:
    """``min`` and ``max`` of ``int aux`` over invariant measures with ``rv = w``.

    Solved over the edge-frequency polytope (flow conservation, unit mass,
    rotation constraints).
    """
    A, b = _frequency_constraints(graph, phi, np.atleast_1d(w))
    a = aux.values[:, 0]
    try:
        lo = lp.linprog_eq(a, A, b).value
        hi = -lp.linprog_eq(-a, A, b).value
    except lp.Infeasible:
        raise PreconditionError(f"w={np.atleast_1d(w).tolist()} lies outside the rotation set") from None
    return lo, hi


def interval_endpoint_b(graph: TransitionGraph, phi: CylinderPotential, aux: CylinderPotential, w) -> float:
    """Largest ``int aux dmu`` over the rotation class of ``w``.

    Raises
    ------
    DegeneratePotential
        If ``aux`` is identically zero or vanishes on the whole class.
    PreconditionError
        If ``w`` lies outside the rotation set.
    """
    if not np.any(aux.values):
        raise DegeneratePotential("degenerate auxiliary potential: identically zero")
    _, hi = fiber_range(graph, phi, aux, w)
    if hi <= 1e-12:
        raise DegeneratePotential("degenerate auxiliary potential: b = 0")
    return hi


# ----------------------------------------------------------------------------
# Scans


@dataclass(frozen=True)
class RangeReport:
    minimum: float
    maximum: float
    max_gap: float
    lipschitz: float
    concavity_violation: float


@dataclass(frozen=True)
class SpectrumScan:
    w: np.ndarray
    b: float
    x: np.ndarray
    H: np.ndarray
    v_norm: np.ndarray
    boundary: np.ndarray
    residual: np.ndarray
    x_max: float
    H_w: float
    report: RangeReport

    def to_csv(self) -> str:
        return _csv(
            ["x", "H", "v_norm", "boundary_flag", "residual"],
            zip(self.x, self.H, self.v_norm, self.boundary.astype(int), self.residual),
        )


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, int, np.integer)):
        return str(int(v))
    return format(float(v) + 0.0, ".17g")


def _csv(header, rows) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(header)
    out.writerows([_fmt(v) for v in row] for row in rows)
    return buf.getvalue()


def range_report(x, H) -> RangeReport:
    """Range of sampled values plus continuity and concavity diagnostics."""
    x = np.asarray(x, float)
    H = np.asarray(H, float)
    order = np.argsort(x, kind="stable")
    xs, hs = x[order], H[order]
    srt = np.sort(H)
    gap = float(np.max(np.diff(srt))) if len(srt) > 1 else 0.0
    dx = np.diff(xs)
    slopes = np.abs(np.diff(hs)) / np.where(dx > 0, dx, np.inf)
    # concavity: middle point must not sit below the chord of its neighbours
    viol = 0.0
    for i in range(1, len(xs) - 1):
        t = (xs[i] - xs[i - 1]) / (xs[i + 1] - xs[i - 1])
        chord = (1 - t) * hs[i - 1] + t * hs[i + 1]
        viol = max(viol, chord - hs[i])
    return RangeReport(float(srt[0]), float(srt[-1]), gap, float(slopes.max(initial=0.0)), float(viol))


def _prepare(graph, phi, aux, w):
    w = np.atleast_1d(np.asarray(w, dtype=float))
    P = rotation_set(graph, phi)
    cls = classify_point(P, w)
    if cls not in (PointClass.INTERIOR, PointClass.RELATIVE_INTERIOR):
        raise PreconditionError(f"w={w.tolist()} is {cls.value}; scans need a (relative) interior point")
    lo, b = fiber_range(graph, phi, aux, w)
    if not np.any(aux.values) or b <= 1e-12:
        raise DegeneratePotential("degenerate auxiliary potential: b = 0")
    if lo > 1e-12:
        raise PreconditionError(
            f"no measure on the target set has rotation vector w (fiber starts at {lo:.6g})"
        )
    base = localized_entropy(graph, phi, w, polytope=P)
    x_max = float(measure_rotation_vector(base.certificate, aux)[0])
    ext = phi.stack(aux)
    return w, b, base, x_max, ext, rotation_set(graph, ext)


def spectrum_scan(
    graph: TransitionGraph,
    phi: CylinderPotential,
    w,
    aux: CylinderPotential,
    n: int = DEFAULT_GRID,
) -> SpectrumScan:
    """Sample ``x -> H(w, x)`` on ``{0, b/n, ..., b}`` plus the maximizer ``x_max``.

    ``graph``, ``phi`` and ``aux`` must live on the same graph (use
    :meth:`DistancePotentialSpec.lift` for base-graph potentials).  ``H(w, 0)``
    is zero and is not computed numerically.
    """
    if n < 3:
        raise ValueError("grid size must be at least 3")
    w, b, base, x_max, ext, P_ext = _prepare(graph, phi, aux, w)
    xs = sorted(set([b * i / n for i in range(n + 1)] + [x_max]))
    rows = []
    warm = np.append(base.v_star, 0.0)
    for x in xs:
        if x == 0.0:
            rows.append((0.0, 0.0, np.inf, True, 0.0))
            continue
        r = localized_entropy(graph, ext, np.append(w, x), polytope=P_ext, v0=warm)
        if r.classification is PointClass.EXTERIOR:
            raise RuntimeError("grid point outside the extended rotation set; b is inconsistent")
        if not r.boundary:
            warm = r.v_star
        rows.append((x, r.H, r.v_norm, r.boundary, r.residual))
    arr = list(zip(*rows))
    x_arr, H_arr = np.array(arr[0]), np.array(arr[1])
    return SpectrumScan(
        w, b, x_arr, H_arr, np.array(arr[2]), np.array(arr[3], dtype=bool), np.array(arr[4]),
        x_max, base.H, range_report(x_arr, H_arr),
    )


@dataclass(frozen=True)
class TracePoint:
    s: float
    entropy: float
    rv_residual: float
    variational_residual: float
    boundary: bool


@dataclass(frozen=True)
class ErgodicTrace:
    w: np.ndarray
    b: float
    x_max: float
    H_w: float
    points: tuple = field(default_factory=tuple)

    @property
    def entropies(self) -> np.ndarray:
        return np.array([p.entropy for p in self.points])

    @property
    def covered(self) -> tuple[float, float]:
        e = self.entropies
        return float(e.min()), float(e.max())

    def max_gap(self, lower: float = 0.0) -> float:
        """Largest jump between sorted trace entropies above ``lower``.

        The jump from ``lower`` to the smallest value above it counts too.
        """
        e = np.sort(self.entropies)
        e = np.concatenate([[lower], e[e > lower]])
        return float(np.max(np.diff(e))) if len(e) > 1 else np.inf

    def to_csv(self) -> str:
        return _csv(
            ["s", "entropy", "rv_residual", "variational_residual", "boundary_flag"],
            ((p.s, p.entropy, p.rv_residual, p.variational_residual, int(p.boundary)) for p in self.points),
        )


def refine_coverage(pts: dict, f, n: int, key=lambda v: v) -> dict:
    """Add points until there are ``n``, each aimed at the widest gap of the sorted values.

    ``pts`` maps abscissae to values (``key`` extracts the number).  Among
    neighbouring abscissae whose values straddle the widest gap, the
    narrowest pair is split where linear interpolation predicts the middle
    of the gap (kept within the central 80% of the pair).  The sequence of
    added points is deterministic, so runs with larger ``n`` extend runs
    with smaller ``n``.  Stops early if no abscissa pair can be split.
    """
    while len(pts) < n:
        xs = sorted(pts)
        vals = np.array([key(pts[x]) for x in xs])
        srt = np.sort(vals)
        g = int(np.argmax(np.diff(srt)))
        lo, hi = srt[g], srt[g + 1]
        target = 0.5 * (lo + hi)
        best = None
        for i in range(len(xs) - 1):
            a, c = sorted((vals[i], vals[i + 1]))
            if a <= lo and c >= hi and (best is None or xs[i + 1] - xs[i] < xs[best + 1] - xs[best]):
                best = i
        if best is None:
            best = int(np.argmax(np.abs(np.diff(vals))))
        x0, x1, v0, v1 = xs[best], xs[best + 1], vals[best], vals[best + 1]
        t = 0.5 if v1 == v0 else (target - v0) / (v1 - v0)
        new = x0 + min(max(t, 0.1), 0.9) * (x1 - x0)
        if new in pts:
            # pair too close to split in floating point: fall back to the widest abscissa gap
            j = int(np.argmax(np.diff(xs)))
            new = 0.5 * (xs[j] + xs[j + 1])
            if new in pts:
                break
        pts[new] = f(new)
    return pts


def trace_grid(b: float, x_max: float, n_seed: int = 16) -> list[float]:
    """Seed grid over ``(0, b)``: uniform points, geometric clusters at both ends, ``x_max``."""
    pts = {b * i / (n_seed + 1) for i in range(1, n_seed + 1)}
    pts |= {b * 2.0**-j for j in range(5, 11)}
    pts |= {b * (1 - 2.0**-j) for j in range(5, 9)}
    if 0 < x_max < b:
        pts.add(x_max)
    return sorted(pts)


def ergodic_spectrum_trace(
    graph: TransitionGraph,
    phi: CylinderPotential,
    w,
    aux: CylinderPotential,
    n_points: int = DEFAULT_TRACE,
) -> ErgodicTrace:
    """Entropies of equilibrium states in the rotation class of ``w``.

    Each point ``s`` in ``(0, b)`` yields the equilibrium state of some
    ``<v, (phi, aux)>`` with rotation vector ``(w, s)``; these are ergodic.
    After the seed grid, points are added by :func:`refine_coverage`, so a
    trace with more points always contains the trace with fewer.
    """
    w, b, base, x_max, ext, P_ext = _prepare(graph, phi, aux, w)
    warm = np.append(base.v_star, 0.0)

    def evaluate(s, warm):
        r = localized_entropy(graph, ext, np.append(w, s), polytope=P_ext, v0=warm)
        mu = r.certificate
        h = measure_entropy(mu)
        rv = measure_rotation_vector(mu, ext)
        var = abs(pressure(graph, ext, r.v_star).pressure - h - r.v_star @ rv)
        return TracePoint(float(s), h, float(np.linalg.norm(rv - np.append(w, s))), float(var), r.boundary)

    pts = {s: evaluate(s, warm) for s in trace_grid(b, x_max)[:n_points]}
    refine_coverage(pts, lambda s: evaluate(s, warm), n_points, key=lambda p: p.entropy)
    ordered = tuple(pts[s] for s in sorted(pts))
    return ErgodicTrace(w, b, x_max, base.H, ordered)


def periodic_endpoint_entropy(graph, phi, w, max_period: int) -> float:
    """Entropy of a periodic combination realizing ``w`` (the ``x = 0`` end)."""
    orbits = enumerate_periodic_orbits(graph, max_period)
    R = np.array([o.rotation_vector(phi) for o in orbits])
    dec = caratheodory_decompose(rotation_set(graph, phi), orbits, R, w)
    return entropy_of_combination(graph, dec)
