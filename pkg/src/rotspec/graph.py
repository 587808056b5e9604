"""Finite presentations of shift spaces.

A :class:`TransitionGraph` is a directed multigraph whose bi-infinite edge
paths form an edge shift (a subshift of finite type).  Edges may carry a
label from a finite alphabet, in which case the label sequences of paths
form a sofic shift.

Two-sided and one-sided shifts share every invariant-measure quantity
computed here, so no distinction is made between them.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Mapping, Sequence

import networkx as nx
import numpy as np

CYCLE_CAP = 1_000_000
SUBSET_CAP = 100_000


class CapExceeded(RuntimeError):
    """A combinatorial enumeration exceeded its hard cap."""


@dataclass(frozen=True)
class TransitionGraph:
    """Directed multigraph presenting an edge shift.

    Parameters
    ----------
    n_vertices : int
    edges : tuple of (source, target, label)
        ``label`` is ``None`` for unlabeled edges.
    vertex_names : tuple of str, optional
    edge_words : tuple of tuples, optional
        For recoded graphs, the word of base-graph edges each edge stands for.
    """

    n_vertices: int
    edges: tuple
    vertex_names: tuple = ()
    edge_words: tuple | None = None
    name: str = ""
    alphabet: int | None = None

    def __post_init__(self):
        edges = tuple((int(s), int(t), lab) for s, t, lab in self.edges)
        object.__setattr__(self, "edges", edges)
        if not self.vertex_names:
            object.__setattr__(
                self, "vertex_names", tuple(str(i) for i in range(self.n_vertices))
            )
        if len(self.vertex_names) != self.n_vertices:
            raise ValueError("vertex_names length does not match n_vertices")
        for s, t, _ in edges:
            if not (0 <= s < self.n_vertices and 0 <= t < self.n_vertices):
                raise ValueError(f"dangling vertex in edge {s}->{t}")
        if self.edge_words is not None and len(self.edge_words) != len(edges):
            raise ValueError("edge_words length does not match edges")

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def sources(self) -> np.ndarray:
        out = np.array([s for s, _, _ in self.edges], dtype=int)
        out.setflags(write=False)
        return out

    @cached_property
    def targets(self) -> np.ndarray:
        out = np.array([t for _, t, _ in self.edges], dtype=int)
        out.setflags(write=False)
        return out

    @cached_property
    def _out_index(self) -> tuple:
        out: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for i, (s, _, _) in enumerate(self.edges):
            out[s].append(i)
        return tuple(tuple(o) for o in out)

    @property
    def labels(self) -> tuple:
        return tuple(lab for _, _, lab in self.edges)

    @property
    def is_labeled(self) -> bool:
        return self.n_edges > 0 and all(lab is not None for lab in self.labels)

    def adjacency(self, weights: np.ndarray | None = None) -> np.ndarray:
        """Vertex matrix summing ``weights`` (default 1) over parallel edges."""
        A = np.zeros((self.n_vertices, self.n_vertices))
        w = np.ones(self.n_edges) if weights is None else np.asarray(weights, float)
        np.add.at(A, (self.sources, self.targets), w)
        return A

    def out_edges(self, v: int) -> list[int]:
        return list(self._out_index[v])

    def components(self) -> list[list[int]]:
        """Strongly connected components (vertex lists) that carry a cycle."""
        G = nx.DiGraph()
        G.add_nodes_from(range(self.n_vertices))
        G.add_edges_from((s, t) for s, t, _ in self.edges)
        comps = []
        for comp in nx.strongly_connected_components(G):
            comp = sorted(comp)
            if len(comp) > 1 or G.has_edge(comp[0], comp[0]):
                comps.append(comp)
        return sorted(comps)

    @cached_property
    def irreducible(self) -> bool:
        comps = self.components()
        return (
            self.n_vertices > 0
            and len(comps) == 1
            and len(comps[0]) == self.n_vertices
        )

    def subgraph(self, edge_ids: Iterable[int]) -> tuple["TransitionGraph", list[int]]:
        """Graph on the vertices touched by ``edge_ids``.

        Returns the subgraph and the list mapping its edges to edge ids here.
        """
        edge_ids = sorted(set(int(e) for e in edge_ids))
        verts = sorted({v for e in edge_ids for v in self.edges[e][:2]})
        index = {v: i for i, v in enumerate(verts)}
        edges = [
            (index[self.edges[e][0]], index[self.edges[e][1]], self.edges[e][2])
            for e in edge_ids
        ]
        words = None
        if self.edge_words is not None:
            words = tuple(self.edge_words[e] for e in edge_ids)
        sub = TransitionGraph(
            len(verts),
            tuple(edges),
            tuple(self.vertex_names[v] for v in verts),
            words,
            alphabet=self.alphabet,
        )
        return sub, edge_ids

    def essential_edges(self) -> list[int]:
        """Edges lying on some bi-infinite path (stranded edges pruned)."""
        alive = set(range(self.n_edges))
        changed = True
        while changed:
            changed = False
            has_in = {self.edges[e][1] for e in alive}
            has_out = {self.edges[e][0] for e in alive}
            keep = {e for e in alive if self.edges[e][0] in has_in and self.edges[e][1] in has_out}
            if keep != alive:
                alive, changed = keep, True
        return sorted(alive)


def full_shift(d: int, name: str | None = None) -> TransitionGraph:
    """One vertex with ``d`` self-loops labeled ``0..d-1``."""
    return TransitionGraph(
        1, tuple((0, 0, str(a)) for a in range(d)), ("0",), name=name or f"full{d}", alphabet=d
    )


def golden_mean() -> TransitionGraph:
    """Vertices 0,1; edges 0->0 (0), 0->1 (1), 1->0 (0); forbids ``11``."""
    return TransitionGraph(
        2, ((0, 0, "0"), (0, 1, "1"), (1, 0, "0")), ("0", "1"), name="golden", alphabet=2
    )


def cycle_graph(n: int) -> TransitionGraph:
    return TransitionGraph(
        n, tuple((i, (i + 1) % n, str(i)) for i in range(n)), name=f"cycle{n}", alphabet=n
    )


# ----------------------------------------------------------------------------
# Cylinder potentials


@dataclass(frozen=True)
class CylinderPotential:
    """Edge-constant vector potential: ``values[e]`` is the value on edge ``e``."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        if vals.ndim != 2:
            raise ValueError("potential values must be (n_edges, m)")
        if not np.all(np.isfinite(vals)):
            raise ValueError("potential values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def check(self, graph: TransitionGraph) -> None:
        if self.values.shape[0] != graph.n_edges:
            raise ValueError(
                f"potential has {self.values.shape[0]} rows, graph has {graph.n_edges} edges"
            )

    def stack(self, other: "CylinderPotential") -> "CylinderPotential":
        return CylinderPotential(np.hstack([self.values, other.values]))

    def coordinate(self, k: int) -> "CylinderPotential":
        return CylinderPotential(self.values[:, [k]])

    def __eq__(self, other):
        return isinstance(other, CylinderPotential) and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash(self.values.tobytes())


def label_potential(graph: TransitionGraph) -> CylinderPotential:
    """The first-symbol potential: each edge's label read as a number."""
    return CylinderPotential(np.array([float(lab) for lab in graph.labels]))


# ----------------------------------------------------------------------------
# Higher-block recoding


def paths(graph: TransitionGraph, k: int) -> list[tuple[int, ...]]:
    """All edge paths of length ``k`` in lexicographic order of edge ids."""
    if k == 0:
        return [()]
    out_by_vertex = [graph.out_edges(v) for v in range(graph.n_vertices)]
    words = [(e,) for e in range(graph.n_edges)]
    for _ in range(k - 1):
        words = [w + (f,) for w in words for f in out_by_vertex[graph.edges[w[-1]][1]]]
    return words


def higher_block_recode(
    graph: TransitionGraph,
    k: int,
    raw_potential: Callable[[tuple], Sequence[float]] | Mapping | None = None,
    label_index: int = 0,
) -> tuple[TransitionGraph, CylinderPotential | None]:
    """Recode so that functions of ``k`` consecutive edges live on single edges.

    Vertices of the result are admissible ``(k-1)``-edge paths, edges are
    admissible ``k``-edge paths.  Each new edge carries the label of its
    ``label_index``-th base edge, so label sequences are preserved up to a
    shift.

    Parameters
    ----------
    raw_potential : callable or mapping, optional
        Vector value for each ``k``-edge word (tuple of base edge ids).
    """
    if k < 1:
        raise ValueError("window k must be >= 1")
    if not 0 <= label_index < k:
        raise ValueError("label_index outside window")
    if k == 1:
        new = graph
        words = [(e,) for e in range(graph.n_edges)]
        new = TransitionGraph(
            graph.n_vertices, graph.edges, graph.vertex_names, tuple(words),
            graph.name, graph.alphabet,
        )
    else:
        vwords = paths(graph, k - 1)
        vindex = {w: i for i, w in enumerate(vwords)}
        ewords = paths(graph, k)
        edges = tuple(
            (vindex[w[:-1]], vindex[w[1:]], graph.edges[w[label_index]][2]) for w in ewords
        )
        names = tuple(".".join(map(str, w)) for w in vwords)
        new = TransitionGraph(
            len(vwords), edges, names, tuple(ewords), f"{graph.name}[{k}]", graph.alphabet
        )
    if raw_potential is None:
        return new, None
    values = []
    for w in new.edge_words:
        try:
            val = raw_potential(w) if callable(raw_potential) else raw_potential[w]
        except KeyError:
            raise ValueError(f"raw potential missing word {w}") from None
        values.append(np.atleast_1d(np.asarray(val, dtype=float)))
    return new, CylinderPotential(np.vstack(values))


def lift_potential(recoded: TransitionGraph, phi: CylinderPotential, position: int) -> CylinderPotential:
    """Pull an edge potential on the base graph back to a recoded graph."""
    return CylinderPotential(phi.values[[w[position] for w in recoded.edge_words]])


# ----------------------------------------------------------------------------
# Entropy and word counts


def spectral_radius(A: np.ndarray) -> float:
    if A.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(A))))


def topological_entropy(graph: TransitionGraph) -> float:
    """Log of the Perron root of the adjacency matrix (nats).

    Reducible graphs take the maximum over strongly connected components.
    """
    if graph.n_vertices == 0 or graph.n_edges == 0:
        raise ValueError("empty graph")
    A = graph.adjacency()
    lam = 0.0
    for comp in graph.components():
        lam = max(lam, spectral_radius(A[np.ix_(comp, comp)]))
    if lam <= 0.0:
        raise ValueError("graph has no cycles; shift is empty")
    return max(0.0, math.log(lam))


def _label_transitions(graph: TransitionGraph, edge_ids: Sequence[int]):
    delta: dict[int, dict] = {}
    for e in edge_ids:
        s, t, lab = graph.edges[e]
        delta.setdefault(s, {}).setdefault(lab, set()).add(t)
    return delta


def determinize(graph: TransitionGraph, cap: int = SUBSET_CAP) -> TransitionGraph:
    """Subset construction from the full vertex set of the essential part.

    The result is a right-resolving labeled graph presenting the same sofic
    shift (after pruning to its essential part).
    """
    ess = graph.essential_edges()
    if not ess:
        raise ValueError("presentation has no bi-infinite paths")
    delta = _label_transitions(graph, ess)
    start = frozenset(v for e in ess for v in graph.edges[e][:2])
    alphabet = sorted({graph.edges[e][2] for e in ess}, key=str)
    index = {start: 0}
    order = [start]
    edges = []
    i = 0
    while i < len(order):
        S = order[i]
        for a in alphabet:
            T = frozenset(t for s in S for t in delta.get(s, {}).get(a, ()))
            if not T:
                continue
            if T not in index:
                if len(order) >= cap:
                    raise CapExceeded(f"subset construction exceeded {cap} states")
                index[T] = len(order)
                order.append(T)
            edges.append((i, index[T], a))
        i += 1
    names = tuple("{" + ",".join(map(str, sorted(S))) + "}" for S in order)
    det = TransitionGraph(len(order), tuple(edges), names, alphabet=graph.alphabet)
    sub, _ = det.subgraph(det.essential_edges())
    return TransitionGraph(
        sub.n_vertices, sub.edges, sub.vertex_names, name=graph.name, alphabet=graph.alphabet
    )


def count_words(graph: TransitionGraph, m: int) -> int:
    """Exact number of words of length ``m`` occurring in the shift.

    Unlabeled graphs count edge words; labeled graphs count label words
    (the sofic language), via the subset construction.
    """
    if m < 1:
        raise ValueError("word length m must be >= 1")
    ess = graph.essential_edges()
    if not ess:
        return 0
    if not graph.is_labeled:
        sub, _ = graph.subgraph(ess)
        A = sub.adjacency().astype(object)
        counts = [1] * sub.n_vertices
        for _ in range(m):
            counts = [sum(int(A[i, j]) * counts[j] for j in range(sub.n_vertices)) for i in range(sub.n_vertices)]
        return sum(counts)
    delta = _label_transitions(graph, ess)
    start = frozenset(v for e in ess for v in graph.edges[e][:2])
    layer = {start: 1}
    seen = {start}
    for _ in range(m):
        nxt: dict[frozenset, int] = {}
        for S, c in layer.items():
            labels = {a for s in S for a in delta.get(s, {})}
            for a in labels:
                T = frozenset(t for s in S for t in delta.get(s, {}).get(a, ()))
                nxt[T] = nxt.get(T, 0) + c
                seen.add(T)
        if len(seen) > SUBSET_CAP:
            raise CapExceeded("subset construction exceeded cap while counting words")
        layer = nxt
    return sum(layer.values())


# ----------------------------------------------------------------------------
# Periodic orbits


@dataclass(frozen=True, order=True)
class PeriodicOrbit:
    """Primitive closed edge walk stored in its least rotation."""

    cycle: tuple

    def __post_init__(self):
        cyc = tuple(int(e) for e in self.cycle)
        if not cyc:
            raise ValueError("empty cycle")
        rots = [cyc[i:] + cyc[:i] for i in range(len(cyc))]
        canon = min(rots)
        if sum(r == canon for r in rots) != 1:
            raise ValueError(f"cycle {cyc} is not primitive")
        object.__setattr__(self, "cycle", canon)

    @property
    def period(self) -> int:
        return len(self.cycle)

    def validate(self, graph: TransitionGraph) -> None:
        for a, b in zip(self.cycle, self.cycle[1:] + self.cycle[:1]):
            if graph.edges[a][1] != graph.edges[b][0]:
                raise ValueError(f"edges {a},{b} are not composable")

    def labels(self, graph: TransitionGraph) -> str:
        return "".join(str(graph.edges[e][2]) for e in self.cycle)

    def words(self, length: int) -> set[tuple]:
        """Distinct windows of ``length`` edges along the orbit."""
        p = self.period
        rep = self.cycle * (length // p + 2)
        return {rep[i : i + length] for i in range(p)}

    def rotation_vector(self, phi: CylinderPotential) -> np.ndarray:
        return phi.values[list(self.cycle)].mean(axis=0)


def enumerate_periodic_orbits(
    graph: TransitionGraph, max_period: int, cap: int = CYCLE_CAP
) -> list[PeriodicOrbit]:
    """All primitive periodic orbits of period ``<= max_period``.

    Orbits are generated as admissible Lyndon words over edge ids
    (Fredricksen-Kessler-Maiorana pruning), so each orbit appears once in its
    least rotation.  Sorted by period, then lexicographically.
    """
    if max_period < 1:
        raise ValueError("max_period must be >= 1")
    E = graph.n_edges
    succ = [[] for _ in range(E)]
    for e, (_, t, _) in enumerate(graph.edges):
        succ[e] = [f for f in graph.out_edges(t)]
    found: list[tuple] = []

    def extend(word: list[int], p: int) -> None:
        n = len(word)
        if p == n and graph.edges[word[-1]][1] == graph.edges[word[0]][0]:
            found.append(tuple(word))
            if len(found) > cap:
                raise CapExceeded(f"more than {cap} periodic orbits")
        if n == max_period:
            return
        lo = word[n - p]
        for f in succ[word[-1]]:
            if f < lo:
                continue
            word.append(f)
            extend(word, p if f == lo else n + 1)
            word.pop()

    for e in range(E):
        extend([e], 1)
    found.sort(key=lambda c: (len(c), c))
    return [PeriodicOrbit(c) for c in found]


def simple_cycles(graph: TransitionGraph, cap: int = CYCLE_CAP) -> list[tuple]:
    """Vertex-simple cycles as edge-id tuples (Johnson's algorithm).

    Parallel edges are expanded, so each edge choice yields its own cycle.
    """
    G = nx.DiGraph()
    G.add_nodes_from(range(graph.n_vertices))
    between: dict[tuple[int, int], list[int]] = {}
    for e, (s, t, _) in enumerate(graph.edges):
        between.setdefault((s, t), []).append(e)
        G.add_edge(s, t)
    out = []
    for vcycle in nx.simple_cycles(G):
        hops = [between[(a, b)] for a, b in zip(vcycle, vcycle[1:] + vcycle[:1])]
        for choice in itertools.product(*hops):
            out.append(tuple(choice))
            if len(out) > cap:
                raise CapExceeded(f"more than {cap} simple cycles")
    return sorted(out, key=lambda c: (len(c), c))


# ----------------------------------------------------------------------------
# Sofic closures of loop families


@dataclass(frozen=True)
class LoopFamily:
    """First-return loops (label strings) at a base vertex."""

    loops: tuple
    base: str = "v0"

    def __post_init__(self):
        loops = tuple(self.loops)
        if any(len(g) == 0 for g in loops):
            raise ValueError("loops must be non-empty")
        object.__setattr__(self, "loops", loops)


def flower_graph(family: LoopFamily) -> TransitionGraph:
    """Each loop becomes a petal through private vertices back to the base."""
    edges = []
    names = [family.base]
    for i, g in enumerate(family.loops):
        prev = 0
        for j, a in enumerate(g):
            if j == len(g) - 1:
                nxt = 0
            else:
                names.append(f"{i}.{j}")
                nxt = len(names) - 1
            edges.append((prev, nxt, a))
            prev = nxt
    return TransitionGraph(len(names), tuple(edges), tuple(names))


def sofic_closure(family: LoopFamily, alphabet: Sequence[str] | int | None = None) -> TransitionGraph:
    """Right-resolving presentation of the closure of all loop concatenations."""
    if not family.loops:
        raise ValueError("empty loop family")
    if alphabet is not None:
        allowed = {str(a) for a in (range(alphabet) if isinstance(alphabet, int) else alphabet)}
        bad = {a for g in family.loops for a in g} - allowed
        if bad:
            raise ValueError(f"loop labels outside alphabet: {sorted(bad)}")
    det = determinize(flower_graph(family))
    d = alphabet if isinstance(alphabet, int) else (len(alphabet) if alphabet else None)
    return TransitionGraph(det.n_vertices, det.edges, det.vertex_names, name="sofic", alphabet=d)


def word_to_orbit(graph: TransitionGraph, word: str) -> PeriodicOrbit:
    """Find a closed walk reading ``word`` (a label cycle); least edge ids win."""
    word = list(word)
    if not word:
        raise ValueError("empty orbit word")
    for v in range(graph.n_vertices):
        stack = [(v, [])]
        while stack:
            u, walk = stack.pop()
            if len(walk) == len(word):
                if u == v:
                    return PeriodicOrbit(tuple(walk))
                continue
            cands = [e for e in graph.out_edges(u) if str(graph.edges[e][2]) == word[len(walk)]]
            for e in reversed(cands):
                stack.append((graph.edges[e][1], walk + [e]))
    raise ValueError(f"no closed walk reads {''.join(word)!r}")
