"""Plain-text system definitions.

A document has three sections::

    [meta]
    alphabet=2
    name=fullshift2

    [vertices]
    0

    [edges]
    0 -> 0 label=0 phi=0
    0 -> 0 label=1 phi=1

Vertices are referenced by name.  ``phi`` is a comma-separated vector; every
edge must carry one of the same length, or none at all.  ``#`` starts a
comment.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

from .graph import CylinderPotential, TransitionGraph


class SystemFormatError(ValueError):
    """The document does not follow the system-definition grammar."""


_EDGE = re.compile(r"^(\S+)\s*->\s*(\S+)((?:\s+\w+=\S+)*)\s*$")


def parse_system(text: str) -> tuple[TransitionGraph, CylinderPotential | None]:
    section = None
    meta: dict[str, str] = {}
    vertices: list[str] = []
    raw_edges = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in ("meta", "vertices", "edges"):
                raise SystemFormatError(f"line {lineno}: unknown section [{section}]")
            continue
        if section == "meta":
            if "=" not in line:
                raise SystemFormatError(f"line {lineno}: expected key=value")
            k, v = line.split("=", 1)
            meta[k.strip()] = v.strip()
        elif section == "vertices":
            if line in vertices:
                raise SystemFormatError(f"line {lineno}: duplicate vertex {line!r}")
            vertices.append(line)
        elif section == "edges":
            m = _EDGE.match(line)
            if not m:
                raise SystemFormatError(f"line {lineno}: malformed edge {line!r}")
            attrs = dict(kv.split("=", 1) for kv in m.group(3).split())
            unknown = set(attrs) - {"label", "phi"}
            if unknown:
                raise SystemFormatError(f"line {lineno}: unknown edge attribute(s) {sorted(unknown)}")
            raw_edges.append((lineno, m.group(1), m.group(2), attrs))
        else:
            raise SystemFormatError(f"line {lineno}: content outside a section")

    if not vertices:
        raise SystemFormatError("no vertices")
    index = {v: i for i, v in enumerate(vertices)}
    edges = []
    phis = []
    for lineno, src, dst, attrs in raw_edges:
        for v in (src, dst):
            if v not in index:
                raise SystemFormatError(f"line {lineno}: dangling vertex {v!r}")
        edges.append((index[src], index[dst], attrs.get("label")))
        if "phi" in attrs:
            try:
                phis.append([float(x) for x in attrs["phi"].split(",")])
            except ValueError:
                raise SystemFormatError(f"line {lineno}: bad phi {attrs['phi']!r}") from None
        else:
            phis.append(None)
    if not edges:
        raise SystemFormatError("no edges")

    alphabet = None
    if "alphabet" in meta:
        try:
            alphabet = int(meta["alphabet"])
        except ValueError:
            raise SystemFormatError("alphabet must be an integer") from None
    graph = TransitionGraph(
        len(vertices), tuple(edges), tuple(vertices), name=meta.get("name", ""), alphabet=alphabet
    )

    if all(p is None for p in phis):
        return graph, None
    if any(p is None for p in phis):
        raise SystemFormatError("phi given on some edges but not all")
    lengths = {len(p) for p in phis}
    if len(lengths) != 1:
        raise SystemFormatError(f"potential vector length mismatch across edges: {sorted(lengths)}")
    return graph, CylinderPotential(np.array(phis))


def load_system(path: str | Path):
    return parse_system(Path(path).read_text())


def emit_system(graph: TransitionGraph, phi: CylinderPotential | None = None) -> str:
    lines = ["[meta]"]
    if graph.alphabet is not None:
        lines.append(f"alphabet={graph.alphabet}")
    if graph.name:
        lines.append(f"name={graph.name}")
    lines += ["", "[vertices]", *graph.vertex_names, "", "[edges]"]
    for e, (s, t, lab) in enumerate(graph.edges):
        parts = [f"{graph.vertex_names[s]} -> {graph.vertex_names[t]}"]
        if lab is not None:
            parts.append(f"label={lab}")
        if phi is not None:
            parts.append("phi=" + ",".join(repr(float(x)) for x in phi.values[e]))
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"
