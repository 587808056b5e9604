"""Command-line frontend.

Exit status is 0 on success, 1 when the input or flags are invalid, and 2
when a computation fails.  Failures print one JSON object on standard
error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import gallery
from .graph import (
    CylinderPotential,
    full_shift,
    higher_block_recode,
    label_potential,
    word_to_orbit,
)
from .localized import localized_entropy
from .rotation import DEFAULT_SEED, classify_point, rotation_set
from .spectrum import (
    OrbitUnion,
    _csv,
    distance_potential,
    ergodic_spectrum_trace,
    spectrum_scan,
    subshift_from_forbidden,
)
from .sysfile import SystemFormatError, load_system


class UsageError(Exception):
    """Invalid flags or input; exit status 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ----------------------------------------------------------------------------
# Input assembly (validation errors exit 1)


def _load(args):
    try:
        graph, phi = load_system(args.system)
    except OSError as exc:
        raise UsageError(f"cannot read {args.system}: {exc.strerror}") from None
    kind = args.potential
    if kind == "file":
        if phi is None:
            raise UsageError("system file carries no phi values; pick --potential first-symbol or pair-product")
        return graph, phi
    try:
        if kind == "first-symbol":
            return graph, label_potential(graph)
        G, _ = higher_block_recode(graph, 2)
        vals = np.array([[float(graph.edges[a][2]), float(graph.edges[a][2]) * float(graph.edges[b][2])]
                         for a, b in G.edge_words])
        return G, CylinderPotential(vals)
    except (TypeError, ValueError):
        raise UsageError("edge labels must be numeric for symbol potentials") from None


def _parse_w(args, m: int) -> np.ndarray:
    if args.w is None:
        raise UsageError("--w is required")
    try:
        w = np.array([float(x) for x in args.w.split(",")])
    except ValueError:
        raise UsageError(f"--w must be comma-separated numbers, got {args.w!r}") from None
    if w.size != m:
        raise UsageError(f"--w has {w.size} coordinates, potential has {m}")
    return w


def _parse_aux(graph, spec: str, window: int | None):
    """``dist:orbits=0,01`` or ``dist:forbid=11``."""
    if not spec.startswith("dist:") or "=" not in spec:
        raise UsageError(f"--aux must look like dist:orbits=<words> or dist:forbid=<words>, got {spec!r}")
    key, _, words = spec[5:].partition("=")
    words = [w for w in words.split(",") if w]
    if not words:
        raise UsageError("--aux lists no words")
    try:
        if key == "orbits":
            target = OrbitUnion(tuple(word_to_orbit(graph, w) for w in words))
        elif key == "forbid":
            target = subshift_from_forbidden(graph, words, max(len(w) for w in words) - 1)
        else:
            raise UsageError(f"unknown --aux target {key!r}")
        k = window if window is not None else target.min_window()
        return distance_potential(graph, target, k)
    except UsageError:
        raise
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# ----------------------------------------------------------------------------
# Subcommands (compute errors exit 2)


def _fmt(x) -> str:
    return format(float(x) + 0.0, ".17g")


def _svg(P, marks) -> str:
    """Polygon of a planar rotation set plus point markers."""
    V = P.vertices
    if P.affine_dim == 2:
        c = V.mean(axis=0)
        V = V[np.argsort(np.arctan2(V[:, 1] - c[1], V[:, 0] - c[0]), kind="stable")]
    lo, hi = V.min(axis=0), V.max(axis=0)
    span = np.where(hi - lo > 0, hi - lo, 1.0)

    def xy(p):
        q = 20 + 360 * (np.asarray(p) - lo) / span
        return f"{q[0]:.6f},{400 - q[1]:.6f}"

    parts = [
        '<svg xmlns="http://www.w3.org/2000/svg" width="400" height="400" viewBox="0 0 400 400">',
        f'<polygon points="{" ".join(xy(p) for p in V)}" fill="#dde6f0" stroke="#234" stroke-width="1.5"/>',
    ]
    for i, w in enumerate(marks):
        x, y = xy(w).split(",")
        parts.append(f'<circle cx="{x}" cy="{y}" r="4" fill="#b22"/>')
        parts.append(f'<text x="{float(x) + 6:.6f}" y="{float(y) - 6:.6f}" font-size="12">w{i}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_rotation_set(args):
    graph, phi = _load(args)
    marks = [_parse_w(args, phi.dim)] if args.w else []
    P = rotation_set(graph, phi)
    m = phi.dim
    header = ["kind"] + [f"x{i + 1}" for i in range(m)] + ["offset", "classification"]
    rows = [["vertex", *map(_fmt, v), "", ""] for v in P.vertices]
    rows += [["halfspace", *map(_fmt, n), _fmt(c), ""] for n, c in P.halfspaces]
    rows += [["point", *map(_fmt, w), "", classify_point(P, w).value] for w in marks]
    text = ",".join(header) + "\n" + "".join(",".join(r) + "\n" for r in rows)
    if args.svg:
        if m != 2:
            raise UsageError("--svg needs a 2-dimensional potential")
        Path(args.svg).write_text(_svg(P, marks))
    return text


def cmd_localized_entropy(args):
    graph, phi = _load(args)
    P = rotation_set(graph, phi)
    if args.w is not None:
        targets = [_parse_w(args, phi.dim)]
    else:
        if phi.dim != 1:
            raise UsageError("--grid needs a 1-dimensional potential; give --w instead")
        lo, hi = P.vertices.min(), P.vertices.max()
        n = args.grid
        targets = [np.array([lo + (hi - lo) * i / (n + 1)]) for i in range(1, n + 1)]
    rows = []
    for w in targets:
        r = localized_entropy(graph, phi, w, polytope=P, tol=args.tol)
        rows.append((*w, r.H, r.v_norm, int(r.boundary), r.residual))
    header = [f"w{i + 1}" for i in range(phi.dim)] + ["H", "v_norm", "boundary_flag", "residual"]
    return _csv(header, rows)


def _scan_inputs(args):
    graph, phi = _load(args)
    w = _parse_w(args, phi.dim)
    if args.aux is None:
        raise UsageError("--aux is required")
    dist = _parse_aux(graph, args.aux, args.window)
    return dist.graph, dist.lift(phi), w, dist.potential


def cmd_spectrum_scan(args):
    G, phi, w, aux = _scan_inputs(args)
    return spectrum_scan(G, phi, w, aux, args.grid).to_csv()


def cmd_ergodic_trace(args):
    G, phi, w, aux = _scan_inputs(args)
    return ergodic_spectrum_trace(G, phi, w, aux, args.grid).to_csv()


GALLERY_IDS = (
    "singleton-d2-0",
    "singleton-d2-01",
    "singleton-d3-012",
    "interval-golden",
    "interval-d3-full2",
    "surgery",
    "extend",
    "figure1",
)


def gallery_claims(example_id: str, seed: int = DEFAULT_SEED, max_period: int = 2000):
    if example_id.startswith("singleton-"):
        _, d, word = example_id.split("-")
        return list(gallery.boundary_example_singleton(int(d[1:]), word).claims)
    if example_id == "interval-golden":
        Y = subshift_from_forbidden(full_shift(2), ["11"], 1)
        return list(gallery.boundary_example_full_interval(2, Y).claims)
    if example_id == "interval-d3-full2":
        Y = subshift_from_forbidden(full_shift(3), ["2"], 0)
        return list(gallery.boundary_example_full_interval(3, Y).claims)
    if example_id == "surgery":
        return gallery.surgery_claims(seed, max_period)
    if example_id == "extend":
        return list(gallery.extension_worked_example("pair", min(max_period, 6)).claims)
    claims, _ = gallery.figure1_claims(gallery.Figure1Spec(), range(1, 7), 0.4, 0.5, 0.05)
    return list(claims)


def cmd_gallery(args):
    if args.example not in GALLERY_IDS:
        raise UsageError(f"unknown gallery example {args.example!r}; choose from {', '.join(GALLERY_IDS)}")
    claims = gallery_claims(args.example, args.seed, args.max_period)
    text = gallery.claims_csv(claims)
    failed = [c for c in claims if not c.passed]
    if failed:
        raise ClaimFailure(text, failed)
    return text


class ClaimFailure(RuntimeError):
    def __init__(self, text, failed):
        super().__init__(f"{len(failed)} claim(s) failed: " + "; ".join(f"{c.example_id}: {c.claim}" for c in failed))
        self.text = text


def cmd_figure1(args):
    try:
        spec = gallery.Figure1Spec(args.stream1, args.stream2, args.j1, args.j2, args.n, args.d)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _, _, rows = gallery.build_figure1_system(spec)
    return _csv(
        ["n", "loops", "entropy", "words", "word_rate"],
        ((r.n, r.loops, r.entropy, r.words, r.word_rate) for r in rows),
    )


# ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rotspec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, system=True):
        if system:
            p.add_argument("system", help="system definition file")
            p.add_argument("--potential", choices=("file", "first-symbol", "pair-product"), default="file")
        p.add_argument("--out", help="write the report here instead of standard output")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument("--tol", type=float, default=1e-7)
        p.add_argument("--max-period", type=int, default=2000)

    p = sub.add_parser("rotation-set", help="vertices and halfspaces of the rotation set")
    common(p)
    p.add_argument("--w", help="point(s) to classify and mark")
    p.add_argument("--svg", help="write a planar drawing here (2-dimensional potentials)")
    p.set_defaults(func=cmd_rotation_set)

    p = sub.add_parser("localized-entropy", help="H(w) at one point or on a grid")
    common(p)
    p.add_argument("--w")
    p.add_argument("--grid", type=int, default=9)
    p.set_defaults(func=cmd_localized_entropy)

    for name, func, grid, text in (
        ("spectrum-scan", cmd_spectrum_scan, 64, "x -> H(w, x) over [0, b]"),
        ("ergodic-trace", cmd_ergodic_trace, 128, "entropies of equilibrium states in the class of w"),
    ):
        p = sub.add_parser(name, help=text)
        common(p)
        p.add_argument("--w")
        p.add_argument("--aux", help="dist:orbits=<words> or dist:forbid=<words>")
        p.add_argument("--window", type=int, help="half-width k of the distance window")
        p.add_argument("--grid", type=int, default=grid)
        p.set_defaults(func=func)

    p = sub.add_parser("gallery", help="run a constructed example and report its claims")
    p.add_argument("example", help=", ".join(GALLERY_IDS))
    common(p, system=False)
    p.set_defaults(func=cmd_gallery)

    p = sub.add_parser("figure1", help="entropy table of truncated loop families")
    common(p, system=False)
    p.add_argument("--stream1", default="(0)")
    p.add_argument("--stream2", default="(1)")
    p.add_argument("--j1", type=int, default=1)
    p.add_argument("--j2", type=int, default=1)
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--d", type=int, default=2)
    p.set_defaults(func=cmd_figure1)
    return parser


def _validate(args) -> None:
    for flag in ("grid", "max_period", "window"):
        val = getattr(args, flag, None)
        if val is not None and val < 1:
            raise UsageError(f"--{flag.replace('_', '-')} must be positive")
    if not args.tol > 0:
        raise UsageError("--tol must be positive")


def _fail(code: int, exc: BaseException) -> int:
    print(json.dumps({"error": type(exc).__name__, "exit": code, "message": str(exc)}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        _validate(args)
    except UsageError as exc:
        return _fail(1, exc)
    try:
        text = args.func(args)
    except UsageError as exc:
        return _fail(1, exc)
    except ClaimFailure as exc:
        _emit(args, exc.text)
        return _fail(2, exc)
    except SystemFormatError as exc:
        return _fail(1, exc)
    except Exception as exc:  # any other module failure is a numerical failure
        return _fail(2, exc)
    _emit(args, text)
    return 0


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    sys.exit(main())
