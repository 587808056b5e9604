"""Localized entropy through the Legendre transform of the pressure.

For ``w`` in the relative interior of the rotation set,

    H(w) = inf over v of  P(<v, phi>) - <v, w>,

and the minimizer's equilibrium state is a certificate: its rotation vector
is ``w`` and its entropy is ``H(w)``.  For boundary ``w`` the infimum is only
approached as ``|v| -> infinity``; the optimizer then reports the best value
it reached and sets the boundary flag.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import CylinderPotential, TransitionGraph
from .rotation import (
    CaratheodoryDecomposition,
    PointClass,
    RotationPolytope,
    classify_point,
    rotation_set,
)
from .thermo import (
    MarkovMeasure,
    measure_entropy,
    measure_rotation_vector,
    orbit_measure,
    pressure,
    pressure_hessian,
)

GRAD_TOL = 1e-7
POLISH_TOL = 1e-11
DIVERGENCE_CAP = 1e3
MAX_ITER = 10_000
ARMIJO_C = 1e-4
MAX_STEP = 10.0


class ExteriorPoint(ValueError):
    """The target rotation vector lies outside the rotation set."""


class NumericalFailure(RuntimeError):
    """The optimizer hit its iteration cap without converging or diverging."""


@dataclass(frozen=True)
class LocalizedEntropyResult:
    w: np.ndarray
    H: float
    v_star: np.ndarray
    certificate: MarkovMeasure
    residual: float
    boundary: bool
    iterations: int
    classification: PointClass

    @property
    def v_norm(self) -> float:
        return float(np.linalg.norm(self.v_star))


def _objective(graph, phi, v, w):
    rep = pressure(graph, phi, v)
    rv = measure_rotation_vector(rep.equilibrium, phi)
    return rep.pressure - v @ w, rv, rep


def localized_entropy(
    graph: TransitionGraph,
    phi: CylinderPotential,
    w,
    polytope: RotationPolytope | None = None,
    v0=None,
    tol: float = GRAD_TOL,
    cap: float = DIVERGENCE_CAP,
    max_iter: int = MAX_ITER,
) -> LocalizedEntropyResult:
    """Maximal entropy among invariant measures with rotation vector ``w``.

    Damped Newton on the dual objective, with the analytic pressure Hessian
    and Armijo backtracking (gradient steps where Newton is not a descent
    direction).  Degenerate rotation sets are handled in the quotient: ``v``
    is restricted to the direction space of the affine hull.

    Raises
    ------
    ExteriorPoint
        If ``w`` is outside the rotation set.
    NumericalFailure
        If an interior target is not reached within ``max_iter`` iterations.
    """
    w = np.atleast_1d(np.asarray(w, dtype=float))
    P = polytope if polytope is not None else rotation_set(graph, phi)
    cls = classify_point(P, w)
    if cls is PointClass.EXTERIOR:
        raise ExteriorPoint(f"w={w.tolist()} lies outside the rotation set")
    boundary = cls is PointClass.BOUNDARY
    U = P.basis
    a = np.zeros(U.shape[1]) if v0 is None else U.T @ np.asarray(v0, dtype=float)

    f, rv, rep = _objective(graph, phi, U @ a, w)
    best = (f, a, rep, rv)
    stall = 0
    it = 0
    for it in range(1, max_iter + 1):
        g = U.T @ (rv - w)
        gnorm = float(np.linalg.norm(g))
        if not boundary and gnorm <= POLISH_TOL:
            break
        if boundary and (np.linalg.norm(U @ a) > cap or gnorm == 0.0 or stall >= 8):
            break
        if U.shape[1] == 0:
            break
        Hs = U.T @ pressure_hessian(rep.equilibrium, phi) @ U
        try:
            d = -np.linalg.solve(Hs, g)
            if not np.all(np.isfinite(d)) or d @ g >= 0:
                raise np.linalg.LinAlgError
        except np.linalg.LinAlgError:
            d = -g
        dn = np.linalg.norm(d)
        if dn > MAX_STEP:
            d *= MAX_STEP / dn
        t = 1.0
        slope = g @ d
        while True:
            a_new = a + t * d
            f_new, rv_new, rep_new = _objective(graph, phi, U @ a_new, w)
            if f_new <= f + ARMIJO_C * t * slope or t < 1e-12:
                break
            # near the optimum the decrease drowns in rounding; accept a step
            # that shrinks the gradient instead
            g_new = float(np.linalg.norm(U.T @ (rv_new - w)))
            if abs(f_new - f) <= 1e-12 * max(1.0, abs(f)) and g_new < 0.5 * gnorm:
                break
            t *= 0.5
        g_new = float(np.linalg.norm(U.T @ (rv_new - w)))
        if f_new >= f - 1e-15 * max(1.0, abs(f)) and g_new >= 0.5 * gnorm:
            stall += 1
            if not boundary and gnorm <= tol:
                # converged to the working tolerance; rounding blocks further polish
                break
        else:
            stall = 0
        a, f, rv, rep = a_new, f_new, rv_new, rep_new
        if f < best[0]:
            best = (f, a, rep, rv)
        if not boundary and stall >= 8 and gnorm > tol:
            raise NumericalFailure(f"optimizer stalled at gradient norm {gnorm:.3e}")
    else:
        if not boundary:
            raise NumericalFailure(f"no convergence in {max_iter} iterations")

    if boundary:
        f, a, rep, rv = best
    v = U @ a
    residual = float(np.linalg.norm(rv - w))
    if not boundary and residual > tol:
        raise NumericalFailure(f"gradient residual {residual:.3e} above tolerance")
    H = max(0.0, float(f))
    return LocalizedEntropyResult(w, H, v, rep.equilibrium, residual, boundary, it, cls)


def entropy_of_combination(graph: TransitionGraph, decomposition: CaratheodoryDecomposition) -> float:
    """Entropy of ``sum c_i * orbit_measure_i`` (entropy is affine on measures)."""
    total = 0.0
    for c, orbit in zip(decomposition.coefficients, decomposition.orbits):
        _, mu = orbit_measure(graph, orbit)
        total += c * measure_entropy(mu)
    return total
