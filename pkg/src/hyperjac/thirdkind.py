"""Abelian integrals of the third kind from theta quotients.

For poles ``R`` (residue +1) and ``Q`` (residue -1) and an odd integer
characteristic ``c``::

    eta(P) = log theta[c](u(P) - u_R) - log theta[c](u(P) - u_Q) + const

is the integral of the normalized differential of the third kind, provided
the lifts of ``u_R, u_Q`` to ``C^g`` are chosen so that its a-periods vanish.
Only increments along explicit paths are computed; the branch of the log is
followed by refining the path until every step turns the quotient by less
than a quarter turn.

The oracle integrates an explicit differential with the same poles and
residues along the same path, corrected by holomorphic differentials so its
a-periods vanish.  Both use the same realization of the a-cycles (offset
loops around the cuts, see :func:`a_loops`).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ajmap import aj_raw, du_integrand
from .curvegeom import (
    Curve,
    CurvePoint,
    PathSpec,
    _segment_distance,
    check_on_curve,
    continue_segment,
)
from .errors import (
    CoincidentPoints,
    LogBranchLost,
    NoUsableOddCharacteristic,
    PathConstructionFailed,
    PathThroughPole,
)
from .jacobian import theta_scale
from .paths import (
    PATH_TOL,
    LineLeg,
    LocalLeg,
    integrate_leg,
    pathspec_legs,
    polygon,
    stadium,
)
from .periods import PeriodData, segment_integral
from .theta import ThetaChar, all_half_characteristics, char_parity, theta_char_parts

MAX_DEPTH = 30


@dataclass(frozen=True, eq=False)
class ThirdKindSpec:
    R: CurvePoint
    Q: CurvePoint
    odd_char: ThetaChar
    uR: np.ndarray  # lift calibrated so that the a-periods of eta vanish
    uQ: np.ndarray
    loops: tuple  # a-cycle realizations used for the calibration
    convention: str = "half"


def pick_odd_char(g: int, pi, tol: float = 1e-9, grad_floor: float = 1e-6, convention: str = "half") -> ThetaChar:
    """First odd binary characteristic, in ``(eps, eps')`` lexicographic order, with a usable gradient at 0."""
    scale = theta_scale(pi)
    zero = np.zeros(g, dtype=complex)
    for c in all_half_characteristics(g):
        if char_parity(c) != "odd":
            continue
        val, grad, _ = theta_char_parts(c, zero, pi, want_grad=True, convention=convention)
        if abs(val) < tol * scale and np.linalg.norm(grad) > grad_floor * scale:
            return c
    raise NoUsableOddCharacteristic("every odd characteristic has a degenerate gradient at 0")


# -- loops --------------------------------------------------------------------


def _loop_offset(curve: Curve, a: complex, b: complex, avoid) -> float:
    """Offset of the loop around ``[a, b]`` keeping every edge clear of branch points and poles.

    Poles near the segment end up inside the loop, which is harmless as long
    as the same loops are used everywhere.
    """
    sep = curve.min_separation
    margin = 2.0 * curve.clearance
    points = list(curve.branch_points) + list(avoid)
    for frac in (0.2, 0.3, 0.15, 0.25, 0.1, 0.35, 0.4):
        pts = stadium(a, b, frac * sep)
        if all(
            _segment_distance(p, q, z) > margin for p, q in zip(pts[:-1], pts[1:]) for z in points
        ):
            return frac * sep
    raise PathConstructionFailed("no loop offset clears the branch points and poles")


def chain_loop(curve: Curve, periods: PeriodData, i: int, avoid=()) -> PathSpec:
    """Closed polygon around chain segment ``i`` (0-based) realizing the loop ``gamma_i``.

    The polygon runs at an offset from the segment that keeps the points in
    ``avoid`` (pole x-coordinates) away from it; a pole on the segment
    itself ends up inside.  Sheet and direction are fixed by matching the
    integral of ``du`` against the collapsed period of ``gamma_i``.
    """
    bp = curve.branch_points
    a, b = bp[i], bp[i + 1]
    pts = stadium(a, b, _loop_offset(curve, a, b, avoid))
    start = CurvePoint(pts[0], complex(curve.w_plus(pts[0])))
    path = PathSpec(pts, start)
    legs, _ = pathspec_legs(curve, path)
    got = sum(integrate_leg(curve, leg, du_integrand(curve, periods)) for leg in legs)
    powers = np.arange(curve.genus)
    want = -2.0 * segment_integral(curve, i, lambda x: periods.normalizer @ (x[None, :] ** powers[:, None]))
    if np.linalg.norm(got + want) < np.linalg.norm(got - want):
        path = PathSpec(pts, CurvePoint(start.x, -start.w))
    return path


def a_loops(curve: Curve, periods: PeriodData, avoid=()):
    return tuple(chain_loop(curve, periods, 2 * k, avoid) for k in range(curve.genus))


def b_loops(curve: Curve, periods: PeriodData, j: int, avoid=()):
    """Gap loops whose sum is homologous to ``b_j`` (1-based)."""
    return tuple(chain_loop(curve, periods, 2 * i - 1, avoid) for i in range(j, curve.genus + 1))


# -- theta quotient ------------------------------------------------------------


def _log_parts(spec: ThirdKindSpec, pi, u):
    vr, _, lr = theta_char_parts(spec.odd_char, u - spec.uR, pi, convention=spec.convention)
    vq, _, lq = theta_char_parts(spec.odd_char, u - spec.uQ, pi, convention=spec.convention)
    return vr / vq, lr - lq


def _check_poles(curve: Curve, spec: ThirdKindSpec, waypoints):
    for name, p in (("R", spec.R), ("Q", spec.Q)):
        for a, b in zip(waypoints[:-1], waypoints[1:]):
            if _segment_distance(a, b, p.x) < curve.clearance:
                raise PathThroughPole(f"path passes within {curve.clearance:g} of the pole {name}")


def eta_along(curve: Curve, periods: PeriodData, spec: ThirdKindSpec, path: PathSpec, tol: float = PATH_TOL) -> complex:
    """Increment of ``eta`` along ``path``.

    ``u(P)`` is carried from the path start by integrating ``du`` over each
    accepted step; a step is accepted when the quotient turns by less than
    a quarter turn, otherwise it is bisected.
    """
    return eta_walk(curve, periods, spec, path, tol)[0]


def eta_walk(curve: Curve, periods: PeriodData, spec: ThirdKindSpec, path: PathSpec, tol: float = PATH_TOL):
    """:func:`eta_along` with bookkeeping.

    Returns ``(increment, windings, steps)``: ``windings`` is the signed
    number of times the quotient crossed the branch cut of the principal
    logarithm, ``steps`` the number of accepted substeps.
    """
    _check_poles(curve, spec, path.waypoints)
    pi = periods.period_matrix
    legs, _ = pathspec_legs(curve, path)
    du = du_integrand(curve, periods)
    u = aj_raw(curve, periods, path.start_point)
    q, lg = _log_parts(spec, pi, u)
    q_start = q
    total = 0j
    steps = 0
    for leg in legs:
        ts = list(np.linspace(0.0, 1.0, 9))
        t0 = 0.0
        stack = [(t, 0) for t in reversed(ts[1:])]
        while stack:
            t1, depth = stack.pop()
            sub = _subleg(curve, leg, t0, t1)
            u1 = u + integrate_leg(curve, sub, du, tol)
            q1, lg1 = _log_parts(spec, pi, u1)
            turn = np.angle(q1 / q)
            if abs(turn) < np.pi / 2:
                total += (np.log(abs(q1)) + lg1 - np.log(abs(q)) - lg) + 1j * turn
                u, q, lg, t0 = u1, q1, lg1, t1
                steps += 1
            else:
                if depth >= MAX_DEPTH:
                    raise LogBranchLost("log branch not resolved at the refinement limit")
                stack.append((t1, depth + 1))
                stack.append((0.5 * (t0 + t1), depth + 1))
    windings = int(round((total.imag - np.angle(q) + np.angle(q_start)) / (2 * np.pi)))
    return complex(total), windings, steps


def _subleg(curve, leg, t0, t1):
    if isinstance(leg, LineLeg):
        a = leg.a + t0 * (leg.b - leg.a)
        b = leg.a + t1 * (leg.b - leg.a)
        w_a = leg.w_a if t0 == 0.0 else complex(continue_segment(curve, leg.a, leg.w_a, a))
        return LineLeg(a, b, w_a)
    ds = leg.sigma_b - leg.sigma_a
    return LocalLeg(leg.s, leg.sigma_a + t0 * ds, leg.sigma_a + t1 * ds)


def eta_on_samples(spec: ThirdKindSpec, pi, us) -> np.ndarray:
    """``eta`` increments from the first of a sequence of Jacobian points on the curve image.

    Intended for traced samples: no AJ integration is involved.  Raises
    :class:`LogBranchLost` when consecutive samples turn the quotient by a
    quarter turn or more, since samples cannot be refined after the fact.
    """
    q, lg = _log_parts(spec, pi, np.asarray(us[0], dtype=complex))
    out = [0j]
    total = 0j
    for u in us[1:]:
        q1, lg1 = _log_parts(spec, pi, np.asarray(u, dtype=complex))
        turn = np.angle(q1 / q)
        if abs(turn) >= np.pi / 2:
            raise LogBranchLost("samples too coarse to follow the log branch")
        total += (np.log(abs(q1)) + lg1 - np.log(abs(q)) - lg) + 1j * turn
        out.append(total)
        q, lg = q1, lg1
    return np.array(out)


def make_spec(
    curve: Curve,
    periods: PeriodData,
    R: CurvePoint,
    Q: CurvePoint,
    odd_char: ThetaChar | None = None,
    convention: str = "half",
) -> ThirdKindSpec:
    """Poles, characteristic and calibrated lifts.

    With arbitrary lifts the a-period of ``eta`` around loop ``k`` is
    ``2 pi i W_k`` for an integer ``W_k``; replacing ``u_R`` by ``u_R - Pi W``
    removes it.
    """
    check_on_curve(curve, R)
    check_on_curve(curve, Q)
    if abs(R.x - Q.x) <= 1e-12 * max(1.0, abs(R.x)) and abs(R.w - Q.w) <= 1e-12 * max(1.0, abs(R.w)):
        raise CoincidentPoints("the two poles coincide")
    pi = periods.period_matrix
    g = curve.genus
    if odd_char is None:
        odd_char = pick_odd_char(g, pi, convention=convention)
    uR = aj_raw(curve, periods, R)
    uQ = aj_raw(curve, periods, Q)
    loops = a_loops(curve, periods, avoid=(R.x, Q.x))
    spec = ThirdKindSpec(R, Q, odd_char, uR, uQ, loops, convention)
    w = np.array([eta_along(curve, periods, spec, lp).imag / (2 * np.pi) for lp in loops])
    n = np.round(w)
    return ThirdKindSpec(R, Q, odd_char, uR - pi @ n, uQ, loops, convention)


# -- oracle --------------------------------------------------------------------


def _raw_differential(R: CurvePoint, Q: CurvePoint):
    def fun(x, w):
        return 0.5 * ((1.0 + R.w / w) / (x - R.x) - (1.0 + Q.w / w) / (x - Q.x))

    return fun


def _integrate_path(curve, path, fun, tol):
    legs, _ = pathspec_legs(curve, path)
    return sum(integrate_leg(curve, leg, fun, tol) for leg in legs)


def oracle_coefficients(curve: Curve, periods: PeriodData, R: CurvePoint, Q: CurvePoint, loops, tol=PATH_TOL):
    """Coefficients ``A`` making ``psi - A . du`` free of a-periods over ``loops``."""
    fun = _raw_differential(R, Q)
    return np.array([_integrate_path(curve, lp, fun, tol) for lp in loops])


def oracle_third_kind(
    curve: Curve, periods: PeriodData, R: CurvePoint, Q: CurvePoint, path: PathSpec, loops=None, tol=PATH_TOL
) -> complex:
    """Quadrature of the normalized third-kind differential along ``path``.

    The raw differential is ``(1/2) [(w + w_R)/(x - x_R) - (w + w_Q)/(x -
    x_Q)] dx / w`` (residues +1 at ``R``, -1 at ``Q``); its a-periods over
    ``loops`` (default :func:`a_loops` avoiding the poles) are removed with
    the normalized holomorphic differentials, whose a-periods are the
    identity.
    """
    if loops is None:
        loops = a_loops(curve, periods, avoid=(R.x, Q.x))
    a = oracle_coefficients(curve, periods, R, Q, loops, tol)
    raw = _raw_differential(R, Q)
    du = du_integrand(curve, periods)

    def fun(x, w):
        return raw(x, w) - a @ du(x, w)

    return complex(_integrate_path(curve, path, fun, tol))


def oracle_cumulative(
    curve: Curve, periods: PeriodData, R: CurvePoint, Q: CurvePoint, path: PathSpec, loops=None, tol=PATH_TOL
) -> np.ndarray:
    """Oracle value from the path start to every waypoint of an x-polyline.

    ``path`` must avoid the local charts of the branch points, so each
    polyline segment is a single leg.
    """
    if loops is None:
        loops = a_loops(curve, periods, avoid=(R.x, Q.x))
    a = oracle_coefficients(curve, periods, R, Q, loops, tol)
    raw = _raw_differential(R, Q)
    du = du_integrand(curve, periods)

    def fun(x, w):
        return raw(x, w) - a @ du(x, w)

    _check_poles(curve, ThirdKindSpec(R, Q, None, None, None, loops), path.waypoints)
    out = [0j]
    w = path.start_point.w
    for x0, x1 in zip(path.waypoints[:-1], path.waypoints[1:]):
        out.append(out[-1] + integrate_leg(curve, LineLeg(x0, x1, w), fun, tol))
        w = complex(continue_segment(curve, x0, w, x1))
    return np.array(out)


def residue_loop(curve: Curve, p: CurvePoint, radius: float, n: int = 32) -> PathSpec:
    """Small counterclockwise polygon around ``x(p)`` starting on the sheet of ``p``.

    Around a branch point the polygon is run twice so that it closes on the
    curve.
    """
    pts = polygon(p.x, radius, n)
    if p.w == 0:
        pts = pts + pts[1:]
        w0 = complex(np.sqrt(curve.f(pts[0])))
    else:
        w0 = complex(continue_segment(curve, p.x, p.w, pts[0]))
    return PathSpec(pts, CurvePoint(pts[0], w0))
