"""Integration of differentials along paths on the curve.

A path is a list of legs.  ``LineLeg`` is a straight x-plane segment kept
away from branch points, with ``w`` continued exactly by
:func:`~hyperjac.curvegeom.continue_segment`.  ``LocalLeg`` runs near a
branch point ``x_s`` in the local uniformizer ``sigma``, ``x = x_s +
sigma**2``, ``w = sigma * sqrt_r(x)``; there ``dx / w = 2 dsigma /
sqrt_r(x)`` is analytic, so branch points can be path end points.

Differentials are passed as ``fun(x, w)`` returning the coefficient of
``dx`` with the nodes on the last axis.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curvegeom import (
    Curve,
    CurvePoint,
    PathSpec,
    _segment_distance,
    check_path_clearance,
    continue_segment,
)
from .errors import PathConstructionFailed
from .quadrature import legendre_adaptive

LOCAL_RADIUS = 0.4  # fraction of min separation
AVOID_RADIUS = 0.2
DETOUR_RADIUS = 0.25
PATH_TOL = 1e-13


@dataclass(frozen=True)
class LineLeg:
    a: complex
    b: complex
    w_a: complex


@dataclass(frozen=True)
class LocalLeg:
    s: int  # 0-based branch index
    sigma_a: complex
    sigma_b: complex


def local_sqrt_r(curve: Curve, s: int, x):
    """Analytic branch of ``sqrt(f(x) / (x - x_s))`` on the disk around ``x_s``."""
    bp = curve.branch_points
    xs = bp[s]
    others = np.delete(bp, s)
    out = np.full(np.shape(x), np.sqrt(np.prod(xs - others)), dtype=complex)
    for xj in others:
        out = out * np.sqrt((x - xj) / (xs - xj))
    return out


def local_radius(curve: Curve) -> float:
    return LOCAL_RADIUS * curve.min_separation


def sigma_of(curve: Curve, s: int, p: CurvePoint) -> complex:
    """Uniformizer coordinate of ``p`` near branch point ``s`` (0-based)."""
    if p.w == 0:
        return 0j
    return complex(p.w / local_sqrt_r(curve, s, p.x))


def point_from_sigma(curve: Curve, s: int, sigma: complex) -> CurvePoint:
    x = complex(curve.branch_points[s] + sigma * sigma)
    return CurvePoint(x, complex(sigma * local_sqrt_r(curve, s, x)))


def leg_end(curve: Curve, leg) -> CurvePoint:
    if isinstance(leg, LineLeg):
        return CurvePoint(leg.b, complex(continue_segment(curve, leg.a, leg.w_a, leg.b)))
    return point_from_sigma(curve, leg.s, leg.sigma_b)


def leg_nodes(curve: Curve, leg, t):
    """``(x, w, dx/dt)`` at parameters ``t`` in ``[0, 1]``."""
    if isinstance(leg, LineLeg):
        x = leg.a + t * (leg.b - leg.a)
        w = continue_segment(curve, leg.a, leg.w_a, x)
        return x, w, np.full(t.shape, leg.b - leg.a, dtype=complex)
    ds = leg.sigma_b - leg.sigma_a
    sig = leg.sigma_a + t * ds
    x = curve.branch_points[leg.s] + sig * sig
    w = sig * local_sqrt_r(curve, leg.s, x)
    return x, w, 2.0 * sig * ds


def integrate_leg(curve: Curve, leg, fun, tol: float = PATH_TOL):
    def integrand(t):
        x, w, dxdt = leg_nodes(curve, leg, t)
        return fun(x, w) * dxdt

    return legendre_adaptive(integrand, 0.0, 1.0, tol)


def integrate_legs(curve: Curve, legs, fun, tol: float = PATH_TOL):
    total = 0.0
    for leg in legs:
        total = total + integrate_leg(curve, leg, fun, tol)
    return total


def route(curve: Curve, a: complex, b: complex, avoid=None, detour=None, max_depth: int = 60):
    """Polyline from ``a`` to ``b`` deflected around branch-point disks.

    Segments passing within ``avoid`` of a branch point are replaced by a
    detour along a polygon inscribed in the circle of radius ``detour``
    around it, on the shorter side.
    """
    sep = curve.min_separation
    avoid = AVOID_RADIUS * sep if avoid is None else avoid
    detour = DETOUR_RADIUS * sep if detour is None else detour
    bp = curve.branch_points
    depth = [0]

    def rec(p, q):
        depth[0] += 1
        if depth[0] > max_depth:
            raise PathConstructionFailed(f"no clear route from {a!r} to {b!r}")
        hits = []
        for j, c in enumerate(bp):
            if _segment_distance(p, q, c) < avoid:
                pq = q - p
                t = ((c - p) * pq.conjugate()).real / abs(pq) ** 2 if abs(pq) ** 2 else 0.0
                hits.append((t, j))
        if not hits:
            return [p, q]
        _, j = min(hits)
        c = bp[j]
        th_p = np.angle(p - c)
        dth = np.angle((q - c) / (p - c))
        if dth <= -np.pi + 1e-12:
            dth = np.pi
        n = max(2, int(np.ceil(abs(dth) / (np.pi / 6))))
        arc = [c + detour * np.exp(1j * (th_p + k * dth / n)) for k in range(n + 1)]
        first = rec(p, arc[0])
        last = rec(arc[-1], q)
        return first[:-1] + arc + last[1:]

    pts = rec(complex(a), complex(b))
    out = [pts[0]]
    for z in pts[1:]:
        if abs(z - out[-1]) > 1e-15 * max(1.0, abs(z)):
            out.append(z)
    return out


def polyline_legs(curve: Curve, points, w_end: complex):
    """Line legs along ``points`` with ``w`` known at the last point; continued backwards."""
    legs = []
    w = w_end
    for k in range(len(points) - 1, 0, -1):
        a, b = points[k - 1], points[k]
        w_a = complex(continue_segment(curve, b, w, a))
        legs.append(LineLeg(a, b, w_a))
        w = w_a
    legs.reverse()
    return legs, w


def legs_from_branch(curve: Curve, s: int, p: CurvePoint, via=()):
    """Legs of a path from the branch point ``x_s`` (0-based) to ``p``.

    The path leaves ``x_s`` in the local chart, follows a deflected polyline
    (through the optional ``via`` x-points) and, if ``p`` lies in the disk of
    some branch point, enters it in that chart.
    """
    bp = curve.branch_points
    rho = local_radius(curve)
    if abs(p.x - bp[s]) < rho and not via:
        return [LocalLeg(s, 0j, sigma_of(curve, s, p))]
    j, dj = curve.nearest_branch(p.x)
    target_local = dj < rho
    if target_local:
        d = p.x - bp[j]
        q_end = bp[j] + rho * (d / abs(d) if d != 0 else 1.0)
    else:
        q_end = p.x
    first_aim = via[0] if via else q_end
    d0 = first_aim - bp[s]
    q0 = bp[s] + rho * d0 / abs(d0)
    pts = [q0]
    for z in list(via) + [q_end]:
        pts.extend(route(curve, pts[-1], z)[1:])
    tail = []
    if target_local:
        sig_p = sigma_of(curve, j, p)
        r = np.sqrt(q_end - bp[j])
        sig_q = r if abs(r - sig_p) <= abs(r + sig_p) else -r
        w_end = complex(sig_q * local_sqrt_r(curve, j, q_end))
        tail = [LocalLeg(j, sig_q, sig_p)]
    else:
        w_end = p.w
    legs, w0 = polyline_legs(curve, pts, w_end)
    head = [LocalLeg(s, 0j, complex(w0 / local_sqrt_r(curve, s, q0)))]
    return head + legs + tail


def pathspec_legs(curve: Curve, path: PathSpec):
    """Line legs along a user path, continuing ``w`` forward from its start point."""
    wp = path.waypoints
    check_path_clearance(curve, wp)
    legs = []
    w = path.start_point.w
    for a, b in zip(wp[:-1], wp[1:]):
        legs.append(LineLeg(a, b, w))
        w = complex(continue_segment(curve, a, w, b))
    return legs, CurvePoint(wp[-1], w)


def polygon(center: complex, radius: float, n: int = 16, phase: float = 0.0):
    """Closed regular polygon (first vertex repeated at the end), counterclockwise."""
    k = np.arange(n + 1)
    return [complex(center + radius * np.exp(1j * (phase + 2 * np.pi * i / n))) for i in k]


def stadium(a: complex, b: complex, offset: float, n_cap: int = 8):
    """Closed counterclockwise polygon around the segment ``[a, b]`` at distance ``offset``."""
    d = (b - a) / abs(b - a)
    pts = []
    for k in range(n_cap + 1):
        th = -np.pi / 2 + np.pi * k / n_cap
        pts.append(complex(b + offset * d * np.exp(1j * th)))
    for k in range(n_cap + 1):
        th = np.pi / 2 + np.pi * k / n_cap
        pts.append(complex(a + offset * d * np.exp(1j * th)))
    pts.append(pts[0])
    return pts
