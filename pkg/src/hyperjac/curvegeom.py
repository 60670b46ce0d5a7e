"""Hyperelliptic curves ``w**2 = prod_j (x - x_j)`` and their sheet structure.

The curve is kept as the ordered list of its ``2g + 2`` branch points.  The
order matters: cuts are the straight segments ``[x_1, x_2], [x_3, x_4], ...,
[x_{2g+1}, x_{2g+2}]`` and every homology/characteristic convention downstream
is defined relative to it.

Two independent ways of fixing the value of ``w`` are provided:

* :meth:`Curve.w_plus` -- closed-form sheet "+" (``w ~ +x**(g+1)`` at
  infinity), analytic off the cuts.
* :func:`continue_w` -- analytic continuation of a given value along a
  polyline by predicted-value root selection with adaptive bisection.

:func:`continue_segment` is the exact vectorized continuation along one
straight segment used by the quadrature code.
"""
from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DuplicateBranchPoint,
    NonconvergentContinuation,
    OddCount,
    PathTooCloseToBranchPoint,
    PointNotOnCurve,
)

DUPLICATE_RTOL = 1e-12
DEFAULT_CLEARANCE_FRACTION = 0.05


def _pair_factor(x, a, b):
    """Branch of ``sqrt((x - a)(x - b))`` with cut ``[a, b]`` and ``~ x`` at infinity."""
    m = 0.5 * (a + b)
    d = x - m
    return d * np.sqrt((x - a) * (x - b) / (d * d))


@dataclass(frozen=True, eq=False)
class Curve:
    """Genus ``g`` hyperelliptic curve given by its ordered branch points."""

    branch_points: np.ndarray
    clearance: float
    genus: int = field(init=False)

    def __post_init__(self):
        bp = np.array(self.branch_points, dtype=complex)
        bp.setflags(write=False)
        object.__setattr__(self, "branch_points", bp)
        object.__setattr__(self, "genus", (len(bp) - 2) // 2)

    @property
    def min_separation(self) -> float:
        bp = self.branch_points
        d = np.abs(bp[:, None] - bp[None, :])
        d[np.diag_indices_from(d)] = np.inf
        return float(d.min())

    def f(self, x):
        """The polynomial ``prod_j (x - x_j)``."""
        x = np.asarray(x, dtype=complex)
        return np.prod(x[..., None] - self.branch_points, axis=-1)

    def w_plus(self, x):
        """Sheet "+" of ``w``: analytic off the cuts, ``~ x**(g+1)`` at infinity."""
        x = np.asarray(x, dtype=complex)
        bp = self.branch_points
        out = np.ones_like(x)
        for k in range(self.genus + 1):
            out = out * _pair_factor(x, bp[2 * k], bp[2 * k + 1])
        return out

    def cut_factor_excluding(self, x, k):
        """Product of the pair factors of all cuts except cut ``k`` (0-based)."""
        x = np.asarray(x, dtype=complex)
        bp = self.branch_points
        out = np.ones_like(x)
        for j in range(self.genus + 1):
            if j != k:
                out = out * _pair_factor(x, bp[2 * j], bp[2 * j + 1])
        return out

    def point(self, x, sheet: int = 1, w=None) -> CurvePoint:
        """Curve point over ``x``: on sheet ``sheet * w_plus`` or with explicit ``w``."""
        x = complex(x)
        if w is None:
            w = sheet * complex(self.w_plus(x))
        p = CurvePoint(x, complex(w))
        check_on_curve(self, p)
        return p

    def weierstrass_point(self, s: int) -> CurvePoint:
        """The branch point ``P_s`` (1-based, as in the table of half periods)."""
        return CurvePoint(complex(self.branch_points[s - 1]), 0j)

    def weierstrass_index(self, p: CurvePoint, rtol: float = 1e-12):
        """1-based index of the branch point under ``p`` if ``p`` is Weierstrass, else None."""
        d = np.abs(self.branch_points - p.x)
        s = int(np.argmin(d))
        if d[s] <= rtol * max(1.0, abs(p.x)):
            return s + 1
        return None

    def nearest_branch(self, x):
        d = np.abs(self.branch_points - x)
        s = int(np.argmin(d))
        return s, float(d[s])


@dataclass(frozen=True)
class CurvePoint:
    x: complex
    w: complex


@dataclass(frozen=True)
class PathSpec:
    """Polyline in the x-plane with the curve point fixing the sheet at its start."""

    waypoints: tuple
    start_point: CurvePoint

    def __post_init__(self):
        object.__setattr__(self, "waypoints", tuple(complex(z) for z in self.waypoints))


def make_curve(branch_points: Sequence[complex], clearance: float | None = None) -> Curve:
    """Build a :class:`Curve`, validating count and distinctness.

    Branch points are stored in the given order.  The default clearance is
    ``0.05 * min_separation``.
    """
    bp = np.asarray(list(branch_points), dtype=complex)
    n = len(bp)
    if n < 4 or n % 2:
        raise OddCount(f"need an even number >= 4 of branch points, got {n}")
    for i in range(n):
        for j in range(i + 1, n):
            scale = max(1.0, abs(bp[i]), abs(bp[j]))
            if abs(bp[i] - bp[j]) <= DUPLICATE_RTOL * scale:
                raise DuplicateBranchPoint(f"branch points {i + 1} and {j + 1} coincide")
    d = np.abs(bp[:, None] - bp[None, :])
    d[np.diag_indices(n)] = np.inf
    sep = float(d.min())
    if clearance is None:
        clearance = DEFAULT_CLEARANCE_FRACTION * sep
    if not clearance > 0:
        raise ValueError("clearance must be positive")
    return Curve(bp, float(clearance))


def check_on_curve(curve: Curve, p: CurvePoint, tol: float = 1e-9) -> None:
    fx = complex(curve.f(p.x))
    if abs(p.w * p.w - fx) > tol * max(1.0, abs(fx)):
        raise PointNotOnCurve(f"w**2 != f(x) at x={p.x!r}")


def involution(p: CurvePoint) -> CurvePoint:
    """Hyperelliptic involution ``(x, w) -> (x, -w)``."""
    return CurvePoint(p.x, -p.w)


def continue_segment(curve: Curve, x0: complex, w0: complex, x):
    """Exact continuation of ``w`` from ``(x0, w0)`` along straight segments to ``x``.

    Uses ``w(x) = w0 * prod_j sqrt((x - x_j) / (x0 - x_j))`` with principal
    roots; each ratio moves along a straight segment starting at 1 that cannot
    cross the negative real axis unless the segment hits ``x_j``.  ``x0`` must
    not be a branch point.
    """
    x = np.asarray(x, dtype=complex)
    out = np.full(x.shape, w0, dtype=complex)
    for xj in curve.branch_points:
        out = out * np.sqrt((x - xj) / (x0 - xj))
    return out


def _segment_distance(a: complex, b: complex, c: complex) -> float:
    ab = b - a
    n2 = abs(ab) ** 2
    if n2 == 0:
        return abs(c - a)
    t = ((c - a) * ab.conjugate()).real / n2
    t = min(1.0, max(0.0, t))
    return abs(a + t * ab - c)


def check_path_clearance(curve: Curve, waypoints: Sequence[complex], clearance=None) -> None:
    """Raise if a segment passes closer than ``clearance`` to a branch point.

    A branch point may coincide with the first or last waypoint; segments
    touching it are then exempt for that branch point only.
    """
    delta = curve.clearance if clearance is None else clearance
    wp = list(waypoints)
    bp = curve.branch_points
    exempt = set()
    for end in (wp[0], wp[-1]):
        d = np.abs(bp - end)
        exempt.update(int(i) for i in np.nonzero(d < 1e-14 * max(1.0, abs(end)))[0])
    for i in range(len(wp) - 1):
        for j, c in enumerate(bp):
            if j in exempt and (abs(wp[i] - c) < 1e-12 or abs(wp[i + 1] - c) < 1e-12):
                continue
            if _segment_distance(wp[i], wp[i + 1], c) < delta:
                raise PathTooCloseToBranchPoint(
                    f"segment {i} passes within {delta:g} of branch point {j + 1}"
                )
    for k, z in enumerate(wp[1:-1], start=1):
        if np.min(np.abs(bp - z)) < delta:
            raise PathTooCloseToBranchPoint(f"interior waypoint {k} too close to a branch point")


def continue_w(curve: Curve, path: PathSpec, max_depth: int = 40) -> CurvePoint:
    """Analytically continue ``w`` along ``path``; return the end point.

    Each step predicts ``w`` to first order (``dw/dx = w/2 * sum 1/(x - x_j)``)
    and takes the square root of ``f`` closer to the prediction.  A step is
    accepted when the predicted relative change stays below 0.5 and the chosen
    root is unambiguous; otherwise it is bisected.
    """
    wp = path.waypoints
    if not wp:
        return path.start_point
    check_path_clearance(curve, wp)
    if abs(wp[0] - path.start_point.x) > 1e-12 * max(1.0, abs(wp[0])):
        raise ValueError("path must start at start_point.x")
    x, w = path.start_point.x, path.start_point.w
    for b in wp[1:]:
        w = _continue_one(curve, x, w, b, max_depth)
        x = b
    return CurvePoint(complex(wp[-1]), complex(w))


def _continue_one(curve, a, w, b, max_depth):
    bp = curve.branch_points
    stack = [(b, 0)]
    x = a
    while stack:
        target, depth = stack[-1]
        if target == x:
            stack.pop()
            continue
        ft = complex(curve.f(target))
        r = np.sqrt(ft)
        if r == 0:
            w_new = 0j
            ok = True
        elif w == 0:
            # leaving a branch point: no sheet to preserve
            w_new, ok = r, True
        else:
            dw = 0.5 * w * np.sum(1.0 / (x - bp))
            pred = w + (target - x) * dw
            w_new = r if abs(r - pred) <= abs(r + pred) else -r
            ok = abs(pred - w) <= 0.5 * abs(w) and abs(w_new - pred) <= 0.25 * abs(w_new)
        if ok:
            x, w = target, w_new
            stack.pop()
        else:
            if depth >= max_depth:
                raise NonconvergentContinuation(f"step refinement exceeded depth {max_depth}")
            stack.append((0.5 * (x + target), depth + 1))
    return w


def sample_points(curve: Curve, n: int, rng: np.random.Generator, min_distance=None, pad=1.0):
    """``n`` random non-Weierstrass curve points, both sheets equally likely.

    ``x`` is uniform in the bounding box of the branch points padded by
    ``pad * min_separation``; draws within ``min_distance`` of a branch point
    are rejected (default ``0.3 * min_separation``).
    """
    bp = curve.branch_points
    sep = curve.min_separation
    if min_distance is None:
        min_distance = 0.3 * sep
    lo_r, hi_r = bp.real.min() - pad * sep, bp.real.max() + pad * sep
    lo_i, hi_i = bp.imag.min() - pad * sep, bp.imag.max() + pad * sep
    out = []
    while len(out) < n:
        x = complex(rng.uniform(lo_r, hi_r), rng.uniform(lo_i, hi_i))
        if np.min(np.abs(bp - x)) < min_distance:
            continue
        sheet = 1 if rng.random() < 0.5 else -1
        out.append(CurvePoint(x, sheet * complex(curve.w_plus(x))))
    return out
