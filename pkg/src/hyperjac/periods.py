"""Homology basis, period integrals and the normalized period matrix.

The branch points, in user order, form a polyline ``x_1 -> x_2 -> ... ->
x_{2g+2}``.  Segment ``i`` (0-based, from ``x_{i+1}`` to ``x_{i+2}``) lifts to
a closed loop ``gamma_i`` encircling its two end points; these chain loops
generate the homology and satisfy ``gamma_i . gamma_{i+1} = 1``.  In terms
of them::

    a_j = gamma_{2j-2}                      (the loop around cut j)
    b_j = gamma_{2j-1} + gamma_{2j+1} + ... + gamma_{2g-1}   (gaps j..g)

Each ``gamma_i`` is evaluated collapsed onto its segment, as
``-2 * int_{x_{i+1}}^{x_{i+2}} x**s dx / w`` on sheet "+" (boundary values
from the left of the segment direction on cuts), with a Gauss-Chebyshev
rule absorbing the inverse square-root end point singularities.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curvegeom import Curve, CurvePoint
from .errors import (
    CutChainSelfIntersecting,
    IndexOutOfRange,
    SingularPeriodMatrix,
    WeierstrassPoint,
)
from .quadrature import chebyshev_integrate

DEFAULT_TOL = 1e-13
COND_LIMIT = 1e12


@dataclass(frozen=True)
class Traversal:
    """One pass along chain segment ``start -> end`` (0-based indices) on ``sheet``."""

    start: int
    end: int
    sheet: int


@dataclass(frozen=True)
class CycleSpec:
    kind: str
    index: int
    chain: tuple  # integer coefficients over the chain loops gamma_0..gamma_{2g}
    realization: tuple  # Traversal sequence realizing the collapsed loop


@dataclass(frozen=True, eq=False)
class PeriodData:
    raw_a: np.ndarray  # raw_a[j, s] = integral of x**s dx / w over a_{j+1}
    raw_b: np.ndarray
    normalizer: np.ndarray  # du = normalizer @ (1, x, ..., x**(g-1)) dx / w
    period_matrix: np.ndarray
    cond_a: float

    @property
    def genus(self) -> int:
        return self.period_matrix.shape[0]


def _chain_traversals(i: int):
    return (Traversal(i, i + 1, -1), Traversal(i + 1, i, 1))


def _chain_vector(g: int, kind: str, j: int):
    v = np.zeros(2 * g + 1, dtype=int)
    if kind == "a":
        v[2 * j - 2] = 1
    else:
        v[2 * j - 1 : 2 * g : 2] = 1
    return tuple(int(c) for c in v)


def cycle(curve: Curve, kind: str, j: int) -> CycleSpec:
    """The basis cycle ``a_j`` or ``b_j`` (1-based ``j``)."""
    g = curve.genus
    if kind not in ("a", "b"):
        raise ValueError(f"kind must be 'a' or 'b', got {kind!r}")
    if not 1 <= j <= g:
        raise IndexOutOfRange(f"cycle index {j} outside 1..{g}")
    chain = _chain_vector(g, kind, j)
    real = []
    for i, c in enumerate(chain):
        for _ in range(abs(c)):
            t = _chain_traversals(i)
            real.extend(t if c > 0 else tuple(Traversal(x.end, x.start, x.sheet) for x in t))
    return CycleSpec(kind, j, chain, tuple(real))


def intersection_number(c1: CycleSpec, c2: CycleSpec) -> int:
    v1 = np.array(c1.chain)
    v2 = np.array(c2.chain)
    return int(v1[:-1] @ v2[1:] - v1[1:] @ v2[:-1])


def intersection_matrix(curve: Curve) -> np.ndarray:
    """Intersection form on ``(a_1..a_g, b_1..b_g)``; the standard symplectic form when correct."""
    g = curve.genus
    cyc = [cycle(curve, "a", j) for j in range(1, g + 1)] + [
        cycle(curve, "b", j) for j in range(1, g + 1)
    ]
    return np.array([[intersection_number(p, q) for q in cyc] for p in cyc], dtype=int)


def _segments_cross(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        return np.sign(((b - a).conjugate() * (c - a)).imag)

    return (
        orient(p1, p2, q1) * orient(p1, p2, q2) < 0
        and orient(q1, q2, p1) * orient(q1, q2, p2) < 0
    )


def check_chain(curve: Curve) -> None:
    """Raise unless the branch-point polyline is simple (cuts and gaps do not cross)."""
    bp = curve.branch_points
    n = len(bp)
    for i in range(n - 1):
        for j in range(i + 2, n - 1):
            if _segments_cross(bp[i], bp[i + 1], bp[j], bp[j + 1]):
                raise CutChainSelfIntersecting(
                    f"chain segments {i} and {j} cross; reorder the branch points"
                )


def segment_integral(curve: Curve, i: int, fun, tol: float = DEFAULT_TOL):
    """``int fun(x) dx / w`` along chain segment ``i`` on sheet "+".

    On cut segments the boundary value of ``w_plus`` from the left of the
    direction ``x_{i+1} -> x_{i+2}`` is used.  ``fun`` maps an array of ``x``
    to an array with the nodes on its last axis.
    """
    bp = curve.branch_points
    a, b = bp[i], bp[i + 1]
    m, h = 0.5 * (a + b), 0.5 * (b - a)
    if i % 2 == 0:
        k = i // 2

        def integrand(t):
            x = m + h * t
            return -1j * fun(x) / curve.cut_factor_excluding(x, k)

    else:

        def integrand(t):
            x = m + h * t
            big_h = curve.w_plus(x) / np.sqrt(1.0 - t * t)
            return fun(x) * h / big_h

    return chebyshev_integrate(integrand, tol)


def _monomials(g):
    powers = np.arange(g)

    def fun(x):
        return x[None, :] ** powers[:, None]

    return fun


def integrate_cycle(curve: Curve, degree: int, cyc: CycleSpec, tol: float = DEFAULT_TOL) -> complex:
    """``oint x**degree dx / w`` over the realized cycle."""
    if not 0 <= degree <= curve.genus - 1:
        raise IndexOutOfRange(f"degree {degree} outside 0..{curve.genus - 1}")
    return complex(integrate_cycle_fn(curve, lambda x: x**degree, cyc, tol))


def integrate_cycle_fn(curve: Curve, fun, cyc: CycleSpec, tol: float = DEFAULT_TOL):
    """``oint fun(x) dx / w`` over a collapsed cycle; ``fun`` may be vector valued."""
    cache = {}
    total = 0.0
    for tr in cyc.realization:
        i = min(tr.start, tr.end)
        if i not in cache:
            cache[i] = segment_integral(curve, i, fun, tol)
        sign = 1 if tr.end > tr.start else -1
        total = total + tr.sheet * sign * cache[i]
    return total


def chain_periods(curve: Curve, fun, tol: float = DEFAULT_TOL):
    """Periods of ``fun(x) dx / w`` over ``a_1..a_g`` and ``b_1..b_g``.

    Each segment integral is computed once and combined through the chain
    coefficients (``gamma_i = -2 * segment_i``).
    """
    g = curve.genus
    seg = [segment_integral(curve, i, fun, tol) for i in range(2 * g)]
    gam = [-2.0 * s for s in seg]
    a = [gam[2 * j] for j in range(g)]
    b = [sum(gam[2 * i + 1] for i in range(j, g)) for j in range(g)]
    return np.array(a), np.array(b)


def compute_periods(curve: Curve, tol: float = DEFAULT_TOL) -> PeriodData:
    """Raw a/b periods of ``x**s dx / w``, the normalizer and ``Pi = B A^{-1}``."""
    check_chain(curve)
    g = curve.genus
    raw_a, raw_b = chain_periods(curve, _monomials(g), tol)
    cond = float(np.linalg.cond(raw_a))
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularPeriodMatrix(f"a-period matrix has condition number {cond:.3g}")
    # integral over a_j of du_s = (C A^T)_{sj} = delta_{sj}
    normalizer = np.linalg.inv(raw_a.T)
    pi = raw_b @ normalizer.T
    return PeriodData(raw_a, raw_b, normalizer, pi, cond)


def normalized_du_at(curve: Curve, periods: PeriodData, p: CurvePoint) -> np.ndarray:
    """Values of the normalized differentials relative to ``dx`` at ``p``."""
    if p.w == 0:
        raise WeierstrassPoint(f"du/dx is infinite at the branch point x={p.x!r}")
    g = curve.genus
    return periods.normalizer @ (p.x ** np.arange(g)) / p.w
