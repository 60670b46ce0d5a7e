"""Abel-Jacobi map with base point at the last branch point."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .curvegeom import Curve, CurvePoint, check_on_curve, continue_segment
from .jacobian import lattice_residual, reduce
from .paths import (
    PATH_TOL,
    integrate_legs,
    legs_from_branch,
    local_radius,
    local_sqrt_r,
    point_from_sigma,
    sigma_of,
)
from .periods import PeriodData


@dataclass(frozen=True)
class Divisor:
    """Formal sum of curve points with integer multiplicities."""

    terms: tuple = field(default_factory=tuple)  # ((CurvePoint, int), ...)

    @classmethod
    def of(cls, *points: CurvePoint) -> Divisor:
        return cls(tuple((p, 1) for p in points))

    @property
    def degree(self) -> int:
        return sum(m for _, m in self.terms)

    @property
    def is_positive(self) -> bool:
        return all(m > 0 for _, m in self.terms)


def du_integrand(curve: Curve, periods: PeriodData):
    """``fun(x, w)`` giving the normalized holomorphic differentials relative to ``dx``."""
    powers = np.arange(curve.genus)
    c = periods.normalizer

    def fun(x, w):
        return (c @ (x[None, :] ** powers[:, None])) / w

    return fun


def base_index(curve: Curve) -> int:
    return 2 * curve.genus + 1


def aj_raw(curve: Curve, periods: PeriodData, p: CurvePoint, via=(), tol: float = PATH_TOL) -> np.ndarray:
    """``int_{P0}^{P} du`` along the constructed path, not reduced.

    ``via`` adds intermediate x-plane waypoints, which changes the path and
    hence the result by a lattice vector.
    """
    s = base_index(curve)
    if p.w == 0 and p.x == curve.branch_points[s] and not via:
        return np.zeros(curve.genus, dtype=complex)
    legs = legs_from_branch(curve, s, p, via)
    return np.asarray(integrate_legs(curve, legs, du_integrand(curve, periods), tol), dtype=complex)


def aj(curve: Curve, periods: PeriodData, p: CurvePoint, via=(), tol: float = PATH_TOL) -> np.ndarray:
    """AJ image of ``p``, canonically reduced."""
    check_on_curve(curve, p)
    return reduce(aj_raw(curve, periods, p, via, tol), periods.period_matrix)


def aj_divisor(curve: Curve, periods: PeriodData, d: Divisor, tol: float = PATH_TOL) -> np.ndarray:
    total = np.zeros(curve.genus, dtype=complex)
    for p, m in d.terms:
        total = total + m * aj(curve, periods, p, tol=tol)
    return reduce(total, periods.period_matrix)


def local_inverse(curve: Curve, periods: PeriodData, target, seed: CurvePoint, tol: float = 1e-10, max_iter: int = 40):
    """Curve point ``S`` near ``seed`` with ``u(S) = target`` modulo the lattice.

    Gauss-Newton on the single complex unknown, in the ``x`` chart away from
    branch points and in the local uniformizer near them; ``u(S)`` is
    recomputed from the base point at every iterate.  Returns ``(S,
    distance)`` where ``distance`` is the final lattice distance, which the
    caller compares against its own tolerance.
    """
    pi = periods.period_matrix
    rho = local_radius(curve)
    bp = curve.branch_points
    p = seed
    best = (seed, np.inf)
    for _ in range(max_iter):
        r = lattice_residual(target, aj_raw(curve, periods, p), pi)
        dist = float(np.linalg.norm(r))
        if dist < best[1]:
            best = (p, dist)
        if dist < tol:
            break
        j, dj = curve.nearest_branch(p.x)
        v = periods.normalizer @ (p.x ** np.arange(curve.genus))
        if dj < rho:
            sig = sigma_of(curve, j, p)
            d = 2.0 * v / local_sqrt_r(curve, j, p.x)
            step = complex(np.vdot(d, r) / np.vdot(d, d))
            lim = 0.5 * np.sqrt(rho)
            if abs(step) > lim:
                step *= lim / abs(step)
            p = point_from_sigma(curve, j, sig + step)
        else:
            d = v / p.w
            step = complex(np.vdot(d, r) / np.vdot(d, d))
            lim = 0.5 * float(np.min(np.abs(bp - p.x)))
            if abs(step) > lim:
                step *= lim / abs(step)
            x_new = p.x + step
            p = CurvePoint(x_new, complex(continue_segment(curve, p.x, p.w, x_new)))
    return best
