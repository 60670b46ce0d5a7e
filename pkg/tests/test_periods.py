import numpy as np
import pytest
from conftest import random_curve

from hyperjac.curvegeom import CurvePoint, PathSpec, make_curve
from hyperjac.errors import (
    CutChainSelfIntersecting,
    IndexOutOfRange,
    QuadratureNonconvergence,
    WeierstrassPoint,
)
from hyperjac.paths import integrate_leg, pathspec_legs, stadium
from hyperjac.periods import (
    compute_periods,
    cycle,
    integrate_cycle,
    intersection_matrix,
    normalized_du_at,
)
from hyperjac.quadrature import chebyshev_integrate, legendre_adaptive


def agm(a, b):
    for _ in range(60):
        a, b = 0.5 * (a + b), np.sqrt(a * b)
    return a


def complete_k(k):
    return np.pi / (2.0 * agm(1.0, np.sqrt(1.0 - k * k)))


def elliptic_ratio(a, b, c, d):
    """``i K(k) / K(k')`` for real roots ``a > b > c > d``: gap period over cut period."""
    k2 = (b - c) * (a - d) / ((a - c) * (b - d))
    return 1j * complete_k(np.sqrt(k2)) / complete_k(np.sqrt(1 - k2))


@pytest.mark.parametrize("roots", [(-2, -1, 1, 2), (-3, -1, 0.5, 4), (-1, 0, 2, 2.5)])
def test_genus1_agm(roots):
    pi = compute_periods(make_curve(roots)).period_matrix[0, 0]
    ref = elliptic_ratio(*sorted(roots, reverse=True))
    assert abs(pi - ref) < 1e-10


def test_quadrature_rules():
    assert abs(chebyshev_integrate(lambda t: np.ones_like(t), 1e-14) - np.pi) < 1e-14
    val = chebyshev_integrate(lambda t: np.exp(t), 1e-14)
    assert abs(val - np.pi * 1.2660658777520082) < 1e-13  # pi I_0(1)
    assert abs(legendre_adaptive(np.sin, 0.0, np.pi, 1e-14) - 2.0) < 1e-13
    with pytest.raises(QuadratureNonconvergence):
        chebyshev_integrate(lambda t: np.abs(t) ** 0.5, 1e-14, n_max=64)


@pytest.mark.parametrize("g", [1, 2, 3, 4])
def test_symplectic_intersections(g):
    curve = make_curve(np.arange(2 * g + 2, dtype=float))
    j = np.zeros((2 * g, 2 * g), dtype=int)
    j[:g, g:] = np.eye(g, dtype=int)
    j[g:, :g] = -np.eye(g, dtype=int)
    assert np.array_equal(intersection_matrix(curve), j)


@pytest.mark.parametrize("seed", range(4))
def test_riemann_bilinear(seed):
    curve = random_curve(np.random.default_rng(seed), 1 + seed % 4)
    pi = compute_periods(curve).period_matrix
    assert np.max(np.abs(pi - pi.T)) < 1e-10 * max(1.0, np.max(np.abs(pi)))
    assert np.min(np.linalg.eigvalsh(pi.imag)) > 0


def test_normalization(curve3, periods3):
    g = curve3.genus
    a = np.array([[integrate_cycle(curve3, s, cycle(curve3, "a", j)) for s in range(g)] for j in range(1, g + 1)])
    assert np.allclose(a @ periods3.normalizer.T, np.eye(g), atol=1e-12)


def test_collapsed_loop_matches_contour(curve3, periods3):
    # the a-cycle as an honest contour around cut 1 against the collapsed integral
    bp = curve3.branch_points
    pts = stadium(bp[0], bp[1], 0.2)
    start = CurvePoint(pts[0], complex(curve3.w_plus(pts[0])))
    legs, _ = pathspec_legs(curve3, PathSpec(pts, start))
    val = sum(integrate_leg(curve3, leg, lambda x, w: 1.0 / w) for leg in legs)
    ref = integrate_cycle(curve3, 0, cycle(curve3, "a", 1))
    assert min(abs(val - ref), abs(val + ref)) < 1e-11


def test_errors(curve3, periods3):
    with pytest.raises(IndexOutOfRange):
        cycle(curve3, "a", 4)
    with pytest.raises(IndexOutOfRange):
        integrate_cycle(curve3, 3, cycle(curve3, "a", 1))
    with pytest.raises(WeierstrassPoint):
        normalized_du_at(curve3, periods3, curve3.weierstrass_point(2))
    with pytest.raises(CutChainSelfIntersecting):
        compute_periods(make_curve([0, 2, 1 + 1j, 1 - 1j]))
