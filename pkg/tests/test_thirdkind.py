import numpy as np
import pytest

from hyperjac.ajmap import aj_raw, du_integrand
from hyperjac.curvegeom import PathSpec
from hyperjac.errors import CoincidentPoints, LogBranchLost, PathThroughPole
from hyperjac.jsonio import continued_points
from hyperjac.paths import integrate_leg, pathspec_legs
from hyperjac.theta import char_parity, theta_char_parts
from hyperjac.thirdkind import (
    _log_parts,
    b_loops,
    eta_along,
    eta_on_samples,
    eta_walk,
    make_spec,
    oracle_third_kind,
    pick_odd_char,
    residue_loop,
)


@pytest.fixture(scope="module")
def poles(curve3):
    return curve3.point(0.1 + 1.5j), curve3.point(2.0 - 1.2j)


@pytest.fixture(scope="module")
def spec(curve3, periods3, poles):
    return make_spec(curve3, periods3, *poles)


def _wrap(z):
    return z - 2j * np.pi * np.round(z.imag / (2 * np.pi))


def test_odd_char(periods3):
    pi = periods3.period_matrix
    c = pick_odd_char(3, pi)
    assert char_parity(c) == "odd"
    val, grad, _ = theta_char_parts(c, np.zeros(3), pi, want_grad=True)
    assert abs(val) < 1e-13 and np.linalg.norm(grad) > 1e-3


def test_a_periods_vanish(curve3, periods3, spec):
    for lp in spec.loops:
        assert abs(eta_along(curve3, periods3, spec, lp)) < 1e-10


def test_against_oracle(curve3, periods3, spec, poles):
    s = curve3.point(-0.5 + 0.8j, -1)
    path = PathSpec([s.x, 1.5 + 0.7j, 3.6 + 0.5j, 3.0 - 2.0j], s)
    e = eta_along(curve3, periods3, spec, path)
    o = oracle_third_kind(curve3, periods3, *poles, path, loops=spec.loops)
    assert abs(e - o) < 1e-9


@pytest.mark.parametrize("which,res", [(0, 1), (1, -1), (None, 0)])
def test_residues(curve3, periods3, spec, poles, which, res):
    p = curve3.point(-0.5 + 0.8j) if which is None else poles[which]
    lp = residue_loop(curve3, p, 0.2)
    inc, windings, _ = eta_walk(curve3, periods3, spec, lp)
    assert abs(inc - 2j * np.pi * res) < 1e-9
    assert abs(oracle_third_kind(curve3, periods3, *poles, lp, loops=spec.loops) - 2j * np.pi * res) < 1e-9


def test_antisymmetric(curve3, periods3, spec, poles):
    swapped = make_spec(curve3, periods3, poles[1], poles[0])
    s = curve3.point(-0.5 + 0.8j, -1)
    path = PathSpec([s.x, 1.5 + 0.7j, 3.6 + 0.5j], s)
    assert abs(eta_along(curve3, periods3, spec, path) + eta_along(curve3, periods3, swapped, path)) < 1e-9


@pytest.mark.parametrize("j", [1, 2, 3])
def test_b_cycle_increment(curve3, periods3, spec, poles, j):
    # the loops realize b_j (their du-integral is column j of Pi) and the
    # increment is 2 pi i (u_R - u_Q)_j modulo 2 pi i
    R, Q = poles
    lps = b_loops(curve3, periods3, j, avoid=(R.x, Q.x))
    du = du_integrand(curve3, periods3)
    tot = sum(sum(integrate_leg(curve3, leg, du) for leg in pathspec_legs(curve3, lp)[0]) for lp in lps)
    assert np.linalg.norm(tot - periods3.period_matrix[:, j - 1]) < 1e-10
    inc = sum(eta_along(curve3, periods3, spec, lp) for lp in lps)
    d = aj_raw(curve3, periods3, R) - aj_raw(curve3, periods3, Q)
    assert abs(_wrap(inc - 2j * np.pi * d[j - 1])) < 1e-9


def test_samples_route(curve3, periods3, spec):
    # theta quotient on a sequence of AJ images matches the path integral
    s = curve3.point(-0.5 + 0.8j, -1)
    xs = np.linspace(s.x, 1.5 + 0.7j, 12)
    pts = continued_points(curve3, s, list(xs))
    us = [aj_raw(curve3, periods3, p) for p in pts]
    e = eta_on_samples(spec, periods3.period_matrix, us)
    ref = eta_along(curve3, periods3, spec, PathSpec(xs, s))
    assert abs(e[-1] - ref) < 1e-9


def test_coarse_samples_rejected(periods3, spec):
    pi = periods3.period_matrix
    rng = np.random.default_rng(0)
    while True:
        u0, u1 = (rng.normal(size=3) + 1j * rng.normal(size=3) for _ in range(2))
        if abs(np.angle(_log_parts(spec, pi, u1)[0] / _log_parts(spec, pi, u0)[0])) > np.pi / 2:
            break
    with pytest.raises(LogBranchLost):
        eta_on_samples(spec, pi, [u0, u1])


def test_errors(curve3, periods3, spec, poles):
    R, Q = poles
    with pytest.raises(CoincidentPoints):
        make_spec(curve3, periods3, R, R)
    s = curve3.point(-0.5 + 1.5j)
    with pytest.raises(PathThroughPole):
        eta_along(curve3, periods3, spec, PathSpec([s.x, 1.0 + 1.5j], s))
