import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hyperjac.curvegeom import (
    CurvePoint,
    PathSpec,
    check_on_curve,
    check_path_clearance,
    continue_segment,
    continue_w,
    involution,
    make_curve,
    sample_points,
)
from hyperjac.errors import (
    DuplicateBranchPoint,
    OddCount,
    PathTooCloseToBranchPoint,
    PointNotOnCurve,
)


def test_genus_from_count(curve3):
    assert curve3.genus == 3
    assert make_curve([0, 1, 2, 3]).genus == 1


@pytest.mark.parametrize("bp", [[0, 1, 2], [0, 1, 2, 3, 4], [0, 1]])
def test_bad_count(bp):
    with pytest.raises(OddCount):
        make_curve(bp)


def test_duplicate():
    with pytest.raises(DuplicateBranchPoint):
        make_curve([0, 1, 2, 1 + 1e-15])


coords = st.complex_numbers(max_magnitude=6.0, allow_nan=False, allow_infinity=False)


@given(coords)
def test_w_plus_squares_to_f(curve3, x):
    w = complex(curve3.w_plus(x))
    f = complex(curve3.f(x))
    assert abs(w * w - f) <= 1e-11 * max(1.0, abs(f))


def test_w_plus_at_infinity(curve3):
    x = 1e4 + 3e3j
    assert abs(curve3.w_plus(x) / x**4 - 1) < 1e-2


def test_point_checks(curve3):
    p = curve3.point(0.3 + 0.7j)
    check_on_curve(curve3, p)
    check_on_curve(curve3, involution(p))
    with pytest.raises(PointNotOnCurve):
        check_on_curve(curve3, CurvePoint(p.x, 1.01 * p.w))


def test_continuation_matches_closed_form_off_cuts(curve3):
    # a path that stays away from the real axis crosses no cut
    xs = np.linspace(-4 + 1j, 5 + 2j, 7)
    start = curve3.point(xs[0])
    end = continue_w(curve3, PathSpec(xs, start))
    assert abs(end.w - curve3.w_plus(xs[-1])) < 1e-10 * abs(end.w)


def _circle(c, r, n=24):
    t = np.linspace(0, 2 * np.pi, n + 1)
    return list(c + r * np.exp(1j * t))


@pytest.mark.parametrize("count,flips", [(1, True), (2, False)])
def test_monodromy(curve3, count, flips):
    bp = curve3.branch_points
    if count == 1:
        pts = _circle(bp[0], 0.4)
    else:
        pts = [z for z in _circle(0.5 * (bp[0] + bp[1]), 0.8)]
    start = curve3.point(pts[0])
    end = continue_w(curve3, PathSpec(pts, start))
    assert abs(end.w - (-start.w if flips else start.w)) < 1e-10 * abs(start.w)


@given(st.floats(0.05, 0.95), st.floats(-1.0, 1.0))
def test_two_routes_agree(curve3, t, s):
    # exact segment continuation against stepwise root tracking
    a = -1.5 + 0.6j
    b = a + (3.0 + 1.0j) * t + 0.3j * s
    p = curve3.point(a)
    exact = complex(continue_segment(curve3, a, p.w, b))
    stepped = continue_w(curve3, PathSpec([a, b], p)).w
    assert abs(exact - stepped) < 1e-10 * abs(exact)


def test_clearance(curve3):
    with pytest.raises(PathTooCloseToBranchPoint):
        check_path_clearance(curve3, [-2.5 + 0.001j, -1.5 + 0.001j])
    check_path_clearance(curve3, [-2.5 + 0.5j, -1.5 + 0.5j])
    # a branch point as path end is allowed
    check_path_clearance(curve3, [-2.0, -1.5 + 0.5j])


def test_sample_points(curve3):
    rng = np.random.default_rng(1)
    pts = sample_points(curve3, 20, rng)
    sep = curve3.min_separation
    for p in pts:
        check_on_curve(curve3, p)
        assert np.min(np.abs(curve3.branch_points - p.x)) >= 0.3 * sep
