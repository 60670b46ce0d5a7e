import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hyperjac.errors import IndexOutOfRange
from hyperjac.jacobian import (
    from_char,
    lattice_distance,
    reduce,
    reduce_char,
    riemann_char,
    theta_scale,
    to_char,
    weierstrass_char,
)
from hyperjac.theta import ThetaChar, char_parity

vec = st.lists(st.floats(-3.0, 3.0), min_size=6, max_size=6)
ints = st.lists(st.integers(-3, 3), min_size=3, max_size=3)


@given(vec)
def test_char_roundtrip(periods3, z):
    pi = periods3.period_matrix
    u = np.array(z[:3]) + 1j * np.array(z[3:])
    assert np.allclose(from_char(to_char(u, pi), pi), u, atol=1e-12)


@given(vec, ints, ints)
def test_reduce_is_lattice_invariant(periods3, z, m, mp):
    pi = periods3.period_matrix
    u = np.array(z[:3]) + 1j * np.array(z[3:])
    v = u + np.array(mp) + pi @ np.array(m)
    assert lattice_distance(u, v, pi) < 1e-11
    r = reduce(u, pi)
    assert np.allclose(reduce(r, pi), r, atol=1e-12)
    c = to_char(r, pi)
    assert np.all(c.eps > -1e-9) and np.all(c.eps < 2) and np.all(c.eps_prime > -1e-9) and np.all(c.eps_prime < 2)


def test_reduce_snaps_near_two():
    c = reduce_char(ThetaChar([2 - 1e-14, 1.0], [-1e-14, 3.0]))
    assert np.array_equal(c.eps, [0.0, 1.0]) and np.array_equal(c.eps_prime, [0.0, 1.0])


def test_lattice_distance_detects_half_periods(periods3):
    pi = periods3.period_matrix
    u = from_char(ThetaChar([1, 0, 0], [0, 0, 0]), pi)
    assert lattice_distance(u, np.zeros(3), pi) > 0.1


def test_weierstrass_table_shape():
    g = 3
    chars = [weierstrass_char(s, g) for s in range(1, 2 * g + 3)]
    assert chars[-1] == ThetaChar(np.zeros(3), np.zeros(3))
    assert chars[-2] == ThetaChar(np.zeros(3), np.ones(3))
    assert chars[0] == ThetaChar([1, 0, 0], [0, 0, 0])
    assert chars[3] == ThetaChar([0, 1, 0], [1, 1, 0])
    # the 2g + 2 half periods are distinct
    keys = {(tuple(c.eps), tuple(c.eps_prime)) for c in chars}
    assert len(keys) == 2 * g + 2
    with pytest.raises(IndexOutOfRange):
        weierstrass_char(9, 3)


@pytest.mark.parametrize("g,ep", [(3, [1, 0, 1]), (4, [0, 1, 0, 1]), (2, [0, 1])])
def test_riemann_char(g, ep):
    c = riemann_char(g)
    assert np.array_equal(c.eps, np.ones(g)) and np.array_equal(c.eps_prime, ep)
    assert np.array_equal(riemann_char(g, "left").eps_prime[0:1], [1.0])
    with pytest.raises(ValueError):
        riemann_char(g, "middle")


def test_riemann_constants_validate(curve3, periods3, K3, curve4, periods4, K4):
    for g, k, pd in ((3, K3, periods3), (4, K4, periods4)):
        assert lattice_distance(k, from_char(riemann_char(g), pd.period_matrix), pd.period_matrix) < 1e-12
    # K is a half period whose parity follows the genus
    assert char_parity(riemann_char(3)) == "even"


def test_theta_scale_deterministic(periods3):
    a = theta_scale(periods3.period_matrix)
    assert a == theta_scale(periods3.period_matrix) and a > 0
