import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hyperjac import theta as th
from hyperjac.errors import InvalidPeriodMatrix, NonIntegerCharacteristic
from hyperjac.theta import (
    ThetaChar,
    all_half_characteristics,
    char_parity,
    invariant_modulus,
    theta,
    theta_char,
    theta_char_parts,
    theta_grad,
    theta_parts,
)


def brute_theta(u, pi, n=9):
    """Direct sum over the box ``|m_i| <= n``."""
    g = len(u)
    total = 0j
    for m in itertools.product(range(-n, n + 1), repeat=g):
        m = np.array(m, float)
        total += np.exp(1j * np.pi * m @ pi @ m + 2j * np.pi * m @ u)
    return total


def test_brute_force(periods2):
    pi = periods2.period_matrix
    rng = np.random.default_rng(3)
    for _ in range(5):
        u = rng.normal(size=2) * 0.6 + 1j * rng.normal(size=2) * 0.3
        ref = brute_theta(u, pi)
        assert abs(theta(u, pi) - ref) < 1e-12 * max(1.0, abs(ref))


def test_brute_force_genus3(periods3):
    pi = periods3.period_matrix
    u = np.array([0.1 + 0.05j, -0.3 + 0.1j, 0.2 - 0.2j])
    ref = brute_theta(u, pi, n=6)
    assert abs(theta(u, pi) - ref) < 1e-12 * max(1.0, abs(ref))


def test_gradient_finite_differences(periods3):
    pi = periods3.period_matrix
    u = np.array([0.3 + 0.2j, -0.1 + 0.4j, 0.25 - 0.3j])
    grad = theta_grad(u, pi)
    h = 1e-5
    for s in range(3):
        e = np.zeros(3)
        e[s] = h
        fd = (theta(u + e, pi) - theta(u - e, pi)) / (2 * h)
        assert abs(fd - grad[s]) < 1e-7 * max(1.0, abs(grad[s]))


vec = st.lists(st.floats(-1.5, 1.5), min_size=6, max_size=6)
ints = st.lists(st.integers(-2, 2), min_size=3, max_size=3)


@given(vec, ints, ints)
def test_quasi_periodicity(periods3, z, m, mp):
    pi = periods3.period_matrix
    u = np.array(z[:3]) + 1j * np.array(z[3:])
    m, mp = np.array(m, float), np.array(mp, float)
    a = theta_parts(u + mp + pi @ m, pi)
    b = theta_parts(u, pi)
    # theta(u + m' + Pi m) = exp(-i pi m.Pi.m - 2 pi i m.u) theta(u)
    lhs = np.log(a.value) + a.log_scale
    rhs = np.log(b.value) + b.log_scale - 1j * np.pi * (m @ pi @ m) - 2j * np.pi * (m @ u)
    d = lhs - rhs
    d = d.real + 1j * ((d.imag + np.pi) % (2 * np.pi) - np.pi)
    assert abs(d) < 1e-10


@given(vec)
def test_invariant_modulus_is_periodic(periods3, z):
    pi = periods3.period_matrix
    u = np.array(z[:3]) + 1j * np.array(z[3:])
    shift = np.array([1, 0, -1]) + pi @ np.array([0, 1, 1])
    assert abs(invariant_modulus(u + shift, pi) - invariant_modulus(u, pi)) < 1e-12


@given(vec)
def test_even(periods3, z):
    pi = periods3.period_matrix
    u = np.array(z[:3]) + 1j * np.array(z[3:])
    assert abs(theta_parts(-u, pi).value - theta_parts(u, pi).value) < 1e-12


@pytest.mark.parametrize("g,count", [(1, 1), (2, 6), (3, 28), (4, 120)])
def test_odd_count(g, count):
    assert sum(char_parity(c) == "odd" for c in all_half_characteristics(g)) == count


@pytest.mark.parametrize("g,even_zeros", [(2, 0), (3, 1), (4, 10)])
def test_vanishing_theta_constants(request, g, even_zeros):
    # hyperelliptic curves: every odd and exactly 2^(g-1)(2^g+1) - C(2g+1, g) even theta constants vanish
    pi = request.getfixturevalue(f"periods{g}").period_matrix
    zero = np.zeros(g, complex)
    vanishing_even = 0
    for c in all_half_characteristics(g):
        v = abs(theta_char_parts(c, zero, pi)[0])
        if char_parity(c) == "odd":
            assert v < 1e-13
        elif v < 1e-12:
            vanishing_even += 1
        else:
            assert v > 1e-4
    assert vanishing_even == even_zeros


def test_char_parity_symmetry(periods3):
    pi = periods3.period_matrix
    u = np.array([0.2 + 0.1j, 0.4 - 0.2j, -0.1 + 0.3j])
    for c in list(all_half_characteristics(3))[::7]:
        sign = -1 if char_parity(c) == "odd" else 1
        a, _, _ = theta_char_parts(c, -u, pi)
        b, _, _ = theta_char_parts(c, u, pi)
        assert abs(a - sign * b) < 1e-12


def test_conventions(periods3):
    pi = periods3.period_matrix
    u = np.array([0.2 + 0.1j, 0.4 - 0.2j, -0.1 + 0.3j])
    c = ThetaChar([1, 0, 1], [0, 1, 1])
    half = ThetaChar(0.5 * c.eps, 0.5 * c.eps_prime)
    assert abs(theta_char(c, u, pi) - theta_char(half, u, pi, convention="full")) < 1e-12


def test_zero_characteristic_is_theta(periods3):
    pi = periods3.period_matrix
    u = np.array([0.2 + 0.1j, 0.4 - 0.2j, -0.1 + 0.3j])
    assert abs(theta_char(ThetaChar(np.zeros(3), np.zeros(3)), u, pi) - theta(u, pi)) < 1e-13


def test_error_bound_respected(periods3):
    ev = theta_parts(np.zeros(3), periods3.period_matrix, tol=1e-10)
    assert ev.error_bound <= 1e-10


def test_backend_parity(periods3):
    if "compiled" not in th.KERNELS:
        pytest.skip("compiled kernel not built")
    pi = periods3.period_matrix
    rng = np.random.default_rng(0)
    for _ in range(10):
        u = rng.normal(size=3) + 1j * rng.normal(size=3)
        out = {}
        for name in ("compiled", "python"):
            prev = th.use_backend(name)
            try:
                ev = theta_parts(u, pi, want_grad=True)
            finally:
                th.use_backend(prev)
            out[name] = (ev.value, ev.grad, ev.nterms)
        assert abs(out["compiled"][0] - out["python"][0]) < 1e-13
        assert np.max(np.abs(out["compiled"][1] - out["python"][1])) < 1e-12
        assert out["compiled"][2] == out["python"][2]


def test_invalid_inputs():
    with pytest.raises(InvalidPeriodMatrix):
        theta(np.zeros(2), np.array([[1j, 0.1], [0.2, 1j]]))
    with pytest.raises(InvalidPeriodMatrix):
        theta(np.zeros(2), np.array([[1j, 0], [0, -1j]]))
    with pytest.raises(NonIntegerCharacteristic):
        char_parity(ThetaChar([0.5], [1.0]))
    with pytest.raises(ValueError):
        th.use_backend("fortran")


def test_fallback_selected_by_environment():
    import os
    import subprocess
    import sys

    env = dict(os.environ, HYPERJAC_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "import hyperjac.theta as t; print(t.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"
