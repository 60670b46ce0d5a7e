"""Riemann theta function with controlled truncation.

``theta(u, Pi) = sum_m exp(i pi m.Pi.m + 2 pi i m.u)``.  With ``Y = Im Pi =
T^T T`` and ``c = -Y^{-1} Im u`` the sum factors as ``exp(pi y.Y^{-1}.y) * S``
where every term of ``S`` has modulus ``exp(-pi |T (m - c)|**2)``.  ``S`` is
summed over the ellipsoid ``|T (m - c)| < R`` with ``R`` chosen so that a
rigorous tail bound (lattice point counting with the shortest-vector lower
bound ``sqrt(lambda_min(Y))``) stays below ``tol``.  Truncation error is
therefore controlled on ``S``; ``|S|`` itself is the lattice-invariant
modulus of theta.

The lattice sum runs in a compiled kernel when available, otherwise in a
NumPy fallback; set ``HYPERJAC_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np
from scipy.special import gamma as _gamma
from scipy.special import gammaincc

from . import _theta_py
from .errors import InvalidPeriodMatrix, NonIntegerCharacteristic

DEFAULT_TOL = 1e-14
SYMMETRY_TOL = 1e-8

KERNELS = {"python": _theta_py.theta_sum}
try:  # pragma: no cover - depends on the build
    from ._theta_ext import theta_sum as _compiled_sum

    KERNELS["compiled"] = _compiled_sum
except ImportError:  # pragma: no cover
    pass

BACKEND = "compiled" if "compiled" in KERNELS and os.environ.get("HYPERJAC_PURE_PYTHON") != "1" else "python"


def use_backend(name: str) -> str:
    """Select the lattice-sum kernel (``"compiled"`` or ``"python"``); returns the previous one."""
    global BACKEND
    if name not in KERNELS:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(KERNELS)}")
    prev, BACKEND = BACKEND, name
    return prev


@dataclass(frozen=True, eq=False)
class ThetaChar:
    """Characteristic ``[eps, eps']``: the point ``(eps' + Pi eps) / 2``."""

    eps: np.ndarray
    eps_prime: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "eps", np.asarray(self.eps, dtype=float))
        object.__setattr__(self, "eps_prime", np.asarray(self.eps_prime, dtype=float))

    def reduced(self) -> ThetaChar:
        return ThetaChar(np.mod(self.eps, 2.0), np.mod(self.eps_prime, 2.0))

    def as_lists(self):
        return [float(v) for v in self.eps], [float(v) for v in self.eps_prime]

    def __eq__(self, other):
        return (
            isinstance(other, ThetaChar)
            and np.array_equal(self.eps, other.eps)
            and np.array_equal(self.eps_prime, other.eps_prime)
        )

    def __repr__(self):
        e, ep = self.as_lists()
        return f"ThetaChar(eps={e}, eps_prime={ep})"


@dataclass(frozen=True, eq=False)
class PeriodContext:
    """Validated ``Pi`` with the factorizations the lattice sum needs."""

    pi: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    T: np.ndarray
    y_inv: np.ndarray
    rho: float
    t_inv_norm: float


_CONTEXTS: dict = {}


def prepare(pi) -> PeriodContext:
    pi = np.asarray(pi, dtype=complex)
    key = pi.tobytes()
    ctx = _CONTEXTS.get(key)
    if ctx is not None:
        return ctx
    if pi.ndim != 2 or pi.shape[0] != pi.shape[1]:
        raise InvalidPeriodMatrix("period matrix must be square")
    scale = max(1.0, float(np.max(np.abs(pi))))
    if np.max(np.abs(pi - pi.T)) > SYMMETRY_TOL * scale:
        raise InvalidPeriodMatrix("period matrix is not symmetric")
    sym = 0.5 * (pi + pi.T)
    Y = np.ascontiguousarray(sym.imag)
    try:
        L = np.linalg.cholesky(Y)
    except np.linalg.LinAlgError:
        raise InvalidPeriodMatrix("imaginary part is not positive definite") from None
    lam = np.linalg.eigvalsh(Y)
    if lam[0] <= 0:
        raise InvalidPeriodMatrix("imaginary part is not positive definite")
    T = np.ascontiguousarray(L.T)
    ctx = PeriodContext(
        pi=sym,
        X=np.ascontiguousarray(sym.real),
        Y=Y,
        T=T,
        y_inv=np.linalg.inv(Y),
        rho=float(np.sqrt(lam[0])),
        t_inv_norm=float(np.linalg.norm(np.linalg.inv(T), 2)),
    )
    if len(_CONTEXTS) > 64:
        _CONTEXTS.clear()
    _CONTEXTS[key] = ctx
    return ctx


def _upper_gamma(a, x):
    return gammaincc(a, x) * _gamma(a)


def tail_bound(g: int, rho: float, radius: float, power: int = 0) -> float:
    """Bound on ``sum_{|T(m-c)| >= R} |T(m-c)|**power * exp(-pi |T(m-c)|**2)``.

    At most ``(1 + 2r/rho)**g`` shifted lattice points lie in a ball of
    radius ``r``; integrating against the Gaussian gives a finite sum of
    upper incomplete gamma functions.
    """
    x = np.pi * radius * radius
    total = 0.0
    for k in range(g + 1):
        p = k + power
        total += comb(g, k) * (2.0 / rho) ** k * np.pi ** (-p / 2.0) * _upper_gamma(p / 2.0 + 1.0, x)
    return float(total)


@lru_cache(maxsize=4096)
def _radius(g, rho, tol, grad_weight0, grad_weight1):
    def bound(r):
        b = tail_bound(g, rho, r)
        if grad_weight0 or grad_weight1:
            b = max(b, 2 * np.pi * (grad_weight0 * b + grad_weight1 * tail_bound(g, rho, r, 1)))
        return b

    lo, hi = 0.5, 1.0
    while bound(hi) > tol:
        lo, hi = hi, 2 * hi
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if bound(mid) > tol:
            lo = mid
        else:
            hi = mid
    return hi, bound(hi)


@dataclass(frozen=True)
class ThetaEval:
    """``theta = value * exp(log_scale)``; ``grad`` is scaled the same way."""

    value: complex
    grad: np.ndarray | None
    log_scale: float
    error_bound: float
    nterms: int

    @property
    def full(self) -> complex:
        return self.value * np.exp(self.log_scale)


def theta_parts(u, pi, tol: float = DEFAULT_TOL, want_grad: bool = False, ctx=None) -> ThetaEval:
    """Normalized lattice sum at ``u`` (see module docstring)."""
    ctx = prepare(pi) if ctx is None else ctx
    u = np.asarray(u, dtype=complex)
    y = u.imag
    c = -ctx.y_inv @ y
    g = len(u)
    if want_grad:
        w0 = float(np.round(np.max(np.abs(c)) + 0.5, 1))
        radius, err = _radius(g, ctx.rho, tol, w0, ctx.t_inv_norm)
    else:
        radius, err = _radius(g, ctx.rho, tol, 0.0, 0.0)
    s, grad, n = KERNELS[BACKEND](ctx.X, ctx.T, np.ascontiguousarray(u.real), np.ascontiguousarray(c), radius, want_grad)
    return ThetaEval(s, grad, float(np.pi * (y @ ctx.y_inv @ y)), err, n)


def theta(u, pi, tol: float = DEFAULT_TOL) -> complex:
    """Riemann theta function; absolute error ``<= tol * exp(pi y.Y^{-1}.y)``."""
    return theta_parts(u, pi, tol).full


def theta_grad(u, pi, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Gradient ``d theta / d u_s`` by the termwise-differentiated sum."""
    ev = theta_parts(u, pi, tol, want_grad=True)
    return ev.grad * np.exp(ev.log_scale)


def invariant_modulus(u, pi, tol: float = DEFAULT_TOL) -> float:
    """``|theta(u)| exp(-pi y.Y^{-1}.y)``, a function on the Jacobian."""
    return abs(theta_parts(u, pi, tol).value)


def _char_shift(c: ThetaChar, convention: str):
    if convention == "half":
        return 0.5 * c.eps, 0.5 * c.eps_prime
    if convention == "full":
        return c.eps, c.eps_prime
    raise ValueError(f"unknown characteristic convention {convention!r}")


def theta_char_parts(c: ThetaChar, u, pi, tol=DEFAULT_TOL, want_grad=False, convention="half"):
    """``theta[c](u)`` as ``(normalized value, normalized grad, log_scale)``.

    ``theta[eps, eps'](u) = exp(i pi a.Pi.a + 2 pi i a.(u + b)) theta(u + b + Pi a)``
    with ``a, b = eps/2, eps'/2`` (``convention="half"``) or ``eps, eps'``
    (``"full"``).
    """
    ctx = prepare(pi)
    a, b = _char_shift(c, convention)
    u = np.asarray(u, dtype=complex)
    v = u + b + ctx.pi @ a
    ev = theta_parts(v, pi, tol, want_grad, ctx)
    expo = 1j * np.pi * (a @ ctx.pi @ a) + 2j * np.pi * (a @ (u + b)) + ev.log_scale
    log_scale = float(np.pi * (u.imag @ ctx.y_inv @ u.imag))
    factor = np.exp(expo - log_scale)
    val = factor * ev.value
    grad = None
    if want_grad:
        grad = factor * (2j * np.pi * a * ev.value + ev.grad)
    return val, grad, log_scale


def theta_char(c: ThetaChar, u, pi, tol: float = DEFAULT_TOL, convention: str = "half") -> complex:
    val, _, ls = theta_char_parts(c, u, pi, tol, False, convention)
    return val * np.exp(ls)


def theta_char_grad(c: ThetaChar, u, pi, tol: float = DEFAULT_TOL, convention: str = "half"):
    _, grad, ls = theta_char_parts(c, u, pi, tol, True, convention)
    return grad * np.exp(ls)


def char_parity(c: ThetaChar) -> str:
    """``"odd"`` iff ``eps . eps'`` is odd; integer characteristics only."""
    e, ep = c.eps, c.eps_prime
    if not (np.all(e == np.round(e)) and np.all(ep == np.round(ep))):
        raise NonIntegerCharacteristic(f"parity needs integer entries, got {c!r}")
    return "odd" if int(np.round(e @ ep)) % 2 else "even"


def all_half_characteristics(g: int):
    """All ``4**g`` binary characteristics, ordered lexicographically by ``(eps, eps')``."""
    for e in itertools.product((0, 1), repeat=g):
        for ep in itertools.product((0, 1), repeat=g):
            yield ThetaChar(np.array(e, float), np.array(ep, float))
