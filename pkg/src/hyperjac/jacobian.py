"""The Jacobian ``C^g / (Z^g + Pi Z^g)``.

Points are plain complex ``g``-vectors; the lattice they live modulo is the
one of the period matrix passed alongside.  Characteristic coordinates
``(eps, eps')`` with ``u = (eps' + Pi eps) / 2`` are real-linear, and the
lattice corresponds to even integer characteristics.
"""
from __future__ import annotations

import itertools
from functools import cache

import numpy as np

from .errors import IndexOutOfRange, RiemannConstantValidationFailed
from .theta import ThetaChar, invariant_modulus, prepare

SNAP = 1e-12


def to_char(u, pi) -> ThetaChar:
    """Characteristic of ``u``: ``eps = 2 Y^{-1} Im u``, ``eps' = 2 Re u - X eps``."""
    ctx = prepare(pi)
    u = np.asarray(u, dtype=complex)
    eps = 2.0 * ctx.y_inv @ u.imag
    return ThetaChar(eps, 2.0 * u.real - ctx.X @ eps)


def from_char(c: ThetaChar, pi) -> np.ndarray:
    pi = prepare(pi).pi
    return 0.5 * (c.eps_prime + pi @ c.eps)


def _mod2(v):
    r = np.mod(v, 2.0)
    r[np.abs(r - 2.0) < SNAP] = 0.0
    r[np.abs(r) < SNAP] = 0.0
    return r


def reduce_char(c: ThetaChar) -> ThetaChar:
    """Characteristic entries reduced into ``[0, 2)``; values within 1e-12 of 2 snap to 0."""
    return ThetaChar(_mod2(c.eps), _mod2(c.eps_prime))


def reduce(u, pi) -> np.ndarray:
    """Canonical representative of ``u`` modulo the lattice."""
    return from_char(reduce_char(to_char(u, pi)), pi)


def lattice_residual(u, v, pi) -> np.ndarray:
    """Shortest ``u - v - m' - Pi m`` over ``m, m'`` in ``[-2, 2]^g`` after reduction.

    For each ``m`` the best integer ``m'`` is the componentwise rounding of
    the real part, clipped to ``[-2, 2]``.
    """
    ctx = prepare(pi)
    d = reduce(u, pi) - reduce(v, pi)
    g = len(d)
    r = d[None, :] - _shift_grid(g) @ ctx.pi.T
    r = r - np.clip(np.round(r.real), -2, 2)
    return r[int(np.argmin(np.linalg.norm(r, axis=1)))]


def lattice_distance(u, v, pi) -> float:
    """Distance between ``u`` and ``v`` modulo the lattice (see :func:`lattice_residual`)."""
    return float(np.linalg.norm(lattice_residual(u, v, pi)))


@cache
def _shift_grid(g):
    return np.array(list(itertools.product(range(-2, 3), repeat=g)), dtype=float)


def weierstrass_char(s: int, g: int) -> ThetaChar:
    """Characteristic of the AJ image of the branch point ``P_s`` (1-based).

    ``P_{2k-1} -> [E_k, E_1 + .. + E_{k-1}]``, ``P_{2k} -> [E_k, E_1 + .. +
    E_k]``, ``P_{2g+1} -> [0, E_1 + .. + E_g]`` and ``P_{2g+2} -> [0, 0]``.
    """
    if not 1 <= s <= 2 * g + 2:
        raise IndexOutOfRange(f"Weierstrass index {s} outside 1..{2 * g + 2}")
    eps = np.zeros(g)
    ep = np.zeros(g)
    if s <= 2 * g:
        k = (s + 1) // 2
        eps[k - 1] = 1.0
        ep[: k - 1 if s % 2 else k] = 1.0
    elif s == 2 * g + 1:
        ep[:] = 1.0
    return ThetaChar(eps, ep)


def riemann_char(g: int, alignment: str = "right") -> ThetaChar:
    """``eps = (1, .., 1)`` with ``eps'`` alternating ``1, 0, 1, ..``.

    ``"right"`` ends the alternation with 1 in the last slot, ``"left"``
    starts it with 1 in the first slot.
    """
    if alignment == "right":
        ep = [1.0 if (g - 1 - i) % 2 == 0 else 0.0 for i in range(g)]
    elif alignment == "left":
        ep = [1.0 if i % 2 == 0 else 0.0 for i in range(g)]
    else:
        raise ValueError(f"alignment must be 'right' or 'left', got {alignment!r}")
    return ThetaChar(np.ones(g), np.array(ep))


def theta_scale(pi, n: int = 50, seed: int = 0) -> float:
    """Median invariant theta modulus over ``n`` uniform random Jacobian points."""
    ctx = prepare(pi)
    g = ctx.pi.shape[0]
    rng = np.random.default_rng(seed)
    vals = []
    for _ in range(n):
        c = ThetaChar(rng.uniform(0, 2, g), rng.uniform(0, 2, g))
        vals.append(invariant_modulus(from_char(c, ctx.pi), ctx.pi))
    return float(np.median(vals))


def riemann_constants(curve, periods, n_divisors: int = 20, tol: float = 1e-7, seed: int = 0):
    """Riemann constants for the basis in use, validated by the vanishing theorem.

    Returns ``(K, characteristic, alignment)``.  Each candidate alignment is
    accepted when the invariant theta modulus at ``u(D) + K`` is below
    ``tol * theta_scale`` for ``n_divisors`` random positive divisors ``D``
    of degree ``g - 1``.
    """
    from .ajmap import aj  # local import: ajmap depends on this module
    from .curvegeom import sample_points

    pi = periods.period_matrix
    g = curve.genus
    scale = theta_scale(pi)
    rng = np.random.default_rng(seed)
    images = []
    for _ in range(n_divisors):
        pts = sample_points(curve, g - 1, rng)
        images.append(sum((aj(curve, periods, p) for p in pts), np.zeros(g, complex)))
    worst = {}
    for alignment in ("right", "left"):
        c = riemann_char(g, alignment)
        k = from_char(c, pi)
        worst[alignment] = max(invariant_modulus(e + k, pi) for e in images) / scale
        if worst[alignment] < tol:
            return k, c, alignment
    raise RiemannConstantValidationFailed(
        "no alignment of the Riemann-constants pattern passes the vanishing test "
        f"(worst relative moduli {worst})"
    )
