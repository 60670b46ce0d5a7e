"""Gauss rules used throughout: Chebyshev (inverse square-root weight) and Legendre."""
from __future__ import annotations

from functools import cache

import numpy as np

from .errors import QuadratureNonconvergence


@cache
def chebyshev_rule(n: int):
    """Nodes and weights of the ``n``-point rule for ``int_{-1}^{1} f(t) / sqrt(1 - t**2) dt``."""
    i = np.arange(1, n + 1)
    t = np.cos((2 * i - 1) * np.pi / (2 * n))
    w = np.full(n, np.pi / n)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


@cache
def legendre_rule(n: int):
    t, w = np.polynomial.legendre.leggauss(n)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def chebyshev_integrate(fun, tol: float, n0: int = 16, n_max: int = 8192):
    """Integrate ``fun(t) / sqrt(1 - t**2)`` over ``[-1, 1]``, doubling the order.

    ``fun`` maps an array of nodes to an array whose last axis runs over the
    nodes; the result keeps the leading axes.  Stops when two successive
    orders agree to ``tol * max(1, |I|)``.
    """
    n = n0
    t, w = chebyshev_rule(n)
    prev = fun(t) @ w
    while n < n_max:
        n *= 2
        t, w = chebyshev_rule(n)
        cur = fun(t) @ w
        scale = max(1.0, float(np.max(np.abs(cur))))
        if np.max(np.abs(cur - prev)) <= tol * scale:
            return cur
        prev = cur
    raise QuadratureNonconvergence(f"Gauss-Chebyshev did not converge by order {n_max}")


def legendre_adaptive(fun, a: float, b: float, tol: float, n: int = 24, max_depth: int = 40):
    """Adaptive composite Gauss-Legendre integral of ``fun`` over real ``[a, b]``.

    ``fun`` maps an array of parameter values to an array whose last axis runs
    over them.  A panel is accepted when it agrees with the sum of its halves.
    """
    t, wt = legendre_rule(n)

    def panel(lo, hi):
        half = 0.5 * (hi - lo)
        return (fun(lo + half * (t + 1.0)) @ wt) * half

    total = 0.0
    stack = [(a, b, panel(a, b), 0)]
    while stack:
        lo, hi, whole, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        left, right = panel(lo, mid), panel(mid, hi)
        parts = left + right
        scale = max(1.0, float(np.max(np.abs(parts))))
        if np.max(np.abs(parts - whole)) <= tol * scale:
            total = total + parts
        elif depth >= max_depth:
            raise QuadratureNonconvergence("adaptive Gauss-Legendre exceeded its depth limit")
        else:
            stack.append((mid, hi, right, depth + 1))
            stack.append((lo, mid, left, depth + 1))
    return total
