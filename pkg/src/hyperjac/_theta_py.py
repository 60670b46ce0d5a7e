"""Pure NumPy theta lattice-sum kernel (fallback for the compiled extension)."""
import numpy as np


def enumerate_ellipsoid(T, c, radius):
    """Integer vectors ``m`` with ``||T (m - c)|| < radius``; ``T`` upper triangular.

    Returns the points and their squared norms.  Coordinates are fixed from
    the last one down (Fincke-Pohst), each level expanding all partial
    vectors at once.
    """
    g = T.shape[0]
    r2 = radius * radius
    pts = np.zeros((1, 0), dtype=np.int64)
    acc = np.zeros(1)
    for i in range(g - 1, -1, -1):
        if pts.shape[1]:
            t = (pts - c[i + 1 :]) @ T[i, i + 1 :]
        else:
            t = np.zeros(len(pts))
        rem = np.maximum(r2 - acc, 0.0)
        half = np.sqrt(rem) / T[i, i]
        center = c[i] - t / T[i, i]
        lo = np.ceil(center - half).astype(np.int64)
        hi = np.floor(center + half).astype(np.int64)
        counts = np.maximum(hi - lo + 1, 0)
        rep = np.repeat(np.arange(len(pts)), counts)
        start = np.repeat(np.cumsum(counts) - counts, counts)
        mi = lo[rep] + (np.arange(rep.size) - start)
        s = T[i, i] * (mi - c[i]) + t[rep]
        acc = acc[rep] + s * s
        pts = np.column_stack([mi, pts[rep]])
        keep = acc < r2
        pts, acc = pts[keep], acc[keep]
    return pts, acc


def theta_sum(X, T, x, c, radius, want_grad):
    """Normalized theta sum.

    Returns ``S = sum_m exp(i pi m.X.m + 2 pi i m.x - pi |T (m - c)|**2)``, its
    gradient ``sum_m 2 pi i m (...)`` (or None) and the number of terms.
    """
    pts, acc = enumerate_ellipsoid(T, c, radius)
    mf = pts.astype(float)
    phase = np.pi * np.einsum("ni,ij,nj->n", mf, X, mf) + 2.0 * np.pi * (mf @ x)
    terms = np.exp(-np.pi * acc) * np.exp(1j * phase)
    s = terms.sum()
    grad = (2j * np.pi) * (terms @ mf) if want_grad else None
    return complex(s), grad, len(terms)
