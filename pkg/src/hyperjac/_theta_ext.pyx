# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled theta lattice-sum kernel; same contract as ``_theta_py.theta_sum``."""
import numpy as np

from libc.math cimport ceil, cos, exp, floor, sin, sqrt, M_PI

cdef enum:
    MAXG = 8


def theta_sum(double[:, ::1] X, double[:, ::1] T, double[::1] x, double[::1] c,
              double radius, bint want_grad):
    cdef int g = X.shape[0]
    if g > MAXG:
        raise ValueError("genus too large for the compiled kernel")
    cdef long m[MAXG]
    cdef long hi[MAXG]
    cdef double acc[MAXG + 1]
    cdef double r2 = radius * radius
    cdef double sre = 0.0, sim = 0.0
    cdef double gre[MAXG]
    cdef double gim[MAXG]
    cdef double t, rem, half, center, s, phase, mag, q, cr, ci
    cdef int i, j, k
    cdef long nterms = 0
    for k in range(g):
        gre[k] = 0.0
        gim[k] = 0.0
    acc[g] = 0.0
    i = g - 1
    # open level i
    t = 0.0
    half = sqrt(r2) / T[i, i]
    center = c[i]
    m[i] = <long>ceil(center - half)
    hi[i] = <long>floor(center + half)
    while True:
        if m[i] > hi[i]:
            i += 1
            if i == g:
                break
            m[i] += 1
            continue
        t = 0.0
        for j in range(i + 1, g):
            t += T[i, j] * (m[j] - c[j])
        s = T[i, i] * (m[i] - c[i]) + t
        acc[i] = acc[i + 1] + s * s
        if acc[i] >= r2:
            m[i] += 1
            continue
        if i == 0:
            q = 0.0
            for j in range(g):
                cr = 0.0
                for k in range(g):
                    cr += X[j, k] * m[k]
                q += m[j] * (cr + 2.0 * x[j])
            phase = M_PI * q
            mag = exp(-M_PI * acc[0])
            cr = mag * cos(phase)
            ci = mag * sin(phase)
            sre += cr
            sim += ci
            if want_grad:
                for k in range(g):
                    # 2 pi i m_k (cr + i ci)
                    gre[k] -= 2.0 * M_PI * m[k] * ci
                    gim[k] += 2.0 * M_PI * m[k] * cr
            nterms += 1
            m[0] += 1
        else:
            i -= 1
            t = 0.0
            for j in range(i + 1, g):
                t += T[i, j] * (m[j] - c[j])
            rem = r2 - acc[i + 1]
            if rem < 0.0:
                rem = 0.0
            half = sqrt(rem) / T[i, i]
            center = c[i] - t / T[i, i]
            m[i] = <long>ceil(center - half)
            hi[i] = <long>floor(center + half)
    grad = None
    if want_grad:
        grad = np.empty(g, dtype=complex)
        for k in range(g):
            grad[k] = complex(gre[k], gim[k])
    return complex(sre, sim), grad, nterms
