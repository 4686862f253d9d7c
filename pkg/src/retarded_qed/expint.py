"""Generalised exponential integral E_n(z) for integer n >= 1 and complex z.

Principal branch, cut along the negative real axis.  Vectorised over z:
continued fraction (modified Lentz) for |z| > 1, power series otherwise.
Points where the fraction stalls (close to the cut) fall back to mpmath.
"""
from __future__ import annotations

import mpmath
import numpy as np

EULER = 0.57721566490153286061
_EPS = 1e-16
_MAX_ITER = 400
_TINY = 1e-300


def _series(n, z):
    nm1 = n - 1
    ans = np.full(z.shape, 1.0 / nm1 if nm1 else 0.0, dtype=complex)
    if nm1 == 0:
        ans = -np.log(z) - EULER
    psi = -EULER + sum(1.0 / i for i in range(1, nm1 + 1))
    fact = np.ones(z.shape, dtype=complex)
    for i in range(1, _MAX_ITER):
        fact = fact * (-z / i)
        if i != nm1:
            term = -fact / (i - nm1)
        else:
            term = fact * (-np.log(z) + psi)
        ans = ans + term
        if np.all(np.abs(term) <= np.abs(ans) * _EPS):
            break
    return ans


def _fraction(n, z):
    nm1 = n - 1
    b = z + n
    c = np.full(z.shape, 1.0 / _TINY, dtype=complex)
    d = 1.0 / b
    h = d.copy()
    done = np.zeros(z.shape, dtype=bool)
    for i in range(1, _MAX_ITER):
        an = -i * (nm1 + i)
        b = b + 2.0
        d = an * d + b
        d = np.where(d == 0, _TINY, d)
        c = b + an / c
        c = np.where(c == 0, _TINY, c)
        d = 1.0 / d
        delta = c * d
        h = np.where(done, h, h * delta)
        done |= np.abs(delta - 1.0) <= _EPS
        if done.all():
            break
    return h * np.exp(-z), done


def expint_n(n: int, z):
    """E_n(z) = int_1^inf exp(-z t) t^{-n} dt, analytically continued."""
    if n < 1:
        raise ValueError("order must be a positive integer")
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape, dtype=complex)
    big = np.abs(z) > 1.0
    if np.any(~big):
        out[~big] = _series(n, z[~big])
    if np.any(big):
        vals, ok = _fraction(n, z[big])
        if not ok.all():
            bad = np.flatnonzero(~ok)
            zb = z[big][bad]
            vals[bad] = [complex(mpmath.expint(n, complex(x))) for x in zb]
        out[big] = vals
    return out
