"""Multi-branch complex Lambert W function.

W_n(z) is the n-th solution of ``w * exp(w) = z``.  Branch cuts follow the
usual convention: W_0 is cut along (-inf, -1/e], every other branch along
(-inf, 0], with values on a cut taken from the upper half plane (a signed
zero imaginary part is treated as +0).

Evaluation is Halley iteration from branch-aware seeds, vectorised over
numpy arrays.  The scalar entry point is :func:`lambert_w`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi
INV_E = np.exp(-1.0)

MAX_ITER = 60
STEP_TOL = 1e-14
RESIDUAL_TOL = 1e-12


class LambertWError(ArithmeticError):
    """Raised when a branch cannot be evaluated to the residual tolerance."""

    def __init__(self, message, branch=None, z=None):
        super().__init__(message)
        self.branch = branch
        self.z = z


@dataclass(frozen=True)
class WValue:
    """One branch value together with its round-trip residual |w e^w - z|."""

    w: complex
    residual: float
    branch: int = 0


def _seed(n, z):
    n = np.asarray(n)
    z = np.asarray(z, dtype=complex)
    n, z = np.broadcast_arrays(n, z)
    w = np.empty(z.shape, dtype=complex)

    upper = z.imag >= 0
    near_bp = np.abs(z + INV_E) < 0.3
    # candidates are evaluated everywhere and selected below; huge |z| only
    # overflows in discarded entries
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        p = np.sqrt(2.0 * (np.e * z + 1.0))
        # principal branch around the branch point and the origin
        bp0 = -1.0 + p - p**2 / 3.0 + 11.0 / 72.0 * p**3
        bpm = -1.0 - p - p**2 / 3.0 - 11.0 / 72.0 * p**3
        origin_series = z - z**2 + 1.5 * z**3
        lz = np.log(np.where(z == 0, 1.0, z))
        l1 = lz + TWO_PI * 1j * n
        asym = l1 - np.log(np.where(l1 == 0, 1.0, l1))
        lp = np.log1p(z)

    w[...] = asym
    zero = n == 0
    small = np.abs(z) <= 0.25
    w = np.where(zero & small, origin_series, w)
    mid = zero & ~small & (np.abs(z) <= 20.0)
    w = np.where(mid, lp, w)
    w = np.where(zero & ~small & (np.abs(z + INV_E) <= 0.7), bp0, w)
    real_pair = (near_bp & (((n == -1) & upper) | ((n == 1) & ~upper)))
    w = np.where(real_pair, bpm, w)
    return w


def _halley(w, z):
    """Halley iterations on w e^w - z; returns (w, converged mask)."""
    w = w.copy()
    done = np.zeros(w.shape, dtype=bool)
    for _ in range(MAX_ITER):
        ew = np.exp(w)
        f = w * ew - z
        wp1 = w + 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
            dw = np.where(denom != 0, f / denom, 0.0)
        dw = np.where(done, 0.0, dw)
        w = w - dw
        done |= np.abs(dw) <= STEP_TOL * (1.0 + np.abs(w))
        if done.all():
            break
    return w, done


def _unwound_newton(w, n, z):
    """Newton on w + log w = log z + 2 pi i n, which pins the branch index."""
    target = np.log(z) + TWO_PI * 1j * n
    for _ in range(MAX_ITER):
        dw = (w + np.log(w) - target) / (1.0 + 1.0 / w)
        w = w - dw
        if np.all(np.abs(dw) <= STEP_TOL * (1.0 + np.abs(w))):
            break
    return w


def lambert_w_array(n, z):
    """Vectorised W_n(z) for integer array ``n`` and complex ``z`` (broadcast).

    Raises :class:`LambertWError` if any element fails the residual check.
    """
    n = np.asarray(n, dtype=np.int64)
    z = np.asarray(z, dtype=complex)
    n, z = np.broadcast_arrays(n, z)
    if not np.all(np.isfinite(z)):
        raise LambertWError("non-finite argument", z=z)
    # signed zeros on the real axis are read as the upper side of the cut
    z = np.where(z.imag == 0, z.real + 0j, z)

    w = np.zeros(z.shape, dtype=complex)
    origin = z == 0
    if np.any(origin & (n != 0)):
        bad = int(n[origin & (n != 0)].flat[0])
        raise LambertWError("W_n(0) is unbounded for n != 0", branch=bad, z=0j)

    branch_pt = (np.abs(z + INV_E) <= 4 * np.finfo(float).eps) & ((n == 0) | (n == -1))
    work = ~origin & ~branch_pt
    if np.any(work):
        zw, nw = z[work], n[work]
        ww, ok = _halley(_seed(nw, zw), zw)
        # off the real axis the unwinding identity w + log w = log z + 2 pi i n
        # holds for n = 0 and |n| >= 2: use it to catch a seed that drifted
        # into a neighbouring branch
        far = (np.abs(nw) >= 2) | ((nw == 0) & (zw.imag != 0))
        if np.any(far):
            k = np.rint((ww[far] + np.log(ww[far]) - np.log(zw[far])).imag / TWO_PI)
            wrong = (k != nw[far]) | ~ok[far]
            if np.any(wrong):
                idx = np.flatnonzero(far)[wrong]
                l1 = np.log(zw[idx]) + TWO_PI * 1j * nw[idx]
                seed = np.where(nw[idx] == 0, np.log1p(zw[idx]), l1 - np.log(l1))
                ww[idx] = _unwound_newton(seed, nw[idx], zw[idx])
                ok[idx] = True
        w[work] = ww
    w[branch_pt] = -1.0

    resid = np.abs(w * np.exp(w) - z)
    # rounding in exp(w) alone costs about eps |w| relative on the far branches
    tol = np.maximum(RESIDUAL_TOL, 16 * np.finfo(float).eps * np.abs(w)) * np.maximum(1.0, np.abs(z))
    bad = ~(resid <= tol)
    if np.any(bad):
        i = np.flatnonzero(bad.ravel())[0]
        raise LambertWError(
            f"W_{int(n.flat[i])}({complex(z.flat[i])}) did not converge "
            f"(residual {resid.flat[i]:.3e})",
            branch=int(n.flat[i]),
            z=complex(z.flat[i]),
        )
    return w


def lambert_w(n: int, z: complex) -> WValue:
    """Branch ``n`` of the Lambert W function at complex ``z``.

    >>> lambert_w(0, np.e).w
    (1+0j)
    """
    z = complex(z)
    w = complex(lambert_w_array(np.array([n]), np.array([z]))[0])
    if w == -1.0 and abs(z + INV_E) <= 4 * np.finfo(float).eps:
        resid = abs(-INV_E - z)
    else:
        resid = abs(w * np.exp(w) - z)
    return WValue(w=w, residual=float(resid), branch=int(n))


def w_grid(n_min: int, n_max: int, z: complex) -> list[WValue]:
    """All branches ``n_min..n_max`` at a single argument."""
    if n_min > n_max:
        raise ValueError(f"empty branch range [{n_min}, {n_max}]")
    ns = np.arange(n_min, n_max + 1)
    try:
        ws = lambert_w_array(ns, complex(z))
    except LambertWError as exc:
        raise LambertWError(f"branch {exc.branch}: {exc}", branch=exc.branch, z=z) from exc
    resid = np.abs(ws * np.exp(ws) - z)
    return [WValue(complex(w), float(r), int(k)) for k, w, r in zip(ns, ws, resid)]
