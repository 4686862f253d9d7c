"""Branch-mode expansion of the delay equation and fast summation of its series.

For the scalar equation dc/dt = -(1/2)[c + b c(t - eta)] (gamma = 1) the
characteristic roots are indexed by the Lambert-W branches of

    z = -(eta/2) e^{eta/2} b,

with complex rates gamma_n = 1 - 2 W_n / eta and weights alpha_n = 1/(1 + W_n).

Series over branches converge only algebraically: at s = t/eta the terms fall
off like |n|^{-1-s}, and at t = 0 the symmetric partial sums of alpha_n tend
to 1/2 (the midpoint of the jump of c at t = 0), not to 1.  Plain truncation is
therefore useless beyond a few digits.  :class:`BranchSeries` sums the
explicit shell |n| <= N and adds the two tails n > N, n < -N through the
Abel-Plana formula applied to the analytic continuation W(x) of the branch
index, defined by W + log W = log z + 2 pi i x.  Substituting x -> W turns the
tail integral into incomplete exponential integrals, which are evaluated in
closed form; the remaining contour correction decays like exp(-pi y) and is
done by Gauss-Legendre quadrature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .expint import expint_n
from .lambertw import lambert_w_array
from .params import SystemParams, _sign

TWO_PI = 2.0 * math.pi
DEFAULT_N_MAX = 40
MAX_N_MAX = 5000
INITIAL_TOL = 1e-8

# contour correction: integrand ~ exp(-2 pi (1 - |a|) y) with |a| <= 1/2
_CONTOUR_Y = 13.0
_CONTOUR_NODES = 72
_gl_x, _gl_w = np.polynomial.legendre.leggauss(_CONTOUR_NODES)
_Y = 0.5 * _CONTOUR_Y * (_gl_x + 1.0)
_YW = 0.5 * _CONTOUR_Y * _gl_w / np.expm1(TWO_PI * _Y)

_NEGLIGIBLE = 1e-19
_CHUNK = 4096


@dataclass(frozen=True)
class BranchMode:
    """One characteristic root: complex rate (units of gamma) and weight."""

    n: int
    gamma_n: complex
    alpha_n: complex
    w: complex

    @property
    def shift(self) -> float:
        """Frequency shift of the resonance, -Im(W)/eta in units of gamma."""
        return 0.5 * self.gamma_n.imag

    @property
    def width(self) -> float:
        return self.gamma_n.real


class BranchSeries:
    """Sums over branches n of alpha_n exp(-gamma_n t/2) [eta/(q - W_n)]^m.

    Parameters are taken dimensionless (gamma = 1); callers rescale.
    """

    def __init__(self, params: SystemParams, sign, n_max: int = DEFAULT_N_MAX):
        if not params.eta > 0:
            raise ValueError("eta = 0 has no branch structure; use the coincident-emitter closed form")
        if n_max < 2:
            raise ValueError("n_max must be at least 2")
        self.params = params
        self.sign = _sign(sign)
        self.eta = float(params.eta)
        self.z = complex(params.lambert_arg(self.sign))
        self.degenerate = self.z == 0  # beta = 0: only the n = 0 mode exists
        self.log_z = complex(np.log(self.z)) if not self.degenerate else 0j
        self.n_max = 0
        self._extend(n_max)

    # -- branch table ------------------------------------------------------
    def _extend(self, n_max):
        if n_max <= self.n_max:
            return
        if self.degenerate:
            self.ns = np.array([0])
            self.w = np.array([0j])
        else:
            self.ns = np.arange(-n_max, n_max + 1)
            self.w = lambert_w_array(self.ns, self.z)
        self.alpha = 1.0 / (1.0 + self.w)
        self.rates = 1.0 - 2.0 * self.w / self.eta
        self.n_max = n_max

    def modes(self, n_max: int | None = None) -> list[BranchMode]:
        n_max = self.n_max if n_max is None else n_max
        self._extend(n_max)
        keep = np.abs(self.ns) <= n_max
        return [BranchMode(int(n), complex(g), complex(a), complex(w))
                for n, g, a, w in zip(self.ns[keep], self.rates[keep], self.alpha[keep], self.w[keep])]

    def continuation(self, direction: int, x):
        """W(x) on the tail side ``direction`` = +1 (n -> +inf) or -1, for complex x >= 2."""
        x = np.asarray(x, dtype=complex)
        target = self.log_z + TWO_PI * 1j * direction * x
        w = target - np.log(target)
        for _ in range(60):
            dw = (w + np.log(w) - target) / (1.0 + 1.0 / w)
            w = w - dw
            if np.all(np.abs(dw) <= 1e-15 * np.abs(w)):
                break
        return w

    def _tail_start(self, q):
        """First tail index: clear of the poles W = q and beyond the stored table."""
        m = self.n_max + 1
        if q is not None and q.size:
            qmax = float(np.max(np.abs(q)))
            need = int(math.ceil((2.0 * qmax + abs(self.log_z) + 10.0) / TWO_PI)) + 3
            if need > m:
                if need - 1 > MAX_N_MAX:
                    raise ValueError(f"frequency range needs more than {MAX_N_MAX} branches")
                self._extend(need - 1)
                m = need
        return m

    # -- summation ---------------------------------------------------------
    def evaluate(self, tau, q=None, tail: bool = True):
        """Return (sum, shell) with

            sum_n alpha_n exp(-rate_n tau/2) * [eta / (q - W_n)]^m,

        m = 0 if ``q`` is None else 1, and ``shell`` the magnitude of the two
        outermost explicit terms.  ``tau`` and ``q`` broadcast together.
        At tau = 0 (m = 0) the value is the right limit t -> 0+.
        """
        tau = np.asarray(tau, dtype=float)
        if np.any(tau < 0):
            raise ValueError("times must be non-negative")
        if q is not None:
            tau, q = np.broadcast_arrays(tau, np.asarray(q, dtype=complex))
            q = q.ravel()
        shape = tau.shape
        tau = tau.ravel()
        if self.degenerate:
            vals = np.exp(-0.5 * tau) * (1.0 if q is None else self.eta / q)
            return vals.reshape(shape), np.zeros(shape)
        M = self._tail_start(q) if tail else self.n_max + 1
        N = M - 1
        keep = np.abs(self.ns) <= N
        w, alpha = self.w[keep], self.alpha[keep]
        s = tau / self.eta

        total = np.empty(tau.size, dtype=complex)
        shell = np.empty(tau.size)
        edge = np.flatnonzero(np.abs(self.ns[keep]) == N)
        for lo in range(0, tau.size, _CHUNK):
            sl = slice(lo, lo + _CHUNK)
            terms = alpha[:, None] * np.exp(np.outer(w, s[sl]))
            if q is not None:
                terms = terms * (self.eta / (q[None, sl] - w[:, None]))
            total[sl] = terms.sum(axis=0)
            shell[sl] = np.abs(terms[edge]).sum(axis=0)
        if tail:
            total += self._tails(s, q, M)
        damp = np.exp(-0.5 * tau)
        return (damp * total).reshape(shape), (damp * shell).reshape(shape)

    def _tails(self, s, q, M):
        m = 0 if q is None else 1
        out = np.zeros(s.size, dtype=complex)
        w_edge = {d: complex(self.continuation(d, M)) for d in (1, -1)}
        w_up = {d: self.continuation(d, M + 1j * _Y) for d in (1, -1)}
        w_dn = {d: self.continuation(d, M - 1j * _Y) for d in (1, -1)}

        def factor(W, qq):
            if m == 0:
                return 1.0 / (1.0 + W)
            return self.eta / ((1.0 + W) * (qq - W))

        # first term of each tail tells whether the tail matters at all
        size = np.zeros(s.size)
        for d in (1, -1):
            g = np.exp(s * w_edge[d]) * factor(w_edge[d], q)
            size += np.abs(g) * (1.0 + M / (s + m + 0.05))
        active = np.flatnonzero(size > _NEGLIGIBLE)
        if active.size == 0:
            return out
        k_all = np.rint(s).astype(np.int64)
        for k in np.unique(k_all[active]):
            idx = active[k_all[active] == k]
            sk = s[idx]
            a = sk - k
            qk = None if q is None else q[idx]
            acc = np.zeros(idx.size, dtype=complex)
            for d in (1, -1):
                we = w_edge[d]
                ge = np.exp(sk * we) * factor(we, qk)
                # contour correction; exp(-2 pi i d x k) at x = M +/- i y is exp(+/- 2 pi d k y)
                shift = TWO_PI * d * k * _Y
                up = np.exp(np.outer(sk, w_up[d]) + shift) * (
                    factor(w_up[d][None, :], qk[:, None]) if m else factor(w_up[d], None))
                dn = np.exp(np.outer(sk, w_dn[d]) - shift) * (
                    factor(w_dn[d][None, :], qk[:, None]) if m else factor(w_dn[d], None))
                contour = 1j * ((up - dn) @ _YW)
                acc += 0.5 * ge + contour
                acc += self._tail_integral(d, int(k), a, qk, we, m)
            if m == 0 and k == 0:
                # the two divergent halves of the a = 0 integral combine into a finite limit
                zero = a == 0
                acc[zero] += (np.log(-w_edge[-1]) - np.log(-w_edge[1])) / (TWO_PI * 1j)
            out[idx] = acc
        return out

    def _tail_integral(self, d, k, a, q, w0, m):
        """(z^k eta^m / (2 pi i d)) int_{w0}^{inf} W^{-k-1} e^{aW} (q - W)^{-m} dW, per element."""
        pref = np.exp(k * self.log_z) * self.eta**m / (TWO_PI * 1j * d)
        nz = a != 0

        def power_integral(j):
            # int_{w0}^{inf} W^{-j} e^{aW} dW; the j = 1, a = 0 case is left at 0
            out = np.zeros(a.size, dtype=complex)
            if j > 1:
                out[~nz] = w0 ** (1 - j) / (j - 1)
            if np.any(nz):
                out[nz] = w0 ** (1 - j) * expint_n(j, -a[nz] * w0)
            return out

        if m == 0:
            return pref * power_integral(k + 1)
        # 1/(q - W) = -sum_l q^l / W^{l+1}, with |q/W| <= 1/2 on the tail
        ratio = float(np.max(np.abs(q / w0)))
        nterms = int(min(80, math.ceil(40.0 / max(-math.log(ratio + 1e-300), 0.5)))) + 1
        res = np.zeros(a.size, dtype=complex)
        q_pow = np.ones(a.size, dtype=complex)
        for l in range(nterms):
            res -= q_pow * power_integral(k + 2 + l)
            q_pow = q_pow * q
        return pref * res


def branch_modes(params: SystemParams, sign, n_max: int = DEFAULT_N_MAX) -> list[BranchMode]:
    """Characteristic modes for |n| <= n_max, rates in units of gamma."""
    series = BranchSeries(params, sign, n_max)
    out = []
    for mode in series.modes(n_max):
        out.append(BranchMode(mode.n, mode.gamma_n * params.gamma, mode.alpha_n, mode.w))
    return out


def laplace_weight(params: SystemParams, sign, p):
    """Closed form of sum_n alpha_n / (p + gamma_n/2) for dimensionless complex p.

    Equals 1 / (p + 1/2 + (b/2) e^{-p eta}), the Laplace transform of sqrt(2) c(t).
    """
    p = np.asarray(p, dtype=complex)
    b = params.coupling(sign)
    return 1.0 / (p + 0.5 + 0.5 * b * np.exp(-p * params.eta))
