"""Sequential coefficient kernels.

Everything here runs in increasing index order, so a result computed to
length ``n`` is a bit-exact prefix of the same result computed to any
larger length.  Generator caching relies on that.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def prefix_sum(values):
    """Neumaier-compensated running sum of a complex array."""
    n = values.shape[0]
    out = np.empty(n, dtype=np.complex128)
    sr = 0.0
    si = 0.0
    cr = 0.0
    ci = 0.0
    for k in range(n):
        x = values[k].real
        t = sr + x
        if abs(sr) >= abs(x):
            cr += (sr - t) + x
        else:
            cr += (x - t) + sr
        sr = t
        y = values[k].imag
        t = si + y
        if abs(si) >= abs(y):
            ci += (si - t) + y
        else:
            ci += (y - t) + si
        si = t
        out[k] = complex(sr + cr, si + ci)
    return out


@njit(cache=True)
def resolvent_substitution(h, lam):
    """Forward substitution for ``lam*f - C f = h`` on coefficient arrays.

    Raises nothing; the caller screens the diagonal beforehand.
    """
    n = h.shape[0]
    f = np.empty(n, dtype=np.complex128)
    sr = 0.0
    si = 0.0
    cr = 0.0
    ci = 0.0
    for k in range(n):
        s = complex(sr + cr, si + ci)
        inv = 1.0 / (k + 1.0)
        val = (h[k] + s * inv) / (lam - inv)
        f[k] = val
        x = val.real
        t = sr + x
        if abs(sr) >= abs(x):
            cr += (sr - t) + x
        else:
            cr += (x - t) + sr
        sr = t
        y = val.imag
        t = si + y
        if abs(si) >= abs(y):
            ci += (si - t) + y
        else:
            ci += (y - t) + si
        si = t
    return f


@njit(cache=True)
def holonomic_series(qpoly, ppoly, rpoly, q, count):
    """Taylor coefficients of ``F * L**q / q!`` with ``L = log(1/(1-z))``.

    ``F`` solves ``Q F' = P F`` with ``F(0) = 1``; ``R = Q / (1 - z)``.
    The family ``H_j = F L**j / j!`` obeys ``Q H_j' = P H_j + R H_{j-1}``,
    which gives one short recurrence per level.
    """
    dq = qpoly.shape[0]
    dp = ppoly.shape[0]
    dr = rpoly.shape[0]
    h = np.zeros((q + 1, count), dtype=np.complex128)
    if count == 0:
        return h[q]
    h[0, 0] = 1.0
    for n in range(count - 1):
        for j in range(q + 1):
            acc = 0.0 + 0.0j
            for t in range(dp):
                if n - t < 0:
                    break
                acc += ppoly[t] * h[j, n - t]
            if j > 0:
                for t in range(dr):
                    if n - t < 0:
                        break
                    acc += rpoly[t] * h[j - 1, n - t]
            for t in range(1, dq):
                m = n + 1 - t
                if m < 0:
                    break
                acc -= qpoly[t] * m * h[j, m]
            h[j, n + 1] = acc / (n + 1.0)
    return h[q]


@njit(cache=True)
def cesaro_step(values):
    """One application of C: compensated running sum divided by ``n + 1``."""
    out = prefix_sum(values)
    for k in range(out.shape[0]):
        out[k] = out[k] / (k + 1.0)
    return out


@njit(cache=True)
def cesaro_iterate(values, n, mode):
    """``C^n`` (mode 0), ``(1/n) sum_{m<=n} C^m`` (mode 1) or ``C^{n+1} - C^n`` (mode 2)."""
    c = values.copy()
    acc = np.zeros_like(c)
    for _ in range(n):
        c = cesaro_step(c)
        if mode == 1:
            acc += c
    if mode == 0:
        return c
    if mode == 1:
        return acc / n
    return cesaro_step(c) - c
