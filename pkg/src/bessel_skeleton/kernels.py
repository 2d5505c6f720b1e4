"""Hot sequential loops, compiled with numba when available.

Set ``BESSEL_SKELETON_NUMBA=0`` before import to force the pure-numpy path.
Both paths consume identical inputs and the random stream in the same order.
The radial walk agrees bit for bit; the rejection rounds make the same
decisions and their accepted values agree to a few ulp (numpy and LLVM use
different exp/log implementations).
"""
from __future__ import annotations

import os

import numpy as np

_WANT_NUMBA = os.environ.get("BESSEL_SKELETON_NUMBA", "1").strip().lower() not in ("0", "false", "no", "off")

try:
    if not _WANT_NUMBA:
        raise ImportError
    from numba import njit
except ImportError:  # pragma: no cover - exercised via the env flag in CI
    njit = None

USING_NUMBA = njit is not None


def radial_walk_numpy(y0, pi1, a, b):
    """Radial recursion ``y_n = sqrt(y^2 + 2 y pi1 a + a^2 + b^2)`` for a batch.

    ``y0`` has shape ``(P,)``; ``pi1``, ``a``, ``b`` have shape ``(P, L)``.
    Rows shorter than ``L`` are padded with zeros, which leaves ``y`` fixed.
    Returns ``(P, L + 1)`` with column 0 equal to ``y0``. Loops over steps,
    vectorized over paths.
    """
    y0 = np.asarray(y0, dtype=np.float64)
    P, L = pi1.shape
    out = np.empty((P, L + 1))
    out[:, 0] = y0
    y = y0.copy()
    for n in range(L):
        an = a[:, n]
        bn = b[:, n]
        y = np.sqrt(y * y + 2.0 * y * pi1[:, n] * an + an * an + bn * bn)
        out[:, n + 1] = y
    return out


def _radial_walk_loops(y0, pi1, a, b):
    P, L = pi1.shape
    out = np.empty((P, L + 1))
    for p in range(P):
        y = y0[p]
        out[p, 0] = y
        for n in range(L):
            an = a[p, n]
            bn = b[p, n]
            y = np.sqrt(y * y + 2.0 * y * pi1[p, n] * an + an * an + bn * bn)
            out[p, n + 1] = y
    return out


def cd_rounds_numpy(gen, alpha, log_ratio, floor, top, rho):
    """Rejection rounds of the conditioned-position sampler.

    Each round draws one ``(R, V)`` pair per pending sample, in pending order,
    as a single ``(m, 2)`` block. The candidate is ``rho V^(1/(2 alpha))``;
    with ``L = ln(beta/t)`` its acceptance test reads
    ``R (1 - floor) + floor <= exp(-alpha L V^(1/alpha))``, ``floor = (t/beta)^alpha``.
    Returns ``(values, trials)``.
    """
    n = alpha.size
    values = np.empty(n)
    trials = np.zeros(n, dtype=np.int64)
    pending = np.arange(n)
    a, L, fl, tp, rh = alpha, log_ratio, floor, top, rho
    with np.errstate(divide="ignore"):
        while pending.size:
            uv = gen.random((pending.size, 2))
            r, v = uv[:, 0], uv[:, 1]
            trials[pending] += 1
            lv = np.log(v) / a
            cand = rh * np.exp(0.5 * lv)
            ok = (r * tp + fl <= np.exp(-a * L * np.exp(lv))) & (cand > 0.0)
            values[pending[ok]] = cand[ok]
            keep = ~ok
            pending, a, L, fl, tp, rh = pending[keep], a[keep], L[keep], fl[keep], tp[keep], rh[keep]
    return values, trials


def _cd_rounds_loops(gen, alpha, log_ratio, floor, top, rho):
    n = alpha.size
    values = np.empty(n)
    trials = np.zeros(n, dtype=np.int64)
    pending = np.arange(n)
    m = n
    while m > 0:
        uv = gen.random((m, 2))
        k = 0
        for j in range(m):
            i = pending[j]
            trials[i] += 1
            a = alpha[i]
            lv = np.log(uv[j, 1]) / a
            cand = rho[i] * np.exp(0.5 * lv)
            if uv[j, 0] * top[i] + floor[i] <= np.exp(-a * log_ratio[i] * np.exp(lv)) and cand > 0.0:
                values[i] = cand
            else:
                pending[k] = i
                k += 1
        m = k
    return values, trials


if USING_NUMBA:
    radial_walk_numba = njit(cache=True, nogil=True)(_radial_walk_loops)
    cd_rounds_numba = njit(cache=True)(_cd_rounds_loops)

    def radial_walk(y0, pi1, a, b):
        return radial_walk_numba(
            np.ascontiguousarray(y0, dtype=np.float64),
            np.ascontiguousarray(pi1, dtype=np.float64),
            np.ascontiguousarray(a, dtype=np.float64),
            np.ascontiguousarray(b, dtype=np.float64),
        )

    def cd_rounds(gen, alpha, log_ratio, floor, top, rho):
        return cd_rounds_numba(gen, *(np.ascontiguousarray(x, dtype=np.float64)
                                      for x in (alpha, log_ratio, floor, top, rho)))
else:
    radial_walk_numba = None
    cd_rounds_numba = None
    radial_walk = radial_walk_numpy
    cd_rounds = cd_rounds_numpy


def backend_name() -> str:
    return "numba" if USING_NUMBA else "numpy"
