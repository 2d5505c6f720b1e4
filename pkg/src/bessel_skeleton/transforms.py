"""Models written as ``Y_t = f(t, Z_{rho(t)})`` for a Bessel process ``Z``.

A Bessel skeleton of precision ``eps`` then brackets ``Y`` pathwise:
``f(t, y - eps) <= Y_t <= f(t, y + eps)`` whenever ``f(t, .)`` is increasing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad, solve_ivp

from .core import DomainError, HorizonError, MonotonicityError, PathSkeleton, make_bessel_spec

CIR = "CIR"
INHOMOGENEOUS_CIR = "inhomogeneous-CIR"
CEV = "CEV"
CUSTOM = "custom"


def invert_increasing(fn, dfn, s, hi: float, tol: float = 1e-12, max_hi: float = 1e6) -> float:
    """Solve ``fn(t) = s`` for an increasing ``fn`` with ``fn(0) = 0``.

    Bisection on ``[0, hi]`` (doubling ``hi`` until it brackets), then Newton
    steps kept inside the bracket.
    """
    s = float(s)
    if s < 0:
        raise DomainError(f"time-change value must be >= 0, got {s!r}")
    if s == 0:
        return 0.0
    lo = 0.0
    while fn(hi) < s:
        lo, hi = hi, 2.0 * hi
        if hi > max_hi:
            raise DomainError(f"no time maps to {s!r} below t={max_hi}")
    for _ in range(60):
        if hi - lo <= 1e-4 * max(hi, 1.0):
            break
        mid = 0.5 * (lo + hi)
        if fn(mid) < s:
            lo = mid
        else:
            hi = mid
    t = 0.5 * (lo + hi)
    for _ in range(50):
        g = fn(t) - s
        if g < 0:
            lo = t
        else:
            hi = t
        step = g / dfn(t)
        t_new = t - step
        if not (lo <= t_new <= hi):
            t_new = 0.5 * (lo + hi)
        if abs(t_new - t) <= tol:
            return t_new
        t = t_new
    return t


@dataclass(frozen=True, eq=False)
class TransformSpec:
    """``Y_t = f(t, Z_{rho(t)})`` with ``Z`` a ``delta``-Bessel process from ``y0``."""

    kind: str
    f: Callable
    rho: Callable
    rho_inv: Callable
    rho_prime: Callable
    delta: float
    y0: float
    monotone_in_x: bool
    params: dict = field(default_factory=dict)

    def bessel_spec(self, eps: float):
        """Bessel spec to simulate; integrality is read off the exact value of ``delta``."""
        return make_bessel_spec(self.delta, self.y0, eps, float(self.delta).is_integer())


@dataclass(frozen=True)
class CirParams:
    k: float
    theta: float
    sigma: float
    x0: float

    def __post_init__(self):
        if not (self.k * self.theta > 0):
            raise DomainError(f"CIR needs k*theta > 0, got k={self.k}, theta={self.theta}")
        if not self.sigma > 0:
            raise DomainError(f"CIR needs sigma > 0, got {self.sigma}")
        if not self.x0 >= 0:
            raise DomainError(f"CIR needs x0 >= 0, got {self.x0}")

    @property
    def delta(self) -> float:
        return 4.0 * self.k * self.theta / self.sigma**2


def cir_transform(p: CirParams) -> TransformSpec:
    """``f(t, x) = e^{-kt} x^2``, ``rho(t) = sigma^2/(4k) (e^{kt} - 1)``,
    ``delta = 4 k theta / sigma^2``, ``y = sqrt(x0)``."""
    k, s2 = float(p.k), float(p.sigma) ** 2

    def f(t, x):
        return np.exp(-k * np.asarray(t)) * np.asarray(x) ** 2

    def rho(t):
        return s2 / (4.0 * k) * np.expm1(k * np.asarray(t, dtype=np.float64))

    def rho_prime(t):
        return s2 / 4.0 * np.exp(k * np.asarray(t, dtype=np.float64))

    def rho_inv(s):
        s = np.asarray(s, dtype=np.float64)
        arg = 4.0 * k * s / s2
        if np.any(s < 0) or np.any(arg <= -1.0):
            raise DomainError("value outside the range of the time change")
        return np.log1p(arg) / k

    return TransformSpec(CIR, f, rho, rho_inv, rho_prime, p.delta, math.sqrt(p.x0), True,
                         {"k": k, "theta": float(p.theta), "sigma": float(p.sigma), "x0": float(p.x0)})


def inhomogeneous_cir_transform(a: float, sigma: float, lam: Callable, x0: float, horizon: float = 10.0,
                                rel_tol: float = 1e-8) -> TransformSpec:
    """CIR with mean-reversion rate ``lam(t)``:
    ``f(t, x) = sigma^2/(4 rho'(t)) x^2 = e^{-Lambda(t)} x^2``,
    ``rho(t) = sigma^2/4 int_0^t e^{Lambda(s)} ds``, ``Lambda(t) = int_0^t lam``,
    ``delta = 4a/sigma^2``.

    ``Lambda`` and ``rho`` are integrated jointly as an ODE on ``[0, horizon]``
    with dense output; :func:`rho_by_quadrature` is the direct double integral.
    """
    if not a > 0 or not sigma > 0:
        raise DomainError(f"inhomogeneous CIR needs a > 0 and sigma > 0, got a={a}, sigma={sigma}")
    if not x0 >= 0 or not horizon > 0:
        raise DomainError("x0 must be >= 0 and horizon > 0")
    s2 = float(sigma) ** 2
    tol = min(rel_tol, 1e-10) * 1e-2
    sol = solve_ivp(
        lambda t, z: [lam(t), s2 / 4.0 * math.exp(z[0])],
        (0.0, float(horizon)),
        [0.0, 0.0],
        method="DOP853",
        rtol=tol,
        atol=tol * 1e-3,
        dense_output=True,
    )
    if not sol.success:  # pragma: no cover
        raise DomainError(f"time-change integration failed: {sol.message}")
    dense = sol.sol

    def _check(t):
        t = np.asarray(t, dtype=np.float64)
        if np.any(t < 0) or np.any(t > horizon):
            raise DomainError(f"time outside [0, {horizon}]")
        return t

    def big_lambda(t):
        return dense(_check(t))[0]

    def rho(t):
        t = _check(t)
        out = dense(t)[1]
        return np.where(t == 0.0, 0.0, out)

    def rho_prime(t):
        return s2 / 4.0 * np.exp(big_lambda(t))

    def f(t, x):
        return np.exp(-big_lambda(t)) * np.asarray(x) ** 2

    def rho_inv(s):
        s_arr = np.asarray(s, dtype=np.float64)
        if np.any(s_arr > float(rho(horizon))):
            raise DomainError(f"value beyond rho(horizon={horizon})")
        out = np.array([invert_increasing(lambda t: float(rho(t)), lambda t: float(rho_prime(t)), v,
                                          hi=min(1.0, horizon), max_hi=horizon) for v in s_arr.ravel()])
        out = out.reshape(s_arr.shape)
        return float(out) if out.ndim == 0 else out

    return TransformSpec(INHOMOGENEOUS_CIR, f, rho, rho_inv, rho_prime, 4.0 * a / s2, math.sqrt(x0), True,
                         {"a": float(a), "sigma": float(sigma), "x0": float(x0), "horizon": float(horizon),
                          "lam": lam})


def rho_by_quadrature(sigma: float, lam: Callable, t: float, rel_tol: float = 1e-10) -> float:
    """``sigma^2/4 int_0^t exp(int_0^s lam) ds`` by nested adaptive quadrature."""
    inner = lambda s: quad(lam, 0.0, s, epsabs=0.0, epsrel=rel_tol)[0]  # noqa: E731
    outer = quad(lambda s: math.exp(inner(s)), 0.0, t, epsabs=0.0, epsrel=rel_tol)[0]
    return sigma**2 / 4.0 * outer


def cev_transform(mu: float, sigma: float, beta: float, x0: float) -> TransformSpec:
    """CEV ``dY = Y (mu dt + sigma Y^beta dB)`` as a mapped Bessel process.

    With ``alpha = -1/beta``: ``f(t, x) = e^{mu t} x^alpha``,
    ``rho(t) = beta^2 sigma^2 (e^{2 beta mu t} - 1)/(2 beta mu)`` (``beta^2 sigma^2 t``
    when ``mu = 0``), ``delta = 2 + 1/beta``, ``y = x0^{-beta}``. Supported for
    ``beta <= -1``, where ``delta`` lies in ``[1, 2)`` and ``f`` is increasing.
    """
    mu, sigma, beta, x0 = float(mu), float(sigma), float(beta), float(x0)
    if not sigma > 0:
        raise DomainError(f"CEV needs sigma > 0, got {sigma}")
    if not beta <= -1.0 or not math.isfinite(beta):
        raise DomainError(f"CEV mapping is supported for beta <= -1 only, got {beta}")
    if not x0 >= 0:
        raise DomainError(f"CEV needs x0 >= 0, got {x0}")
    alpha = -1.0 / beta
    c = beta**2 * sigma**2
    kk = 2.0 * beta * mu

    def f(t, x):
        return np.exp(mu * np.asarray(t)) * np.asarray(x, dtype=np.float64) ** alpha

    def rho(t):
        t = np.asarray(t, dtype=np.float64)
        return c * t if kk == 0 else c * np.expm1(kk * t) / kk

    def rho_prime(t):
        return c * np.exp(kk * np.asarray(t, dtype=np.float64))

    def rho_inv(s):
        s = np.asarray(s, dtype=np.float64)
        if np.any(s < 0):
            raise DomainError("time-change value must be >= 0")
        if kk == 0:
            return s / c
        arg = kk * s / c
        if np.any(arg <= -1.0):
            raise DomainError("value outside the range of the time change")
        return np.log1p(arg) / kk

    return TransformSpec(CEV, f, rho, rho_inv, rho_prime, 2.0 + 1.0 / beta, x0 ** (-beta), True,
                         {"mu": mu, "sigma": sigma, "beta": beta, "x0": x0, "alpha": alpha})


@dataclass(frozen=True, eq=False)
class TransportedBounds:
    """Bounds at the observation times ``t_n = rho^{-1}(s_n)`` inside ``[0, T0]``."""

    t: np.ndarray
    lower: np.ndarray
    mid: np.ndarray
    upper: np.ndarray
    s: np.ndarray
    y: np.ndarray


def _window(spec: TransformSpec, skeleton: PathSkeleton, T0: float):
    if not spec.monotone_in_x:
        raise MonotonicityError("bounds need f(t, .) nondecreasing in x")
    T0 = float(T0)
    if not T0 > 0:
        raise DomainError(f"T0 must be > 0, got {T0!r}")
    s_end = float(spec.rho(T0))
    if skeleton.T < s_end * (1.0 - 1e-12):
        raise HorizonError(f"skeleton horizon {skeleton.T} is shorter than rho(T0) = {s_end}")
    keep = skeleton.s <= s_end
    return T0, s_end, keep


def transported_bounds(spec: TransformSpec, skeleton: PathSkeleton, T0: float) -> TransportedBounds:
    """``f(t, max(y_n - eps, 0)) <= Y_t <= f(t, y_n + eps)`` at ``t = rho^{-1}(s_n)``
    for every skeleton time ``s_n <= rho(T0)``."""
    T0, _, keep = _window(spec, skeleton, T0)
    s = skeleton.s[keep]
    y = skeleton.y[keep]
    t = np.minimum(np.asarray(spec.rho_inv(s), dtype=np.float64), T0)
    eps = skeleton.eps
    return TransportedBounds(
        t=t,
        lower=np.asarray(spec.f(t, np.maximum(y - eps, 0.0)), dtype=np.float64),
        mid=np.asarray(spec.f(t, y), dtype=np.float64),
        upper=np.asarray(spec.f(t, y + eps), dtype=np.float64),
        s=s.copy(),
        y=y.copy(),
    )


def precision_variable(spec: TransformSpec, skeleton: PathSkeleton, T0: float = 2.0) -> float:
    """Worst width ``|f(t, y + eps) - f(t, y - eps)|`` of the transported tube on ``[0, T0]``.

    ``y`` is the skeleton value in force at ``rho(t)``. The width is taken at
    both ends of every constant piece inside the window, which gives the
    supremum whenever the width is monotone in ``t`` on each piece.
    """
    T0, s_end, keep = _window(spec, skeleton, T0)
    s = skeleton.s[keep]
    y = skeleton.y[keep]
    t_left = np.minimum(np.asarray(spec.rho_inv(s), dtype=np.float64), T0)
    right_s = np.minimum(np.append(s[1:], s_end), s_end)
    t_right = np.minimum(np.asarray(spec.rho_inv(right_s), dtype=np.float64), T0)
    eps = skeleton.eps
    widths = []
    for t in (t_left, t_right):
        widths.append(np.abs(np.asarray(spec.f(t, y + eps)) - np.asarray(spec.f(t, y - eps))))
    return float(np.max(np.concatenate(widths)))


def precision_variable_explicit(spec: TransformSpec, skeleton: PathSkeleton, T0: float = 2.0) -> float:
    """Closed form for CIR with ``k > 0``: ``4 eps max{y_n e^{-k rho^{-1}(s_n)} : s_n <= rho(T0)}``."""
    if spec.kind != CIR:
        raise DomainError("the explicit precision form exists for the CIR transform only")
    k = spec.params["k"]
    if not k > 0:
        raise DomainError("the explicit precision form needs k > 0")
    _, _, keep = _window(spec, skeleton, T0)
    t = np.asarray(spec.rho_inv(skeleton.s[keep]), dtype=np.float64)
    return float(4.0 * skeleton.eps * np.max(skeleton.y[keep] * np.exp(-k * t)))
