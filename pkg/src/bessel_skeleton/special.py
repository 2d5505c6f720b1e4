"""Deterministic analytic pieces: heat-ball boundary, conditioned-exit constants,
incomplete gamma, the renewal cost function and two dimension diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .core import DomainError, HeatBallParams

@dataclass(frozen=True)
class Quadrature:
    rel_tol: float = 1e-10
    max_subdivisions: int = 200

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise DomainError("rel_tol must be > 0")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")


def phi_right_end(delta: float, eps: float) -> float:
    """Right end ``e*eps^2/delta`` of the heat-ball time interval."""
    return math.e * eps * eps / delta


def phi(delta, eps, t):
    """Heat-ball boundary ``sqrt(delta t ln(e eps^2 / (delta t)))``.

    Accepts scalars or arrays in ``t``. Values within one ulp outside
    ``[0, e eps^2/delta]`` are clamped; both end points map to 0.
    """
    delta = float(delta)
    eps = float(eps)
    if delta <= 0 or eps <= 0:
        raise DomainError("phi needs delta > 0 and eps > 0")
    r = phi_right_end(delta, eps)
    t_arr = np.asarray(t, dtype=np.float64)
    if np.any(t_arr < np.nextafter(0.0, -np.inf)) or np.any(t_arr > np.nextafter(r, np.inf)):
        raise DomainError(f"phi is defined on [0, {r!r}]")
    t_arr = np.clip(t_arr, 0.0, r)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.sqrt(delta * t_arr * np.log(r / t_arr))
    val = np.where((t_arr == 0.0) | (t_arr == r), 0.0, val)
    val = np.minimum(val, eps)
    return float(val) if val.ndim == 0 else val


def u_alpha_beta(p: HeatBallParams, x):
    """``t^-alpha exp(-x^2/t) - beta^-alpha``; positive exactly below ``rho(p)``."""
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < 0):
        raise DomainError("u_alpha_beta needs x >= 0")
    val = p.t ** (-p.alpha) * np.exp(-x * x / p.t) - p.beta ** (-p.alpha)
    return float(val) if val.ndim == 0 else val


def rho(p: HeatBallParams) -> float:
    """Positive zero of ``x -> u_alpha_beta(p, x)``."""
    if p.t >= p.beta:
        raise DomainError("rho needs t < beta")
    return math.sqrt(p.alpha * p.t * math.log(p.beta / p.t))


# Incomplete gamma: series below a+1, Lentz continued fraction above.
_GAMMA_ITMAX = 10_000


def _gamma_series(a: float, x: float) -> float:
    # returns sum so that gamma(a, x) = x^a e^-x * sum
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_GAMMA_ITMAX):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * 1e-17:
            return total
    raise ArithmeticError(f"incomplete gamma series did not converge for a={a}, x={x}")


def _gamma_cf(a: float, x: float) -> float:
    # returns cf so that Gamma(a, x) = x^a e^-x * cf
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _GAMMA_ITMAX):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-17:
            return h
    raise ArithmeticError(f"incomplete gamma continued fraction did not converge for a={a}, x={x}")


def _check_gamma_args(a: float, x: float) -> tuple[float, float]:
    a = float(a)
    x = float(x)
    if not a > 0:
        raise DomainError(f"incomplete gamma needs a > 0, got {a!r}")
    if not x >= 0:
        raise DomainError(f"incomplete gamma needs x >= 0, got {x!r}")
    return a, x


def regularized_lower_gamma(a: float, x: float) -> float:
    """``P(a, x) = gamma(a, x) / Gamma(a)``."""
    a, x = _check_gamma_args(a, x)
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    log_pref = a * math.log(x) - x - math.lgamma(a)
    if x < a + 1.0:
        return min(1.0, math.exp(log_pref) * _gamma_series(a, x))
    return max(0.0, 1.0 - math.exp(log_pref) * _gamma_cf(a, x))


def lower_incomplete_gamma(a: float, x: float) -> float:
    """``gamma(a, x) = int_0^x y^(a-1) e^-y dy``; ``inf`` past the float range."""
    a, x = _check_gamma_args(a, x)
    if x == 0.0:
        return 0.0
    if x < a + 1.0:
        log_val = a * math.log(x) - x + math.log(_gamma_series(a, x))
    else:
        if a < 171.0:
            return math.gamma(a) * regularized_lower_gamma(a, x)
        log_val = math.lgamma(a) + math.log(regularized_lower_gamma(a, x))
    return math.exp(log_val) if log_val < 709.0 else math.inf


def kappa(p: HeatBallParams) -> float:
    """Normalizing constant of the conditioned-position density.

    Closed form ``gamma(alpha+1, alpha ln(beta/t)) / (2 alpha)`` obtained by
    integrating the defining integral by parts.
    """
    if p.t >= p.beta:
        raise DomainError("kappa needs t < beta")
    return lower_incomplete_gamma(p.alpha + 1.0, p.alpha * math.log(p.beta / p.t)) / (2.0 * p.alpha)


def kappa_quadrature(p: HeatBallParams, quad: Quadrature = Quadrature()) -> float:
    """``int_0^rho u(t, y) y^(2 alpha - 1) dy`` by adaptive quadrature.

    Integrated in ``v = y^(2 alpha)`` to remove the endpoint singularity.
    """
    r = rho(p)
    top = r ** (2.0 * p.alpha)
    inv = 1.0 / (2.0 * p.alpha)

    def integrand(v):
        return u_alpha_beta(p, v**inv) * inv

    val, _ = integrate.quad(integrand, 0.0, top, epsabs=0.0, epsrel=quad.rel_tol, limit=quad.max_subdivisions)
    return val


def expected_trials(p: HeatBallParams) -> float:
    """Mean number of proposals of the conditioned-position rejection sampler."""
    if p.t >= p.beta:
        raise DomainError("expected_trials needs t < beta")
    a = p.alpha
    log_ratio = math.log(p.beta / p.t)
    num = a**a * log_ratio**a * -math.expm1(a * math.log(p.t / p.beta))
    return num / lower_incomplete_gamma(a + 1.0, a * log_ratio)


def _check_cost_args(x, a, lam, b, mu):
    for name, v in (("x", x), ("a", a), ("lambda", lam), ("b", b), ("mu", mu)):
        if not (math.isfinite(v) and v > 0):
            raise DomainError(f"cost_F needs {name} > 0, got {v!r}")


def _expected_min_with_exp_gamma(log_c: float, b: float, mu: float) -> float:
    """``E[min(c, exp(-B))]`` for ``B ~ Gamma(b, scale=mu)``, given ``ln c``."""
    if log_c >= 0.0:
        return (1.0 + mu) ** (-b)
    z = -log_c
    below = regularized_lower_gamma(b, z / mu)
    tilted_above = 1.0 - regularized_lower_gamma(b, z * (1.0 + mu) / mu)
    return math.exp(log_c) * below + (1.0 + mu) ** (-b) * tilted_above


def cost_F(x: float, a: float, lam: float, b: float, mu: float, quad: Quadrature = Quadrature(rel_tol=1e-10)) -> float:
    """``E[min(x exp(-A), exp(-B))]`` with independent ``A ~ Gamma(a, lam)``,
    ``B ~ Gamma(b, mu)`` (shape, scale).

    The expectation over ``B`` is taken in closed form through the regularized
    incomplete gamma function; the one over ``A`` by adaptive quadrature,
    split at the kink ``A = ln x``.
    """
    x, a, lam, b, mu = map(float, (x, a, lam, b, mu))
    _check_cost_args(x, a, lam, b, mu)
    log_norm = -math.lgamma(a) - a * math.log(lam)
    log_x = math.log(x)

    def integrand(s):
        if s <= 0.0:
            return 0.0
        dens = math.exp(log_norm + (a - 1.0) * math.log(s) - s / lam)
        return dens * _expected_min_with_exp_gamma(log_x - s, b, mu)

    opts = dict(epsabs=0.0, epsrel=quad.rel_tol, limit=quad.max_subdivisions)
    mode = max((a - 1.0) * lam, 0.0)
    breaks = sorted({0.0, mode, max(math.log(x), 0.0)})
    total = 0.0
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        if hi > lo:
            total += integrate.quad(integrand, lo, hi, **opts)[0]
    total += integrate.quad(integrand, breaks[-1], np.inf, **opts)[0]
    return total


def eta(delta: float) -> float:
    """Average spheroid size relative to ``eps`` for dimension ``delta``:
    ``E[phi_{delta,eps}(tau)] / eps`` for the heat-ball exit time ``tau``."""
    delta = float(delta)
    if not delta >= 1.0:
        raise DomainError(f"eta needs delta >= 1, got {delta!r}")
    log_val = (
        0.5 * math.log(2.0 * math.pi * math.e)
        + math.lgamma(delta)
        - 2.0 * math.lgamma(delta / 2.0)
        + 0.5 * delta * math.log(delta)
        - 0.5 * (delta + 1.0) * math.log(delta + 1.0)
        + (1.0 - delta) * math.log(2.0)
    )
    return math.exp(log_val)


def eta_integral(delta: float, quad: Quadrature = Quadrature()) -> float:
    """``eta`` from its integral representation (cross-check of the closed form)."""
    delta = float(delta)
    if not delta >= 1.0:
        raise DomainError(f"eta needs delta >= 1, got {delta!r}")
    power = (delta + 1.0) / 2.0

    def integrand(u):
        if u <= 0.0 or u >= 1.0:
            return 0.0
        return (u * -math.log(u)) ** power / u

    val, _ = integrate.quad(integrand, 0.0, 1.0, epsabs=0.0, epsrel=quad.rel_tol, limit=quad.max_subdivisions)
    h = delta / 2.0
    return math.exp(0.5 + h * math.log(h) - math.lgamma(h)) * val


def _log_gaussian_moment(j: int) -> float:
    # log of int_0^inf r^j exp(-r^2/2) dr
    if j % 2 == 0:
        k = j // 2
        return 0.5 * math.log(math.pi / 2.0) + math.lgamma(2 * k + 1) - k * math.log(2.0) - math.lgamma(k + 1)
    k = (j - 1) // 2
    return k * math.log(2.0) + math.lgamma(k + 1)


def _log_wallis_product(m: int) -> float:
    # log prod_{k=0}^{m} W_k with W_0 = pi/2, W_1 = 1, W_k = (k-1)/k W_{k-2}
    logs = [math.log(math.pi / 2.0), 0.0]
    for k in range(2, m + 1):
        logs.append(math.log((k - 1) / k) + logs[k - 2])
    return math.fsum(logs[: m + 1])


def mean_abs_first_coord(delta) -> float:
    """``E|pi_1(V)|`` for ``V`` uniform on the unit sphere of ``R^delta``.

    Spherical coordinates give a product of Wallis integrals times a Gaussian
    radial moment; all factors are combined in log scale.
    """
    if isinstance(delta, bool) or not float(delta).is_integer() or delta < 1:
        raise DomainError(f"mean_abs_first_coord needs an integer delta >= 1, got {delta!r}")
    d = int(delta)
    if d == 1:
        return 1.0
    if d == 2:
        return 2.0 / math.pi
    log_val = (
        d * math.log(2.0)
        - math.log(d - 1)
        - 0.5 * d * math.log(2.0 * math.pi)
        + _log_gaussian_moment(d - 1)
        + _log_wallis_product(d - 3)
    )
    return math.exp(log_val)
