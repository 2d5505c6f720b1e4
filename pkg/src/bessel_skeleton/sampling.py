"""Seeded random primitives consumed by the skeleton generators."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .core import DomainError, HeatBallParams

_TINY = np.finfo(np.float64).tiny


@dataclass(eq=False)
class RngStream:
    """A reproducible random stream identified by ``(seed, stream_id)``.

    Streams sharing a seed but differing in ``stream_id`` are derived through
    ``numpy.random.SeedSequence`` spawn keys and are independent. A stream has
    a single owner; do not share one across threads.
    """

    seed: int
    stream_id: int = 0
    generator: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        seed_seq = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id),))
        self.generator = np.random.Generator(np.random.PCG64(seed_seq))

    def uniform(self, size=None):
        return self.generator.random(size)


def gamma_sample(stream: RngStream, shape, scale, size=None):
    """Gamma(shape, scale) variates (scale parameterization, mean shape*scale)."""
    if np.any(np.asarray(shape) <= 0) or np.any(np.asarray(scale) <= 0):
        raise DomainError("gamma_sample needs shape > 0 and scale > 0")
    return stream.generator.gamma(shape, scale, size)


def rademacher(stream: RngStream, size=None):
    """Uniform signs in {-1, +1}."""
    draws = stream.generator.integers(0, 2, size=size)
    return 2 * draws - 1


def _check_integer_dimension(delta) -> int:
    if isinstance(delta, bool) or not float(delta).is_integer() or delta < 1:
        raise DomainError(f"sphere dimension must be an integer >= 1, got {delta!r}")
    return int(delta)


def sphere_first_coord(stream: RngStream, delta, size=None):
    """First coordinate of a uniform point on the unit sphere of ``R^delta``.

    For ``delta >= 2`` this is ``1 - 2 Beta((delta-1)/2, (delta-1)/2)`` in law,
    which costs one draw per sample whatever the dimension.
    """
    d = _check_integer_dimension(delta)
    if d == 1:
        out = rademacher(stream, size)
        return float(out) if size is None else out.astype(np.float64)
    half = (d - 1) / 2.0
    return 1.0 - 2.0 * stream.generator.beta(half, half, size)


def sphere_first_coord_gaussian(stream: RngStream, delta, size: int):
    """Same law as :func:`sphere_first_coord`, by normalizing Gaussian vectors."""
    d = _check_integer_dimension(delta)
    g = stream.generator.standard_normal((size, d))
    return g[:, 0] / np.linalg.norm(g, axis=1)


@dataclass(frozen=True)
class CdSample:
    value: float
    trials: int


def _cd_rounds(stream: RngStream, alpha, beta, t):
    """Vectorized rejection sampler for the conditioned-position law.

    One ``(R, V)`` uniform pair per pending sample per round, ``R`` first; the
    acceptance test is divided through by ``t^-alpha`` to stay finite for tiny
    ``t``. The rounds run in :func:`kernels.cd_rounds`.
    """
    alpha = np.asarray(alpha, dtype=np.float64)
    beta = np.asarray(beta, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    alpha, beta, t = np.broadcast_arrays(alpha, beta, t)
    shape = alpha.shape
    alpha, beta, t = alpha.ravel(), beta.ravel(), np.maximum(t.ravel(), _TINY)
    if np.any(alpha <= 0) or np.any(t >= beta):
        raise DomainError("conditioned-position sampler needs alpha > 0 and 0 < t < beta")
    log_ratio = np.log(beta / t)
    rho = np.sqrt(alpha * t * log_ratio)
    floor = np.exp(-alpha * log_ratio)  # (t/beta)^alpha
    values, trials = kernels.cd_rounds(stream.generator, alpha, log_ratio, floor, 1.0 - floor, rho)
    return values.reshape(shape), trials.reshape(shape)


def cd_sample(stream: RngStream, p: HeatBallParams) -> CdSample:
    """One draw from the density ``u(t, x) x^(2 alpha - 1) / kappa`` on ``[0, rho]``."""
    values, trials = _cd_rounds(stream, p.alpha, p.beta, p.t)
    return CdSample(float(values), int(trials))


def cd_sample_many(stream: RngStream, alpha, beta, t):
    """Independent conditioned-position draws for broadcast parameter arrays.

    Returns ``(values, trials)``.
    """
    return _cd_rounds(stream, alpha, beta, t)


def conditioned_bessel_position(stream: RngStream, delta, eps_scaled, t, size=None):
    """Position at time ``t`` of a ``delta``-Bessel process started at 0 and
    conditioned not to have left the heat ball of size ``eps_scaled``.

    This is the rejection sampler with ``alpha = delta/2``,
    ``beta = 2 e eps_scaled^2 / delta`` run at time ``2 t``.
    """
    delta = float(delta)
    eps_scaled = float(eps_scaled)
    if delta <= 0 or eps_scaled <= 0:
        raise DomainError("conditioned_bessel_position needs delta > 0 and eps_scaled > 0")
    window = math.e * eps_scaled**2 / delta
    t_arr = np.asarray(t, dtype=np.float64)
    if np.any(t_arr <= 0) or np.any(t_arr >= window):
        raise DomainError(f"time must lie in (0, {window!r})")
    alpha = delta / 2.0
    beta = 2.0 * math.e * eps_scaled**2 / delta
    if size is not None:
        t_arr = np.broadcast_to(t_arr, size)
    values, _ = _cd_rounds(stream, alpha, beta, 2.0 * t_arr)
    return float(values) if values.ndim == 0 else values
