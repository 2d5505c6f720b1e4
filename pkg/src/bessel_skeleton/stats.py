"""Renewal-cost theory and the Monte Carlo harness around the generators.

The number of skeleton points is a renewal counter. With step durations
``u_n = eps^2 M_n`` for i.i.d. arrivals ``M_n``,

    eps^2 N_T  ->  T / mu,            mu = E[M_1],
    (eps^2 N_T - T/mu) / (eps sqrt(T Var M_1 / mu^3))  ->  N(0, 1).

:class:`CostModel` stores ``mu`` and ``Var M_1 = scale^2 sigma2`` for both the
integer and the non-integer generator.
"""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy import stats as sps

from .core import BesselSpec, DomainError, WeightPair, make_bessel_spec, make_weights
from .sampling import RngStream
from .skeletons import count_points
from .special import Quadrature, cost_F


def _integer_delta(delta) -> float:
    delta = float(delta)
    if not (delta >= 1.0 and delta.is_integer()):
        raise DomainError(f"an integer dimension >= 1 is required, got {delta!r}")
    return delta


def _noninteger_delta(delta) -> float:
    delta = float(delta)
    if not (math.isfinite(delta) and delta > 1.0) or delta.is_integer():
        raise DomainError(f"a non-integer dimension > 1 is required, got {delta!r}")
    return delta


def _growth(nu: float) -> float:
    return ((nu + 2.0) / (nu + 1.0)) ** (nu + 2.0)


def theorem1_limit(delta, T: float = 1.0) -> float:
    """Limit of ``eps^2 E[N_T]`` for the integer-dimension skeleton."""
    delta = _integer_delta(delta)
    nu = delta / 2.0 - 1.0
    return delta * T / math.e * _growth(nu)


def theorem1_sigma2(delta) -> float:
    """``Var(e^{-A})`` for ``A ~ Gamma(nu+2, 1/(nu+1))``."""
    delta = _integer_delta(delta)
    nu = delta / 2.0 - 1.0
    return ((nu + 1.0) / (nu + 3.0)) ** (nu + 2.0) - ((nu + 1.0) / (nu + 2.0)) ** (2.0 * nu + 4.0)


@dataclass(frozen=True)
class CostModel:
    """Arrival law summary: ``mu = E[M]`` and ``Var M = scale**2 * sigma2``.

    ``limit_eps2_EN`` is the ``T = 1`` limit of ``eps^2 E[N_T]``, i.e. ``1/mu``.
    """

    mu: float
    sigma2: float
    limit_eps2_EN: float
    scale: float

    def __post_init__(self):
        if not self.mu > 0:
            raise DomainError("mean arrival mu must be > 0")
        if self.sigma2 < 0:
            raise DomainError("sigma2 must be >= 0")

    @property
    def var_arrival(self) -> float:
        return self.scale**2 * self.sigma2

    def limit(self, T: float) -> float:
        return T * self.limit_eps2_EN

    def expected_count(self, eps: float, T: float) -> float:
        return self.limit(T) / eps**2

    def clt_std(self, eps: float, T: float) -> float:
        """Asymptotic standard deviation of ``eps^2 N_T``."""
        return eps * math.sqrt(T * self.var_arrival / self.mu**3)

    def standardize(self, counts, eps: float, T: float):
        counts = np.asarray(counts, dtype=np.float64)
        return (eps**2 * counts - self.limit(T)) / self.clt_std(eps, T)


def integer_cost_model(delta) -> CostModel:
    delta = _integer_delta(delta)
    nu = delta / 2.0 - 1.0
    scale = math.e / delta
    mu = scale * ((nu + 1.0) / (nu + 2.0)) ** (nu + 2.0)
    return CostModel(mu=mu, sigma2=theorem1_sigma2(delta), limit_eps2_EN=theorem1_limit(delta, 1.0), scale=scale)


def _f_args(delta: float, wi: float):
    d_i = math.floor(delta)
    d_f = delta - d_i
    wf = 1.0 - 2.0 * math.sqrt(wi)
    nu_i, nu_f = d_i / 2.0 - 1.0, d_f / 2.0 - 1.0
    x = wf * d_i / (wi * d_f)
    return d_i, d_f, wf, nu_i, nu_f, x


def theorem2_limit(spec: BesselSpec | float, weights: WeightPair, quad: Quadrature | None = None) -> CostModel:
    """Cost model of the non-integer skeleton.

    ``mu = (e wi/delta_i) F(x, nu_f+2, 1/(nu_f+1), nu_i+2, 1/(nu_i+1))`` with
    ``x = wf delta_i / (wi delta_f)``, and ``sigma2 = F(x^2, ..., 2/(nu_f+1),
    ..., 2/(nu_i+1)) - F(x, ...)^2``.
    """
    delta = _noninteger_delta(spec.delta if isinstance(spec, BesselSpec) else spec)
    if abs(weights.delta - delta) > 0:
        raise DomainError(f"weights built for delta={weights.delta}, not {delta}")
    quad = quad or Quadrature(rel_tol=1e-10)
    d_i, d_f, _, nu_i, nu_f, x = _f_args(delta, weights.wi)
    a, lam = nu_f + 2.0, 1.0 / (nu_f + 1.0)
    b, mu_b = nu_i + 2.0, 1.0 / (nu_i + 1.0)
    first = cost_F(x, a, lam, b, mu_b, quad)
    second = cost_F(x * x, a, 2.0 * lam, b, 2.0 * mu_b, quad)
    scale = math.e * weights.wi / d_i
    mu = scale * first
    return CostModel(mu=mu, sigma2=max(second - first * first, 0.0), limit_eps2_EN=1.0 / mu, scale=scale)


def corollary_bound(delta, wi: float, T: float = 1.0) -> float:
    """Upper bound on the non-integer cost limit ``eps^2 E[N_T]``."""
    delta = _noninteger_delta(delta)
    d_i, d_f, wf, nu_i, nu_f, _ = _f_args(delta, wi)
    return T / math.e * max(d_i / wi, d_f / wf) * _growth(nu_i) * _growth(nu_f)


def optimal_wi(delta) -> float:
    """The ``wi`` minimizing :func:`corollary_bound`; it balances
    ``delta_i/wi = delta_f/wf``."""
    delta = _noninteger_delta(delta)
    d_i = math.floor(delta)
    d_f = delta - d_i
    return ((math.sqrt(d_i * delta) - d_i) / d_f) ** 2


def cost_model(spec: BesselSpec, weights: WeightPair | None = None) -> CostModel:
    if spec.is_integer:
        return integer_cost_model(spec.delta)
    if weights is None:
        weights = make_weights(spec.delta, optimal_wi(spec.delta), spec.eps)
    return theorem2_limit(spec, weights)


# ---------------------------------------------------------------------------
# experiments


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray

    def rows(self):
        return [(float(lo), float(hi), int(c)) for lo, hi, c in zip(self.edges[:-1], self.edges[1:], self.counts)]


def histogram(values, bins="fd") -> Histogram:
    values = np.asarray(values, dtype=np.float64)
    edges = np.histogram_bin_edges(values, bins=bins)
    counts, edges = np.histogram(values, bins=edges)
    return Histogram(edges=edges, counts=counts)


@dataclass(frozen=True, eq=False)
class RenewalStats:
    reps: int
    mean_N: float
    var_N: float
    counts: np.ndarray
    standardized: np.ndarray
    histogram: Histogram
    eps: float
    T: float
    model: CostModel

    @property
    def stderr_N(self) -> float:
        return math.sqrt(self.var_N / self.reps) if self.reps > 1 else float("nan")

    @property
    def eps2_mean_N(self) -> float:
        return self.eps**2 * self.mean_N

    @property
    def standardized_mean(self) -> float:
        return float(np.mean(self.standardized))

    @property
    def standardized_var(self) -> float:
        return float(np.var(self.standardized, ddof=1)) if self.reps > 1 else float("nan")

    def normality_pvalue(self) -> float:
        """KS test of the standardized statistics against N(0, 1); warns when
        it rejects at the 1% level (informational only)."""
        p = float(sps.kstest(self.standardized, "norm").pvalue)
        if p < 0.01:
            warnings.warn(f"standardized counts look non-Gaussian (KS p={p:.3g})", RuntimeWarning, stacklevel=2)
        return p


@dataclass(frozen=True)
class ExperimentConfig:
    spec: BesselSpec
    T: float
    reps: int
    seed: int = 0xB355E1
    weights: WeightPair | None = None
    bins: object = "fd"
    threads: int | None = None

    def __post_init__(self):
        if int(self.reps) < 1:
            raise DomainError(f"reps must be >= 1, got {self.reps!r}")
        if not float(self.T) > 0:
            raise DomainError(f"horizon T must be > 0, got {self.T!r}")


def _thread_cap(requested: int | None) -> int:
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get("SKELETON_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise DomainError(f"SKELETON_THREADS must be an integer, got {env!r}") from None
    return 1


def simulate_counts(config: ExperimentConfig) -> np.ndarray:
    """``N_T`` for reps ``k = 0..reps-1``, rep ``k`` on stream ``(seed, k)``."""
    spec, T, weights = config.spec, float(config.T), config.weights

    def one(k):
        return count_points(RngStream(config.seed, k), spec, T, weights)

    reps = int(config.reps)
    threads = _thread_cap(config.threads)
    if threads == 1:
        return np.fromiter((one(k) for k in range(reps)), dtype=np.int64, count=reps)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        # map preserves submission order, so the result is schedule independent
        return np.fromiter(pool.map(one, range(reps)), dtype=np.int64, count=reps)


def summarize(counts, spec: BesselSpec, T: float, model: CostModel, bins="fd") -> RenewalStats:
    counts = np.asarray(counts, dtype=np.int64)
    reps = len(counts)
    values = counts.astype(np.float64)
    return RenewalStats(
        reps=reps,
        mean_N=float(np.mean(values)),
        var_N=float(np.var(values, ddof=1)) if reps > 1 else 0.0,
        counts=counts,
        standardized=model.standardize(values, spec.eps, T),
        histogram=histogram(values, bins),
        eps=spec.eps,
        T=float(T),
        model=model,
    )


def run_cost_experiment(config: ExperimentConfig) -> RenewalStats:
    model = cost_model(config.spec, config.weights)
    counts = simulate_counts(config)
    return summarize(counts, config.spec, config.T, model, config.bins)


# ---------------------------------------------------------------------------
# sweeps

AXES = ("dimension", "inv_eps2", "wi")


@dataclass(frozen=True)
class SweepRow:
    axis_value: float
    mean_N: float
    stderr_N: float
    theory: float


@dataclass(frozen=True)
class SweepTable:
    axis: str
    rows: list[SweepRow]
    wi_star: float | None = None

    @property
    def axis_values(self) -> np.ndarray:
        return np.array([r.axis_value for r in self.rows])

    @property
    def mean_N(self) -> np.ndarray:
        return np.array([r.mean_N for r in self.rows])

    @property
    def theory(self) -> np.ndarray:
        return np.array([r.theory for r in self.rows])


@dataclass(frozen=True)
class SweepConfig:
    axis: str
    grid: Sequence
    base: ExperimentConfig

    def __post_init__(self):
        if self.axis not in AXES:
            raise DomainError(f"axis must be one of {AXES}, got {self.axis!r}")
        if len(self.grid) == 0:
            raise DomainError("sweep grid must be nonempty")


def _point_config(cfg: SweepConfig, value) -> ExperimentConfig:
    base = cfg.base
    spec = base.spec
    if cfg.axis == "dimension":
        # int grid entries select the integer generator, floats the non-integer one
        is_int = isinstance(value, (int, np.integer))
        new_spec = make_bessel_spec(value, spec.y0, spec.eps, is_int)
        weights = None
        if not is_int and base.weights is not None:
            weights = make_weights(value, base.weights.wi, spec.eps)
        return replace(base, spec=new_spec, weights=weights)
    if cfg.axis == "inv_eps2":
        value = float(value)
        if not value > 0:
            raise DomainError("inv_eps2 grid values must be > 0")
        new_spec = make_bessel_spec(spec.delta, spec.y0, 1.0 / math.sqrt(value), spec.is_integer)
        weights = base.weights.with_eps(new_spec.eps) if base.weights is not None else None
        return replace(base, spec=new_spec, weights=weights)
    if spec.is_integer:
        raise DomainError("the wi axis needs a non-integer dimension")
    return replace(base, weights=make_weights(spec.delta, float(value), spec.eps))


def sweep(cfg: SweepConfig) -> SweepTable:
    """One summary row per grid value; ``theory`` is the limit ``E[N_T]``."""
    rows = []
    for value in cfg.grid:
        point = _point_config(cfg, value)
        result = run_cost_experiment(point)
        theory = result.model.expected_count(point.spec.eps, point.T)
        rows.append(SweepRow(float(value), result.mean_N, result.stderr_N, theory))
    wi_star = optimal_wi(cfg.base.spec.delta) if cfg.axis == "wi" else None
    return SweepTable(cfg.axis, rows, wi_star)


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r2: float


def linear_fit(x, y) -> LinearFit:
    """Ordinary least squares line and its coefficient of determination."""
    res = sps.linregress(np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64))
    return LinearFit(float(res.slope), float(res.intercept), float(res.rvalue**2))
