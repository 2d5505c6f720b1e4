"""Domain types and parameter validation shared across the package."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class DomainError(ValueError):
    """A parameter lies outside the region where an operation is defined."""


class FlagMismatch(ValueError):
    """The caller-declared integrality of the dimension contradicts its value."""


class HorizonError(ValueError):
    """A skeleton does not cover the requested time window."""


class MonotonicityError(ValueError):
    """A transform is not declared monotone in its space argument."""


def _finite_positive(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        raise DomainError(f"{name} must be finite and > 0, got {value!r}")
    return value


@dataclass(frozen=True)
class Precision:
    eps: float

    def __post_init__(self):
        object.__setattr__(self, "eps", _finite_positive("eps", self.eps))

    def __float__(self) -> float:
        return self.eps


@dataclass(frozen=True)
class BesselSpec:
    """Dimension, start value and precision of a Bessel path approximation.

    ``is_integer`` is declared by the caller; it selects between the integer and
    the non-integer skeleton generators and is never inferred from ``delta``.
    """

    delta: float
    y0: float
    eps: float
    is_integer: bool
    nu: float = field(init=False)

    def __post_init__(self):
        delta = float(self.delta)
        if not math.isfinite(delta) or delta < 1.0:
            raise DomainError(f"dimension delta must be >= 1, got {delta!r}")
        y0 = float(self.y0)
        if not math.isfinite(y0) or y0 < 0.0:
            raise DomainError(f"start value y0 must be >= 0, got {y0!r}")
        eps = Precision(self.eps).eps
        integral = delta.is_integer()
        if self.is_integer and not integral:
            raise FlagMismatch(f"delta={delta!r} declared integer but is not an integer")
        if not self.is_integer and integral:
            raise FlagMismatch(
                f"delta={delta!r} declared non-integer but is an integer; "
                "use the integer-dimension skeleton"
            )
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "y0", y0)
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "is_integer", bool(self.is_integer))
        object.__setattr__(self, "nu", delta / 2.0 - 1.0)

    @property
    def delta_i(self) -> int:
        return int(math.floor(self.delta))

    @property
    def delta_f(self) -> float:
        return self.delta - math.floor(self.delta)


def make_bessel_spec(delta: float, y0: float, eps: float, integer_flag: bool) -> BesselSpec:
    return BesselSpec(delta=delta, y0=y0, eps=eps, is_integer=integer_flag)


@dataclass(frozen=True)
class WeightPair:
    """Spheroid-size split between the integer and fractional components.

    The relation ``wf + 2*sqrt(wi) = 1`` makes the per-step displacement of the
    glued path at most ``eps``. ``alpha_*`` and ``beta_*`` parameterize the
    conditioned-position sampler of each component at precision ``eps``.
    """

    delta: float
    wi: float
    wf: float
    eps: float
    alpha_i: float
    alpha_f: float
    beta_i: float
    beta_f: float

    def __post_init__(self):
        expected = _weight_constants(self.delta, self.wi, self.eps)
        if abs(self.wf + 2.0 * math.sqrt(self.wi) - 1.0) > 1e-12:
            raise DomainError(f"weights violate wf + 2*sqrt(wi) = 1: wi={self.wi}, wf={self.wf}")
        for name, value in expected.items():
            got = getattr(self, name)
            if not math.isclose(got, value, rel_tol=1e-12, abs_tol=0.0):
                raise DomainError(f"inconsistent weight constant {name}: {got} != {value}")

    @property
    def delta_i(self) -> int:
        return int(math.floor(self.delta))

    @property
    def delta_f(self) -> float:
        return self.delta - math.floor(self.delta)

    def with_eps(self, eps: float) -> "WeightPair":
        return make_weights(self.delta, self.wi, eps)


def _weight_constants(delta: float, wi: float, eps: float) -> dict[str, float]:
    delta_i = math.floor(delta)
    delta_f = delta - delta_i
    wf = 1.0 - 2.0 * math.sqrt(wi)
    return {
        "alpha_i": delta_i / 2.0,
        "alpha_f": delta_f / 2.0,
        "beta_i": 2.0 * math.e * wi * eps**2 / delta_i,
        "beta_f": 2.0 * math.e * wf * eps**2 / delta_f,
    }


def make_weights(delta: float, wi: float, eps: float = 1.0) -> WeightPair:
    """Build the weight pair for a non-integer dimension ``delta > 1``.

    ``eps`` only enters ``beta_i``/``beta_f``; generators rebind the pair to the
    precision of the spec they run with.
    """
    delta = float(delta)
    wi = float(wi)
    eps = Precision(eps).eps
    if not math.isfinite(delta) or delta <= 1.0 or delta.is_integer():
        raise DomainError(f"weights need a non-integer dimension > 1, got {delta!r}")
    if not (0.0 < wi < 0.25):
        raise DomainError(f"wi must lie in (0, 1/4) so that wf = 1 - 2 sqrt(wi) is in (0, 1), got {wi!r}")
    wf = 1.0 - 2.0 * math.sqrt(wi)
    return WeightPair(delta=delta, wi=wi, wf=wf, eps=eps, **_weight_constants(delta, wi, eps))


@dataclass(frozen=True)
class HeatBallParams:
    alpha: float
    beta: float
    t: float

    def __post_init__(self):
        alpha = _finite_positive("alpha", self.alpha)
        beta = _finite_positive("beta", self.beta)
        t = float(self.t)
        if not (0.0 < t < beta):
            raise DomainError(f"time t must lie in (0, beta={beta}), got {t!r}")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "t", t)


@dataclass(frozen=True)
class SkeletonPoint:
    n: int
    u_n: float
    s_n: float
    y_n: float


@dataclass(frozen=True, eq=False)
class PathSkeleton:
    """Skeleton points ``(u_n, s_n, y_n)``, ``n = 0..N``, with ``N = n_points``.

    Row 0 is ``(0, 0, y0)``. Stored as arrays; ``points`` materializes the
    ``SkeletonPoint`` view. ``spec`` is ``None`` for a Brownian skeleton, whose
    state may be negative.
    """

    spec: BesselSpec | None
    eps: float
    T: float
    u: np.ndarray
    s: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        for name in ("u", "s", "y"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        u, s, y = self.u, self.s, self.y
        if not (u.ndim == s.ndim == y.ndim == 1 and len(u) == len(s) == len(y) >= 2):
            raise ValueError("skeleton arrays must be 1-D, equal length, with at least one step")
        if u[0] != 0.0 or s[0] != 0.0:
            raise ValueError("skeleton must start at (u, s) = (0, 0)")
        if np.any(u[1:] < 0.0) or np.any(np.diff(s) < 0.0):
            raise ValueError("skeleton times must be nondecreasing")
        if s[-1] < self.T or np.any(s[1:-1] >= self.T):
            raise ValueError("skeleton must stop at the first s_n >= T")
        if self.spec is not None and np.any(y < 0.0):
            raise ValueError("Bessel skeleton values must be nonnegative")

    @property
    def n_points(self) -> int:
        return len(self.s) - 1

    @property
    def points(self) -> list[SkeletonPoint]:
        return [
            SkeletonPoint(n, float(self.u[n]), float(self.s[n]), float(self.y[n]))
            for n in range(len(self.s))
        ]

    def __eq__(self, other):
        if not isinstance(other, PathSkeleton):
            return NotImplemented
        return (
            self.spec == other.spec
            and self.eps == other.eps
            and self.T == other.T
            and np.array_equal(self.u, other.u)
            and np.array_equal(self.s, other.s)
            and np.array_equal(self.y, other.y)
        )

    __hash__ = None
