"""Skeleton generators for Brownian and Bessel paths, evaluation and envelopes.

Every generator draws its randomness in a fixed order from one stream:

1. exit-time variates, in blocks, until the cumulated time reaches ``T``;
2. the first coordinates ``pi1`` of the exit directions;
3. (non-integer dimension only) the conditioned positions of the component
   that did not exit.

Phase 1 alone determines ``N_T``, so :func:`count_points` reproduces the
``n_points`` of the full generator on the same stream while skipping phases
2 and 3. The radial recursion runs in :mod:`bessel_skeleton.kernels`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .core import BesselSpec, DomainError, FlagMismatch, PathSkeleton, WeightPair, make_weights
from .sampling import RngStream, cd_sample_many, rademacher, sphere_first_coord

INTEGER_EXIT = "integer-exit"
FRACTIONAL_EXIT = "fractional-exit"


@dataclass(frozen=True)
class StepRecord:
    branch: str
    u_n: float
    y_calY: float
    y_calZ: float
    pi1: float


@dataclass(frozen=True, eq=False)
class StepRecords:
    """Per-step detail of a non-integer skeleton, stored column-wise.

    ``integer_exit[k]`` is True when step ``k + 1`` ended on the integer
    component's spheroid.
    """

    integer_exit: np.ndarray
    u: np.ndarray
    calY: np.ndarray
    calZ: np.ndarray
    pi1: np.ndarray

    def __len__(self):
        return len(self.u)

    def __getitem__(self, k) -> StepRecord:
        return StepRecord(
            INTEGER_EXIT if self.integer_exit[k] else FRACTIONAL_EXIT,
            float(self.u[k]),
            float(self.calY[k]),
            float(self.calZ[k]),
            float(self.pi1[k]),
        )

    def __iter__(self):
        return (self[k] for k in range(len(self)))


@dataclass(frozen=True, eq=False)
class Envelope:
    times: np.ndarray
    lower: np.ndarray
    upper: np.ndarray


# ---------------------------------------------------------------------------
# phase 1: exit times


def _block_size(expected: float) -> int:
    return int(1.05 * expected + 6.0 * math.sqrt(expected) + 16)


def _refill_size(T: float, total: float, drawn: int) -> int:
    # the observed mean step predicts how many more draws reach T
    missing = max(T - total, 0.0) * drawn / total if total > 0 else drawn
    return _block_size(missing)


def _first_passage(u: np.ndarray, T: float) -> tuple[np.ndarray, int]:
    s = np.cumsum(u)
    idx = int(np.searchsorted(s, T, side="left"))
    return s, idx + 1


def _gamma_law(delta: float) -> tuple[float, float]:
    nu = delta / 2.0 - 1.0
    return nu + 2.0, 1.0 / (nu + 1.0)


def _mean_exp_one_minus(shape: float, scale: float) -> float:
    return math.e * (1.0 + scale) ** (-shape)


@dataclass
class _Exits:
    u: np.ndarray  # (N,)
    s: np.ndarray  # (N,)
    A: np.ndarray  # (N,) or (N, 2)
    integer_exit: np.ndarray | None = None

    @property
    def n(self) -> int:
        return len(self.u)


def _single_exits(stream, delta, scale_u, T, forced_A=None) -> _Exits:
    """Exit times ``u = scale_u * exp(1 - A)`` with ``A ~ Gamma(nu+2, 1/(nu+1))``."""
    shape, scale = _gamma_law(delta)
    if forced_A is not None:
        A = np.asarray(forced_A, dtype=np.float64)
        u = scale_u * np.exp(1.0 - A)
        s, n = _first_passage(u, T)
        if n > len(u):
            raise ValueError("forced exit variates do not reach the horizon")
        return _Exits(u[:n], s[:n], A[:n])
    block = _block_size(T / (scale_u * _mean_exp_one_minus(shape, scale)))
    chunks = []
    total = 0.0
    drawn = 0
    while True:
        A_new = stream.generator.gamma(shape, scale, block)
        chunks.append(A_new)
        drawn += block
        total += float(np.sum(scale_u * np.exp(1.0 - A_new)))
        if total >= T:
            A = np.concatenate(chunks)
            u = scale_u * np.exp(1.0 - A)
            s, n = _first_passage(u, T)
            if n <= len(u):
                return _Exits(u[:n], s[:n], A[:n])
        block = _refill_size(T, total, drawn)


def _pair_exits(stream, spec: BesselSpec, w: WeightPair, T, forced_A=None) -> _Exits:
    """Competing exit times of the integer and fractional components.

    ``A[:, 0]`` feeds the integer component, ``A[:, 1]`` the fractional one,
    drawn interleaved. The integer component exits first when
    ``A_f - A_i <= ln(wf/wi) + ln(delta_i/delta_f)`` (ties go to it).
    """
    eps2 = spec.eps**2
    d_i, d_f = spec.delta_i, spec.delta_f
    shapes = np.array(_gamma_law(d_i)[0:1] + _gamma_law(d_f)[0:1])
    scales = np.array(_gamma_law(d_i)[1:2] + _gamma_law(d_f)[1:2])
    c_i = eps2 * w.wi / d_i
    c_f = eps2 * w.wf / d_f
    threshold = math.log(w.wf / w.wi) + math.log(d_i / d_f)

    def to_u(A):
        integer_exit = (A[:, 1] - A[:, 0]) <= threshold
        u = np.where(integer_exit, c_i * np.exp(1.0 - A[:, 0]), c_f * np.exp(1.0 - A[:, 1]))
        return u, integer_exit

    if forced_A is not None:
        A = np.asarray(forced_A, dtype=np.float64).reshape(-1, 2)
        u, integer_exit = to_u(A)
        s, n = _first_passage(u, T)
        if n > len(u):
            raise ValueError("forced exit variates do not reach the horizon")
        return _Exits(u[:n], s[:n], A[:n], integer_exit[:n])

    # crude mean of the minimum, only used to size the first block
    m_i = c_i * _mean_exp_one_minus(shapes[0], scales[0])
    m_f = c_f * _mean_exp_one_minus(shapes[1], scales[1])
    block = _block_size(T * (1.0 / m_i + 1.0 / m_f))
    chunks = []
    total = 0.0
    drawn = 0
    while True:
        A_new = stream.generator.gamma(shapes, scales, (block, 2))
        chunks.append(A_new)
        drawn += block
        total += float(np.sum(to_u(A_new)[0]))
        if total >= T:
            A = np.concatenate(chunks)
            u, integer_exit = to_u(A)
            s, n = _first_passage(u, T)
            if n <= len(u):
                return _Exits(u[:n], s[:n], A[:n], integer_exit[:n])
        block = _refill_size(T, total, drawn)


# ---------------------------------------------------------------------------
# phases 2 and 3


def _radial_increment(eps_scaled, A):
    # phi_{d, eps'}(u) for u = (eps'^2/d) exp(1 - A), written without cancellation
    return eps_scaled * np.sqrt(A * np.exp(1.0 - A))


@dataclass
class _Steps:
    exits: _Exits
    pi1: np.ndarray
    a: np.ndarray
    b: np.ndarray


def _integer_steps(stream, spec: BesselSpec, T, forced_A=None, forced_pi1=None) -> _Steps:
    exits = _single_exits(stream, spec.delta, spec.eps**2 / spec.delta, T, forced_A)
    if forced_pi1 is not None:
        pi1 = np.asarray(forced_pi1, dtype=np.float64)[: exits.n]
        if len(pi1) < exits.n:
            raise ValueError("forced pi1 sequence is shorter than the skeleton")
    else:
        pi1 = np.asarray(sphere_first_coord(stream, int(spec.delta), exits.n), dtype=np.float64)
    a = _radial_increment(spec.eps, exits.A)
    return _Steps(exits, pi1, a, np.zeros_like(a))


def _noninteger_steps(stream, spec: BesselSpec, w: WeightPair, T, forced_A=None, forced_pi1=None) -> _Steps:
    exits = _pair_exits(stream, spec, w, T, forced_A)
    if forced_pi1 is not None:
        pi1 = np.asarray(forced_pi1, dtype=np.float64)[: exits.n]
        if len(pi1) < exits.n:
            raise ValueError("forced pi1 sequence is shorter than the skeleton")
    else:
        pi1 = np.asarray(sphere_first_coord(stream, spec.delta_i, exits.n), dtype=np.float64)
    ie = exits.integer_exit
    A_i, A_f = exits.A[:, 0], exits.A[:, 1]
    on_boundary_Y = _radial_increment(spec.eps * math.sqrt(w.wi), A_i)
    on_boundary_Z = _radial_increment(spec.eps * math.sqrt(w.wf), A_f)
    inside, _ = cd_sample_many(
        stream,
        np.where(ie, w.alpha_f, w.alpha_i),
        np.where(ie, w.beta_f, w.beta_i),
        2.0 * exits.u,
    )
    calY = np.where(ie, on_boundary_Y, inside)
    calZ = np.where(ie, inside, on_boundary_Z)
    return _Steps(exits, pi1, calY, calZ)


def _run_radial(y0: float, steps: Sequence[_Steps]) -> list[np.ndarray]:
    L = max(st.exits.n for st in steps)
    P = len(steps)
    pi1 = np.zeros((P, L))
    a = np.zeros((P, L))
    b = np.zeros((P, L))
    for k, st in enumerate(steps):
        n = st.exits.n
        pi1[k, :n] = st.pi1
        a[k, :n] = st.a
        b[k, :n] = st.b
    ys = kernels.radial_walk(np.full(P, float(y0)), pi1, a, b)
    return [ys[k, : st.exits.n + 1] for k, st in enumerate(steps)]


def _assemble(spec, eps, T, exits: _Exits, y: np.ndarray) -> PathSkeleton:
    u = np.concatenate(([0.0], exits.u))
    s = np.concatenate(([0.0], exits.s))
    return PathSkeleton(spec=spec, eps=eps, T=T, u=u, s=s, y=y)


def _records(steps: _Steps) -> StepRecords:
    return StepRecords(steps.exits.integer_exit.copy(), steps.exits.u.copy(), steps.a, steps.b, steps.pi1)


# ---------------------------------------------------------------------------
# public generators


def _check_horizon(T):
    T = float(T)
    if not (math.isfinite(T) and T > 0):
        raise DomainError(f"horizon T must be > 0, got {T!r}")
    return T


def brownian_skeleton(stream: RngStream, x0: float, eps: float, T: float, *, A=None, Z=None) -> PathSkeleton:
    """Brownian skeleton: exits of one-dimensional heat balls of size ``eps``.

    ``A`` and ``Z`` inject the exit variates and signs (test hook).
    """
    eps = float(eps)
    if not eps > 0:
        raise DomainError("eps must be > 0")
    T = _check_horizon(T)
    exits = _single_exits(stream, 1.0, eps * eps, T, A)
    if Z is not None:
        signs = np.asarray(Z, dtype=np.float64)[: exits.n]
        if len(signs) < exits.n:
            raise ValueError("forced sign sequence is shorter than the skeleton")
    else:
        signs = rademacher(stream, exits.n).astype(np.float64)
    x = float(x0) + np.concatenate(([0.0], np.cumsum(signs * _radial_increment(eps, exits.A))))
    return _assemble(None, eps, T, exits, x)


def _require_integer(spec: BesselSpec):
    if not spec.is_integer:
        raise FlagMismatch("spec is not declared integer; use bessel_skeleton_noninteger")


def _require_noninteger(spec: BesselSpec, weights: WeightPair) -> WeightPair:
    if spec.is_integer:
        raise FlagMismatch("spec is declared integer; use bessel_skeleton_integer")
    if weights.delta != spec.delta:
        raise DomainError(f"weights built for delta={weights.delta}, spec has delta={spec.delta}")
    return weights if weights.eps == spec.eps else weights.with_eps(spec.eps)


def bessel_skeleton_integer(stream: RngStream, spec: BesselSpec, T: float, *, A=None, pi1=None) -> PathSkeleton:
    """Integer-dimension Bessel skeleton (norm of a ``delta``-dimensional
    Brownian skeleton). ``A``/``pi1`` inject variates (test hook)."""
    _require_integer(spec)
    T = _check_horizon(T)
    steps = _integer_steps(stream, spec, T, A, pi1)
    (y,) = _run_radial(spec.y0, [steps])
    return _assemble(spec, spec.eps, T, steps.exits, y)


def bessel_skeleton_noninteger(
    stream: RngStream, spec: BesselSpec, weights: WeightPair, T: float, *, A=None, pi1=None
) -> tuple[PathSkeleton, StepRecords]:
    """Non-integer-dimension skeleton built from the integer/fractional split.

    ``A`` may inject an ``(n, 2)`` array of ``(A_i, A_f)`` pairs (test hook).
    """
    w = _require_noninteger(spec, weights)
    T = _check_horizon(T)
    steps = _noninteger_steps(stream, spec, w, T, A, pi1)
    (y,) = _run_radial(spec.y0, [steps])
    return _assemble(spec, spec.eps, T, steps.exits, y), _records(steps)


def bessel_skeletons(
    streams: Sequence[RngStream], spec: BesselSpec, T: float, weights: WeightPair | None = None
) -> list[PathSkeleton]:
    """One skeleton per stream, with the radial recursion run as one batch.

    Gives the same skeletons as calling the single-path generators on each
    stream.
    """
    T = _check_horizon(T)
    if spec.is_integer:
        steps = [_integer_steps(st, spec, T) for st in streams]
    else:
        w = _require_noninteger(spec, weights if weights is not None else default_weights(spec))
        steps = [_noninteger_steps(st, spec, w, T) for st in streams]
    ys = _run_radial(spec.y0, steps)
    return [_assemble(spec, spec.eps, T, st.exits, y) for st, y in zip(steps, ys)]


def default_weights(spec: BesselSpec) -> WeightPair:
    """Weights balancing the two spheroid families (the bound-minimizing choice)."""
    d_i, d_f = spec.delta_i, spec.delta_f
    wi = ((math.sqrt(d_i * spec.delta) - d_i) / d_f) ** 2
    return make_weights(spec.delta, wi, spec.eps)


def count_points(stream: RngStream, spec: BesselSpec, T: float, weights: WeightPair | None = None) -> int:
    """``N_T`` of the skeleton the matching generator would build on ``stream``."""
    T = _check_horizon(T)
    if spec.is_integer:
        return _single_exits(stream, spec.delta, spec.eps**2 / spec.delta, T).n
    w = _require_noninteger(spec, weights if weights is not None else default_weights(spec))
    return _pair_exits(stream, spec, w, T).n


def count_brownian_points(stream: RngStream, eps: float, T: float) -> int:
    return _single_exits(stream, 1.0, float(eps) ** 2, _check_horizon(T)).n


# ---------------------------------------------------------------------------
# evaluation


def evaluate(skeleton: PathSkeleton, t):
    """Piecewise-constant value ``y_n`` on ``[s_n, s_{n+1})``."""
    t_arr = np.asarray(t, dtype=np.float64)
    if np.any(t_arr < 0) or np.any(t_arr > skeleton.T):
        raise DomainError(f"evaluation time must lie in [0, {skeleton.T}]")
    idx = np.searchsorted(skeleton.s, t_arr, side="right") - 1
    out = skeleton.y[idx]
    return float(out) if out.ndim == 0 else out


def envelope(skeleton: PathSkeleton) -> Envelope:
    """``y_n -/+ eps`` on each interval; the lower side is floored at 0 for
    Bessel skeletons."""
    lower = skeleton.y - skeleton.eps
    if skeleton.spec is not None:
        lower = np.maximum(lower, 0.0)
    return Envelope(times=skeleton.s.copy(), lower=lower, upper=skeleton.y + skeleton.eps)
