import math

import numpy as np
import pytest

from bessel_skeleton.core import DomainError, FlagMismatch, make_bessel_spec, make_weights
from bessel_skeleton.sampling import RngStream
from bessel_skeleton.skeletons import (
    FRACTIONAL_EXIT,
    INTEGER_EXIT,
    bessel_skeleton_integer,
    bessel_skeleton_noninteger,
    bessel_skeletons,
    brownian_skeleton,
    count_brownian_points,
    count_points,
    default_weights,
    envelope,
    evaluate,
)
from bessel_skeleton.stats import cost_model


def test_brownian_forced_unit_variates():
    eps = 0.5
    sk = brownian_skeleton(RngStream(0), 0.3, eps, 1.0, A=np.ones(10), Z=np.ones(10))
    assert sk.n_points == 4
    np.testing.assert_allclose(sk.u[1:], eps**2, rtol=1e-15)
    np.testing.assert_allclose(np.diff(sk.y), eps, rtol=1e-15)
    assert sk.s[-1] == pytest.approx(1.0)


def test_forced_sequences_too_short():
    with pytest.raises(ValueError):
        brownian_skeleton(RngStream(0), 0.0, 0.5, 1.0, A=np.ones(2), Z=np.ones(2))
    with pytest.raises(ValueError):
        brownian_skeleton(RngStream(0), 0.0, 0.5, 1.0, A=np.ones(10), Z=np.ones(2))


def test_integer_from_zero_first_step_is_heat_ball_radius():
    spec = make_bessel_spec(3, 0.0, 0.2, True)
    A = np.array([0.7, 1.3, 2.0, 0.4] * 200)
    sk = bessel_skeleton_integer(RngStream(0), spec, 0.1, A=A, pi1=np.full(800, -0.4))
    assert sk.y[1] == pytest.approx(0.2 * math.sqrt(0.7 * math.exp(0.3)), rel=1e-14)


def test_integer_aligned_steps_add_up():
    spec = make_bessel_spec(2, 1.0, 0.1, True)
    A = np.full(500, 1.5)
    sk = bessel_skeleton_integer(RngStream(0), spec, 0.05, A=A, pi1=np.ones(500))
    step = 0.1 * math.sqrt(1.5 * math.exp(-0.5))
    np.testing.assert_allclose(np.diff(sk.y), step, rtol=1e-12)
    np.testing.assert_allclose(sk.u[1:], 0.01 / 2 * math.exp(-0.5), rtol=1e-15)


def test_dimension_one_is_reflected_brownian():
    eps, T = 0.1, 1.0
    b = brownian_skeleton(RngStream(21), 5.0, eps, T)
    r = bessel_skeleton_integer(RngStream(21), make_bessel_spec(1, 5.0, eps, True), T)
    assert np.array_equal(b.u, r.u)
    assert b.y.min() > 0
    np.testing.assert_allclose(r.y, b.y, rtol=1e-13)


@pytest.mark.parametrize("delta, y0", [(1, 0.0), (2, 0.5), (3, 0.0), (7, 2.0)])
def test_integer_invariants(delta, y0):
    eps, T = 0.1, 0.5
    sk = bessel_skeleton_integer(RngStream(3, delta), make_bessel_spec(delta, y0, eps, True), T)
    assert sk.s[0] == 0 and sk.y[0] == y0
    assert np.all(np.diff(sk.s) >= 0)
    assert sk.s[-1] >= T and sk.s[-2] < T
    assert np.all(sk.y >= 0)
    assert np.all(np.abs(np.diff(sk.y)) <= eps * (1 + 1e-12))
    assert count_points(RngStream(3, delta), sk.spec, T) == sk.n_points


def test_noninteger_forced_branch_and_time():
    spec = make_bessel_spec(2.2, 0.0, 0.1, False)
    w = make_weights(2.2, 0.0625, 0.1)
    rng = np.random.default_rng(5)
    A = np.column_stack([rng.gamma(2.0, 1.0, 5000), rng.gamma(1.1, 1 / 0.1, 5000)])
    sk, rec = bessel_skeleton_noninteger(RngStream(0), spec, w, 0.02, A=A)
    n = sk.n_points
    u_i = 0.01 * w.wi / 2 * np.exp(1 - A[:n, 0])
    u_f = 0.01 * w.wf / 0.2 * np.exp(1 - A[:n, 1])
    np.testing.assert_allclose(rec.u, np.minimum(u_i, u_f), rtol=1e-14)
    assert np.array_equal(rec.integer_exit, u_i <= u_f * (1 + 1e-12))
    assert {r.branch for r in rec} == {INTEGER_EXIT, FRACTIONAL_EXIT}
    # first step from the origin
    assert sk.y[1] == pytest.approx(math.hypot(rec.calY[0], rec.calZ[0]), rel=1e-14)


def test_noninteger_records_within_balls():
    spec = make_bessel_spec(3.4, 0.3, 0.1, False)
    w = default_weights(spec)
    sk, rec = bessel_skeleton_noninteger(RngStream(8), spec, w, 0.3)
    assert len(rec) == sk.n_points
    assert np.all(rec.calY <= 0.1 * math.sqrt(w.wi) * (1 + 1e-12))
    assert np.all(rec.calZ <= 0.1 * math.sqrt(w.wf) * (1 + 1e-12))
    assert np.all((rec.calY >= 0) & (rec.calZ >= 0))
    assert np.all(np.abs(rec.pi1) <= 1)
    assert np.all(np.abs(np.diff(sk.y)) <= 0.1 * (1 - math.sqrt(w.wi)) * (1 + 1e-12))
    assert count_points(RngStream(8), spec, 0.3, w) == sk.n_points


def test_batch_matches_single_paths():
    spec = make_bessel_spec(2.5, 0.2, 0.1, False)
    w = default_weights(spec)
    batch = bessel_skeletons([RngStream(1, k) for k in range(4)], spec, 0.2, w)
    for k, sk in enumerate(batch):
        single, _ = bessel_skeleton_noninteger(RngStream(1, k), spec, w, 0.2)
        assert sk == single
    spec_i = make_bessel_spec(4, 0.2, 0.1, True)
    batch = bessel_skeletons([RngStream(2, k) for k in range(3)], spec_i, 0.2)
    for k, sk in enumerate(batch):
        assert sk == bessel_skeleton_integer(RngStream(2, k), spec_i, 0.2)


def test_same_seed_same_skeleton():
    spec = make_bessel_spec(2.2, 0.1, 0.1, False)
    w = default_weights(spec)
    a, _ = bessel_skeleton_noninteger(RngStream(4), spec, w, 0.5)
    b, _ = bessel_skeleton_noninteger(RngStream(4), spec, w, 0.5)
    c, _ = bessel_skeleton_noninteger(RngStream(5), spec, w, 0.5)
    assert a == b and a != c


def test_mean_count_matches_renewal_limit():
    spec = make_bessel_spec(2.2, 0.5, 0.05, False)
    w = make_weights(2.2, 0.0625, 0.05)
    counts = np.array([count_points(RngStream(77, k), spec, 1.0, w) for k in range(300)])
    model = cost_model(spec, w)
    expected = model.expected_count(0.05, 1.0)
    assert expected == pytest.approx(44734, abs=1)
    assert abs(counts.mean() - expected) <= 4 * counts.std(ddof=1) / math.sqrt(counts.size) + 2


def test_brownian_count_matches_full_generator():
    sk = brownian_skeleton(RngStream(6), 0.0, 0.1, 2.0)
    assert count_brownian_points(RngStream(6), 0.1, 2.0) == sk.n_points


def test_evaluate_and_envelope():
    sk = brownian_skeleton(RngStream(0), 0.0, 0.5, 1.0, A=np.ones(10), Z=np.array([1, -1, -1, 1] + [1] * 6))
    assert evaluate(sk, 0.0) == 0.0
    assert evaluate(sk, 0.25) == 0.5
    assert evaluate(sk, 0.7) == pytest.approx(0.0)
    assert evaluate(sk, 0.8) == pytest.approx(-0.5)
    assert evaluate(sk, 1.0) == pytest.approx(0.0)
    np.testing.assert_allclose(evaluate(sk, np.array([0.1, 0.3])), [0.0, 0.5])
    env = envelope(sk)
    assert env.lower[3] == pytest.approx(-1.0)  # Brownian: no floor
    spec = make_bessel_spec(2, 0.0, 0.3, True)
    bs = bessel_skeleton_integer(RngStream(1), spec, 0.2)
    env = envelope(bs)
    assert env.lower[0] == 0.0 and env.upper[0] == pytest.approx(0.3)
    assert np.all(env.lower >= 0) and np.all(env.lower <= bs.y) and np.all(bs.y <= env.upper)
    for t in (-0.1, 1.1):
        with pytest.raises(DomainError):
            evaluate(sk, t)


def test_generator_errors():
    spec_i = make_bessel_spec(2, 0.0, 0.1, True)
    spec_f = make_bessel_spec(2.2, 0.0, 0.1, False)
    w = default_weights(spec_f)
    with pytest.raises(FlagMismatch):
        bessel_skeleton_integer(RngStream(0), spec_f, 1.0)
    with pytest.raises(FlagMismatch):
        bessel_skeleton_noninteger(RngStream(0), spec_i, w, 1.0)
    with pytest.raises(DomainError):
        bessel_skeleton_noninteger(RngStream(0), make_bessel_spec(2.4, 0.0, 0.1, False), w, 1.0)
    for T in (0.0, -1.0, float("inf")):
        with pytest.raises(DomainError):
            bessel_skeleton_integer(RngStream(0), spec_i, T)
    with pytest.raises(DomainError):
        brownian_skeleton(RngStream(0), 0.0, 0.0, 1.0)


def test_default_weights_balance():
    spec = make_bessel_spec(2.2, 0.0, 0.1, False)
    assert default_weights(spec).wi == pytest.approx(0.238230365969691, rel=1e-12)
