"""Acceptance criteria, one test each, at the stated tolerances.

Every test records a ``PASS``/``FAIL`` line; the lines are printed as they
are produced and repeated in the pytest terminal summary. Run this file as
a script to get only the lines.
"""
from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate, stats as sps

import oracles
from bessel_skeleton import (
    CirParams,
    ExperimentConfig,
    HeatBallParams,
    RngStream,
    SweepConfig,
    bessel_skeletons,
    cd_sample,
    cir_transform,
    corollary_bound,
    cost_F,
    default_weights,
    eta,
    expected_trials,
    kappa,
    make_bessel_spec,
    make_weights,
    mean_abs_first_coord,
    optimal_wi,
    phi,
    precision_variable,
    precision_variable_explicit,
    run_cost_experiment,
    sphere_first_coord,
    sweep,
    theorem1_limit,
    theorem2_limit,
)
from bessel_skeleton.sampling import cd_sample_many
from bessel_skeleton.skeletons import count_brownian_points, evaluate
from bessel_skeleton.stats import integer_cost_model, linear_fit, summarize

SEED = 0xB355E1
RESULTS: list[str] = []


def record(number: int, ok: bool, detail: str) -> bool:
    line = f"ACCEPTANCE {number:>2} {'PASS' if ok else 'FAIL'}: {detail}"
    RESULTS.append(line)
    print(line)
    return ok


def _batched(spec, T, n_paths, seed, weights=None, chunk=250):
    for start in range(0, n_paths, chunk):
        streams = [RngStream(seed, k) for k in range(start, min(start + chunk, n_paths))]
        yield from bessel_skeletons(streams, spec, T, weights)


# ---------------------------------------------------------------------------


def test_01_brownian_cost_constant():
    eps, T, reps = 0.02, 1.0, 10_000
    counts = np.array([count_brownian_points(RngStream(SEED, k), eps, T) for k in range(reps)])
    model = integer_cost_model(1)
    res = summarize(counts, make_bessel_spec(1, 0.0, eps, True), T, model)
    target = 3**1.5 / math.e
    rel = res.eps2_mean_N / target - 1.0
    z = (res.eps2_mean_N - target) / (model.clt_std(eps, T) / math.sqrt(reps))
    ok = abs(rel) < 0.02
    assert record(1, ok, f"eps^2 mean N = {res.eps2_mean_N:.5f} vs 3^1.5/e = {target:.5f} "
                         f"(rel {rel:+.4%}, tol 2%; z = {z:+.2f})")


_DELTA2_STATS = {}


@pytest.mark.parametrize("delta", [2, 5, 20])
def test_02_integer_dimension_cost(delta):
    eps, T, reps = 0.02, 1.0, 10_000
    res = run_cost_experiment(ExperimentConfig(make_bessel_spec(delta, 0.0, eps, True), T, reps, SEED))
    if delta == 2:
        _DELTA2_STATS["res"] = res
    limit = theorem1_limit(delta, T)
    sd_mean = res.model.clt_std(eps, T) / math.sqrt(reps)
    z = (res.eps2_mean_N - limit) / sd_mean
    ok = abs(z) <= 3.0
    assert record(2, ok, f"delta={delta}: eps^2 mean N = {res.eps2_mean_N:.5f} vs limit {limit:.5f}, "
                         f"z = {z:+.2f} (tol |z| <= 3)")


def test_03_clt_shape():
    res = _DELTA2_STATS.get("res")
    if res is None:
        res = run_cost_experiment(ExperimentConfig(make_bessel_spec(2, 0.0, 0.02, True), 1.0, 10_000, SEED))
    m, v = res.standardized_mean, res.standardized_var
    ok = -0.05 <= m <= 0.05 and 0.9 <= v <= 1.1
    assert record(3, ok, f"delta=2 standardized mean {m:+.4f} (tol 0.05), variance {v:.4f} (tol [0.9, 1.1])")


def _cd_triples():
    w = make_weights(2.2, optimal_wi(2.2), 1.0)
    return [(1.1, 1.0, 0.2), (0.1, 1.0, 0.3), (w.alpha_f, w.beta_f, 0.5 * w.beta_f)]


@pytest.mark.parametrize("triple", _cd_triples())
def test_04_cd_sampler_law(triple):
    alpha, beta, t = triple
    # the scipy closed-form CDF is itself checked against quadrature of the density
    rho = math.sqrt(alpha * t * math.log(beta / t))
    grid = np.linspace(0, rho, 12)[1:-1]
    cdf_err = max(abs(oracles.cd_cdf(x, alpha, beta, t) - oracles.cd_cdf_quad(x, alpha, beta, t)) for x in grid)
    assert cdf_err < 1e-9
    values, _ = cd_sample_many(RngStream(SEED, 4), np.full(1_000_000, alpha), beta, t)
    ks = sps.kstest(values, lambda x: oracles.cd_cdf(x, alpha, beta, t)).statistic
    ok = ks < 0.005 and values.min() > 0 and values.max() < rho
    assert record(4, ok, f"(alpha, beta, t) = ({alpha:.4g}, {beta:.4g}, {t:.4g}): KS = {ks:.5f} (tol 0.005)")


def test_05_rejection_efficiency():
    p = HeatBallParams(1.1, 1.0, 0.2)
    _, trials = cd_sample_many(RngStream(SEED, 5), np.full(100_000, p.alpha), p.beta, p.t)
    expected = expected_trials(p)
    rel = trials.mean() / expected - 1.0
    single = cd_sample(RngStream(SEED, 6), p)
    ok = abs(rel) < 0.01 and single.trials >= 1
    assert record(5, ok, f"mean trials {trials.mean():.5f} vs closed form {expected:.5f} (rel {rel:+.4%}, tol 1%)")


def test_06_pathwise_step_bounds():
    n_paths = 10_000
    spec = make_bessel_spec(2.2, 0.5, 0.1, False)
    worst = 0.0
    violations = 0
    steps = 0
    for sk in _batched(spec, 0.25, n_paths, SEED, default_weights(spec)):
        dy = np.abs(np.diff(sk.y))
        worst = max(worst, float(dy.max()))
        violations += int(np.sum(dy > spec.eps + 1e-12))
        steps += len(dy)
    ispec = make_bessel_spec(3, 0.5, 0.1, True)
    i_viol = 0
    i_steps = 0
    for sk in _batched(ispec, 1.0, n_paths, SEED):
        bound = phi(3.0, 0.1, sk.u[1:])
        i_viol += int(np.sum(np.abs(np.diff(sk.y)) > bound + 1e-12))
        i_steps += len(bound)
    ok = violations == 0 and i_viol == 0
    assert record(6, ok, f"delta=2.2: {violations} of {steps} steps exceed eps (max |dy|/eps = {worst / 0.1:.6f}); "
                         f"delta=3: {i_viol} of {i_steps} steps exceed phi(u_n)")


def _nearest_to_T(sk):
    n = sk.n_points
    return sk.y[n] if sk.s[n] - sk.T <= sk.T - sk.s[n - 1] else sk.y[n - 1]


@pytest.mark.parametrize("case", ["integer", "noninteger"])
def test_07_marginal_exactness(case):
    n_paths, eps = 10_000, 0.02
    rng = np.random.default_rng(SEED)
    if case == "integer":
        delta, y0, T = 2, 1.0, 1.0
        spec = make_bessel_spec(delta, y0, eps, True)
        ref = oracles.squared_bessel_samples(rng, delta, y0, T, n_paths)
        weights = None
    else:
        delta, y0, T = 2.2, 0.15, 0.025
        spec = make_bessel_spec(delta, y0, eps, False)
        ref = oracles.shiga_watanabe_samples(rng, delta, y0, T, n_paths)
        weights = default_weights(spec)
    sim = np.array([_nearest_to_T(sk) ** 2 for sk in _batched(spec, T, n_paths, SEED + 7, weights)])
    ks = oracles.two_sample_ks(sim, ref)
    ok = ks <= 0.02
    assert record(7, ok, f"delta={delta} (y0={y0}, T={T}): two-sample KS = {ks:.5f} (tol 0.02)")


def test_08_analytic_cross_checks():
    rng = np.random.default_rng(SEED)
    details, ok = [], True
    worst = 0.0
    for a, b, t in [(1.0, math.e, 1.0), (0.1, 1.0, 0.3), (1.1, 1.0, 0.2), (2.5, 3.0, 0.7), (0.5, 2.0, 1e-3)]:
        p = HeatBallParams(a, b, t)
        r = math.sqrt(a * t * math.log(b / t))
        q = integrate.quad(lambda y: oracles.cd_density_unnormalized(y, a, b, t), 0, r,
                           epsabs=0, epsrel=1e-13, limit=200)[0]
        worst = max(worst, abs(kappa(p) / q - 1))
    ok &= worst < 1e-9
    details.append(f"kappa rel err {worst:.1e}")
    e2 = eta(2)
    ok &= abs(e2 - 0.7953) <= 1e-3
    details.append(f"eta(2) = {e2:.6f}")
    for d, target in [(2, 2 / math.pi), (3, 0.5)]:
        draws = np.abs(sphere_first_coord(RngStream(SEED, 80 + d), d, 1_000_000))
        se = draws.std(ddof=1) / math.sqrt(draws.size)
        z = (draws.mean() - target) / se
        exact = mean_abs_first_coord(d)
        ok &= abs(z) <= 3 and abs(exact - target) < 1e-14
        details.append(f"E|pi1|(d={d}) mc z = {z:+.2f}, formula {exact:.6f}")
    w = make_weights(2.2, 0.0625)
    nu_i, nu_f = 0.0, (2.2 - 2) / 2 - 1
    args = (w.wf * 2 / (w.wi * (2.2 - 2)), nu_f + 2, 1 / (nu_f + 1), nu_i + 2, 1 / (nu_i + 1))
    mc, se = oracles.mc_cost_F(rng, *args, 10_000_000)
    val = cost_F(*args)
    z = (val - mc) / se
    ok &= abs(z) <= 3
    details.append(f"F quadrature {val:.7f} vs mc {mc:.7f} (z = {z:+.2f})")
    assert record(8, ok, "; ".join(details))


def test_09_bound_consistency():
    rng = np.random.default_rng(SEED)
    worst_ratio = 0.0
    failures = 0
    for _ in range(20):
        delta = float(rng.uniform(1.05, 5.95))
        if abs(delta - round(delta)) < 0.05:
            delta += 0.1
        wi = float(rng.uniform(0.005, 0.245))
        limit = theorem2_limit(delta, make_weights(delta, wi)).limit_eps2_EN
        bound = corollary_bound(delta, wi)
        worst_ratio = max(worst_ratio, limit / bound)
        failures += limit > bound
    balance = 0.0
    for delta in (1.3, 2.2, 3.7, 4.5):
        wi = optimal_wi(delta)
        d_i, d_f = math.floor(delta), delta - math.floor(delta)
        wf = 1 - 2 * math.sqrt(wi)
        balance = max(balance, abs(d_i / wi - d_f / wf) / (d_i / wi))
    ok = failures == 0 and balance <= 1e-10
    assert record(9, ok, f"limit <= bound in 20/20 - {failures} failures (max limit/bound {worst_ratio:.4f}); "
                         f"balance at optimal wi rel {balance:.1e} (tol 1e-10)")


def test_10_sweeps_linear():
    base = ExperimentConfig(make_bessel_spec(2, 0.0, 0.1, True), 1.0, 200, SEED)
    dims = sweep(SweepConfig("dimension", list(range(1, 11)), base))
    fit_d = linear_fit(dims.axis_values, dims.mean_N)
    inv = sweep(SweepConfig("inv_eps2", [100.0, 200.0, 300.0, 400.0, 600.0, 800.0], base))
    fit_e = linear_fit(inv.axis_values, inv.mean_N)
    ok = fit_d.r2 > 0.99 and fit_e.r2 > 0.99
    assert record(10, ok, f"R^2 mean N vs delta = {fit_d.r2:.5f}, vs 1/eps^2 = {fit_e.r2:.5f} (tol > 0.99)")


def test_11_cir_transport():
    cir = CirParams(2.0, 1.0 / 3.0, 1.0, 1.0)
    tspec = cir_transform(cir)
    worst = 0.0
    n_checked = 0
    # eps = 0.2 on [0, 2], the setting of the bound plots
    spec = tspec.bessel_spec(0.2)
    for sk in _batched(spec, float(tspec.rho(2.0)), 200, SEED + 11, default_weights(spec)):
        a, b = precision_variable(tspec, sk, 2.0), precision_variable_explicit(tspec, sk, 2.0)
        worst = max(worst, abs(a / b - 1))
        n_checked += 1
    T0, eps, n_paths = 0.1, 0.02, 10_000
    spec = tspec.bessel_spec(eps)
    horizon = float(tspec.rho(T0))
    sim = np.empty(n_paths)
    for k, sk in enumerate(_batched(spec, horizon, n_paths, SEED + 12, default_weights(spec))):
        a, b = precision_variable(tspec, sk, T0), precision_variable_explicit(tspec, sk, T0)
        worst = max(worst, abs(a / b - 1))
        n_checked += 1
        sim[k] = tspec.f(T0, evaluate(sk, horizon))
    ref = oracles.cir_marginal_samples(np.random.default_rng(SEED), cir.k, cir.theta, cir.sigma, cir.x0, T0, n_paths)
    ks = oracles.two_sample_ks(sim, ref)
    ok = worst <= 1e-12 and ks <= 0.02 + eps
    assert record(11, ok, f"P_eps definition vs explicit on {n_checked} paths: max rel diff {worst:.1e} (tol 1e-12); "
                          f"CIR marginal at T0={T0}, eps={eps}: KS = {ks:.5f} (tol {0.02 + eps:.2f})")


if __name__ == "__main__":  # pragma: no cover
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
