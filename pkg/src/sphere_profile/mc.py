"""Monte Carlo experiments that cross-check the constructions against each other."""

from __future__ import annotations

import math
import time

import numpy as np
from scipy import stats
from scipy.integrate import cumulative_simpson

from . import special_fn as sf
from . import stationary as st
from . import streams
from ._pool import ordered_map
from .profile import profile_sample
from .report import (P_THRESHOLD, ExperimentReport, KSResult, SampleSizeError, Statistic, TwoSample,
                     batch_means, ks_two_sample, mean_stderr)
from .sde import SimConfig, simulate_profile_system, simulate_Z, simulate_Z_Lambda, state_at, time_change_eta

__all__ = [
    "ExperimentReport", "KSResult", "SampleSizeError", "TwoSample", "ks_two_sample",
    "moment_experiment", "scale_invariance_experiment", "two_route_experiment",
    "markov_kernel_experiment", "mu_coupling_experiment", "gamma_experiment",
    "ergodic_experiment", "pi_sampler_experiment", "reversal_experiment",
    "with_dt_halving", "null_calibration", "C_CUBIC",
]

C_CUBIC = 8.0 / 21.0


def _profiles(xs, n_real, cfg, purpose=streams.PROFILE):
    xs = np.asarray(xs, dtype=float)
    out = ordered_map(lambda i: profile_sample(i, xs, cfg, purpose=purpose), range(n_real))
    return np.array([o[0] for o in out]), np.array([o[1] for o in out])


def _report(name, cfg, **params):
    return ExperimentReport(name, cfg.to_dict(), params)


def moment_experiment(x_list, n_real, cfg: SimConfig) -> ExperimentReport:
    """Mean of L at each x against (8/21) x^3, plus ratios against x = 1."""
    t0 = time.perf_counter()
    xs = np.sort(np.asarray(x_list, dtype=float))
    if np.any(xs <= 0):
        raise ValueError("x values must be positive")
    rep = _report("moments", cfg, x_list=xs.tolist(), n_real=n_real)
    L, _ = _profiles(xs, n_real, cfg)
    means = L.mean(axis=0)
    ses = L.std(axis=0, ddof=1) / math.sqrt(n_real)
    for x, m, s in zip(xs, means, ses):
        target = C_CUBIC * x ** 3
        rep.add_estimate(f"mean L at x={x:g}", m, s)
        rep.add_estimate(f"mean L / x^3 at x={x:g}", m / x ** 3, s / x ** 3)
        rep.check(f"mean L at x={x:g} vs 8/21 x^3", abs(m - target) <= 3 * s,
                  f"|mean - {target:.7g}| <= 3 stderr")
        rep.check(f"mean L at x={x:g} positive", m > 0, "mean > 0")
    # ratios against the reference point, paired within realizations
    ref = int(np.argmin(np.abs(xs - 1.0)))
    for j, x in enumerate(xs):
        if j == ref:
            continue
        a, b = L[:, j], L[:, ref]
        r = a.mean() / b.mean()
        cov = np.cov(a, b, ddof=1)
        var = (cov[0, 0] + r * r * cov[1, 1] - 2 * r * cov[0, 1]) / (b.mean() ** 2 * n_real)
        se = math.sqrt(max(var, 0.0))
        target = (x / xs[ref]) ** 3
        label = f"ratio mean(x={x:g})/mean(x={xs[ref]:g})"
        rep.add_estimate(label, r, se)
        rep.check(f"{label} vs {target:g}", abs(r - target) <= 3 * se, f"|ratio - {target:g}| <= 3 stderr")
    rep.wall_time = time.perf_counter() - t0
    return rep


def scale_invariance_experiment(lam, x, n_real, cfg: SimConfig) -> ExperimentReport:
    """lam^-3 L and lam^-2 Ldot at lam*x against L and Ldot at x (independent batches)."""
    if not (lam > 0 and x > 0):
        raise ValueError("lam and x must be positive")
    t0 = time.perf_counter()
    rep = _report("scale", cfg, lam=lam, x=x, n_real=n_real)
    La, Lda = _profiles([lam * x], n_real, cfg, purpose=streams.PROFILE)
    Lb, Ldb = _profiles([x], n_real, cfg, purpose=streams.NULL)
    a_L, a_Ld = La[:, 0] / lam ** 3, Lda[:, 0] / lam ** 2
    rep.add_estimate(f"mean lam^-3 L at {lam * x:g}", *mean_stderr(a_L))
    rep.add_estimate(f"mean L at {x:g}", *mean_stderr(Lb[:, 0]))
    rep.add_estimate(f"mean lam^-2 Ldot at {lam * x:g}", *mean_stderr(a_Ld))
    rep.add_estimate(f"mean Ldot at {x:g}", *mean_stderr(Ldb[:, 0]))
    rep.add_ks("L coordinate", a_L, Lb[:, 0])
    rep.add_ks("Ldot coordinate", a_Ld, Ldb[:, 0])
    rep.wall_time = time.perf_counter() - t0
    return rep


def _route_b(i, L0, Ld0, t, cfg):
    rng = streams.stream(cfg.seed, streams.ROUTE_B, i)
    s = simulate_profile_system(L0, Ld0, t, cfg, rng)
    return s.L[-1], s.Ldot[-1], float(np.sum(s.drift) * cfg.dt), float(s.drift.min(initial=np.inf)), s.stopped


def two_route_experiment(eps, t, n_real, cfg: SimConfig) -> ExperimentReport:
    """Profile marginal at eps + t against the SDE run for time t from the profile state at eps."""
    if not (eps > 0 and t >= 0):
        raise ValueError("need eps > 0 and t >= 0")
    t0 = time.perf_counter()
    rep = _report("two-route", cfg, eps=eps, t=t, n_real=n_real)
    xs = [eps, eps + t] if t > 0 else [eps]
    L, Ld = _profiles(xs, n_real, cfg)
    rows = np.array(ordered_map(lambda i: _route_b(i, L[i, 0], Ld[i, 0], t, cfg), range(n_real)))
    LA, LdA = L[:, -1], Ld[:, -1]
    LB, LdB, drift_int, drift_min, stopped = rows.T
    rep.add_estimate("route A mean L", *mean_stderr(LA))
    rep.add_estimate("route B mean L", *mean_stderr(LB))
    rep.add_estimate("route A mean Ldot", *mean_stderr(LdA))
    rep.add_estimate("route B mean Ldot", *mean_stderr(LdB))
    rep.add_ks("L coordinate", LA, LB)
    rep.add_ks("Ldot coordinate", LdA, LdB)
    finite = bool(np.all(np.isfinite(drift_int)))
    rep.diagnostics["drift_integral_max"] = float(np.max(drift_int)) if n_real else 0.0
    rep.diagnostics["drift_min"] = float(np.min(drift_min)) if t > 0 else None
    rep.diagnostics["floor_stops"] = int(stopped.sum())
    rep.check("drift integral finite and below 1e6",
              finite and float(np.max(drift_int)) < 1e6, "all finite, max < 1e6")
    if t > 0:
        rep.check("drift positive on every step", float(np.min(drift_min)) > 0, "h > 0")
    rep.wall_time = time.perf_counter() - t0
    return rep


def _w_of(L, Ld):
    return -Ld / L ** (2.0 / 3.0)


def _kernel_one(i, L0, Ld0, s, cfg):
    w, lam = _w_of(L0, Ld0), L0
    if s == 0:
        return w, lam
    # run long enough that int Lambda^{1/3} reaches s; regenerate with the same
    # stream at a longer horizon if not (the prefix does not change)
    T = 2.0 * s / lam ** (1.0 / 3.0) + 1.0
    while True:
        zl = simulate_Z_Lambda(w, lam, T, cfg, streams.stream(cfg.seed, streams.KERNEL, i))
        try:
            pos = time_change_eta(zl, s)
        except ValueError:
            T *= 2
            if T > cfg.max_time:
                raise
            continue
        return state_at(zl, pos)


def markov_kernel_experiment(eps, s, n_real, cfg: SimConfig) -> ExperimentReport:
    """(Z, Lambda) run from the profile state at eps and stopped at eta_s, against
    the profile at eps + s mapped by (L, Ldot) -> (-Ldot/L^{2/3}, L)."""
    if not (eps > 0 and s >= 0):
        raise ValueError("need eps > 0 and s >= 0")
    t0 = time.perf_counter()
    rep = _report("markov-kernel", cfg, eps=eps, s=s, n_real=n_real)
    xs = [eps, eps + s] if s > 0 else [eps]
    L, Ld = _profiles(xs, n_real, cfg)
    rows = np.array(ordered_map(lambda i: _kernel_one(i, L[i, 0], Ld[i, 0], s, cfg), range(n_real)))
    z_eta, lam_eta = rows[:, 0], rows[:, 1]
    lam_ref = L[:, -1]
    z_ref = np.array([_w_of(a, b) for a, b in zip(L[:, -1], Ld[:, -1])])
    rep.add_estimate("kernel mean Lambda", *mean_stderr(lam_eta))
    rep.add_estimate("profile mean L", *mean_stderr(lam_ref))
    rep.add_estimate("kernel mean Z", *mean_stderr(z_eta))
    rep.add_estimate("profile mean W", *mean_stderr(z_ref))
    rep.add_ks("Lambda coordinate", lam_eta, lam_ref)
    rep.add_ks("Z coordinate", z_eta, z_ref)
    rep.check("Lambda positive", bool(np.all(lam_eta > 0)), "Lambda > 0")
    rep.wall_time = time.perf_counter() - t0
    return rep


def mu_coupling_experiment(n, cfg: SimConfig, z0s=(0.0, -5.0), c=st.MU_C) -> ExperimentReport:
    """mu sampler started from two points: the outputs should agree in law."""
    t0 = time.perf_counter()
    rep = _report("mu-coupling", cfg, n=n, z0s=list(z0s), c=c)
    a = st.sample_mu_batch(n, cfg, purpose=streams.MU, c=c, z0=z0s[0])
    b = st.sample_mu_batch(n, cfg, purpose=streams.NULL, c=c, z0=z0s[1])
    rep.add_estimate(f"mean from {z0s[0]:g}", *mean_stderr(a))
    rep.add_estimate(f"mean from {z0s[1]:g}", *mean_stderr(b))
    rep.add_ks("initial-condition independence", a, b)
    pos = float(np.mean(np.concatenate([a, b]) > 0))
    rep.diagnostics["positive_fraction"] = pos
    rep.check("draws negative", pos < 1e-3, "fraction > 0 below 1e-3")
    rep.wall_time = time.perf_counter() - t0
    return rep


def gamma_experiment(x, horizons, n_paths, cfg: SimConfig) -> ExperimentReport:
    t0 = time.perf_counter()
    horizons = sorted(float(h) for h in horizons)
    rep = _report("gamma", cfg, x=x, horizons=horizons, n_paths=n_paths)
    ests = [st.estimate_gamma(x, h, n_paths, cfg) for h in horizons]
    for e in ests:
        rep.add_estimate(f"gamma({x:g}) horizon {e.horizon:g}", e.p_hat, e.stderr)
    for e1, e2 in zip(ests, ests[1:]):
        rep.check(f"nonincreasing {e1.horizon:g} -> {e2.horizon:g}",
                  e2.p_hat <= e1.p_hat + 3 * max(e1.stderr, e2.stderr, 1e-12),
                  "later <= earlier + 3 stderr")
    last = ests[-1]
    if x < 0:
        rep.check("gamma positive for x < 0", last.p_hat > 3 * last.stderr, "p_hat > 3 stderr")
    else:
        rep.check("gamma zero for x >= 0", last.p_hat == 0.0, "p_hat == 0")
    rep.wall_time = time.perf_counter() - t0
    return rep


def ergodic_experiment(T, cfg: SimConfig, n_batches=20, w0=0.0) -> ExperimentReport:
    """Time average of one long Z path against the mean of pi."""
    t0 = time.perf_counter()
    rep = _report("ergodic", cfg, T=T, n_batches=n_batches, w0=w0)
    path = simulate_Z(w0, T, cfg, streams.stream(cfg.seed, streams.Z_PATH, 0))
    m, se = batch_means(path.values[1:], n_batches)
    pm = sf.pi_mean()
    rep.add_estimate("time average of Z", m, se)
    rep.add_estimate("pi mean (quadrature)", pm, 0.0)
    rep.check("time average vs pi mean", abs(m - pm) <= 3 * se, "|diff| <= 3 batch-means stderr")
    rep.check("pi mean negative", pm < 0, "pi mean < 0")
    rep.wall_time = time.perf_counter() - t0
    return rep


_CDF_GRID = None


def pi_cdf_fast(x):
    """Distribution function of pi by Simpson on a 1e-3 grid (error ~1e-12)."""
    global _CDF_GRID
    if _CDF_GRID is None:
        g = np.linspace(sf._THETA_LO, sf._THETA_HI, 45001)
        c = cumulative_simpson(sf.theta(g), x=g, initial=0.0)
        _CDF_GRID = (g, c)
    g, c = _CDF_GRID
    return np.interp(x, g, c, left=0.0, right=1.0)


def pi_sampler_experiment(n, cfg: SimConfig) -> ExperimentReport:
    t0 = time.perf_counter()
    rep = _report("pi-sampler", cfg, n=n)
    x = st.sample_pi(streams.stream(cfg.seed, streams.PI, 0), n)
    r = stats.kstest(x, pi_cdf_fast)
    rep.add_estimate("sample mean", *mean_stderr(x))
    rep.add_estimate("pi mean (quadrature)", sf.pi_mean(), 0.0)
    rep.statistics.append(Statistic("Kolmogorov distance to quadrature CDF", "KS",
                                    float(r.statistic), float(r.pvalue)))
    rep.check("Kolmogorov distance", r.statistic < 0.01, "D < 0.01")
    rep.diagnostics["fraction_above_10"] = float(np.mean(x > 10))
    rep.wall_time = time.perf_counter() - t0
    return rep


def reversal_experiment(a, n_paths, cfg: SimConfig, **kw) -> ExperimentReport:
    return st.reversal_suite(a, n_paths, cfg, **kw)


def with_dt_halving(experiment, cfg: SimConfig, *args, **kw) -> ExperimentReport:
    """Run an experiment at dt and dt/2; passing also requires identical verdicts."""
    full = experiment(*args, cfg=cfg, **kw)
    half = experiment(*args, cfg=cfg.with_dt(cfg.dt / 2), **kw)
    rep = ExperimentReport(f"{full.name} (dt, dt/2)", cfg.to_dict(), dict(full.params))
    rep.merge(full, "dt: ")
    rep.merge(half, "dt/2: ")
    flips = [a.criterion for a, b in zip(full.verdicts, half.verdicts) if a.passed != b.passed]
    rep.diagnostics["verdict_flips"] = flips
    rep.check("no verdict flip between dt and dt/2", not flips, "identical verdicts")
    return rep


def null_calibration(n_rep, n, cfg: SimConfig, level=P_THRESHOLD) -> ExperimentReport:
    """Rejection rate of the KS test on pairs of independent mu batches."""
    t0 = time.perf_counter()
    rep = _report("null-calibration", cfg, n_rep=n_rep, n=n, level=level)
    pvals = []
    for r in range(n_rep):
        a = st.sample_mu_batch(n, cfg, purpose=streams.MU, first_index=2 * r * n)
        b = st.sample_mu_batch(n, cfg, purpose=streams.MU, first_index=(2 * r + 1) * n)
        pvals.append(ks_two_sample(TwoSample(a, b)).p_value)
    rej = int(np.sum(np.array(pvals) < level))
    sd = math.sqrt(n_rep * level * (1 - level))
    rep.add_estimate("rejections", rej, sd)
    rep.check("rejection count in binomial 3 sigma band", rej <= n_rep * level + 3 * sd,
              f"rejections <= {n_rep * level + 3 * sd:.2f}")
    rep.diagnostics["p_values"] = pvals
    rep.wall_time = time.perf_counter() - t0
    return rep
