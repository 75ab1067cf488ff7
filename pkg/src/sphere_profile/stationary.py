"""Samplers and estimators for the invariant law pi, the survival probability
gamma and the hitting law mu of the diffusion dZ = 4 dB + b(Z) ds.
"""

from __future__ import annotations

import dataclasses
import functools
import math
import time

import numpy as np
from scipy.optimize import brentq

from . import _kernels as K
from . import special_fn as sf
from . import streams
from ._pool import ordered_map
from .report import ExperimentReport, mean_stderr
from .sde import HorizonExceeded, SimConfig, _z_run, hitting_time_Hb

MU_C = 30.0


class EnvelopeViolation(AssertionError):
    """The rejection envelope fails to dominate theta (a programming error)."""


@dataclasses.dataclass(frozen=True)
class GammaEstimate:
    x: float
    horizon: float
    n_paths: int
    p_hat: float
    stderr: float


# ---------------------------------------------------------------------------
# pi by rejection

@dataclasses.dataclass(frozen=True, eq=False)
class _Envelope:
    edges: np.ndarray
    heights: np.ndarray      # max of theta on each cell
    cum: np.ndarray          # cumulative mass, including the two tails last
    left_tail: tuple         # (x0, theta(x0), slope) for x < edges[0]
    right_tail: tuple


def _mode():
    return brentq(lambda z: float(sf.drift_b(z)), -10.0, 5.0, xtol=1e-14)


@functools.lru_cache(maxsize=None)
def pi_envelope(n_cells=4500) -> _Envelope:
    lo, hi = sf._THETA_LO, sf._THETA_HI
    xm = _mode()
    edges = np.linspace(lo, hi, n_cells + 1)
    th = sf.theta(edges)
    # theta is log-concave (b is decreasing), so on each cell the max sits at
    # an endpoint unless the cell holds the mode
    heights = np.maximum(th[:-1], th[1:])
    k = np.searchsorted(edges, xm) - 1
    heights[k] = max(heights[k], float(sf.theta(xm)))
    # audit on a finer grid
    fine = np.linspace(lo, hi, 20 * n_cells + 1)
    idx = np.minimum(np.searchsorted(edges, fine, side="right") - 1, n_cells - 1)
    if np.any(sf.theta(fine) > heights[idx] * (1 + 1e-12)):
        raise EnvelopeViolation("theta exceeds its envelope on the audit grid")
    # exponential caps: tangent lines of log theta bound the tails
    sl = float(sf.drift_b(lo)) / 8.0
    sr = float(sf.drift_b(hi)) / 8.0
    tl, tr = float(sf.theta(lo)), float(sf.theta(hi))
    masses = np.concatenate([heights * np.diff(edges), [tl / sl, tr / -sr]])
    return _Envelope(edges, heights, np.cumsum(masses), (lo, tl, sl), (hi, tr, sr))


def sample_pi(rng, size=None):
    """Exact draws from pi(dx) = theta(x) dx by rejection."""
    env = pi_envelope()
    n = 1 if size is None else int(size)
    out = np.empty(0)
    ncell = env.heights.size
    while out.size < n:
        m = max(64, int(1.3 * (n - out.size)))
        u = rng.random(m) * env.cum[-1]
        j = np.searchsorted(env.cum, u, side="right")
        v = rng.random(m)
        x = np.empty(m)
        bound = np.empty(m)
        inner = j < ncell
        ji = j[inner]
        x[inner] = env.edges[ji] + v[inner] * (env.edges[ji + 1] - env.edges[ji])
        bound[inner] = env.heights[ji]
        for side, tail, sgn in ((ncell, env.left_tail, -1.0), (ncell + 1, env.right_tail, 1.0)):
            sel = j == side
            if sel.any():
                x0, t0, s = tail
                x[sel] = x0 + sgn * rng.exponential(1.0 / abs(s), sel.sum())
                bound[sel] = t0 * np.exp(s * (x[sel] - x0))
        acc = rng.random(m) * bound < sf.theta(x)
        out = np.concatenate([out, x[acc]])
    out = out[:n]
    return float(out[0]) if size is None else out


# ---------------------------------------------------------------------------
# gamma

def _survives(x, horizon, cfg, rng):
    n = int(round(horizon / cfg.dt))
    _, _, _, hit, _, _ = _z_run(x, 0.0, cfg, rng, K.STOP_AT_OR_ABOVE, 0.0, n, False)
    return not hit


def estimate_gamma(x, horizon, n_paths, cfg: SimConfig, first_index=0) -> GammaEstimate:
    """Fraction of paths from x whose running integral stays < 0 up to horizon.

    Path i uses stream (cfg.seed, GAMMA, first_index + i), so estimates at
    different x or horizons share their noise.
    """
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    if n_paths < 1:
        raise ValueError("n_paths must be positive")
    alive = ordered_map(
        lambda i: _survives(x, horizon, cfg, streams.stream(cfg.seed, streams.GAMMA, first_index + i)),
        range(n_paths))
    p = sum(alive) / n_paths
    return GammaEstimate(float(x), float(horizon), int(n_paths), p, math.sqrt(p * (1 - p) / n_paths))


# ---------------------------------------------------------------------------
# mu

def sample_mu(c, rng, cfg: SimConfig, z0=0.0):
    """Z at the first time its running integral hits -kappa, kappa ~ U[c, 2c].

    For large c this is close to mu in total variation whatever z0 is.
    """
    if not c > 0:
        raise ValueError("c must be positive")
    kappa = rng.uniform(c, 2 * c)
    return hitting_time_Hb(z0, kappa, cfg, rng).Z_at_H


def sample_mu_batch(n, cfg: SimConfig, purpose=streams.MU, first_index=0, c=MU_C, z0=0.0):
    return np.array(ordered_map(
        lambda i: sample_mu(c, streams.stream(cfg.seed, purpose, first_index + i), cfg, z0),
        range(n)))


# ---------------------------------------------------------------------------
# time reversal under P_mu

def _reversal_path(i, a, b, delta, q, cfg, c):
    rng = streams.stream(cfg.seed, streams.REVERSAL, i)
    w = sample_mu(c, rng, cfg)
    max_steps = int(cfg.max_time / cfg.dt)
    zs, its, n, hit, _, _ = _z_run(w, 0.0, cfg, rng, K.STOP_BELOW, -a - delta, max_steps, True)
    if not hit:
        raise HorizonExceeded("integral did not reach -a - delta")
    z = np.concatenate([[w], *zs])
    it = np.concatenate([[0.0], *its])
    dt = cfg.dt
    # xi: last time the integral is >= -a
    k = int(np.flatnonzero(it >= -a)[-1])
    f = (it[k] + a) / (it[k] - it[k + 1])
    xi = (k + f) * dt
    z_xi = z[k] + f * (z[k + 1] - z[k])

    def z_at(t):
        u = t / dt
        j = min(int(u), z.size - 2)
        g = u - j
        return z[j] + g * (z[j + 1] - z[j])

    kb = int(np.flatnonzero(it <= -b)[0])
    fb = (it[kb - 1] + b) / (it[kb - 1] - it[kb])
    z_hb = z[kb - 1] + fb * (z[kb] - z[kb - 1])
    # would xi move if delta were halved?
    kh = int(np.flatnonzero(it < -a - delta / 2)[0])
    late = k > kh
    return z_xi, z_at(q * xi), z_at((1 - q) * xi), z_hb, xi, late


def reversal_suite(a, n_paths, cfg: SimConfig, delta=15.0, b=None, q=0.25, c=MU_C):
    """Time-reversal properties of Z under P_mu, as two-sample KS tests.

    (i)   Z at xi, the last time the integral is >= -a, against fresh mu draws;
    (ii)  Z at q*xi against Z at (1-q)*xi, i.e. forward against reversed path;
    (iii) Z at H_b (b < a) against an independent fresh mu batch.
    """
    if not a > 0:
        raise ValueError("a must be positive")
    b = a / 2 if b is None else b
    if not 0 < b < a:
        raise ValueError("need 0 < b < a")
    t0 = time.perf_counter()
    rows = np.array(ordered_map(lambda i: _reversal_path(i, a, b, delta, q, cfg, c), range(n_paths)))
    fresh = sample_mu_batch(2 * n_paths, cfg, purpose=streams.FRESH_MU, c=c)
    rep = ExperimentReport("reversal", cfg.to_dict(),
                           {"a": a, "b": b, "delta": delta, "q": q, "c": c, "n_paths": n_paths})
    rep.add_estimate("mean Z_xi", *mean_stderr(rows[:, 0]))
    rep.add_estimate("mean Z_H_b", *mean_stderr(rows[:, 3]))
    rep.add_estimate("mean fresh mu", *mean_stderr(fresh))
    rep.add_estimate("mean xi", *mean_stderr(rows[:, 4]))
    rep.add_ks("(i) Z_xi vs mu", rows[:, 0], fresh[:n_paths])
    rep.add_ks("(ii) Z_q_xi vs Z_(1-q)_xi", rows[:, 1], rows[:, 2])
    rep.add_ks("(iii) Z_H_b vs mu", rows[:, 3], fresh[n_paths:])
    rep.diagnostics["late_recross_fraction"] = float(rows[:, 5].mean())
    rep.wall_time = time.perf_counter() - t0
    return rep
