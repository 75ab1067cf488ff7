"""The stationary process W*, Lambda* = exp(int_0^t W*) and the sphere-area
profile x -> (Lambda*(tau*_x), -Lambda*(tau*_x)^{2/3} W*(tau*_x)).

One realization of W* comes from a single run of Z started from a mu draw:
if H_B is the first time that run's integral reaches -B, then W*(t) is the
run at time t + H_B, so t = 0 is where the integral equals -B, and the
realization covers [S_B, T_fwd] with S_B = -H_B.
"""

from __future__ import annotations

import dataclasses
import json
import math

import numpy as np
from scipy.optimize import brentq

from . import _kernels as K
from . import special_fn as sf
from . import streams
from .interp import LogQuadratic
from .sde import HorizonExceeded, Path, SimConfig, _z_run
from .stationary import MU_C, sample_mu

B_SCHEDULE = (20.0, 40.0, 80.0, 160.0)


class CoverageError(ValueError):
    """x lies outside the range covered by a realization."""


@dataclasses.dataclass(frozen=True, eq=False)
class WStarRealization:
    anchor_B: float
    S_B: float
    grid: Path                  # W* on S_B + k dt; running_integral from S_B
    log_lambda_star: np.ndarray
    fwd_tail_bound: float
    # J[k] = int_{t_k}^inf Lambda*^{1/3}, with the tail estimate included
    J: np.ndarray

    @property
    def T_fwd(self):
        return self.S_B + self.grid.T

    @property
    def coverage(self):
        return float(self.J[0])

    def interpolant(self):
        return LogQuadratic(self.log_lambda_star, self.grid.values, self.grid.dt, self.S_B)

    def log_lambda_at(self, t):
        q = self.interpolant()
        k, f, _ = q.locate(t)
        return float(q.log_value(k, f))


@dataclasses.dataclass(frozen=True, eq=False)
class ProfileCurve:
    xs: np.ndarray
    L: np.ndarray
    Ldot: np.ndarray
    tau_star: np.ndarray


def _tail_estimate(ell_end):
    # int_T^inf exp(ell/3) with ell drifting down at rate |pi mean|
    return 3.0 * math.exp(ell_end / 3.0) / abs(sf.pi_mean())


def _stop_level(B, target):
    # integral level (relative to the run start) at which the tail estimate
    # drops below target
    ell = 3.0 * math.log(target * abs(sf.pi_mean()) / 3.0)
    return min(ell, -1.0) - B


def _build_once(B, x_max, tol, cfg, rng, c):
    w = sample_mu(c, rng, cfg)
    max_steps = int(cfg.max_time / cfg.dt)
    level = _stop_level(B, tol * x_max)
    zs, its, n, hit, _, _ = _z_run(w, 0.0, cfg, rng, K.STOP_BELOW, level, max_steps, True)
    if not hit:
        raise HorizonExceeded("forward run did not decay within max_time")
    z = np.concatenate([[w], *zs])
    it = np.concatenate([[0.0], *its])
    g = B + it
    dt = cfg.dt
    q = LogQuadratic(g, z, dt)
    # t = 0 sits where the interpolated log Lambda* crosses 0
    k = int(np.flatnonzero(g <= 0.0)[0]) - 1
    f = brentq(lambda s: q.log_value(k, s), 0.0, 1.0, xtol=1e-15) if g[k + 1] < 0 else 1.0
    S_B = -(k + f) * dt
    tail = _tail_estimate(g[-1])
    cells = q.cell_integrals(1.0 / 3.0)
    J = np.empty(g.size)
    J[-1] = tail
    J[:-1] = tail + np.cumsum(cells[::-1])[::-1]
    return WStarRealization(B, S_B, Path(S_B, dt, z, it), g, tail, J)


def build_wstar(x_max, tol, cfg: SimConfig, rng, c=MU_C, schedule=B_SCHEDULE) -> WStarRealization:
    """One realization of W* covering x in (0, x_max].

    Raises CoverageError if even the largest anchor level in ``schedule``
    leaves int Lambda*^{1/3} below x_max (1 + tol).
    """
    if not (x_max > 0 and tol > 0):
        raise ValueError("x_max and tol must be positive")
    for B in schedule:
        real = _build_once(B, x_max, tol, cfg, rng, c)
        if real.coverage >= x_max * (1 + tol) and real.fwd_tail_bound < tol * x_max:
            return real
    raise CoverageError(f"coverage {real.coverage} below {x_max} at B = {schedule[-1]}")


def _locate_x(real, x):
    J = real.J
    if not 0 < x <= J[0]:
        raise CoverageError(f"x = {x} outside (0, {J[0]}]")
    if x < J[-1]:
        raise CoverageError(f"x = {x} falls inside the forward tail estimate {J[-1]}")
    # J is decreasing; find k with J[k+1] <= x <= J[k]
    k = int(np.searchsorted(-J, -x, side="left"))
    k = min(max(k - 1, 0), J.size - 2)
    q = real.interpolant()
    # integral from t_k to tau equals J[k] - x
    f = q.solve_in_cell(1.0 / 3.0, k, J[k] - x)
    return q, k, f


def tau_star(real: WStarRealization, x) -> float:
    """tau*_x: the point where int_tau^inf Lambda*^{1/3} = x."""
    if x == real.J[0]:
        return real.S_B
    _, k, f = _locate_x(real, x)
    return real.S_B + (k + f) * real.grid.dt


def extract_profile(real: WStarRealization, xs) -> ProfileCurve:
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 1 or np.any(np.diff(xs) <= 0):
        raise ValueError("xs must be a strictly increasing 1-d array")
    L = np.empty(xs.size)
    Ld = np.empty(xs.size)
    tau = np.empty(xs.size)
    for i, x in enumerate(xs):
        q, k, f = _locate_x(real, x)
        ell = q.log_value(k, f)
        L[i] = math.exp(ell)
        Ld[i] = -math.exp(2.0 * ell / 3.0) * q.slope(k, f)
        tau[i] = real.S_B + (k + f) * real.grid.dt
    return ProfileCurve(xs, L, Ld, tau)


def ldot_fd_error(real: WStarRealization, xs, rel_dx=1e-3):
    """Relative error of central differences of L against Ldot at each x."""
    xs = np.asarray(xs, dtype=float)
    out = np.empty(xs.size)
    for i, x in enumerate(xs):
        d = rel_dx * x
        c = extract_profile(real, [x - d, x, x + d])
        fd = (c.L[2] - c.L[0]) / (2 * d)
        out[i] = abs(fd - c.Ldot[1]) / abs(c.Ldot[1])
    return out


def profile_sample(i, xs, cfg: SimConfig, tol=1e-6, purpose=streams.PROFILE):
    """(L, Ldot) at xs for realization i of the batch keyed by cfg.seed."""
    rng = streams.stream(cfg.seed, purpose, i)
    real = build_wstar(float(np.max(xs)), tol, cfg, rng)
    c = extract_profile(real, xs)
    return c.L, c.Ldot


# ---------------------------------------------------------------------------
# serialization

def curve_header(real: WStarRealization, cfg: SimConfig, tol, stream_key):
    return {
        "anchor_B": real.anchor_B,
        "S_B": real.S_B,
        "T_fwd": real.T_fwd,
        "coverage": real.coverage,
        "fwd_tail_bound": real.fwd_tail_bound,
        "tol": tol,
        "config": cfg.to_dict(),
        "stream": list(stream_key),
    }


def write_curve_csv(fh, curve: ProfileCurve, header: dict):
    """'#'-prefixed JSON header line, then x,L,Ldot,tau_star rows."""
    fh.write("# " + json.dumps(header, sort_keys=True) + "\n")
    fh.write("x,L,Ldot,tau_star\n")
    for row in zip(curve.xs, curve.L, curve.Ldot, curve.tau_star):
        fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
