"""Time stepping for the diffusion dZ = 4 dB + b(Z) ds, the pair (Z, Lambda),
integral hitting times, the time change eta, and the direct (L, Ldot) system.
"""

from __future__ import annotations

import dataclasses
import functools
import math
from typing import NamedTuple

import numpy as np

from . import _kernels as K
from . import special_fn as sf
from .interp import GridPoint, LogQuadratic

CHUNK = 4096

# drift tables: spacing 1e-3 keeps linear-interpolation error below 2e-7
_TAB_LO, _TAB_HI, _TAB_STEP = -60.0, 60.0, 1e-3


class HorizonExceeded(RuntimeError):
    """A path did not reach its target before cfg.max_time."""


@dataclasses.dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-3
    seed: int = 0
    max_time: float = 1e4
    # "milstein" is accepted but coincides with Euler: the noise on Z is
    # additive and the noise on Ldot depends only on L, which carries no noise.
    scheme: str = "euler"
    l_floor: float = 1e-12

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError("dt must be positive")
        if not self.max_time >= self.dt:
            raise ValueError("max_time must be at least dt")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.scheme not in ("euler", "milstein"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if not self.l_floor > 0:
            raise ValueError("l_floor must be positive")

    def with_dt(self, dt):
        return dataclasses.replace(self, dt=dt)

    def to_dict(self):
        return dataclasses.asdict(self)


@dataclasses.dataclass(frozen=True, eq=False)
class Path:
    t0: float
    dt: float
    values: np.ndarray
    running_integral: np.ndarray

    def __post_init__(self):
        if self.values.shape != self.running_integral.shape:
            raise ValueError("values and running_integral differ in length")
        self.values.flags.writeable = False
        self.running_integral.flags.writeable = False

    def __len__(self):
        return self.values.size

    @property
    def times(self):
        return self.t0 + self.dt * np.arange(self.values.size)

    @property
    def T(self):
        return (self.values.size - 1) * self.dt


@dataclasses.dataclass(frozen=True, eq=False)
class ZLambdaPath:
    path: Path
    lam: np.ndarray

    @property
    def log_lambda(self):
        return math.log(self.lam[0]) - self.path.running_integral

    def interpolant(self):
        return LogQuadratic(self.log_lambda, -self.path.values, self.path.dt, self.path.t0)


class HitResult(NamedTuple):
    H: float
    Z_at_H: float


class ProfileStates(NamedTuple):
    """Output of simulate_profile_system.  ``drift[k]`` is h used on step k."""
    t: np.ndarray
    L: np.ndarray
    Ldot: np.ndarray
    drift: np.ndarray
    stopped: bool


# ---------------------------------------------------------------------------
# drift tables

@functools.lru_cache(maxsize=None)
def _b_table():
    n = int(round((_TAB_HI - _TAB_LO) / _TAB_STEP)) + 1
    z = _TAB_LO + _TAB_STEP * np.arange(n)
    tab = sf.drift_b(z)
    tab.flags.writeable = False
    return tab


@functools.lru_cache(maxsize=None)
def _h1_table():
    n = int(round((_TAB_HI - _TAB_LO) / _TAB_STEP)) + 1
    y = _TAB_LO + _TAB_STEP * np.arange(n)
    tab = sf.drift_h_airy(1.0, y)
    tab.flags.writeable = False
    return tab


def b_tabulated(z):
    """The drift as the simulation sees it (table lookup)."""
    tab = _b_table()
    return np.array([K.table_b(tab, _TAB_LO, 1.0 / _TAB_STEP, float(v))
                     for v in np.atleast_1d(z)])


def h_tabulated(L, Ldot):
    """h(L, Ldot) = L^{1/3} h(1, Ldot / L^{2/3}) via the table."""
    tab = _h1_table()
    c = np.cbrt(L)
    y = np.asarray(Ldot, dtype=float) / (c * c)
    return c * np.array([K.table_h1(tab, _TAB_LO, 1.0 / _TAB_STEP, float(v))
                         for v in np.atleast_1d(y)]).reshape(np.shape(y))


# ---------------------------------------------------------------------------
# Z paths

def _z_run(z0, i0, cfg, rng, mode, level, max_steps, keep):
    """Advance Z in chunks.  Returns (z_list, i_list, n_steps, hit)."""
    tab = _b_table()
    inv = 1.0 / _TAB_STEP
    zs, its = [], []
    z, integral = float(z0), float(i0)
    done = 0
    zbuf = np.empty(CHUNK)
    ibuf = np.empty(CHUNK)
    last = (z, integral)
    prev = None
    while done < max_steps:
        m = min(CHUNK, max_steps - done)
        noise = rng.standard_normal(m)
        n = K.z_steps(z, integral, cfg.dt, noise, tab, _TAB_LO, inv,
                      zbuf, ibuf, mode, level)
        if keep:
            zs.append(zbuf[:n].copy())
            its.append(ibuf[:n].copy())
        else:
            # keep the two states around the end for interpolation
            if n >= 2:
                prev = (zbuf[n - 2], ibuf[n - 2])
            else:
                prev = last
        last = (zbuf[n - 1], ibuf[n - 1])
        done += n
        z, integral = last
        if n < m:
            return zs, its, done, True, prev, last
    return zs, its, done, False, prev, last


def simulate_Z(w0, T, cfg: SimConfig, rng) -> Path:
    """Euler-Maruyama path of Z on [0, T] from w0 with its trapezoidal integral."""
    if T < 0:
        raise ValueError("T must be non-negative")
    n = int(round(T / cfg.dt))
    zs, its, *_ = _z_run(w0, 0.0, cfg, rng, K.STOP_NONE, 0.0, n, True)
    values = np.concatenate([[float(w0)], *zs])
    integral = np.concatenate([[0.0], *its])
    return Path(0.0, cfg.dt, values, integral)


def _interp_cross(z0, i0, z1, i1, level, k1, dt):
    # crossing of the level between steps k1-1 and k1
    f = (i0 - level) / (i0 - i1) if i0 != i1 else 1.0
    return HitResult((k1 - 1 + f) * dt, z0 + f * (z1 - z0))


def hitting_time_Hb(w0, b, cfg: SimConfig, rng) -> HitResult:
    """First time the running integral of Z (from w0) equals -b."""
    if b < 0:
        raise ValueError("b must be non-negative")
    if b == 0:
        return HitResult(0.0, float(w0))
    max_steps = int(cfg.max_time / cfg.dt)
    _, _, n, hit, prev, last = _z_run(w0, 0.0, cfg, rng, K.STOP_BELOW, -b, max_steps, False)
    if not hit:
        raise HorizonExceeded(f"integral did not reach {-b} by time {cfg.max_time}")
    return _interp_cross(prev[0], prev[1], last[0], last[1], -b, n, cfg.dt)


def first_passage(path: Path, level):
    """First (interpolated) time the running integral of ``path`` is <= level."""
    it = path.running_integral
    if it[0] <= level:
        return HitResult(path.t0, float(path.values[0]))
    idx = np.flatnonzero(it <= level)
    if idx.size == 0:
        return None
    k = int(idx[0])
    r = _interp_cross(path.values[k - 1], it[k - 1], path.values[k], it[k], level, k, path.dt)
    return HitResult(path.t0 + r.H, r.Z_at_H)


def simulate_Z_Lambda(w, lam, T, cfg: SimConfig, rng) -> ZLambdaPath:
    """Z from w together with Lambda = lam * exp(-running integral)."""
    if not lam > 0:
        raise ValueError("lam must be positive")
    path = simulate_Z(w, T, cfg, rng)
    return ZLambdaPath(path, lam * np.exp(-path.running_integral))


def time_change_eta(zl: ZLambdaPath, s) -> GridPoint:
    """Position r with int_0^r Lambda^{1/3} = s, as (index, fraction, time)."""
    if s < 0:
        raise ValueError("s must be non-negative")
    p = zl.path
    if s == 0:
        return GridPoint(0, 0.0, p.t0)
    q = zl.interpolant()
    cum = q.cumulative(1.0 / 3.0)
    if cum[-1] < s:
        raise ValueError(f"path too short: integral reaches {cum[-1]} < {s}")
    k = int(np.searchsorted(cum, s, side="left")) - 1
    k = max(k, 0)
    f = q.solve_in_cell(1.0 / 3.0, k, s - cum[k])
    return GridPoint(k, f, p.t0 + (k + f) * p.dt)


def state_at(zl: ZLambdaPath, pos: GridPoint):
    """(Z, Lambda) at an interpolated grid position."""
    q = zl.interpolant()
    k, f = pos.index, pos.fraction
    z = -q.slope(k, f) if len(q) > 1 else float(zl.path.values[0])
    lam = math.exp(q.log_value(k, f)) if len(q) > 1 else float(zl.lam[0])
    return z, lam


# ---------------------------------------------------------------------------
# direct (L, Ldot) system

def simulate_profile_system(L0, Ldot0, T, cfg: SimConfig, rng) -> ProfileStates:
    """Euler-Maruyama for dLdot = 4 sqrt(L) dB + h(L, Ldot) ds, dL = Ldot ds.

    L is advanced by the trapezoid of Ldot.  If a step would take L below
    cfg.l_floor the path stops there and ``stopped`` is set.
    """
    if not L0 > 0:
        raise ValueError("L0 must be positive")
    if T < 0:
        raise ValueError("T must be non-negative")
    n_total = int(round(T / cfg.dt))
    tab = _h1_table()
    inv = 1.0 / _TAB_STEP
    Ls, Lds, hs = [np.array([float(L0)])], [np.array([float(Ldot0)])], []
    L, Ld = float(L0), float(Ldot0)
    done = 0
    stopped = False
    lbuf, ldbuf, hbuf = np.empty(CHUNK), np.empty(CHUNK), np.empty(CHUNK)
    while done < n_total:
        m = min(CHUNK, n_total - done)
        noise = rng.standard_normal(m)
        n = K.profile_steps(L, Ld, cfg.dt, noise, tab, _TAB_LO, inv, cfg.l_floor,
                            lbuf, ldbuf, hbuf)
        if n < 0:
            n = -n - 1
            stopped = True
        Ls.append(lbuf[:n].copy())
        Lds.append(ldbuf[:n].copy())
        hs.append(hbuf[:n].copy())
        done += n
        if stopped:
            break
        L, Ld = lbuf[n - 1], ldbuf[n - 1]
    L_arr = np.concatenate(Ls)
    return ProfileStates(cfg.dt * np.arange(L_arr.size), L_arr, np.concatenate(Lds),
                         np.concatenate(hs) if hs else np.empty(0), stopped)
