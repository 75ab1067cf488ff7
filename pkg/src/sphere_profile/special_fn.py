"""Closed-form functions behind the sphere-area process.

Airy functions, the map-Airy density, the spectrally positive 3/2-stable
density ``p_t`` and its derivative, the drifts ``h`` and ``b``, and the
invariant density ``theta`` of the diffusion ``dZ = 4 dB + b(Z) ds``.

Everything that can overflow or underflow is carried in log space.  The
bracket ``x Ai(x^2) + Ai'(x^2)`` cancels catastrophically for large positive
``x``; there the standard large-argument expansions of ``Ai`` and ``Ai'`` are
rearranged so that the cancellation happens symbolically, term by term.
"""

from __future__ import annotations

import math
import threading
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy import integrate as _integrate
from scipy import special as _special

__all__ = [
    "C6",
    "QuadratureSpec",
    "QuadResult",
    "ToleranceNotMet",
    "integrate",
    "airy_ai",
    "airy_ai_prime",
    "kappa",
    "map_airy_A",
    "map_airy_log",
    "map_airy_logderiv",
    "DensityPair",
    "stable_density",
    "stable_log_density",
    "stable_logderiv",
    "TransformCheck",
    "transform_check",
    "drift_h",
    "drift_h_airy",
    "drift_b",
    "log_theta",
    "theta",
    "theta_prime",
    "theta_normalizer",
    "pi_mean",
    "pi_cdf",
]

#: ``6**(-1/3)``, the scale linking ``p_1`` to the map-Airy function.
C6 = 6.0 ** (-1.0 / 3.0)

# For |x| above this the bracket x Ai(x^2) + Ai'(x^2) is evaluated through the
# large-argument series; both branches agree to ~1e-14 around the switch.
_ASYM_X = 3.3
_N_TERMS = 24


class ToleranceNotMet(ArithmeticError):
    """A quadrature did not certify its requested tolerance."""


# ---------------------------------------------------------------------------
# quadrature


@dataclass(frozen=True)
class QuadratureSpec:
    lower: float
    upper: float
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_subdivisions: int = 500

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError("quadrature needs lower < upper")
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be positive")


class QuadResult(NamedTuple):
    value: float
    error: float


def integrate(f: Callable[[float], float], spec: QuadratureSpec,
              points: Sequence[float] | None = None, **kw) -> QuadResult:
    """Adaptive Gauss-Kronrod quadrature of ``f`` over ``spec``'s interval.

    Infinite limits are mapped to a finite interval by QUADPACK.  Raises
    :class:`ToleranceNotMet` when the embedded error estimate exceeds
    ``max(abs_tol, rel_tol * |value|)``.  Extra keywords go to
    :func:`scipy.integrate.quad` (``weight``/``wvar`` for oscillatory weights).
    """
    finite = math.isfinite(spec.lower) and math.isfinite(spec.upper)
    opts = dict(epsabs=spec.abs_tol, epsrel=spec.rel_tol, limit=spec.max_subdivisions)
    if points is not None and finite and "weight" not in kw:
        opts["points"] = list(points)
    if kw.get("weight") in ("cos", "sin") and not math.isfinite(spec.upper):
        # QAWF: the tolerance applies to the whole tail; limit counts cycles.
        opts = dict(epsabs=spec.abs_tol, limlst=100, limit=spec.max_subdivisions)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", _integrate.IntegrationWarning)
        val, err = _integrate.quad(f, spec.lower, spec.upper, **opts, **kw)[:2]
    if not (math.isfinite(val) and err <= max(spec.abs_tol, spec.rel_tol * abs(val))):
        raise ToleranceNotMet(
            f"quadrature on [{spec.lower}, {spec.upper}] reached error {err:.3g} "
            f"(value {val:.6g}, abs_tol {spec.abs_tol:g}, rel_tol {spec.rel_tol:g})")
    return QuadResult(val, err)


# ---------------------------------------------------------------------------
# Airy functions and the large-argument expansions


def airy_ai(x):
    """Ai(x)."""
    return _special.airy(x)[0]


def airy_ai_prime(x):
    """Ai'(x)."""
    return _special.airy(x)[1]


def _airy_asym_coeffs(n):
    # DLMF 9.7.2: u_k = (2k+1)(2k+3)...(6k-1) / (216^k k!),  v_k = -(6k+1)/(6k-1) u_k
    u = np.empty(n + 2)
    u[0] = 1.0
    for k in range(1, n + 2):
        u[k] = u[k - 1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k)
    k = np.arange(n + 2)
    d = np.zeros(n + 2)
    d[1:] = u[1:] * 12.0 * k[1:] / (6.0 * k[1:] - 1.0)      # u_k - v_k
    nn = np.zeros(n + 1)
    nn[1:] = u[1:n + 1] - 6.0 * d[2:n + 2]                  # u_j - 6 d_{j+1}
    return u[:n + 1], d[:n + 1], nn


_U, _D, _NUM = _airy_asym_coeffs(_N_TERMS)


def _alt_series(coef, zeta):
    """sum_k (-1)^k coef[k] zeta^-k, truncated at the smallest term."""
    zeta = np.asarray(zeta, dtype=float)
    k = np.arange(coef.size)
    terms = ((-1.0) ** k) * coef * np.power.outer(1.0 / zeta, k)
    mags = np.abs(terms)
    mags[..., 0] = np.inf
    # keep terms up to (and including) the smallest nonzero one
    stop = np.argmin(np.where(coef != 0, mags, np.inf), axis=-1)
    keep = k <= stop[..., None]
    return np.sum(np.where(keep, terms, 0.0), axis=-1)


def _bracket_scaled(x):
    """(x Ai(x^2) + Ai'(x^2)) * exp(2|x|^3/3); always negative."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    mid = np.abs(x) < _ASYM_X
    xs = x[mid]
    ai, aip = _special.airye(xs * xs)[:2]
    out[mid] = xs * ai + aip
    # large |x|: Ai e^z ~ |x|^{-1/2} S_u / (2 sqrt pi), Ai' e^z ~ -|x|^{1/2} S_v / (2 sqrt pi)
    # with z = 2|x|^3/3.  On the right S_u - S_v = D cancels symbolically; on the
    # left the two terms add and S_u + S_v = 2 S_u - D.
    xl = x[~mid]
    if xl.size:
        ax = np.abs(xl)
        zeta = 2.0 * ax ** 3 / 3.0
        su, d = _alt_series(_U, zeta), _alt_series(_D, zeta)
        out[~mid] = np.sqrt(ax) * np.where(xl > 0, d, d - 2.0 * su) / (2.0 * math.sqrt(math.pi))
    return out


def kappa(x):
    """Ai(x^2) / (x Ai(x^2) + Ai'(x^2)); strictly negative."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    mid = np.abs(x) < _ASYM_X
    xs = x[mid]
    ai, aip = _special.airye(xs * xs)[:2]
    out[mid] = ai / (xs * ai + aip)
    xl = x[~mid]
    if xl.size:
        zeta = 2.0 * np.abs(xl) ** 3 / 3.0
        su, d = _alt_series(_U, zeta), _alt_series(_D, zeta)
        out[~mid] = su / (xl * np.where(xl > 0, d, 2.0 * su - d))
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# map-Airy density


def map_airy_log(x):
    """Return ``(sign, log|A(x)|)`` for A(x) = -2 exp(2x^3/3)(x Ai(x^2) + Ai'(x^2)).

    The sign is computed, not assumed, so positivity checks are genuine even
    where A itself underflows.
    """
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        f = _bracket_scaled(x)
        logabs = math.log(2.0) + np.log(np.abs(f)) + (2.0 / 3.0) * (x ** 3 - np.abs(x) ** 3)
    sign = -np.sign(f)
    if np.any(~(np.isfinite(logabs) & (sign != 0)) & np.isfinite(x)):
        raise OverflowError("map-Airy log-magnitude is not representable")
    if sign.ndim == 0:
        return sign[()], logabs[()]
    return sign, logabs


def map_airy_A(x):
    """The map-Airy function A(x); underflows to 0 for x below about -8."""
    sign, logabs = map_airy_log(x)
    return sign * np.exp(logabs)


def map_airy_logderiv(x):
    """A'(x)/A(x) = 4x^2 + kappa(x).

    For large positive x the two terms cancel to O(1/x); the asymptotic
    branch evaluates the difference directly.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x < _ASYM_X
    xs = x[small]
    out[small] = 4.0 * xs * xs + kappa(xs)
    xl = x[~small]
    if xl.size:
        zeta = 2.0 * xl ** 3 / 3.0
        out[~small] = _alt_series(_NUM, zeta) / (xl * _alt_series(_D, zeta))
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# stable density p_t


class DensityPair(NamedTuple):
    p: np.ndarray | float
    p_prime: np.ndarray | float


def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise ValueError("time/radius argument t must be positive")
    return t


def _p1(y):
    return C6 * map_airy_A(C6 * y)


def _p1_prime(y):
    return C6 * C6 * map_airy_A(C6 * y) * map_airy_logderiv(C6 * y)


def stable_density(t, x) -> DensityPair:
    """p_t(x) and p_t'(x), routed through p_1 by the 3/2-scaling."""
    t = _check_t(t)
    s = t ** (-2.0 / 3.0)
    y = s * np.asarray(x, dtype=float)
    return DensityPair(s * _p1(y), s * s * _p1_prime(y))


def stable_log_density(t, x):
    """log p_t(x), finite even where p_t underflows."""
    t = _check_t(t)
    s = t ** (-2.0 / 3.0)
    _, la = map_airy_log(C6 * s * np.asarray(x, dtype=float))
    return np.log(C6 * s) + la


def stable_logderiv(t, x):
    """p_t'(x) / p_t(x), computed without forming either factor."""
    t = _check_t(t)
    s = t ** (-2.0 / 3.0)
    return s * C6 * map_airy_logderiv(C6 * s * np.asarray(x, dtype=float))


# ---------------------------------------------------------------------------
# Fourier / Laplace transforms of p_t

FOURIER_C0 = 1.0 / math.sqrt(3.0)


@dataclass(frozen=True)
class TransformCheck:
    t: float
    u: float
    fourier: complex
    fourier_target: complex
    laplace: float | None
    laplace_target: float | None

    @property
    def fourier_error(self) -> float:
        return abs(self.fourier - self.fourier_target)

    @property
    def laplace_rel_error(self) -> float | None:
        if self.laplace is None:
            return None
        return abs(self.laplace - self.laplace_target) / self.laplace_target


def _left_cutoff(t):
    # log p_t(x) <= -(2/9)|x|^3/t^2 + O(log) on the left: at this cutoff the
    # remaining mass is far below 1e-30 even after the e^{lambda|x|} weight.
    return -12.0 * t ** (2.0 / 3.0) - 2.0


def transform_check(t: float, u: float, abs_tol: float = 1e-10) -> TransformCheck:
    """Integrate e^{iux} p_t and e^{-ux} p_t numerically next to their closed forms.

    Fourier target: exp(-t|u|^{3/2}(1 + i sgn u)/sqrt(3)).
    Laplace target (u > 0): exp(t sqrt(2/3) u^{3/2}).
    """
    t = float(t)
    u = float(u)
    _check_t(t)
    lo = _left_cutoff(t)

    def p(x):
        return float(np.exp(stable_log_density(t, x)))

    spec_left = QuadratureSpec(lo, 0.0, abs_tol=abs_tol, rel_tol=1e-12)
    spec_right = QuadratureSpec(0.0, math.inf, abs_tol=abs_tol, rel_tol=1e-12)
    if u == 0.0:
        re = integrate(p, spec_left).value + integrate(p, spec_right).value
        im = 0.0
    else:
        re_l = integrate(lambda x: p(x) * math.cos(u * x), spec_left).value
        im_l = integrate(lambda x: p(x) * math.sin(u * x), spec_left).value
        re_r = integrate(p, spec_right, weight="cos", wvar=abs(u)).value
        im_r = integrate(p, spec_right, weight="sin", wvar=abs(u)).value
        re = re_l + re_r
        im = im_l + math.copysign(1.0, u) * im_r
    sgn = (u > 0) - (u < 0)
    target = complex(np.exp(-FOURIER_C0 * t * abs(u) ** 1.5 * (1 + 1j * sgn)))

    lap = lap_target = None
    if u > 0:
        def g(x):
            return float(np.exp(-u * x + stable_log_density(t, x)))
        # the weighted left tail moves outwards with u
        lo_l = min(lo, -2.0 * math.sqrt(u) * t - 2.0 * t ** (2.0 / 3.0))
        lap = (integrate(g, QuadratureSpec(lo_l, 0.0, abs_tol=abs_tol, rel_tol=1e-12)).value
               + integrate(g, spec_right).value)
        lap_target = math.exp(t * math.sqrt(2.0 / 3.0) * u ** 1.5)
    return TransformCheck(t, u, complex(re, im), target, lap, lap_target)


# ---------------------------------------------------------------------------
# drifts


def drift_h(t, x):
    """h(t,x) = -8t p_t'(-x/2)/p_t(-x/2) + (4/3) x^2/t   (ratio form)."""
    t = _check_t(t)
    x = np.asarray(x, dtype=float)
    return -8.0 * t * stable_logderiv(t, -x / 2.0) + (4.0 / 3.0) * x * x / t


def drift_h_airy(t, x):
    """h(t,x) = -8 * 6^{-1/3} t^{1/3} kappa(-6^{-1/3} t^{-2/3} x / 2)   (Airy form).

    Obtained from the ratio form with A'/A = 4y^2 + kappa(y); the quadratic
    parts cancel exactly, leaving kappa evaluated at -x/2 in scaled units.
    """
    t = _check_t(t)
    x = np.asarray(x, dtype=float)
    return -8.0 * C6 * np.cbrt(t) * kappa(-C6 * t ** (-2.0 / 3.0) * x / 2.0)


def drift_b(z):
    """b(z) = 8 p_1'(z/2)/p_1(z/2) - (2/3) z^2."""
    z = np.asarray(z, dtype=float)
    return 8.0 * stable_logderiv(1.0, z / 2.0) - (2.0 / 3.0) * z * z


# ---------------------------------------------------------------------------
# invariant density theta(x) = C p_1(x/2)^2 exp(-x^3/36)

# theta < 1e-300 outside this window (log-concave tails, see _tail_bound)
_THETA_LO, _THETA_HI = -30.0, 15.0
_norm_lock = threading.Lock()
_norm_cache: dict[str, float] = {}


def _log_theta_unnormalized(x):
    x = np.asarray(x, dtype=float)
    return 2.0 * stable_log_density(1.0, x / 2.0) - x ** 3 / 36.0


def _tail_bound(x0, direction):
    # For a log-concave density the tangent line of log theta at x0 dominates
    # the tail, so the tail mass is at most theta(x0) / |(log theta)'(x0)|.
    slope = float(drift_b(x0)) / 8.0
    if direction * slope >= 0:
        raise ArithmeticError("tail bound requested on the wrong side of the mode")
    return math.exp(float(_log_theta_unnormalized(x0))) / abs(slope)


def theta_normalizer() -> float:
    """log C, computed once by quadrature and cached."""
    with _norm_lock:
        if "logC" not in _norm_cache:
            f = lambda x: float(np.exp(_log_theta_unnormalized(x)))
            spec = QuadratureSpec(_THETA_LO, _THETA_HI, abs_tol=1e-15, rel_tol=1e-13)
            mass = integrate(f, spec, points=[-6.0, -2.0, 0.0, 3.0]).value
            tails = _tail_bound(_THETA_LO, -1) + _tail_bound(_THETA_HI, +1)
            if tails > 1e-14 * mass:
                raise ToleranceNotMet("theta tail mass not negligible")
            _norm_cache["logC"] = -math.log(mass)
        return _norm_cache["logC"]


def log_theta(x):
    return theta_normalizer() + _log_theta_unnormalized(x)


def theta(x):
    """Invariant probability density of dZ = 4 dB + b(Z) ds."""
    return np.exp(log_theta(x))


def theta_prime(x):
    """theta'(x), using (log theta)' = (p_1'/p_1)(x/2) - x^2/12."""
    x = np.asarray(x, dtype=float)
    return theta(x) * (stable_logderiv(1.0, x / 2.0) - x * x / 12.0)


def pi_mean() -> float:
    """First moment of the invariant law; negative."""
    with _norm_lock:
        if "mean" in _norm_cache:
            return _norm_cache["mean"]
    logc = theta_normalizer()
    f = lambda x: x * float(np.exp(logc + _log_theta_unnormalized(x)))
    spec = QuadratureSpec(_THETA_LO, _THETA_HI, abs_tol=1e-14, rel_tol=1e-12)
    m = integrate(f, spec, points=[-6.0, -2.0, 0.0, 3.0]).value
    with _norm_lock:
        _norm_cache["mean"] = m
    return m


def pi_cdf(x):
    """Distribution function of the invariant law at the points ``x``."""
    logc = theta_normalizer()
    f = lambda s: float(np.exp(logc + _log_theta_unnormalized(s)))
    out = []
    for xi in np.atleast_1d(np.asarray(x, dtype=float)):
        if xi <= _THETA_LO:
            out.append(0.0)
            continue
        hi = min(xi, _THETA_HI)
        spec = QuadratureSpec(_THETA_LO, hi, abs_tol=1e-14, rel_tol=1e-12)
        pts = [p for p in (-6.0, -2.0, 0.0, 3.0) if _THETA_LO < p < hi]
        out.append(min(1.0, integrate(f, spec, points=pts).value))
    out = np.array(out)
    return out[0] if np.ndim(x) == 0 else out
