"""Interpolation of exponentials of running integrals.

A quantity like Lambda(s) = exp(g(s)) with g' = +/-Z is known on a uniform grid
together with its log-derivative.  Inside a cell we take g' linear (the same
assumption behind the trapezoidal running integral), so g is quadratic and
exp(g) is positive, and its derivative is exactly g' * exp(g).
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from ._kernels import exp_cell_integrals

_GL_X, _GL_W = np.polynomial.legendre.leggauss(4)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W


class GridPoint(NamedTuple):
    index: int
    fraction: float
    time: float


class LogQuadratic:
    """g on a uniform grid t0 + k dt, with slope dg known at the nodes."""

    def __init__(self, g, dg, dt, t0=0.0):
        self.g = np.asarray(g, dtype=float)
        self.dg = np.asarray(dg, dtype=float)
        if self.g.shape != self.dg.shape or self.g.ndim != 1:
            raise ValueError("g and dg must be 1-d arrays of equal length")
        self.dt = float(dt)
        self.t0 = float(t0)

    def __len__(self):
        return self.g.size

    def locate(self, t) -> GridPoint:
        u = (t - self.t0) / self.dt
        n = self.g.size
        if not (-1e-9 <= u <= n - 1 + 1e-9):
            raise ValueError(f"time {t} outside the grid")
        k = min(max(int(np.floor(u)), 0), max(n - 2, 0))
        return GridPoint(k, float(u - k), float(t))

    def log_value(self, k, f):
        s = f * self.dt
        if f == 0.0:
            return self.g[k]
        return self.g[k] + self.dg[k] * s + (self.dg[k + 1] - self.dg[k]) * s * s / (2.0 * self.dt)

    def slope(self, k, f):
        if f == 0.0:
            return self.dg[k]
        return self.dg[k] + f * (self.dg[k + 1] - self.dg[k])

    def _partial(self, p, k, f):
        # integral of exp(p g) over the first fraction f of cell k
        s = f * self.dt * _GL_X
        gk, a = self.g[k], self.dg[k]
        c = (self.dg[k + 1] - a) / (2.0 * self.dt)
        vals = np.exp(p * (gk + a * s + c * s * s))
        return f * self.dt * float(vals @ _GL_W)

    def cell_integrals(self, p):
        """Integral of exp(p g) over every cell (length n-1)."""
        out = np.empty(max(self.g.size - 1, 0))
        exp_cell_integrals(self.g, self.dg, self.dt, float(p), _GL_X, _GL_W, out)
        return out

    def cumulative(self, p):
        """Running integral of exp(p g) from the first node, length n."""
        out = np.zeros(self.g.size)
        if self.g.size > 1:
            np.cumsum(self.cell_integrals(p), out=out[1:])
        return out

    def solve_in_cell(self, p, k, target):
        """Fraction f in [0, 1] with partial integral over cell k equal to target."""
        whole = self._partial(p, k, 1.0)
        if target <= 0.0:
            return 0.0
        if target >= whole:
            return 1.0
        return brentq(lambda f: self._partial(p, k, f) - target, 0.0, 1.0,
                      xtol=1e-15, rtol=4 * np.finfo(float).eps)
