"""Compiled inner loops.

Drifts are read from uniform tables (linear interpolation, spacing 1e-3,
error below 2e-7); outside the table the leading quadratic growth is used,
which no path reaches in practice.
"""

import math

from numba import njit

STOP_NONE = 0
STOP_BELOW = 1      # stop once the running integral is <= level
STOP_AT_OR_ABOVE = 2  # stop once the running integral is >= level


@njit(cache=True, nogil=True)
def table_b(tab, lo, inv_h, z):
    u = (z - lo) * inv_h
    n = tab.size
    if u < 0.0:
        return tab[0] + (2.0 / 3.0) * (z * z - lo * lo)
    if u >= n - 1:
        top = lo + (n - 1) / inv_h
        return tab[n - 1] - (2.0 / 3.0) * (z * z - top * top)
    i = int(u)
    f = u - i
    return tab[i] + f * (tab[i + 1] - tab[i])


@njit(cache=True, nogil=True)
def table_h1(tab, lo, inv_h, y):
    # h(1, y): ~ (4/3) y^2 on the left, ~ 8/y on the right
    u = (y - lo) * inv_h
    n = tab.size
    if u < 0.0:
        return tab[0] + (4.0 / 3.0) * (y * y - lo * lo)
    if u >= n - 1:
        top = lo + (n - 1) / inv_h
        return tab[n - 1] * top / y
    i = int(u)
    f = u - i
    return tab[i] + f * (tab[i + 1] - tab[i])


@njit(cache=True, nogil=True)
def z_steps(z, integral, dt, noise, tab, lo, inv_h, zout, iout, mode, level):
    """Euler-Maruyama for dZ = 4 dB + b(Z) ds with a trapezoidal running integral.

    Writes the new states into ``zout``/``iout`` and returns the number of steps
    taken; stops early (returning the step count including the stopping step)
    when the running integral meets ``level`` according to ``mode``.
    """
    sig = 4.0 * math.sqrt(dt)
    for k in range(noise.size):
        zn = z + table_b(tab, lo, inv_h, z) * dt + sig * noise[k]
        inew = integral + 0.5 * (z + zn) * dt
        zout[k] = zn
        iout[k] = inew
        if mode == 1 and inew <= level:
            return k + 1
        if mode == 2 and inew >= level:
            return k + 1
        z = zn
        integral = inew
    return noise.size


@njit(cache=True, nogil=True)
def profile_steps(L, Ld, dt, noise, htab, lo, inv_h, floor, lout, ldout, hout):
    """Euler-Maruyama for dLd = 4 sqrt(L) dB + h(L, Ld) ds, dL = Ld ds.

    ``hout[k]`` is the drift value used on step k.  Returns the number of
    steps taken; a step that would push L below ``floor`` is not taken and
    the negative count ``-(k+1)`` is returned instead.
    """
    sq = math.sqrt(dt)
    for k in range(noise.size):
        c = L ** (1.0 / 3.0)
        y = Ld / (c * c)
        h = c * table_h1(htab, lo, inv_h, y)
        ldn = Ld + h * dt + 4.0 * math.sqrt(L) * sq * noise[k]
        ln = L + 0.5 * (Ld + ldn) * dt
        if not ln > floor:
            return -(k + 1)
        lout[k] = ln
        ldout[k] = ldn
        hout[k] = h
        L = ln
        Ld = ldn
    return noise.size


@njit(cache=True, nogil=True)
def exp_cell_integrals(g, dg, dt, p, nodes, weights, out):
    """out[k] = int over cell k of exp(p * g), g quadratic with slopes dg at the ends."""
    for k in range(g.size - 1):
        a = dg[k]
        c = (dg[k + 1] - a) / (2.0 * dt)
        acc = 0.0
        for j in range(nodes.size):
            s = dt * nodes[j]
            acc += weights[j] * math.exp(p * (g[k] + a * s + c * s * s))
        out[k] = dt * acc
