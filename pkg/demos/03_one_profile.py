# One realization of the sphere-area profile x -> L(x) and its slope.
#
# W* is run forward from a mu draw until its exponential integral is negligible;
# L(x) = Lambda*(tau*_x), and Ldot = -L^{2/3} W*(tau*_x).

import numpy as np

from sphere_profile import streams
from sphere_profile.profile import build_wstar, extract_profile, ldot_fd_error
from sphere_profile.sde import SimConfig

cfg = SimConfig(dt=1e-3, seed=11)
real = build_wstar(3.0, 1e-6, cfg, streams.stream(11, streams.PROFILE, 0))
print(f"anchor B={real.anchor_B}, S_B={real.S_B:.3f}, coverage={real.coverage:.3f}")

xs = np.linspace(0.25, 3.0, 12)
c = extract_profile(real, xs)
print("     x          L         Ldot       L/x^3")
for row in zip(c.xs, c.L, c.Ldot, c.L / c.xs ** 3):
    print("  ".join(f"{v:10.5f}" for v in row))

# Ldot is the exact derivative of the interpolated L ...
print("FD error at dx = 1e-6 x:", ldot_fd_error(real, xs[1:-1], rel_dx=1e-6).max())
# ... but L is only C^{1,1/2}, so coarser differences pick up the roughness
print("FD error at dx = 1e-3 x, median:", np.median(ldot_fd_error(real, xs[1:-1])))
