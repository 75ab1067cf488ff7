# Small versions of the Monte Carlo cross-checks.  Each prints a report; the
# acceptance suite runs the same experiments with 10^4 samples at dt and dt/2.

from sphere_profile import mc
from sphere_profile.sde import SimConfig

cfg = SimConfig(dt=1e-3, seed=3)

print(mc.moment_experiment([0.5, 1.0, 2.0], 1000, cfg).to_text())
print(mc.scale_invariance_experiment(2.0, 1.0, 500, cfg).to_text())
print(mc.two_route_experiment(0.5, 0.5, 500, cfg).to_text())
print(mc.markov_kernel_experiment(0.5, 0.25, 500, cfg).to_text())
print(mc.reversal_experiment(5.0, 500, cfg).to_text())
