# Z has an explicit invariant density theta.  A long path should average to
# its mean, and exact draws from it should match its CDF.

import numpy as np
from scipy import stats

from sphere_profile import special_fn as sf
from sphere_profile import streams
from sphere_profile.mc import pi_cdf_fast
from sphere_profile.report import batch_means
from sphere_profile.sde import SimConfig, simulate_Z
from sphere_profile.stationary import estimate_gamma, sample_mu_batch, sample_pi

cfg = SimConfig(dt=1e-3, seed=7)

print("pi mean by quadrature:", sf.pi_mean())

path = simulate_Z(0.0, 1000.0, cfg, streams.stream(7, streams.Z_PATH, 0))
m, se = batch_means(path.values[1:])
print(f"time average over T=1000: {m:.4f} +- {se:.4f}")

draws = sample_pi(streams.stream(7, streams.PI, 0), 200_000)
print("Kolmogorov distance of rejection draws:", stats.kstest(draws, pi_cdf_fast).statistic)

# gamma(x): chance the running integral never comes back up to 0
for x in (-3.0, -1.0, -0.2, 0.5):
    g = estimate_gamma(x, 20.0, 2000, cfg)
    print(f"gamma({x:4.1f}) ~ {g.p_hat:.3f} +- {g.stderr:.3f}")

# mu, the law of Z when its integral first hits a far-away level
mu = sample_mu_batch(1000, cfg)
print("mu: mean", mu.mean(), " share > 0:", np.mean(mu > 0))
