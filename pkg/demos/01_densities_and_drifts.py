# The stable density behind everything, and the two drifts built from it.
#
# Run:  python demos/01_densities_and_drifts.py

import numpy as np

from sphere_profile import special_fn as sf

# p_1 at a few points, plus the derivative
x = np.array([-4.0, -2.0, 0.0, 1.0, 5.0, 20.0])
d = sf.stable_density(1.0, x)
for xi, p, dp in zip(x, d.p, d.p_prime):
    print(f"p_1({xi:5.1f}) = {p:.10e}   p_1' = {dp: .4e}")

# the left tail dies like exp(-c|x|^3), so far out only the log survives
print("log p_1(-40) =", sf.stable_log_density(1.0, -40.0))

# transforms against their closed forms
tc = sf.transform_check(1.0, 1.0)
print("Fourier at u=1:", tc.fourier, "target", tc.fourier_target)
print("Laplace at u=1:", tc.laplace, "target", tc.laplace_target)

# h(t, x) is the drift of the second-order profile equation; b(z) the drift of Z.
# Both are positive / decreasing where they should be.
for t in (0.01, 1.0, 100.0):
    xs = np.linspace(-50, 50, 101)
    print(f"t={t:6g}: min h = {sf.drift_h_airy(t, xs).min():.4g}")
print("h(1, 0) =", float(sf.drift_h(1.0, 0.0)), " b(0) =", float(sf.drift_b(0.0)))

# the ratio form loses digits where (4/3) x^2/t dwarfs h
t, xx = 0.01, np.array([1.0, 10.0, 49.0])
print("ratio/Airy - 1 at t=0.01:", sf.drift_h(t, xx) / sf.drift_h_airy(t, xx) - 1)
