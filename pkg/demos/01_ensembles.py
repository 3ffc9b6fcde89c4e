"""
Sampling Wigner matrices
========================

Flat and banded variance profiles, four entry laws, and the Gaussian
divisible interpolation between a given matrix and an independent GUE.
"""

import numpy as np

from wignerlab import EnsembleSpec, EntryDistribution, SeedSpec, gaussian_divisible, make_variance_profile
from wignerlab import interpolation_time, sample_matrix

# Every draw is addressed by a (master, stream, path) seed, so any single
# matrix can be regenerated on its own.
seed = SeedSpec(2024)

# Entry laws are standardized: real and imaginary parts have mean 0 and
# variance 1, and the matrix entry is sigma_ij (X + iY)/sqrt(2).
laws = {
    "gaussian": EntryDistribution.gaussian(),
    "bernoulli": EntryDistribution.bernoulli(),
    "three-atom": EntryDistribution.atomic([-np.sqrt(3), 0, np.sqrt(3)], [1 / 6, 2 / 3, 1 / 6]),
    "pareto(4.5)": EntryDistribution.heavy_tailed(4.5),
}
for name, law in laws.items():
    h = sample_matrix(EnsembleSpec(300, law), seed.child(0))
    print(f"{name:12s} hermitian={np.array_equal(h, h.conj().T)}  "
          f"mean |h_ij|^2 * N = {300 * np.mean(np.abs(h) ** 2):.3f}")

# A circulant band: entries within distance w of the diagonal carry a
# larger variance, the rest compensate so every row still sums to 1.
N = 200
prof = make_variance_profile("circulant-band", N, width=N // 10, contrast=0.5)
print("\nband profile: row sums in", prof.variances.sum(axis=1).min(), prof.variances.sum(axis=1).max())
print("N sigma^2 ranges over", (N * prof.variances).min(), (N * prof.variances).max(), "with delta", prof.delta)

# Gaussian divisible matrices sqrt(1 - a^2) H0 + a V.  The endpoints are
# the base matrix itself and the GUE matrix V.
h0 = sample_matrix(EnsembleSpec(N, laws["bernoulli"]), seed.child(1))
a = interpolation_time(N, 0.1)
h = gaussian_divisible(h0, a, seed.child(2))
print(f"\na = N^(-0.4) = {a:.4f}; |H(a) - H0| max entry {np.max(np.abs(h - h0)):.4f}")
