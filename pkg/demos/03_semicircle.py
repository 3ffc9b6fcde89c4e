"""
Global and local semicircle law
===============================

The spectrum of one large GUE matrix against the semicircle: the global
Kolmogorov-Smirnov distance and eigenvalue counts in small windows.
"""

import numpy as np

from wignerlab import EnsembleSpec, SeedSpec, eigenvalues, ks_distance, local_density_check, sample_matrix
from wignerlab import rescale_around_energy, semicircle_density

N = 2000
spectrum = eigenvalues(sample_matrix(EnsembleSpec.gue(N), SeedSpec(7)))
print(f"N={N}: KS distance to the semicircle {ks_distance(spectrum):.4f}")

# Windows [E - eta, E + eta] shrink toward the scale of single spacings.
for E in (0.0, 1.0, -1.5):
    for eta in (0.2, 0.05, 0.01):
        rec = local_density_check(spectrum, E, eta)
        print(f"E={E:+.1f} eta={eta:<5} count {rec.empirical_count:4d}  predicted {rec.predicted_count:7.2f}")

# Rescaled coordinates alpha = N rho(E) (lambda - E) put the mean spacing at 1.
loc = rescale_around_energy(spectrum, 0.0)
near = loc.alphas[np.abs(loc.alphas) < 10]
print("\nspacings near E=0 (mean should be close to 1):", np.round(np.diff(near), 2))
print("rho(0) =", semicircle_density(0.0))
