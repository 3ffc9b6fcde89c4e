"""
Matching four moments
=====================

Mixed moments of an entry law, the four-moment comparison between two
laws, and a three-atom law that matches a Gaussian up to order four.
"""

from wignerlab import EntryDistribution, check_four_moment_condition, compute_moments, entry_moment
from wignerlab import fit_atomic_match

gauss = compute_moments(EntryDistribution.gaussian())
bern = compute_moments(EntryDistribution.bernoulli())

# Real Bernoulli parts have fourth moment 1 rather than 3, so the pair (4, 0)
# differs by 1/2.  The allowed difference N^(-delta) shrinks with N, so this
# pair eventually fails.
for N in (100, 10**6):
    rep = check_four_moment_condition(gauss, bern, N, delta=0.1)
    r = rep.record(4, 0)
    print(f"N={N:>7d}: (4,0) difference {r.difference:.3f} vs bound {r.bound:.3f} -> passed={rep.passed}")

# A discrete law with three atoms per component reproduces every mixed
# moment of the Gaussian up to order four.
fit = fit_atomic_match(gauss)
print("\natoms", fit.re_atoms, "\nprobs", fit.re_probs)
rep = check_four_moment_condition(gauss, compute_moments(fit), 300, delta=0.1)
print("fit passes at N=300:", rep.passed, "max difference", rep.max_difference)

# Absolute moments of the entry; for heavy tails they diverge at order gamma.
heavy = EntryDistribution.heavy_tailed(6.0)
print("\nE|v|^4 gaussian", entry_moment(EntryDistribution.gaussian(), 4), " pareto(6)", entry_moment(heavy, 4))
