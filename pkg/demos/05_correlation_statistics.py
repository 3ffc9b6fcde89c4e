"""
Estimating correlation integrals
================================

Monte Carlo estimates of the rescaled pair statistic for several ensembles,
set against the sine-kernel prediction.  Sample counts are kept small so
the script finishes in well under a minute; the test suite runs the same
comparisons with M = 4000.
"""

from wignerlab import EnsembleSpec, EntryDistribution, Observable, SeedSpec, compare_ensembles
from wignerlab import convergence_sweep, divisibility_sweep, empirical_statistic, make_variance_profile
from wignerlab import predicted_statistic

O = Observable.product_bump(2, half_width=3.0)
target = predicted_statistic(O).value
seed = SeedSpec(11)
M = 300
print(f"prediction {target:.4f}")

stat = empirical_statistic(EnsembleSpec.gue(200), 0.0, O, M, seed.child(0))
print(f"GUE N=200:        {stat.estimate:.4f} +- {stat.stderr:.4f}  z={stat.z_against(target):+.2f}")

res = compare_ensembles(EnsembleSpec.gue(200), EnsembleSpec(200, EntryDistribution.bernoulli()), 0.0, O, M,
                        seed.child(1))
print(f"GUE - Bernoulli:  {res.difference:+.4f} +- {res.combined_stderr:.4f}")

band = make_variance_profile("circulant-band", 200, width=20, contrast=0.5)
spec = EnsembleSpec(200, EntryDistribution.heavy_tailed(4.5), band, label="band")
stat = empirical_statistic(spec, 0.0, O, M, seed.child(2))
print(f"band, pareto(4.5): {stat.estimate:.4f} +- {stat.stderr:.4f}")

for s in divisibility_sweep(EnsembleSpec(200, EntryDistribution.bernoulli(), label="bern"), [0.0, 0.5, 1.0],
                            0.0, O, M, seed.child(3)):
    print(f"{s.label:12s} {s.estimate:.4f} +- {s.stderr:.4f}")

for row in convergence_sweep(EnsembleSpec.gue(50), [50, 100, 200], 0.0, O, M, seed.child(4)):
    print(f"N={row.N:4d} deviation {row.deviation:+.4f} +- {row.statistic.stderr:.4f}")
