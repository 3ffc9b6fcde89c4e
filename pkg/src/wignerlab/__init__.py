"""Desk-scale numerical checks of bulk universality for Hermitian Wigner matrices.

Submodules
----------
ensembles     entry laws, variance profiles, matrix samplers, seeding
moment_match  entry moments, four-moment matching, atomic moment fits
spectra       eigenvalues, semicircle references, local rescaling
predictions   sine-kernel determinants and their integrals
statistics    Monte Carlo correlation estimators, comparisons, sweeps
cli           config-driven experiment runner
"""

from wignerlab.ensembles import (
    EnsembleSpec,
    EntryDistribution,
    SeedSpec,
    VarianceProfile,
    gaussian_divisible,
    interpolation_time,
    make_variance_profile,
    sample_matrix,
)
from wignerlab.moment_match import (
    ComponentMoments,
    MatchReport,
    check_four_moment_condition,
    compute_moments,
    entry_moment,
    fit_atomic_match,
)
from wignerlab.predictions import (
    PredictedStatistic,
    predicted_statistic,
    sine_kernel,
    sine_kernel_determinant,
)
from wignerlab.spectra import (
    LocalCoordinates,
    Spectrum,
    eigenvalues,
    ks_distance,
    local_density_check,
    rescale_around_energy,
    semicircle_cdf,
    semicircle_count,
    semicircle_density,
)
from wignerlab.statistics import (
    Accumulator,
    ComparisonResult,
    CorrelationStatistic,
    Observable,
    compare_ensembles,
    convergence_sweep,
    divisibility_sweep,
    empirical_statistic,
    per_sample_statistic,
)

__version__ = "0.1.0"
