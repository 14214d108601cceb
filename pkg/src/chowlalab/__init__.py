"""Computational laboratory for Liouville-signed sums of polynomial values:
smallest-prime-factor sieving, Liouville exponential sums and Dirichlet
kernels, an exact circle-method correlation identity, and ensemble moment
statistics with their Gaussian predictions."""

__version__ = "0.1.0"

from .circle import (CorrelationSpec, IdentityReport, QuadratureGrid,
                     bound_reference, correlation_sum, frequency_bound,
                     integral_quadrature, power_sum_product, vandermonde_det,
                     verify_identity)
from .ensembles import (AT_MOST, EXACT, EnsembleSpec, IntPolynomial,
                        coefficient_block, ensemble_size, enumerate_tuples,
                        evaluate, sample_coefficient_blocks, sample_tuples,
                        shard_ranges)
from .errors import (BudgetError, CacheFormatError, ChowlaLabError,
                     EvaluationOverflowError, RangeLimitError,
                     WeightFileError)
from .expsums import (KernelEvaluation, dirichlet_kernel, exp_sum_on_grid,
                      kernel_l1, kernel_values, lambda_exp_sum,
                      lebesgue_reference, sup_estimate)
from .moments import (WEIGHT_ALL_ONES, WEIGHT_FILE, WEIGHT_PRIME,
                      ExceedanceReport, IntervalSpec, MomentReport, MomentRow,
                      ProbeReport, WeightSpec, chowla_sum, exceedance_report,
                      gaussian_moment, gaussian_moment_lower_bound_check,
                      load_weight_file, lower_bound_probe, moment_report,
                      normalized_statistic, resolve_weights,
                      weighted_chowla_sum)
from .sieve import (FactorSieve, build_sieve, factor, liouville,
                    liouville_bulk, liouville_via_inversion, load_sieve_cache,
                    mobius, save_sieve_cache)
