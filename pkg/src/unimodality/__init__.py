"""Unimodality of classical and free convolution semigroups started from a given law."""

from .biane import (BianeState, DensityProfile, InversionError, free_density, free_density_profile, psi,
                    solve_v, ut_intervals, x_functional, xi)
from .counterexamples import (NoWitnessError, NonUnimodalWitness, build_cauchy_counterexample,
                              build_classical_counterexample, build_free_counterexample,
                              build_levy_counterexample, strong_unimodality_witness_search, witness_non_unimodal)
from .kernels import ConvolvedDensity, ProcessKind, density, density_derivative, kernel
from .measures import (AtomicMeasure, GriddedDensityMeasure, MeasureValidationError, NamedMeasure, bernoulli,
                       parse_measure, point_mass, semicircle, triangle, uniform)
from .modality import (CriticalTimeResult, ModalityReport, count_modes_derivative, count_modes_free,
                       count_modes_profile, critical_time, classify, is_unimodal, level_crossings)
from .thresholds import (ThresholdReport, cauchy_bound, classical_bound, free_bound, levy_bound,
                         verify_threshold)

__version__ = "0.1.0"
