"""Classical and quantum singlet correlations, Fourier diagnostics and the L2 distance bound."""

from .analysis import (COEFFICIENT_CAP, DISTANCE_BOUND, FourierSpectrum, bell_inequality_check,
                       check_fourier_bounds, chsh_value, continuity_modulus_check, distance_bound_from_c1,
                       fourier_coefficients, l2_distance, l2_inner, l2_norm, bound_margin,
                       reconstruct_from_spectrum)
from .correlation import CorrelationFunction
from .experiment import ExperimentalDataset, estimate_anticorrelation, hypothesis_test, load_dataset
from .models import (BellHemisphereModel, bell_correlation_exact, bell_response, build_rectangle_partition,
                     sample_wigner, simulate_correlation)
from .optimizer import SpectrumConstraints, bound_approach_curve, solve_min_distance, verify_never_below_bound
from .quantum import Direction, Outcome, pauli_operator, quantum_anticorrelation, singlet_expectation, \
    singlet_probability

__version__ = "0.1.0"
