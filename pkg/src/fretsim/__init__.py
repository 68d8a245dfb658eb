"""Monte-Carlo photon-correlation simulator for a FRET-coupled dye pair.

The donor-acceptor transfer rate fluctuates as a bounded
Ornstein-Uhlenbeck process; the four-state population kinetics are
propagated along each noise realization and collapse-then-propagate
sampling yields the normalized intensity correlations g2_ij(tau).
"""

__version__ = "0.1.0"

from .adiabatic import AdiabaticParams, g2_acceptor_adiabatic, intensity_adiabatic
from .correlator import (ALL_PAIRS, CorrelationSeries, EnsembleConfig,
                         FitResult, default_ensemble_config, fit_exponential_tail,
                         g2_ensemble, g2_single_path)
from .errors import (ConfigurationError, FitError, GridMismatchError,
                     IntegrationError, NoBunchingError, NumericalError,
                     ResampleLimitError, SingularGeneratorError)
from .geometry import (ForsterParams, distance_from_rate, exact_delta_gamma,
                       linearized_delta_gamma, rate_from_distance)
from .kinetics import (JumpChannel, PopulationState, RateSet,
                       apply_emission_collapse, build_generator,
                       generator_parts, intensity, propagate,
                       steady_state_fixed)
from .noise import (BoundingPolicy, OUParams, RatePath, Scheme,
                    estimate_autocorrelation, generate_rate_path, ou_step,
                    theoretical_autocorrelation)
from .rng import SeededRng, sample_standard_gaussian_pair, standard_normals

__all__ = [
    "__version__",
    "AdiabaticParams", "g2_acceptor_adiabatic", "intensity_adiabatic",
    "ALL_PAIRS", "CorrelationSeries", "EnsembleConfig", "FitResult",
    "default_ensemble_config", "fit_exponential_tail", "g2_ensemble",
    "g2_single_path",
    "ConfigurationError", "FitError", "GridMismatchError", "IntegrationError",
    "NoBunchingError", "NumericalError", "ResampleLimitError",
    "SingularGeneratorError",
    "ForsterParams", "distance_from_rate", "exact_delta_gamma",
    "linearized_delta_gamma", "rate_from_distance",
    "JumpChannel", "PopulationState", "RateSet", "apply_emission_collapse",
    "build_generator", "generator_parts", "intensity", "propagate",
    "steady_state_fixed",
    "BoundingPolicy", "OUParams", "RatePath", "Scheme",
    "estimate_autocorrelation", "generate_rate_path", "ou_step",
    "theoretical_autocorrelation",
    "SeededRng", "sample_standard_gaussian_pair", "standard_normals",
]
