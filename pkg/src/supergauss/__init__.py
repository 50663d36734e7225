"""supergauss: Monte-Carlo estimates of integrals exp(-f(p) + alpha q^2)
against a spectrally-represented Gaussian measure, validated by analytic
certificates (a global upper bound and uniform tail bounds)."""

from .certificates import (Certificate, balancing_constant, build_certificate,
                           c_n, erfc, global_upper_bound, i1_closed_form,
                           product_bound, recursion_tail_bound, rho_beta, zeta,
                           zeta_tail_bound)
from .errors import (ConfigError, DimensionMismatchError, DivergentBalanceError,
                     DivergentSumError, GaussianDivergenceError,
                     IncompatibleKernelsError, SupergaussError,
                     TailBoundDomainError)
from .estimator import (ConvergenceReport, EstimateRecord, convergence_run,
                        default_schedule, gaussian_closed_form,
                        gaussian_divergence_margin, integrate_projected,
                        quadrature_oracle, tail_mass_mc)
from .phi4 import LatticeConfig, build_phi4_model, counterterm_sweep
from .seminorms import (GrowthFunction, PropertyReport, Seminorm,
                        check_seminorm_axioms, check_submultiplicative,
                        check_superquadratic, eval_seminorm,
                        kernel_compatibility)
from .spectral import (CompactMap, DecayFamily, EigenSequence, SpectralModel,
                       TailSum, embed, embed_batch, hs_sum, log_weighted_sum,
                       rescale_half_cap, sample_standard, validate_model)

__version__ = "0.1.0"

__all__ = [
    "Certificate", "CompactMap", "ConfigError", "ConvergenceReport",
    "DecayFamily", "DimensionMismatchError", "DivergentBalanceError",
    "DivergentSumError", "EigenSequence", "EstimateRecord",
    "GaussianDivergenceError", "GrowthFunction", "IncompatibleKernelsError",
    "LatticeConfig", "PropertyReport", "Seminorm", "SpectralModel",
    "SupergaussError", "TailBoundDomainError", "TailSum",
    "balancing_constant", "build_certificate", "build_phi4_model", "c_n",
    "check_seminorm_axioms", "check_submultiplicative", "check_superquadratic",
    "convergence_run", "counterterm_sweep", "default_schedule", "embed",
    "embed_batch", "erfc", "eval_seminorm", "gaussian_closed_form",
    "gaussian_divergence_margin", "global_upper_bound", "hs_sum",
    "i1_closed_form", "integrate_projected", "kernel_compatibility",
    "log_weighted_sum", "product_bound", "quadrature_oracle",
    "recursion_tail_bound", "rescale_half_cap", "rho_beta", "sample_standard",
    "tail_mass_mc", "validate_model", "zeta", "zeta_tail_bound",
]
