"""Backward problems for time-fractional evolution equations ``d^alpha u = A u``.

Mittag-Leffler evaluation (:mod:`.mlf`), spectral operators (:mod:`.specop`),
forward solves (:mod:`.evolve`), backward reconstruction (:mod:`.backcast`)
and numerical stability certificates (:mod:`.certify`).
"""

from .backcast import (
    BackcastResult,
    NoiseSpec,
    amplification_profile,
    backcast_interior,
    choose_gamma,
    exact_backcast,
    noisy_observation,
    tikhonov_backcast,
)
from .certify import (
    StabilityCertificate,
    holder_certificate,
    interpolation_constants,
    log_convexity_constant,
    mean_value_point,
    run_certificate,
    verify_dissipation_lemma,
    verify_log_convexity,
    verify_noisy_holder,
    verify_thm3,
)
from .evolve import Trajectory, caputo_l1, evolve_trajectory, forward_evolve, rl_integral
from .exceptions import AdmissibilityError, ConvergenceError, DomainError
from .mlf import MlParams, ml_eval, ml_inverse_bound_c1, ml_time_deriv, ml_values
from .specop import (
    EigenSystem,
    SpectralField,
    advection_diffusion_reduce,
    dirichlet_laplacian_1d,
    fractional_power,
    matrix_operator,
    neumann_laplacian_1d,
    project,
    synthesize,
)

__version__ = "0.1.0"
