"""Recovering earlier states from final data: exact inversion, noise, Tikhonov.

Inversion is diagonal in the eigenbasis: ``c_n(0) = c_n(T) / E_{alpha,1}(-lambda_n T^alpha)``.
The per-mode gain grows linearly in ``lambda_n`` for ``alpha < 1`` and
exponentially for ``alpha = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .evolve import decay_factors, forward_evolve
from .exceptions import DomainError
from .specop import EigenSystem, SpectralField

__all__ = [
    "NoiseSpec",
    "BackcastResult",
    "DEFAULT_CAP",
    "amplification_profile",
    "exact_backcast",
    "noisy_observation",
    "tikhonov_backcast",
    "choose_gamma",
    "backcast_interior",
    "worst_case_perturbation",
    "fit_power_law",
]

DEFAULT_CAP = 1.0e12


@dataclass(frozen=True)
class NoiseSpec:
    delta: float
    seed: int = 0
    distribution: str = "spherical"

    def __post_init__(self) -> None:
        if not (math.isfinite(self.delta) and self.delta >= 0):
            raise DomainError(f"noise level must be finite and >= 0, got {self.delta}")
        if self.distribution != "spherical":
            raise DomainError(f"unsupported noise distribution {self.distribution!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True, eq=False)
class BackcastResult:
    u0_hat: SpectralField
    amplification_max: float
    regularizer: str
    parameter: float
    dropped_modes: int
    underflow_modes: int = 0

    def to_dict(self) -> dict:
        return {
            "u0_hat": self.u0_hat.to_dict(),
            "amplification_max": float(self.amplification_max),
            "regularizer": self.regularizer,
            "parameter": float(self.parameter),
            "dropped_modes": int(self.dropped_modes),
            "underflow_modes": int(self.underflow_modes),
        }


def _check_T(T: float) -> float:
    T = float(T)
    if not (math.isfinite(T) and T > 0):
        raise DomainError(f"final time must be positive, got {T}")
    return T


def amplification_profile(eigsys: EigenSystem, alpha: float, T: float) -> np.ndarray:
    """Columns ``(lambda_n, 1 / E_{alpha,1}(-lambda_n T^alpha))``; ``inf`` where ``E`` underflows."""
    T = _check_T(T)
    e = decay_factors(eigsys, alpha, T)
    with np.errstate(divide="ignore", over="ignore"):
        factor = 1.0 / e
    return np.column_stack([eigsys.eigenvalues, factor])


def exact_backcast(
    uT: SpectralField, alpha: float, T: float, amplification_cap: float = DEFAULT_CAP
) -> BackcastResult:
    """Diagonal inversion; modes whose gain exceeds the cap are zeroed and counted."""
    T = _check_T(T)
    if not amplification_cap >= 1.0:
        raise DomainError("amplification cap must be >= 1")
    factor = amplification_profile(uT.eigsys, alpha, T)[:, 1]
    underflow = ~np.isfinite(factor)
    keep = np.isfinite(factor) & (factor <= amplification_cap)
    c = np.where(keep, uT.coefficients * np.where(keep, factor, 0.0), 0.0)
    dropped = int(np.count_nonzero(~keep))
    amp = float(np.max(factor[keep])) if np.any(keep) else 1.0
    return BackcastResult(
        uT.with_coefficients(c), amp, "truncation" if dropped else "none",
        float(amplification_cap), dropped, int(np.count_nonzero(underflow)),
    )


def noisy_observation(uT: SpectralField, noise: NoiseSpec) -> SpectralField:
    """Add a perturbation of norm exactly ``delta`` in a uniformly random direction.

    Directions come from a counter-based (Philox) generator keyed by the
    seed, so the draw is reproducible and independent of call order.
    """
    if noise.delta == 0.0:
        return uT
    rng = np.random.Generator(np.random.Philox(key=int(noise.seed)))
    z = rng.standard_normal(uT.eigsys.size)
    z *= noise.delta / np.linalg.norm(z)
    return uT.with_coefficients(uT.coefficients + z)


def tikhonov_backcast(
    uT_delta: SpectralField, alpha: float, T: float, gamma: float, *, penalty_order: float = 0.0
) -> BackcastResult:
    """Minimize ``sum (E_n c_n - d_n)^2 + gamma sum w_n c_n^2`` mode by mode.

    The default penalty is the plain norm (``w_n = 1``), giving
    ``c_n = E_n d_n / (E_n^2 + gamma)``. ``penalty_order = eps`` switches to
    the smoothness weights ``w_n = (kappa + lambda_n)^(2 eps)``.
    """
    T = _check_T(T)
    if not (math.isfinite(gamma) and gamma > 0):
        raise DomainError(f"gamma must be positive, got {gamma}")
    es = uT_delta.eigsys
    e = decay_factors(es, alpha, T)
    w = 1.0 if penalty_order == 0 else (es.kappa + es.eigenvalues) ** (2.0 * penalty_order)
    filt = e / (e * e + gamma * w)
    with np.errstate(divide="ignore"):
        amp = float(np.max(np.where(e > 0, filt, 0.0)))
    return BackcastResult(
        uT_delta.with_coefficients(filt * uT_delta.coefficients), amp, "tikhonov", float(gamma), 0
    )


def choose_gamma(delta: float, R: float, beta_holder: float | None = None) -> float:
    """A-priori parameter ``gamma = (delta / R)^2``.

    Balances the data misfit against the a-priori radius ``R``; the rate
    then follows the Hoelder exponent ``beta_holder`` of the conditional
    stability estimate (which does not enter the formula itself).
    """
    if beta_holder is not None and not 0.0 < beta_holder < 1.0:
        raise DomainError("Hoelder exponent must lie in (0, 1)")
    if not (delta > 0 and R > 0):
        raise DomainError("delta and R must be positive")
    if delta >= R:
        raise DomainError(f"noise level {delta} is not below the a-priori bound {R}")
    return (delta / R) ** 2


def backcast_interior(u0_hat: SpectralField | BackcastResult, alpha: float, t: float) -> SpectralField:
    """State at ``0 <= t`` obtained by running the reconstructed initial state forward."""
    u0 = u0_hat.u0_hat if isinstance(u0_hat, BackcastResult) else u0_hat
    return forward_evolve(u0, alpha, t)


def worst_case_perturbation(
    eigsys: EigenSystem, alpha: float, T: float, t: float, delta: float, radius: float
) -> SpectralField:
    """Single-mode initial perturbation with the largest norm at time ``t``.

    Maximizes ``||w(t)||`` over ``w0 = s phi_n`` subject to
    ``||w(T)|| <= delta`` and ``||w0|| <= radius``, so each mode uses
    ``s = min(delta / E_n(T), radius)``.
    """
    T = _check_T(T)
    eT = decay_factors(eigsys, alpha, T)
    et = decay_factors(eigsys, alpha, t)
    with np.errstate(divide="ignore", over="ignore"):
        scale = np.minimum(np.where(eT > 0, delta / eT, np.inf), radius)
    n = int(np.argmax(scale * et))
    c = np.zeros(eigsys.size)
    c[n] = scale[n]
    return SpectralField(c, eigsys)


def fit_power_law(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if x.size < 2 or np.any(x <= 0) or np.any(y <= 0):
        raise DomainError("power-law fit needs at least two positive pairs")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])
