"""Spectral forward solver and discrete fractional calculus on uniform grids."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError
from .mlf import MlParams, ml_values
from .specop import EigenSystem, SpectralField

__all__ = [
    "Trajectory",
    "decay_factors",
    "forward_evolve",
    "forward_with_constant_source",
    "evolve_trajectory",
    "caputo_l1",
    "rl_integral",
    "uniform_step",
]


def _check_time(t: float) -> float:
    t = float(t)
    if not (math.isfinite(t) and t >= 0.0):
        raise DomainError(f"time must be finite and non-negative, got {t}")
    return t


def decay_factors(eigsys: EigenSystem, alpha: float, t: float, beta: float = 1.0) -> np.ndarray:
    """``E_{alpha,beta}(-lambda_n t^alpha)`` for every mode."""
    MlParams(alpha, beta)
    t = _check_time(t)
    lam = eigsys.eigenvalues
    if alpha == 1.0 and beta == 1.0:
        return np.exp(-lam * t)
    return ml_values(alpha, beta, -lam * t**alpha, allow_positive=True)


def forward_evolve(u0: SpectralField, alpha: float, t: float) -> SpectralField:
    """Solution of ``d^alpha u = A u`` at time ``t``: ``c_n(t) = c_n(0) E_{alpha,1}(-lambda_n t^alpha)``."""
    t = _check_time(t)
    if t == 0.0:
        MlParams(alpha, 1.0)
        return u0
    return u0.with_coefficients(u0.coefficients * decay_factors(u0.eigsys, alpha, t))


def forward_with_constant_source(
    u0: SpectralField, f: SpectralField, alpha: float, t: float
) -> SpectralField:
    """Inhomogeneous problem with a time-independent source ``f``.

    ``c_n(t) = c_n(0) E_{alpha,1}(-lambda_n t^alpha) + f_n t^alpha E_{alpha,alpha+1}(-lambda_n t^alpha)``
    """
    if f.eigsys is not u0.eigsys and not np.array_equal(f.eigsys.eigenvalues, u0.eigsys.eigenvalues):
        raise DomainError("source and initial state live on different eigensystems")
    t = _check_time(t)
    hom = forward_evolve(u0, alpha, t)
    if t == 0.0:
        return hom
    duhamel = t**alpha * decay_factors(u0.eigsys, alpha, t, beta=alpha + 1.0)
    return hom.with_coefficients(hom.coefficients + f.coefficients * duhamel)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Coefficients of ``u(t)`` on a time grid, one row per time."""

    times: np.ndarray
    coefficients: np.ndarray
    norms: np.ndarray
    eigsys: EigenSystem

    @property
    def T(self) -> float:
        return float(self.times[-1])

    def field(self, i: int) -> SpectralField:
        return SpectralField(self.coefficients[i], self.eigsys)

    @property
    def fields(self) -> list[SpectralField]:
        return [self.field(i) for i in range(self.times.size)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        n = self.eigsys.size
        buf.write(",".join(["t", "norm"] + [f"c_{i}" for i in range(1, n + 1)]) + "\n")
        for t, nrm, row in zip(self.times, self.norms, self.coefficients):
            buf.write(",".join(repr(float(v)) for v in (t, nrm, *row)) + "\n")
        return buf.getvalue()


def evolve_trajectory(u0: SpectralField, alpha: float, time_grid) -> Trajectory:
    times = np.asarray(time_grid, dtype=float)
    if times.ndim != 1 or times.size < 1:
        raise DomainError("time grid must be a non-empty 1-D array")
    if np.any(times < 0) or np.any(np.diff(times) <= 0):
        raise DomainError("time grid must be increasing and non-negative")
    rows = np.vstack([forward_evolve(u0, alpha, t).coefficients for t in times])
    norms = np.sqrt(np.sum(rows**2, axis=1))
    for a in (times, rows, norms):
        a.setflags(write=False)
    return Trajectory(times, rows, norms, u0.eigsys)


def uniform_step(t) -> float:
    """Step of a uniform grid starting at 0; raises if the grid is not uniform."""
    t = np.asarray(t, dtype=float)
    if t.ndim != 1 or t.size < 3:
        raise DomainError("need a 1-D grid with at least 3 points")
    h = (t[-1] - t[0]) / (t.size - 1)
    if not h > 0 or np.max(np.abs(np.diff(t) - h)) > 1e-9 * h:
        raise DomainError("grid is not uniform")
    if abs(t[0]) > 1e-12 * h:
        raise DomainError("grid must start at t = 0")
    return float(h)


def caputo_l1(t, g, alpha: float) -> np.ndarray:
    """L1 approximation of the Caputo derivative at every grid node.

    ``g`` is interpolated piecewise linearly and the kernel
    ``(t - s)^{-alpha} / Gamma(1 - alpha)`` is integrated exactly, so the
    scheme is exact for linear ``g`` and of order ``2 - alpha`` for smooth
    ``g``. The value at ``t = 0`` is reported as 0.
    """
    h = uniform_step(t)
    g = np.asarray(g, dtype=float)
    if g.shape != np.shape(t):
        raise DomainError("samples and grid differ in length")
    if not 0.0 < alpha < 1.0:
        raise DomainError("L1 needs 0 < alpha < 1; use a difference quotient for alpha = 1")
    n = g.size
    i = np.arange(n - 1, dtype=float)
    b = (i + 1.0) ** (1.0 - alpha) - i ** (1.0 - alpha)
    out = np.zeros(n)
    out[1:] = np.convolve(np.diff(g), b)[: n - 1] * h ** (-alpha) / math.gamma(2.0 - alpha)
    return out


def rl_integral(t, g, alpha: float) -> np.ndarray:
    """Riemann-Liouville integral ``J^alpha g`` by the product trapezoid rule.

    Exact for piecewise-linear ``g``; reduces to the cumulative trapezoid
    rule at ``alpha = 1``.
    """
    h = uniform_step(t)
    g = np.asarray(g, dtype=float)
    if g.shape != np.shape(t):
        raise DomainError("samples and grid differ in length")
    if not alpha > 0.0:
        raise DomainError(f"order must be positive, got {alpha}")
    n = g.size
    a1 = alpha + 1.0
    k = np.arange(n, dtype=float)
    c = np.empty(n)
    c[0] = 1.0
    kk = k[1:]
    c[1:] = (kk + 1.0) ** a1 - 2.0 * kk**a1 + (kk - 1.0) ** a1
    first = np.zeros(n)
    first[1:] = (kk - 1.0) ** a1 - (kk - alpha - 1.0) * kk**alpha
    out = np.zeros(n)
    out[1:] = np.convolve(g[1:], c)[: n - 1] + first[1:] * g[0]
    return out * h**alpha / math.gamma(alpha + 2.0)
