"""Stability constants and numerical verification of the backward estimates.

Each verifier returns :class:`Check` records ``lhs <= rhs`` evaluated with a
multiplicative slack ``1 + SLACK``. :func:`run_certificate` strings them
together into a :class:`StabilityCertificate`.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .backcast import worst_case_perturbation
from .evolve import (
    Trajectory,
    caputo_l1,
    evolve_trajectory,
    forward_evolve,
    rl_integral,
    uniform_step,
)
from .exceptions import AdmissibilityError, DomainError
from .mlf import POSITIVE_CAP, MlParams, ml_inverse_bound_c1, ml_values
from .specop import EigenSystem, SpectralField

__all__ = [
    "SLACK",
    "Check",
    "StabilityCertificate",
    "log_convexity_constant",
    "verify_log_convexity",
    "DissipationResult",
    "verify_dissipation_lemma",
    "MeanValuePoint",
    "mean_value_point",
    "holder_certificate",
    "InterpolationConstants",
    "interpolation_constants",
    "Thm4Result",
    "verify_thm3",
    "verify_noisy_holder",
    "run_certificate",
]

SLACK = 1.0e-8
DISSIPATION_LAYER = 1.0 / 16.0


@dataclass(frozen=True)
class Check:
    name: str
    lhs: float
    rhs: float
    margin: float
    passed: bool

    def render(self) -> str:
        mark = "ok" if self.passed else "FAIL"
        return f"{self.name}: {self.lhs:.12g} <= {self.rhs:.12g} (margin {self.margin:.3e}) [{mark}]"


def make_check(name: str, lhs: float, rhs: float, slack: float = SLACK) -> Check:
    lhs, rhs = float(lhs), float(rhs)
    margin = (rhs - lhs) / abs(rhs) if rhs != 0 else (0.0 if lhs <= 0 else -math.inf)
    return Check(name, lhs, rhs, margin, bool(lhs <= rhs * (1.0 + slack)))


@dataclass
class StabilityCertificate:
    alpha: float
    T: float
    R: float
    epsilon: float
    K: float
    K1: float
    xi: float | None = None
    theta: float | None = None
    C1: float | None = None
    C2: float | None = None
    beta_holder: float | None = None
    rescale: float | None = None
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def constants(self) -> dict:
        d = asdict(self)
        d.pop("checks")
        return d

    def to_dict(self) -> dict:
        return {
            "constants": self.constants(),
            "passed": self.passed,
            "checks": [asdict(c) for c in self.checks],
        }

    def to_json(self) -> str:
        return json.dumps(_finite(self.to_dict()), indent=2)

    def render(self) -> str:
        head = ", ".join(f"{k}={v:.12g}" for k, v in self.constants().items() if v is not None)
        return "\n".join([head] + [c.render() for c in self.checks]) + "\n"


def _finite(obj):
    """Replace non-finite floats by strings so the JSON stays standard."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_finite(v) for v in obj]
    return obj


# ---------------------------------------------------------------------------
# log-convexity


def log_convexity_constant(eigsys: EigenSystem, alpha: float, T: float) -> tuple[float, float]:
    """``(K, K1)``: ``(1, 1)`` without non-positive modes, else ``K1 = E_{alpha,1}(-lambda_1 T^alpha)`` and ``K = K1 + 1``."""
    MlParams(alpha)
    if not T > 0:
        raise DomainError("T must be positive")
    if eigsys.m == 0:
        return 1.0, 1.0
    x = -float(eigsys.eigenvalues[0]) * T**alpha
    if x > POSITIVE_CAP:
        raise DomainError(f"|lambda_1| T^alpha = {x} exceeds the cap {POSITIVE_CAP}")
    try:
        k1 = float(ml_values(alpha, 1.0, [x], allow_positive=True)[0])
    except OverflowError as exc:
        raise DomainError(f"K1 = E_alpha,1({x}) is not representable") from exc
    return k1 + 1.0, k1


def verify_log_convexity(traj: Trajectory, K: float) -> list[Check]:
    """``||u(t)|| <= K ||u(0)||^(1 - t/T) ||u(T)||^(t/T)`` on every trajectory node."""
    if traj.times[0] != 0.0:
        raise DomainError("trajectory must start at t = 0")
    T = traj.T
    n0, nT = float(traj.norms[0]), float(traj.norms[-1])
    if n0 == 0.0:
        return [make_check("log-convexity (u = 0)", 0.0, 0.0)]
    if nT == 0.0:
        raise DomainError("||u(T)|| = 0 with u(0) != 0")
    checks = []
    for t, nt in zip(traj.times, traj.norms):
        s = t / T
        rhs = K * n0 ** (1.0 - s) * nT**s
        checks.append(make_check(f"log-convexity t={t:.6g}", nt, rhs))
    return checks


# ---------------------------------------------------------------------------
# dissipation inequality  -d^alpha ||u||^2 <= 2 ||u|| ||A u0||


@dataclass(frozen=True)
class DissipationResult:
    checks: list[Check]
    tolerance: float
    t_start: float
    skipped: int


def _norm_sq_derivative(u0: SpectralField, alpha: float, t: np.ndarray) -> np.ndarray:
    lam = u0.eigsys.eigenvalues
    c2 = u0.coefficients**2
    out = np.empty(t.size)
    for i, ti in enumerate(t):
        if alpha == 1.0:
            e = np.exp(-lam * ti)
            de = -lam * e
        else:
            ta = ti**alpha
            e = ml_values(alpha, 1.0, -lam * ta, allow_positive=True)
            de = -lam * (ta / ti) * ml_values(alpha, alpha, -lam * ta, allow_positive=True)
        out[i] = 2.0 * np.sum(c2 * e * de)
    return out


def verify_dissipation_lemma(
    u0: SpectralField, alpha: float, grid, *, layer: float = DISSIPATION_LAYER
) -> DissipationResult:
    """Discrete check of ``-d^alpha ||u(t)||^2 <= 2 ||u(t)|| ||A u0||``.

    ``||u||^2`` is sampled on the uniform ``grid`` (from 0 to ``T``) and
    differentiated with the L1 scheme (a backward difference for
    ``alpha = 1``). Nodes inside the start-up layer ``t < layer * T``,
    where L1 has an O(1) consistency error for ``t^alpha``-type data, are
    skipped; the layer does not move with ``h``. The right side is relaxed by
    ``tol = 10 h^(2 - alpha) max |d/dt ||u||^2|`` over the checked nodes;
    a grid whose ``tol`` exceeds 10% of the larger side of the inequality is
    rejected as too coarse.
    """
    MlParams(alpha)
    t = np.asarray(grid, dtype=float)
    h = uniform_step(t)
    T = float(t[-1])
    traj = evolve_trajectory(u0, alpha, t)
    g = traj.norms**2
    if alpha < 1.0:
        d = caputo_l1(t, g, alpha)
    else:
        d = np.zeros_like(g)
        d[1:] = np.diff(g) / h
    if not 0.0 < layer < 1.0:
        raise DomainError("start-up layer must be a fraction of T in (0, 1)")
    t_start = layer * T
    sel = (t >= t_start - 1e-12 * T) & (t > 0) & (t < T - 1e-12 * T)
    if not np.any(sel):
        raise DomainError("grid too coarse: no node outside the start-up layer")
    au0 = u0.operator_norm()
    bound = 2.0 * traj.norms[sel] * au0
    deriv = _norm_sq_derivative(u0, alpha, t[sel])
    tol = 10.0 * h ** (2.0 - alpha) * float(np.max(np.abs(deriv)))
    # scale of the inequality: the larger of its two sides
    scale = max(float(np.max(bound)), float(np.max(np.abs(d[sel]))))
    if tol > 0.1 * scale:
        raise DomainError(f"grid too coarse: tolerance {tol:.3e} exceeds 10% of the bound scale {scale:.3e}")
    checks = [
        make_check(f"dissipation t={ti:.6g}", -di, bi + tol)
        for ti, di, bi in zip(t[sel], d[sel], bound)
    ]
    return DissipationResult(checks, tol, t_start, int(np.count_nonzero(~sel)))


# ---------------------------------------------------------------------------
# Hoelder stability through the mean value point


@dataclass(frozen=True)
class MeanValuePoint:
    xi: float
    integral: float
    target: float
    residual: float


def _norm_at(u0: SpectralField, alpha: float, s: float) -> float:
    return forward_evolve(u0, alpha, s).norm()


def mean_value_point(u0: SpectralField, alpha: float, T: float, n_quad: int = 2049) -> MeanValuePoint:
    """Smallest ``xi`` with ``int_0^T (T-s)^(alpha-1) ||u(s)|| ds = T^alpha/alpha ||u(xi)||``.

    The integral uses the product trapezoid rule on ``n_quad`` nodes; the
    root is bracketed on those nodes and refined by bisection on the exact
    norm. A constant norm returns ``T / 2``.
    """
    MlParams(alpha)
    if u0.norm() == 0.0:
        raise DomainError("u0 = 0 has no mean value point")
    s = np.linspace(0.0, T, n_quad)
    norms = evolve_trajectory(u0, alpha, s).norms
    integral = math.gamma(alpha) * float(rl_integral(s, norms, alpha)[-1])
    target = alpha * integral / T**alpha
    if float(np.max(norms) - np.min(norms)) <= 1e-13 * float(np.max(norms)):
        return MeanValuePoint(0.5 * T, integral, target, 0.0)

    f = norms - target
    hits = np.flatnonzero((f[:-1] == 0.0) | (np.sign(f[:-1]) != np.sign(f[1:])))
    if hits.size == 0:
        k = int(np.argmin(np.abs(f)))
        lo = hi = float(s[k])
    else:
        k = int(hits[0])
        lo, hi = float(s[k]), float(s[k + 1])
        flo = f[k]
        if flo == 0.0:
            hi = lo
        for _ in range(200):
            if hi - lo <= 1e-15 * T:
                break
            mid = 0.5 * (lo + hi)
            fm = _norm_at(u0, alpha, mid) - target
            if fm == 0.0:
                lo = hi = mid
                break
            if np.sign(fm) == np.sign(flo):
                lo, flo = mid, fm
            else:
                hi = mid
    xi = 0.5 * (lo + hi)
    residual = abs(_norm_at(u0, alpha, xi) - target) / target
    return MeanValuePoint(xi, integral, target, residual)


def _check_I_R(u0: SpectralField, R: float) -> None:
    if not R > 0:
        raise DomainError("R must be positive")
    if u0.norm() > R * (1 + SLACK) or u0.operator_norm() > R * (1 + SLACK):
        raise AdmissibilityError(
            f"u0 outside I_R: ||u0|| = {u0.norm():.6g}, ||A u0|| = {u0.operator_norm():.6g}, R = {R}"
        )


def holder_certificate(
    u0: SpectralField, alpha: float, T: float, R: float, *, K: float | None = None, n_quad: int = 2049
) -> StabilityCertificate:
    """Certificate for ``||u0|| <= ||u(T)||^theta sqrt(||u(T)||^(2-2theta) + K R^(2-2theta) 2T^alpha/(alpha Gamma(alpha)))``."""
    _check_I_R(u0, R)
    K_, K1 = log_convexity_constant(u0.eigsys, alpha, T)
    if K is None:
        K = K_
    mv = mean_value_point(u0, alpha, T, n_quad)
    theta = mv.xi / (2.0 * T)
    n0, nT = u0.norm(), forward_evolve(u0, alpha, T).norm()
    c = 2.0 * T**alpha / (alpha * math.gamma(alpha))
    rhs = nT**theta * math.sqrt(nT ** (2.0 - 2.0 * theta) + K * R ** (2.0 - 2.0 * theta) * c)
    energy_rhs = nT**2 + c * _norm_at(u0, alpha, mv.xi) * u0.operator_norm()
    checks = [
        make_check("hoelder energy ||u0||^2", n0**2, energy_rhs),
        make_check("hoelder ||u0||", n0, rhs),
        Check("hoelder theta < 1/2", theta, 0.5, 1.0 - 2.0 * theta, theta < 0.5),
        Check("hoelder theta > 0", 0.0, theta, 1.0 if theta > 0 else -math.inf, theta > 0),
    ]
    return StabilityCertificate(alpha, T, R, math.nan, K, K1, xi=mv.xi, theta=theta, checks=checks)


# ---------------------------------------------------------------------------
# Hoelder stability with explicit exponent (0 < alpha < 1)


@dataclass(frozen=True)
class InterpolationConstants:
    C1: float
    C2: float
    beta: float
    checks: list[Check]


def interpolation_constants(eigsys: EigenSystem, alpha: float, T: float, epsilon: float) -> InterpolationConstants:
    """``C1``, ``C2 = C1 (1/lambda_{m+1} + T^alpha)`` and ``beta = eps/(eps+1)``, with per-mode checks ``1/E <= C2 lambda_n``."""
    if alpha >= 1.0:
        raise DomainError("the explicit-exponent estimate needs alpha < 1")
    MlParams(alpha)
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    floor = eigsys.positive_floor
    if floor is None:
        raise DomainError("no positive eigenvalue in the truncation")
    c1 = ml_inverse_bound_c1(alpha, T, floor)
    c2 = c1 * (1.0 / floor + T**alpha)
    beta = epsilon / (epsilon + 1.0)
    lam = eigsys.eigenvalues[eigsys.m :]
    e = ml_values(alpha, 1.0, -lam * T**alpha)
    checks = [
        make_check(f"inverse bound n={eigsys.m + i + 1}", 1.0 / ei, c2 * li)
        for i, (li, ei) in enumerate(zip(lam, e))
    ]
    return InterpolationConstants(c1, c2, beta, checks)


@dataclass(frozen=True)
class Thm4Result:
    checks: list[Check]
    constants: InterpolationConstants
    rescale: float


def _admissible_norm(u0: SpectralField, epsilon: float) -> float:
    es = u0.eigsys
    shifted = u0.power_norm(epsilon)
    lam = es.eigenvalues[es.m :]
    plain = float(np.sqrt(np.sum((lam**epsilon * u0.coefficients[es.m :]) ** 2)))
    return max(shifted, plain)


def verify_thm3(
    u0: SpectralField, eigsys: EigenSystem, alpha: float, T: float, epsilon: float, R: float,
    constants: InterpolationConstants | None = None,
) -> Thm4Result:
    """``||u(0)|| <= (1 + C2^beta R^(1-beta)) ||u(T)||^beta`` for ``u0`` in ``I_{eps,R}``.

    Inputs with ``||u(T)|| > 1`` are scaled down to ``||u(T)|| = 1`` first;
    the factor is returned as ``rescale``.
    """
    if eigsys is not u0.eigsys and not np.array_equal(eigsys.eigenvalues, u0.eigsys.eigenvalues):
        raise DomainError("u0 is not expanded in the given eigensystem")
    if _admissible_norm(u0, epsilon) > R * (1 + SLACK):
        raise AdmissibilityError(f"u0 outside I_(eps,R): norm {_admissible_norm(u0, epsilon):.6g} > R = {R}")
    if constants is None:
        constants = interpolation_constants(eigsys, alpha, T, epsilon)
    c2, beta = constants.C2, constants.beta
    uT = forward_evolve(u0, alpha, T)
    scale = 1.0
    if uT.norm() > 1.0:
        scale = 1.0 / uT.norm()
        u0, uT = u0 * scale, uT * scale
    m = u0.eigsys.m
    nT = uT.norm()
    low0 = float(np.linalg.norm(u0.coefficients[:m]))
    lowT = float(np.linalg.norm(uT.coefficients[:m]))
    high0 = float(np.linalg.norm(u0.coefficients[m:]))
    factor = c2**beta * R ** (1.0 - beta)
    checks = [
        make_check("explicit-exponent ||u(0)||", u0.norm(), (1.0 + factor) * nT**beta),
        make_check("explicit-exponent ||u2(0)||", high0, factor * nT**beta),
    ]
    if m:
        checks.append(make_check("explicit-exponent ||u1(0)|| <= ||u1(T)||", low0, lowT))
    return Thm4Result(constants.checks + checks, constants, scale)


# ---------------------------------------------------------------------------
# noisy final data


def verify_noisy_holder(
    traj_exact: Trajectory, traj_noisy: Trajectory, K: float, R: float, delta: float
) -> list[Check]:
    """``||u(t) - u_delta(t)|| <= 2 K R^(1 - t/T) delta^(t/T)`` for a pair in class M."""
    if not np.array_equal(traj_exact.times, traj_noisy.times):
        raise DomainError("trajectories must share the time grid")
    if traj_exact.norms[0] > R * (1 + SLACK) or traj_noisy.norms[0] > R * (1 + SLACK):
        raise AdmissibilityError("initial states are not in the class ||u(0)|| <= R")
    diff = traj_exact.coefficients - traj_noisy.coefficients
    dn = np.sqrt(np.sum(diff**2, axis=1))
    if dn[-1] > delta * (1 + SLACK) + 1e-300:
        raise AdmissibilityError(f"final states differ by {dn[-1]:.6g} > delta = {delta}")
    T = traj_exact.T
    checks = []
    for t, d in zip(traj_exact.times, dn):
        s = t / T
        rhs = 2.0 * K * R ** (1.0 - s) * (delta**s if s > 0 else 1.0)
        checks.append(make_check(f"noisy t={t:.6g}", d, rhs))
    return checks


# ---------------------------------------------------------------------------
# full suite


def run_certificate(
    u0: SpectralField,
    alpha: float,
    T: float,
    R: float,
    epsilon: float,
    *,
    time_points: int = 33,
    deltas: tuple[float, ...] = (1e-1, 1e-2, 1e-3),
    dissipation_steps: int = 512,
    K_override: float | None = None,
) -> StabilityCertificate:
    """Run every applicable verifier for one initial state and order."""
    es = u0.eigsys
    K, K1 = log_convexity_constant(es, alpha, T)
    if K_override is not None:
        K = float(K_override)
    times = np.linspace(0.0, T, time_points)
    traj = evolve_trajectory(u0, alpha, times)
    checks = list(verify_log_convexity(traj, K))

    grid = np.linspace(0.0, T, dissipation_steps + 1)
    checks += verify_dissipation_lemma(u0, alpha, grid).checks

    hold = holder_certificate(u0, alpha, T, R, K=K)
    checks += hold.checks

    cert = StabilityCertificate(alpha, T, R, epsilon, K, K1, xi=hold.xi, theta=hold.theta)
    if alpha < 1.0 and es.positive_floor is not None:
        res = verify_thm3(u0, es, alpha, T, epsilon, R)
        cert.C1, cert.C2, cert.beta_holder = res.constants.C1, res.constants.C2, res.constants.beta
        cert.rescale = res.rescale
        checks += res.checks

    for delta in deltas:
        w0 = worst_case_perturbation(es, alpha, T, 0.5 * T, delta, R - u0.norm())
        noisy = evolve_trajectory(u0 + w0, alpha, times)
        for c in verify_noisy_holder(traj, noisy, K, R, delta):
            checks.append(Check(f"{c.name} delta={delta:g}", c.lhs, c.rhs, c.margin, c.passed))
    cert.checks = checks
    return cert
