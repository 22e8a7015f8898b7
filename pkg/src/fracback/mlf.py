r"""Two-parameter Mittag-Leffler function on the real axis.

.. math::

    E_{\alpha,\beta}(x) = \sum_{k=0}^{\infty} \frac{x^k}{\Gamma(\alpha k + \beta)}

Evaluation is split into regimes:

* ``closed_form`` -- :math:`\alpha = 1` (exponential / Kummer function);
* ``series`` -- small :math:`|x|` where the Taylor series has no harmful
  cancellation (the absolute series is bounded);
* ``asymptotic`` -- :math:`x \le -50`, the algebraic expansion
  :math:`-\sum_k x^{-k}/\Gamma(\beta - \alpha k)`;
* ``integral`` -- everything in between, by quadrature of the Hankel
  contour collapsed onto the negative real axis.

Positive arguments are only accepted for :math:`\alpha = 1`, or on request
(``allow_positive=True``) through a log-space series capped at ``x <= 50``.

The module also has finite-difference checks of complete monotonicity and
midpoint log-convexity for sampled functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import integrate, special

from .exceptions import ConvergenceError, DomainError

__all__ = [
    "MlParams",
    "EvalReport",
    "ml_eval",
    "ml_values",
    "ml_time_deriv",
    "ml_inverse_bound_c1",
    "check_complete_monotone",
    "check_log_convex",
    "OrderVerdict",
    "CompleteMonotoneReport",
    "LogConvexReport",
    "SERIES_RADIUS",
    "ASYMPTOTIC_RADIUS",
    "POSITIVE_CAP",
]

SERIES_RADIUS = 5.0
ASYMPTOTIC_RADIUS = 50.0
POSITIVE_CAP = 50.0
ASYMPTOTIC_TERMS = 10
C1_TAIL_START = 1.0e4
C1_SAFETY = 1.01

_EPS = np.finfo(float).eps
# series is accepted only when roundoff from cancellation stays below this
_SERIES_ERR_MAX = 2.0e-14
_ASYMPTOTIC_ERR_MAX = 1.0e-14
_INTEGRAL_ERR_MAX = 1.0e-12
_MAX_SERIES_TERMS = 2000


@dataclass(frozen=True)
class MlParams:
    """Orders of :math:`E_{\\alpha,\\beta}`: ``0 < alpha <= 1`` and ``beta > 0``."""

    alpha: float
    beta: float = 1.0

    def __post_init__(self) -> None:
        a, b = float(self.alpha), float(self.beta)
        if not (math.isfinite(a) and math.isfinite(b)):
            raise DomainError(f"non-finite Mittag-Leffler parameters ({a}, {b})")
        if not 0.0 < a <= 1.0:
            raise DomainError(f"alpha must lie in (0, 1], got {a}")
        if b <= 0.0:
            raise DomainError(f"beta must be positive, got {b}")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)


@dataclass(frozen=True)
class EvalReport:
    value: float
    est_abs_error: float
    regime: str


def ml_eval(params: MlParams, x: float, *, allow_positive: bool = False) -> EvalReport:
    """Evaluate :math:`E_{\\alpha,\\beta}(x)` with an absolute error estimate.

    For ``alpha < 1`` only ``x <= 0`` is accepted unless ``allow_positive``
    is set, in which case ``0 < x <= POSITIVE_CAP`` is summed as a
    positive series (used for the non-positive eigenvalues of ``-A``).

    Raises
    ------
    DomainError
        ``x > 0`` with ``alpha < 1`` (outside the permitted range).
    OverflowError
        The value is not representable as a double.
    """
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"argument must be finite, got {x}")
    value, err, regime = _ml_scalar(params.alpha, params.beta, x, bool(allow_positive))
    return EvalReport(value, err, regime)


def ml_values(
    alpha: float, beta: float, x: Iterable[float] | np.ndarray, *, allow_positive: bool = False
) -> np.ndarray:
    """Elementwise :math:`E_{\\alpha,\\beta}` over an array of arguments."""
    MlParams(alpha, beta)
    xs = np.asarray(x, dtype=float)
    flat = xs.ravel()
    out = np.empty_like(flat)
    a, b, pos = float(alpha), float(beta), bool(allow_positive)
    for i, xi in enumerate(flat):
        if not math.isfinite(xi):
            raise DomainError(f"argument must be finite, got {xi}")
        out[i] = _ml_scalar(a, b, float(xi), pos)[0]
    return out.reshape(xs.shape)


@lru_cache(maxsize=1 << 20)
def _ml_scalar(alpha: float, beta: float, x: float, allow_positive: bool) -> tuple[float, float, str]:
    if alpha == 1.0:
        return _closed_form_alpha1(beta, x)
    if x > 0.0:
        if not allow_positive:
            raise DomainError(f"positive argument {x} is not supported for alpha={alpha} < 1")
        return _positive_series(alpha, beta, x)
    if x == 0.0:
        return 1.0 / math.gamma(beta), 0.0, "series"

    ax = -x
    if ax <= SERIES_RADIUS and ax ** (1.0 / alpha) <= 8.0:
        value, err = _alternating_series(alpha, beta, x)
        if err <= _SERIES_ERR_MAX:
            return value, err, "series"
    if ax >= ASYMPTOTIC_RADIUS:
        value, err = _asymptotic(alpha, beta, x)
        if err <= _ASYMPTOTIC_ERR_MAX:
            return value, err, "asymptotic"
    value, err = _integral(alpha, beta, ax)
    if not err <= _INTEGRAL_ERR_MAX:
        raise ConvergenceError(f"quadrature error estimate {err:.2e} for E_{alpha},{beta}({x})")
    return value, err, "integral"


def _closed_form_alpha1(beta: float, x: float) -> tuple[float, float, str]:
    if beta == 1.0:
        try:
            v = math.exp(x)
        except OverflowError as exc:
            raise OverflowError(f"exp({x}) is not representable") from exc
        return v, _EPS * v, "closed_form"
    if beta == 2.0:
        v = 1.0 if x == 0.0 else math.expm1(x) / x
        return v, 4 * _EPS * abs(v), "closed_form"
    v = float(special.hyp1f1(1.0, beta, x) * special.rgamma(beta))
    if not math.isfinite(v):
        raise OverflowError(f"E_1,{beta}({x}) is not representable")
    return v, 64 * _EPS * max(abs(v), 1e-300), "closed_form"


def _alternating_series(alpha: float, beta: float, x: float) -> tuple[float, float]:
    """Taylor series for moderate ``x < 0``; returns (value, error estimate)."""
    total = 0.0
    abs_total = 0.0
    prev = math.inf
    power = 1.0
    k = 0
    while k < _MAX_SERIES_TERMS:
        arg = alpha * k + beta
        if arg > 170.0:
            break
        term = power / math.gamma(arg)
        total += term
        abs_total += abs(term)
        mag = abs(term)
        if k > 0 and mag < prev and mag <= 1e-16 * max(abs(total), 1e-300):
            break
        prev = mag
        power *= x
        k += 1
    else:
        return total, math.inf
    tail = prev if k < _MAX_SERIES_TERMS else math.inf
    err = 4.0 * _EPS * abs_total * math.sqrt(k + 1.0) + 1e-16 * tail
    return total, err


def _positive_series(alpha: float, beta: float, x: float) -> tuple[float, float, str]:
    if x > POSITIVE_CAP:
        raise DomainError(
            f"positive argument {x} exceeds the series cap {POSITIVE_CAP} for alpha={alpha}"
        )
    if x ** (1.0 / alpha) > 700.0:
        raise OverflowError(f"E_{alpha},{beta}({x}) exceeds the double range")
    logx = math.log(x)
    logs = []
    k = 0
    peak = -math.inf
    while True:
        lt = k * logx - math.lgamma(alpha * k + beta)
        logs.append(lt)
        peak = max(peak, lt)
        if k > 0 and lt < logs[-2] and lt < peak - 40.0:
            break
        k += 1
        if k > 100000:
            raise OverflowError(f"positive series for E_{alpha},{beta}({x}) did not settle")
    if peak > 709.0:
        raise OverflowError(f"E_{alpha},{beta}({x}) exceeds the double range")
    v = math.fsum(math.exp(lt) for lt in logs)
    err = 1e-15 * v * (1.0 + abs(peak))
    return v, err, "series"


def _asymptotic(alpha: float, beta: float, x: float) -> tuple[float, float]:
    inv = 1.0 / x
    power = 1.0
    total = 0.0
    terms = []
    for k in range(1, ASYMPTOTIC_TERMS + 3):
        power *= inv
        terms.append(-power * float(special.rgamma(beta - alpha * k)))
    total = math.fsum(terms[:ASYMPTOTIC_TERMS])
    rem = max(abs(terms[ASYMPTOTIC_TERMS]), abs(terms[ASYMPTOTIC_TERMS + 1]))
    return total, rem + _EPS * abs(total)


def _sinpi(z: float) -> float:
    """``sin(pi z)`` with the argument reduced exactly to ``[-1/2, 1/2]``."""
    r = math.fmod(z, 2.0)
    if r > 1.0:
        r -= 2.0
    elif r < -1.0:
        r += 2.0
    if r > 0.5:
        r = 1.0 - r
    elif r < -0.5:
        r = -1.0 - r
    return math.sin(math.pi * r)


def _integral(alpha: float, beta: float, ax: float) -> tuple[float, float]:
    """:math:`E_{\\alpha,\\beta}(-ax)` for ``ax > 0`` by real-axis quadrature."""
    if beta > 1.0:
        # E_{a,b}(-X) = (1/Gamma(b-a) - E_{a,b-a}(-X)) / X keeps the integrand integrable
        inner, err = _integral(alpha, beta - alpha, ax)
        return (float(special.rgamma(beta - alpha)) - inner) / ax, (err + _EPS) / ax

    # near alpha = 1 these sines are O(1 - alpha), so they need exact argument reduction
    sin_b = _sinpi(beta)
    sin_ba = _sinpi(beta - alpha)
    sin_a = _sinpi(alpha)
    cos_a = _sinpi(0.5 - alpha)
    inv_a = 1.0 / alpha
    expo = (1.0 - beta) / alpha
    shift = ax * cos_a
    peak = max(-shift, 0.0)
    width2 = (ax * sin_a) ** 2
    # the peak needs special care only when it is narrower than its distance to 0
    narrow = peak * peak > width2
    # beyond this point exp(-u**(1/alpha)) < e^-60
    upper = 60.0**alpha + 2.0 * peak

    if narrow:
        # u sin(pi b) + ax sin(pi (b - a)) rewritten around the peak without cancellation
        cos_b_sin_a = ax * _sinpi(0.5 - beta) * sin_a

        def linear(u: float) -> float:
            return (u - peak) * sin_b - cos_b_sin_a
    else:

        def linear(u: float) -> float:
            return u * sin_b + ax * sin_ba

    def smooth(u: float) -> float:
        return math.exp(-(u**inv_a)) * u**expo * linear(u)

    def smooth_deriv(u: float) -> float:
        return math.exp(-(u**inv_a)) * u**expo * (linear(u) * (expo / u - inv_a * u ** (inv_a - 1.0)) + sin_b)

    if narrow:
        # remove the Lorentzian peak (width ax sin(pi alpha), tiny near alpha = 1)
        # through a second-order expansion at the peak, integrated in closed form
        g0, g1 = smooth(peak), smooth_deriv(peak)
        step = 1e-4 * peak
        g2 = 0.25 * (smooth_deriv(peak + step) - smooth_deriv(peak - step)) / step
        w = math.sqrt(width2)
        lorentz = (math.atan((upper - peak) / w) + math.atan(peak / w)) / w
        exact = g0 * lorentz + g2 * (upper - width2 * lorentz)
        exact += 0.5 * g1 * math.log(((upper - peak) ** 2 + width2) / (peak**2 + width2))

        def integrand(u: float) -> float:
            d = u - peak
            return (smooth(u) - g0 - d * (g1 + g2 * d)) / (d * d + width2)

        # extra breaks let quad resolve the residual dip of width w around the peak
        pieces = sorted({0.0, max(peak - 50.0 * w, 0.0), peak, min(peak + 50.0 * w, upper), upper})
    else:
        exact = 0.0

        def integrand(u: float) -> float:
            return smooth(u) / ((u + shift) ** 2 + width2)

        pieces = [0.0, peak, upper] if peak > 0.0 else [0.0, upper]
    total = exact
    err = 8 * _EPS * abs(exact)
    for lo, hi in zip(pieces[:-1], pieces[1:]):
        # full_output keeps quad's diagnostics out of the warning stream; its
        # error estimate is carried in err and checked by the caller
        val, e, *_ = integrate.quad(integrand, lo, hi, epsabs=1e-15, epsrel=1e-13, limit=400, full_output=1)
        total += val
        err += e
    scale = 1.0 / (alpha * math.pi)
    return total * scale, err * scale + 8 * _EPS * abs(total * scale)


def ml_time_deriv(alpha: float, lam: float, t: float) -> float:
    """:math:`\\frac{d}{dt} E_{\\alpha,1}(-\\lambda t^\\alpha) = -\\lambda t^{\\alpha-1} E_{\\alpha,\\alpha}(-\\lambda t^\\alpha)`."""
    MlParams(alpha, 1.0)
    if not t > 0.0:
        raise DomainError(f"time must be positive, got {t}")
    if alpha < 1.0 and lam < 0.0:
        raise DomainError("the derivative identity is only used for lambda >= 0 when alpha < 1")
    if lam == 0.0:
        return 0.0
    if alpha == 1.0:
        return -lam * math.exp(-lam * t)
    ta = t**alpha
    return -lam * ta / t * _ml_scalar(alpha, alpha, -lam * ta, False)[0]


def ml_inverse_bound_c1(
    alpha: float, T: float, lambda_floor: float, *, n_grid: int = 512
) -> float:
    """Constant :math:`C_1` with :math:`1/E_{\\alpha,1}(-\\lambda T^\\alpha) \\le C_1 (1 + \\lambda T^\\alpha)`.

    The supremum of the ratio is sampled on a log grid of
    :math:`z = \\lambda T^\\alpha` over ``[lambda_floor * T**alpha, 1e4]``,
    combined with the large-``z`` limit :math:`\\Gamma(1-\\alpha)` (approached
    from below), and inflated by one percent.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"the linear inverse bound needs 0 < alpha < 1, got {alpha}")
    if not T > 0.0:
        raise DomainError(f"T must be positive, got {T}")
    if not lambda_floor > 0.0:
        raise DomainError(f"lambda_floor must be positive, got {lambda_floor}")
    tail = math.gamma(1.0 - alpha)
    z0 = lambda_floor * T**alpha
    sup = 0.0
    if z0 < C1_TAIL_START:
        z = np.geomspace(z0, C1_TAIL_START, n_grid)
        e = ml_values(alpha, 1.0, -z)
        sup = float(np.max(1.0 / (e * (1.0 + z))))
    return C1_SAFETY * max(sup, tail)


# ---------------------------------------------------------------------------
# shape checks


@dataclass(frozen=True)
class OrderVerdict:
    order: int
    passed: bool
    worst_value: float
    tolerance: float


@dataclass(frozen=True)
class CompleteMonotoneReport:
    orders: list[OrderVerdict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(o.passed for o in self.orders)


def _sample(f: Callable, grid: np.ndarray) -> np.ndarray:
    try:
        vals = np.asarray(f(grid), dtype=float)
        if vals.shape == grid.shape:
            return vals
    except Exception:  # scalar-only callables
        pass
    return np.array([float(f(float(t))) for t in grid])


def check_complete_monotone(
    f: Callable, grid: Sequence[float] | np.ndarray, order_max: int = 4
) -> CompleteMonotoneReport:
    """Sign test of :math:`(-1)^k f^{(k)} \\ge 0` for ``k = 0..order_max``.

    Derivatives are replaced by ``k! f[t_i, ..., t_{i+k}]`` (divided
    differences) on each window; the tolerance for order ``k`` is
    ``1e-8 (1 + max|f|) k! h**-k`` with ``h`` the smallest spacing in the
    window.
    """
    t = np.asarray(grid, dtype=float)
    if t.ndim != 1 or np.any(np.diff(t) <= 0):
        raise DomainError("grid must be one-dimensional and strictly increasing")
    if not 0 <= order_max <= 4:
        raise DomainError(f"order_max must be in [0, 4], got {order_max}")
    if t.size < order_max + 2:
        raise DomainError(f"grid has {t.size} points, need at least {order_max + 2}")
    vals = _sample(f, t)
    if not np.all(np.isfinite(vals)):
        raise DomainError("function values must be finite")

    verdicts = []
    dd = vals.copy()
    for k in range(order_max + 1):
        if k > 0:
            dd = (dd[1:] - dd[:-1]) / (t[k:] - t[:-k])
        n = dd.size
        deriv = math.factorial(k) * dd * (-1) ** k
        h = np.array([np.min(np.diff(t[i : i + k + 1])) if k else 1.0 for i in range(n)])
        fmax = np.array([np.max(np.abs(vals[i : i + k + 1])) for i in range(n)])
        tol = 1e-8 * (1.0 + fmax) * math.factorial(k) * h ** (-k)
        slack = deriv + tol
        i = int(np.argmin(slack))
        verdicts.append(OrderVerdict(k, bool(np.all(slack >= 0.0)), float(deriv[i]), float(tol[i])))
    return CompleteMonotoneReport(verdicts)


@dataclass(frozen=True)
class LogConvexReport:
    passed: bool
    worst_margin: float
    n_checked: int


def check_log_convex(samples: Iterable[tuple[float, float]] | np.ndarray) -> LogConvexReport:
    """Midpoint test :math:`f(t_b) \\le \\sqrt{f(t_a) f(t_c)}\\,(1 + 10^{-9})`.

    Every consecutive triple whose middle node is the midpoint of its
    neighbours is checked. ``worst_margin`` is the smallest value of
    ``log(sqrt(f_a f_c)) - log(f_b)``; negative values beyond the slack
    fail.
    """
    arr = np.asarray(list(samples) if not isinstance(samples, np.ndarray) else samples, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise DomainError("samples must be (t, f) pairs")
    if arr.shape[0] < 3:
        raise DomainError("need at least 3 samples")
    t, f = arr[:, 0], arr[:, 1]
    if np.any(np.diff(t) <= 0):
        raise DomainError("sample times must be strictly increasing")
    if np.any(f <= 0) or not np.all(np.isfinite(f)):
        raise DomainError("log-convexity needs strictly positive finite samples")
    ta, tb, tc = t[:-2], t[1:-1], t[2:]
    scale = np.maximum(np.abs(tc - ta), 1e-300)
    mid = np.abs(tb - 0.5 * (ta + tc)) <= 1e-9 * scale
    if not np.any(mid):
        raise DomainError("no consecutive triple has its middle node at the midpoint")
    lf = np.log(f)
    margin = (0.5 * (lf[:-2] + lf[2:]) - lf[1:-1])[mid]
    worst = float(np.min(margin))
    return LogConvexReport(worst >= -math.log1p(1e-9), worst, int(mid.sum()))
