"""Eigensystems of self-adjoint, bounded-above operators with compact resolvent.

Every operator is stored through the eigenvalues of ``-A`` in ascending
order together with a description of the eigenbasis. States are
:class:`SpectralField` objects holding the coefficients in that basis, so
the Hilbert-space norm is the Euclidean norm of the coefficients.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .exceptions import ConvergenceError, DomainError

__all__ = [
    "EigenSystem",
    "SpectralField",
    "dirichlet_laplacian_1d",
    "neumann_laplacian_1d",
    "advection_diffusion_reduce",
    "fractional_power",
    "matrix_operator",
    "jacobi_eigh",
    "project",
    "synthesize",
    "simpson_weights",
    "DEFAULT_MODES",
]

DEFAULT_MODES = 64
BASES = ("analytic-sine", "analytic-cosine", "matrix-columns", "abstract")
JACOBI_MAX_SWEEPS = 30
MATRIX_MAX_SIZE = 2000


def _frozen(a: Any) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Sorted eigenvalues of ``-A`` with basis metadata.

    ``m`` counts eigenvalues ``<= 0`` and ``kappa >= 0`` bounds the spectrum
    from below (``eigenvalues[0] >= -kappa``). ``vectors`` holds the
    orthonormal eigenvectors as columns for the ``matrix-columns`` basis.
    """

    eigenvalues: np.ndarray
    m: int
    kappa: float
    basis: str = "abstract"
    domain_length: float | None = None
    gauge: dict | None = None
    vectors: np.ndarray | None = None

    def __post_init__(self) -> None:
        lam = _frozen(self.eigenvalues)
        object.__setattr__(self, "eigenvalues", lam)
        if lam.ndim != 1 or lam.size < 1:
            raise DomainError("an eigensystem needs at least one eigenvalue")
        if not np.all(np.isfinite(lam)):
            raise DomainError("eigenvalues must be finite")
        if np.any(np.diff(lam) < 0):
            raise DomainError("eigenvalues must be sorted ascending")
        if self.basis not in BASES:
            raise DomainError(f"unknown basis descriptor {self.basis!r}")
        if not self.kappa >= 0:
            raise DomainError(f"kappa must be non-negative, got {self.kappa}")
        if lam[0] < -self.kappa:
            raise DomainError(f"lambda_1 = {lam[0]} violates the bound -kappa = {-self.kappa}")
        if int(np.count_nonzero(lam <= 0)) != self.m:
            raise DomainError(f"m = {self.m} does not count the non-positive eigenvalues")
        if self.vectors is not None:
            q = _frozen(self.vectors)
            if q.shape != (lam.size, lam.size):
                raise DomainError("eigenvector matrix has the wrong shape")
            object.__setattr__(self, "vectors", q)
        if self.domain_length is not None and not self.domain_length > 0:
            raise DomainError("domain_length must be positive")

    @property
    def size(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def positive_floor(self) -> float | None:
        """Smallest positive eigenvalue ``lambda_{m+1}``, or ``None``."""
        return float(self.eigenvalues[self.m]) if self.m < self.size else None

    def truncate(self, n_modes: int) -> "EigenSystem":
        if n_modes < 1:
            raise DomainError("need at least one mode")
        if n_modes >= self.size:
            return self
        if self.vectors is not None:
            raise DomainError("matrix eigensystems cannot be truncated")
        lam = self.eigenvalues[:n_modes]
        return EigenSystem(
            lam, int(np.count_nonzero(lam <= 0)), self.kappa, self.basis,
            self.domain_length, self.gauge,
        )

    def to_dict(self) -> dict:
        d = {
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "m": self.m,
            "kappa": float(self.kappa),
            "basis": self.basis,
        }
        if self.domain_length is not None:
            d["domain_length"] = float(self.domain_length)
        if self.gauge is not None:
            d["gauge"] = dict(self.gauge)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "EigenSystem":
        return cls(
            np.asarray(d["eigenvalues"], dtype=float), int(d["m"]), float(d["kappa"]),
            d.get("basis", "abstract"), d.get("domain_length"), d.get("gauge"),
        )


@dataclass(frozen=True, eq=False)
class SpectralField:
    """A state given by its coefficients ``<u, phi_n>``."""

    coefficients: np.ndarray
    eigsys: EigenSystem = field(repr=False)

    def __post_init__(self) -> None:
        c = _frozen(self.coefficients)
        if c.shape != (self.eigsys.size,):
            raise DomainError(
                f"{c.size} coefficients for an eigensystem of size {self.eigsys.size}"
            )
        if not np.all(np.isfinite(c)):
            raise DomainError("coefficients must be finite")
        object.__setattr__(self, "coefficients", c)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.coefficients**2)))

    def operator_norm(self) -> float:
        """``||A u||`` from the coefficients."""
        return float(np.sqrt(np.sum((self.eigsys.eigenvalues * self.coefficients) ** 2)))

    def power_norm(self, epsilon: float) -> float:
        """``||(kappa - A)^epsilon u||``."""
        w = (self.eigsys.kappa + self.eigsys.eigenvalues) ** epsilon
        return float(np.sqrt(np.sum((w * self.coefficients) ** 2)))

    def with_coefficients(self, c: np.ndarray) -> "SpectralField":
        return SpectralField(np.asarray(c, dtype=float), self.eigsys)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        return self.with_coefficients(self.coefficients + other.coefficients)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        return self.with_coefficients(self.coefficients - other.coefficients)

    def __mul__(self, s: float) -> "SpectralField":
        return self.with_coefficients(float(s) * self.coefficients)

    __rmul__ = __mul__

    def to_dict(self) -> dict:
        d = self.eigsys.to_dict()
        d["coefficients"] = [float(v) for v in self.coefficients]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "SpectralField":
        return cls(np.asarray(d["coefficients"], dtype=float), EigenSystem.from_dict(d))


def _check_length(l: float) -> float:
    l = float(l)
    if not (math.isfinite(l) and l > 0):
        raise DomainError(f"interval length must be positive, got {l}")
    return l


def _check_modes(n: int) -> int:
    if int(n) != n or n < 1:
        raise DomainError(f"n_modes must be a positive integer, got {n}")
    return int(n)


def dirichlet_laplacian_1d(l: float, n_modes: int = DEFAULT_MODES) -> EigenSystem:
    """``-d^2/dx^2`` on ``(0, l)`` with zero boundary values: ``lambda_n = (n pi / l)^2``."""
    l, n = _check_length(l), _check_modes(n_modes)
    lam = (np.arange(1, n + 1) * np.pi / l) ** 2
    return EigenSystem(lam, 0, 0.0, "analytic-sine", l)


def neumann_laplacian_1d(l: float, n_modes: int = DEFAULT_MODES) -> EigenSystem:
    """Zero-flux version: ``lambda_n = ((n - 1) pi / l)^2`` with a constant first mode."""
    l, n = _check_length(l), _check_modes(n_modes)
    lam = (np.arange(0, n) * np.pi / l) ** 2
    return EigenSystem(lam, 1, 0.0, "analytic-cosine", l)


def advection_diffusion_reduce(
    l: float, b: float, d: float, n_modes: int = DEFAULT_MODES
) -> EigenSystem:
    """Symmetrize ``d u_xx - b u_x`` on ``(0, l)`` with Dirichlet conditions.

    With ``xi = x / sqrt(d)`` and ``u = v exp(b xi / (2 sqrt d))`` the
    equation becomes ``v_xixi + p v`` on ``(0, l / sqrt(d))`` with
    ``p = -b^2 / (4 d)``, so ``lambda_n = (n pi / ell)^2 + b^2 / (4 d)``.
    """
    l, n = _check_length(l), _check_modes(n_modes)
    d, b = float(d), float(b)
    if not (math.isfinite(d) and d > 0):
        raise DomainError(f"diffusivity must be positive, got {d}")
    if not math.isfinite(b):
        raise DomainError("drift must be finite")
    ell = l / math.sqrt(d)
    shift = b * b / (4.0 * d)
    lam = (np.arange(1, n + 1) * np.pi / ell) ** 2 + shift
    gauge = {"kind": "exponential", "b": b, "d": d, "rate": b / (2.0 * math.sqrt(d))}
    return EigenSystem(lam, 0, 0.0, "analytic-sine", ell, gauge)


def to_reduced(values: np.ndarray, x: np.ndarray, eigsys: EigenSystem) -> tuple[np.ndarray, np.ndarray]:
    """Map samples ``u(x)`` to ``(xi, v(xi))`` through the stored gauge."""
    g = eigsys.gauge
    if not g:
        raise DomainError("eigensystem carries no gauge transform")
    xi = np.asarray(x, dtype=float) / math.sqrt(g["d"])
    return xi, np.asarray(values, dtype=float) * np.exp(-g["rate"] * xi)


def from_reduced(values: np.ndarray, xi: np.ndarray, eigsys: EigenSystem) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`to_reduced`: ``(x, u(x))`` from ``v(xi)``."""
    g = eigsys.gauge
    if not g:
        raise DomainError("eigensystem carries no gauge transform")
    xi = np.asarray(xi, dtype=float)
    return xi * math.sqrt(g["d"]), np.asarray(values, dtype=float) * np.exp(g["rate"] * xi)


def fractional_power(eigsys: EigenSystem, s: float) -> EigenSystem:
    """Spectral power ``(-A)^s`` of a strictly positive operator, ``0 < s < 1``."""
    s = float(s)
    if not 0.0 < s < 1.0:
        raise DomainError(f"fractional power must lie in (0, 1), got {s}")
    if eigsys.m != 0 or eigsys.eigenvalues[0] <= 0:
        raise DomainError("fractional powers need a strictly positive spectrum")
    return EigenSystem(
        eigsys.eigenvalues**s, 0, 0.0, eigsys.basis, eigsys.domain_length,
        eigsys.gauge, eigsys.vectors,
    )


def _off_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


def jacobi_eigh(a: np.ndarray, *, tol: float = 1e-15, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Cyclic Jacobi diagonalization of a symmetric matrix.

    Sweeps use the round-robin ordering, so each of the ``n - 1`` steps of
    a sweep applies ``n // 2`` disjoint rotations at once. Returns
    ``(w, Q)`` with ascending ``w`` and ``a @ Q = Q @ diag(w)``.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    q = np.eye(n)
    if n == 1:
        return a.diagonal().copy(), q
    players = list(range(n)) + ([-1] if n % 2 else [])
    size = len(players)
    scale = max(np.linalg.norm(a), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = _off_norm(a)
        if off <= tol * scale:
            break
        order = players[:]
        for _step in range(size - 1):
            pairs = [(order[i], order[size - 1 - i]) for i in range(size // 2)]
            pairs = [(min(p, r), max(p, r)) for p, r in pairs if p >= 0 and r >= 0]
            p = np.array([pq[0] for pq in pairs])
            r = np.array([pq[1] for pq in pairs])
            apq = a[p, r]
            active = np.abs(apq) > 0.0
            if np.any(active):
                p, r, apq = p[active], r[active], apq[active]
                with np.errstate(over="ignore"):
                    # |theta| overflows only for negligible apq; t -> 0 is then exact enough
                    theta = (a[r, r] - a[p, p]) / (2.0 * apq)
                    t = np.sign(theta) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
                t[theta == 0] = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                cp, cr = a[:, p].copy(), a[:, r].copy()
                a[:, p] = c * cp - s * cr
                a[:, r] = s * cp + c * cr
                rp, rr = a[p, :].copy(), a[r, :].copy()
                a[p, :] = c[:, None] * rp - s[:, None] * rr
                a[r, :] = s[:, None] * rp + c[:, None] * rr
                a[p, r] = 0.0
                a[r, p] = 0.0
                qp, qr = q[:, p].copy(), q[:, r].copy()
                q[:, p] = c * qp - s * qr
                q[:, r] = s * qp + c * qr
            order = [order[0]] + [order[-1]] + order[1:-1]
    else:
        off = _off_norm(a)
        if off > tol * scale * 1e3:
            raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps (off={off:.3e})")
    w = np.diag(a).copy()
    idx = np.argsort(w, kind="stable")
    return w[idx], q[:, idx]


def matrix_operator(a: np.ndarray) -> EigenSystem:
    """Eigensystem of ``-a`` for a symmetric matrix ``a`` (the generator ``A``)."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError("matrix must be square")
    n = a.shape[0]
    if n < 1 or n > MATRIX_MAX_SIZE:
        raise DomainError(f"matrix size must be in [1, {MATRIX_MAX_SIZE}], got {n}")
    if not np.all(np.isfinite(a)):
        raise DomainError("matrix entries must be finite")
    norm = np.linalg.norm(a)
    if np.max(np.abs(a - a.T), initial=0.0) > 1e-12 * max(norm, 1.0):
        raise DomainError("matrix is not symmetric")
    w, q = jacobi_eigh(-0.5 * (a + a.T))
    m = int(np.count_nonzero(w <= 0))
    return EigenSystem(w, m, max(0.0, -float(w[0])), "matrix-columns", vectors=q)


def simpson_weights(n: int, h: float) -> np.ndarray:
    """Composite Simpson weights for ``n`` (odd) equally spaced nodes."""
    if n < 3 or n % 2 == 0:
        raise DomainError(f"Simpson's rule needs an odd number of nodes >= 3, got {n}")
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * h / 3.0


def _basis_values(eigsys: EigenSystem, x: np.ndarray) -> np.ndarray:
    """Rows are basis functions sampled at ``x``."""
    l = eigsys.domain_length
    if l is None:
        raise DomainError("analytic bases need a domain length")
    n = eigsys.size
    if eigsys.basis == "analytic-sine":
        k = np.arange(1, n + 1)[:, None]
        return math.sqrt(2.0 / l) * np.sin(k * np.pi * x[None, :] / l)
    if eigsys.basis == "analytic-cosine":
        k = np.arange(0, n)[:, None]
        phi = math.sqrt(2.0 / l) * np.cos(k * np.pi * x[None, :] / l)
        phi[0] = 1.0 / math.sqrt(l)
        return phi
    raise DomainError(f"basis {eigsys.basis!r} has no analytic sampling")


def project(values: np.ndarray, eigsys: EigenSystem) -> SpectralField:
    """Coefficients ``<u, phi_n>`` of sampled data.

    Analytic bases expect samples on the uniform grid ``linspace(0, l, N)``
    with odd ``N >= 101`` (composite Simpson). The matrix basis expects the
    vector itself.
    """
    u = np.asarray(values, dtype=float)
    if eigsys.basis == "matrix-columns":
        if eigsys.vectors is None or u.shape != (eigsys.size,):
            raise DomainError("matrix basis needs a vector of matching length")
        return SpectralField(eigsys.vectors.T @ u, eigsys)
    if eigsys.basis not in ("analytic-sine", "analytic-cosine"):
        raise DomainError(f"cannot project onto basis {eigsys.basis!r}")
    if u.ndim != 1 or u.size < 101 or u.size % 2 == 0:
        raise DomainError("analytic projection needs an odd number (>= 101) of uniform samples")
    x = np.linspace(0.0, eigsys.domain_length, u.size)
    w = simpson_weights(u.size, x[1] - x[0])
    return SpectralField(_basis_values(eigsys, x) @ (w * u), eigsys)


def synthesize(fld: SpectralField, x_grid: np.ndarray | None = None) -> np.ndarray:
    """Samples of ``sum_n c_n phi_n`` (or the vector for the matrix basis).

    ``x_grid`` defaults to 1001 uniform points on ``[0, l]``.
    """
    es = fld.eigsys
    if es.basis == "matrix-columns":
        if es.vectors is None:
            raise DomainError("matrix basis without stored eigenvectors")
        return es.vectors @ fld.coefficients
    if x_grid is None:
        if es.domain_length is None:
            raise DomainError("analytic bases need a domain length")
        x_grid = np.linspace(0.0, es.domain_length, 1001)
    x = np.asarray(x_grid, dtype=float)
    return fld.coefficients @ _basis_values(es, x)
