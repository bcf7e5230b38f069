"""Dense complex linear algebra used by every other module.

Operators are plain ``numpy`` arrays of dtype ``complex128``.  Rank decisions
are made on singular values with the cutoff ``abs_tol + rel_tol * sigma_max``
and every residual is measured in the spectral norm.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatch, NotCompatible, NotProjection, ZeroMatrix

__all__ = [
    "Tolerance",
    "DEFAULT_TOL",
    "Subspace",
    "PolarFactors",
    "PartialIsometryCheck",
    "as_matrix",
    "opnorm",
    "orthonormal_basis",
    "projection_from_subspace",
    "polar_decompose",
    "is_partial_isometry",
    "extend_to_unitary",
    "check_projection",
    "check_unitary_residual",
    "matrix_power",
]


@dataclass(frozen=True)
class Tolerance:
    """Absolute/relative tolerance pair.

    A residual ``r`` passes iff ``r <= abs_tol + rel_tol * scale`` where
    ``scale`` is the spectral norm of the reference operator.
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-12

    def __post_init__(self):
        if self.abs_tol < 0 or self.rel_tol < 0:
            raise ValueError("tolerances must be non-negative")
        if self.abs_tol == 0 and self.rel_tol == 0:
            raise ValueError("at least one of abs_tol, rel_tol must be positive")

    def bound(self, scale: float = 0.0) -> float:
        return self.abs_tol + self.rel_tol * float(scale)

    def allows(self, residual: float, scale: float = 0.0) -> bool:
        return float(residual) <= self.bound(scale)


DEFAULT_TOL = Tolerance()


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Validate ``m`` as a finite 2-D complex matrix and return it as complex128."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2 or a.shape[0] == 0 or a.shape[1] == 0:
        raise DimensionMismatch(f"{name} must be a non-empty 2-D array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def opnorm(m: np.ndarray) -> float:
    """Spectral norm (largest singular value)."""
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def matrix_power(a: np.ndarray, e: int) -> np.ndarray:
    """Integer power of a unitary; negative exponents use the adjoint."""
    if e < 0:
        return np.linalg.matrix_power(a.conj().T, -e)
    return np.linalg.matrix_power(a, e)


@dataclass(frozen=True, eq=False)
class Subspace:
    """A subspace stored as a matrix with orthonormal columns."""

    basis: np.ndarray

    def __post_init__(self):
        b = as_matrix(self.basis, "basis")
        k = b.shape[1]
        if k > b.shape[0]:
            raise DimensionMismatch("subspace dimension exceeds ambient dimension")
        if opnorm(b.conj().T @ b - np.eye(k)) > 1e-8:
            raise ValueError("basis columns are not orthonormal")
        object.__setattr__(self, "basis", b)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


@dataclass(frozen=True, eq=False)
class PolarFactors:
    isometry: np.ndarray
    positive_part: np.ndarray


class PartialIsometryCheck(NamedTuple):
    verdict: bool
    initial: np.ndarray
    final: np.ndarray


def orthonormal_basis(m, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    """Orthonormal basis of the column space of ``m``.

    Columns are the left singular vectors whose singular values exceed the
    cutoff, in SVD order, so the result is deterministic for a given backend.
    """
    a = as_matrix(m)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    cutoff = tol.bound(s[0] if s.size else 0.0)
    r = int(np.sum(s > cutoff))
    if r == 0:
        raise ZeroMatrix("matrix is zero within tolerance")
    return Subspace(u[:, :r])


def projection_from_subspace(s: Subspace) -> np.ndarray:
    b = s.basis
    return b @ b.conj().T


def polar_decompose(a, tol: Tolerance = DEFAULT_TOL) -> PolarFactors:
    """Polar decomposition ``a = V |a|`` with ``V`` truncated to the numerical rank.

    ``V`` is a partial isometry whose initial projection is the support of
    ``|a| = sqrt(a^H a)``; it is not extended to a unitary.
    """
    a = as_matrix(a)
    u, s, wh = np.linalg.svd(a, full_matrices=False)
    cutoff = tol.bound(s[0] if s.size else 0.0)
    keep = s > cutoff
    u_r, s_r, wh_r = u[:, keep], s[keep], wh[keep, :]
    isometry = u_r @ wh_r
    positive = (wh_r.conj().T * s_r) @ wh_r
    positive = 0.5 * (positive + positive.conj().T)
    if isometry.size == 0:
        isometry = np.zeros_like(a)
        positive = np.zeros((a.shape[1], a.shape[1]), dtype=np.complex128)
    return PolarFactors(isometry=isometry, positive_part=positive)


def is_partial_isometry(v, tol: Tolerance = DEFAULT_TOL) -> PartialIsometryCheck:
    v = as_matrix(v)
    if v.shape[0] != v.shape[1]:
        raise DimensionMismatch("is_partial_isometry expects a square matrix; zero-pad first")
    initial = v.conj().T @ v
    final = v @ v.conj().T
    ok = tol.allows(opnorm(initial @ initial - initial), opnorm(initial))
    return PartialIsometryCheck(ok, initial, final)


def check_projection(p, tol: Tolerance = DEFAULT_TOL, index: int | None = None) -> int:
    """Verify ``p`` is an orthogonal projection; return its rank.

    Raises :class:`NotProjection` carrying ``index`` and the failing residual.
    """
    p = as_matrix(p)
    where = "" if index is None else f" (index {index})"
    if p.shape[0] != p.shape[1]:
        raise NotProjection(f"projection must be square{where}", index, None)
    scale = opnorm(p)
    herm = opnorm(p - p.conj().T)
    if not tol.allows(herm, scale):
        raise NotProjection(f"matrix is not Hermitian{where}", index, herm)
    idem = opnorm(p @ p - p)
    if not tol.allows(idem, scale):
        raise NotProjection(f"matrix is not idempotent{where}", index, idem)
    return int(round(float(np.trace(p).real)))


def check_unitary_residual(u: np.ndarray) -> float:
    n = u.shape[0]
    return max(opnorm(u.conj().T @ u - np.eye(n)), opnorm(u @ u.conj().T - np.eye(n)))


def extend_to_unitary(b, p_c, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Extend a partial isometry ``b`` on ``range(p_c)`` to ``b + (I - p_c)``."""
    b = as_matrix(b, "b")
    p_c = as_matrix(p_c, "p_c")
    if b.shape != p_c.shape or b.shape[0] != b.shape[1]:
        raise DimensionMismatch("b and p_c must be square of equal size")
    scale = max(opnorm(p_c), 1.0)
    r_init = opnorm(b.conj().T @ b - p_c)
    r_final = opnorm(b @ b.conj().T - p_c)
    if not tol.allows(max(r_init, r_final), scale):
        raise NotCompatible(
            f"partial isometry does not have p_c as initial and final projection "
            f"(residuals {r_init:.3e}, {r_final:.3e})"
        )
    return b + (np.eye(b.shape[0]) - p_c)
