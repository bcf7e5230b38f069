"""Builders for isoclinic families.

* maximal sets of pairwise anti-commuting Hermitian unitaries (Kestelman),
* graph subspaces ``{(x, Ax, ..., A^{d-1} x)}`` of order-``d`` unitaries and
  the block partial isometries onto them,
* omega-commuting unitary families built from clock and shift matrices,
* the crossing unitaries that witness unbiasedness between two graph
  measurements.

``omega`` is always ``exp(2 pi i / d)`` and families are ordered so that
``A_i A_j = omega A_j A_i`` for ``i < j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import HypothesisViolation, NotUnitary, OddDimension, OrderMismatch
from .linalg import DEFAULT_TOL, Tolerance, as_matrix, check_unitary_residual, matrix_power, opnorm

PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)


def omega(d: int) -> complex:
    return complex(np.exp(2j * np.pi / d))


def shift_matrix(d: int) -> np.ndarray:
    """``|j> -> |j+1 mod d>``."""
    return np.roll(np.eye(d, dtype=np.complex128), 1, axis=0)


def clock_matrix(d: int) -> np.ndarray:
    return np.diag(omega(d) ** np.arange(d))


@dataclass(eq=False)
class AntiCommutingFamily:
    m: int
    members: list[np.ndarray]


@dataclass(eq=False)
class OmegaFamily:
    d: int
    dim: int
    members: list[np.ndarray]
    omega: complex


def two_adic(m: int) -> tuple[int, int]:
    """``(q, p)`` with ``m = 2**q * p`` and ``p`` odd."""
    q = 0
    while m % 2 == 0:
        m //= 2
        q += 1
    return q, m


def kestelman_family(m: int) -> AntiCommutingFamily:
    """``2q + 1`` pairwise anti-commuting Hermitian unitaries of size ``m = 2**q * p``.

    Entries are exact in ``{0, +-1, +-i}``.
    """
    if m < 2 or m % 2:
        raise OddDimension(f"m must be even and >= 2, got {m}")
    q, p = two_adic(m)
    eye_p = np.eye(p, dtype=np.complex128)
    members = [np.kron(s, eye_p) for s in (PAULI_X, PAULI_Y, PAULI_Z)]
    size = 2 * p
    for _ in range(q - 1):
        eye = np.eye(size, dtype=np.complex128)
        members = [np.kron(PAULI_X, b) for b in members] + [np.kron(PAULI_Y, eye), np.kron(PAULI_Z, eye)]
        size *= 2
    return AntiCommutingFamily(m=m, members=members)


def _check_order(a: np.ndarray, d: int, tol: Tolerance, require_order: bool):
    r = check_unitary_residual(a)
    if not tol.allows(r, 1.0):
        raise NotUnitary(f"operator is not unitary (residual {r:.3e})")
    if require_order:
        r = opnorm(np.linalg.matrix_power(a, d) - np.eye(a.shape[0]))
        if not tol.allows(r, 1.0):
            raise OrderMismatch(f"operator does not satisfy A^{d} = I (residual {r:.3e})")


def graph_projection(a, d: int = 2, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Projection onto ``{(x, Ax, ..., A^{d-1} x)}``: block ``(i, j)`` is ``A^{i-j} / d``.

    Negative powers are adjoint powers, which reproduces ``1/2 [[I, A^H], [A, I]]``
    for ``d = 2``.  For ``d > 2`` the unitary must also satisfy ``A^d = I``.
    """
    a = as_matrix(a, "a")
    if d < 2:
        raise ValueError("d must be at least 2")
    _check_order(a, d, tol, require_order=d > 2)
    powers = {e: matrix_power(a, e) for e in range(-(d - 1), d)}
    return np.block([[powers[i - j] / d for j in range(d)] for i in range(d)])


def graph_partial_isometry(a, d: int = 2, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Partial isometry from the last block onto the graph of ``a``.

    The last block column is ``(I, A, ..., A^{d-1}) / sqrt(d)``; everything
    else is zero, so ``V^H V = P_inf`` and ``V V^H = graph_projection(a, d)``.
    """
    a = as_matrix(a, "a")
    _check_order(a, d, tol, require_order=d > 2)
    k = a.shape[0]
    v = np.zeros((d * k, d * k), dtype=np.complex128)
    for j in range(d):
        v[j * k:(j + 1) * k, (d - 1) * k:] = np.linalg.matrix_power(a, j) / np.sqrt(d)
    return v


def p_infinity(dim_h: int, d: int = 2) -> np.ndarray:
    p = np.zeros((d * dim_h, d * dim_h), dtype=np.complex128)
    p[(d - 1) * dim_h:, (d - 1) * dim_h:] = np.eye(dim_h)
    return p


def omega_rotated_family(a, d: int, tol: Tolerance = DEFAULT_TOL) -> list[np.ndarray]:
    """The ``d`` graph projections of ``omega**r * a``; together they form a measurement."""
    a = as_matrix(a, "a")
    _check_order(a, d, tol, require_order=True)
    w = omega(d)
    return [graph_projection(w**r * a, d, tol) for r in range(d)]


def _verify_omega_family(members, d, tol):
    w = omega(d)
    eye = np.eye(members[0].shape[0])
    for i, a in enumerate(members):
        r = opnorm(np.linalg.matrix_power(a, d) - eye)
        if not tol.allows(r, 1.0):
            raise OrderMismatch(f"member {i} does not satisfy A^{d} = I (residual {r:.3e})")
        for j in range(i + 1, len(members)):
            b = members[j]
            r = opnorm(a @ b - w * b @ a)
            if not tol.allows(r, 1.0):
                raise HypothesisViolation(f"A_{i} A_{j} = omega A_{j} A_{i}", r)


def omega_commuting_generators(d: int, n: int, tol: Tolerance = DEFAULT_TOL) -> OmegaFamily:
    """``n`` order-``d`` unitaries with ``A_i A_j = omega A_j A_i`` for ``i < j``.

    Base pair on ``C^d``: clock then shift.  Each further member multiplies the
    dimension by ``d``: old members become ``clock (x) A_i`` and ``shift (x) I``
    is appended, so ``dim = d**(n - 1)``.

    ======  ======  ============
    d       n       dim
    ======  ======  ============
    any     2       d
    any     3       d**2
    any     n       d**(n-1)
    ======  ======  ============
    """
    if d < 2 or n < 2:
        raise ValueError("need d >= 2 and n >= 2")
    clock, shift = clock_matrix(d), shift_matrix(d)
    members = [clock, shift]
    for _ in range(n - 2):
        eye = np.eye(members[0].shape[0], dtype=np.complex128)
        members = [np.kron(clock, a) for a in members] + [np.kron(shift, eye)]
    _verify_omega_family(members, d, tol)
    return OmegaFamily(d=d, dim=members[0].shape[0], members=members, omega=omega(d))


def crossing_unitary(a, r: int, b, s: int, d: int, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """``(1/sqrt d) sum_j omega^{(s-r) j} (A^H)^j B^j``.

    Requires unitary ``a``, ``b`` with ``a^d = b^d = I`` and ``a b = omega b a``.
    """
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    eye = np.eye(a.shape[0])
    for name, x in (("a", a), ("b", b)):
        res = check_unitary_residual(x)
        if not tol.allows(res, 1.0):
            raise HypothesisViolation(f"{name} unitary", res)
        res = opnorm(np.linalg.matrix_power(x, d) - eye)
        if not tol.allows(res, 1.0):
            raise HypothesisViolation(f"{name}^d = I", res)
    w = omega(d)
    res = opnorm(a @ b - w * b @ a)
    if not tol.allows(res, 1.0):
        raise HypothesisViolation("a b = omega b a", res)
    terms = [w ** ((s - r) * j) * matrix_power(a, -j) @ np.linalg.matrix_power(b, j) for j in range(d)]
    return reduce(np.add, terms) / np.sqrt(d)


def embed_last_block(u: np.ndarray, d: int) -> np.ndarray:
    """Place ``u`` in the last diagonal block of a ``d x d`` block matrix."""
    k = u.shape[0]
    out = np.zeros((d * k, d * k), dtype=np.complex128)
    out[(d - 1) * k:, (d - 1) * k:] = u
    return out
