"""Knill-Laflamme conditions, classic and generalized.

The generalized conditions ask, for a code projection ``P`` and operators
``A_i``, whether::

    P A_i^H A_j P = lam_ij U_ij P = lam_ij P U_ij

with scalars ``lam_ij`` and unitaries ``U_ij`` commuting with ``P``.  The
classic conditions are the special case ``U_ij = I``.

Gauge used for every witness: ``lam_ij`` is real and non-negative (its phase is
folded into ``U_ij``), ``U_ii = I``, and each ``U_ij`` acts as the polar unitary
on ``range(P)`` and as the identity on the complement.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    ConditionFailed,
    DimensionMismatch,
    IsoclinicViolation,
    NotCompatible,
    NotScaledIsometry,
    RankMismatch,
    ZeroMatrix,
)
from .isoclinic import FamilyReport, isoclinic_family_check
from .linalg import (
    DEFAULT_TOL,
    Tolerance,
    as_matrix,
    check_projection,
    extend_to_unitary,
    opnorm,
    orthonormal_basis,
    projection_from_subspace,
)


@dataclass(eq=False)
class KLWitness:
    lambdas: np.ndarray
    unitaries: list[list[np.ndarray]]
    residuals: np.ndarray
    code_projection: np.ndarray

    @property
    def n(self) -> int:
        return self.lambdas.shape[0]

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max()) if self.residuals.size else 0.0

    def recompute_residuals(self, ops) -> np.ndarray:
        """Residuals rebuilt from scratch against ``ops``."""
        p = self.code_projection
        out = np.zeros((self.n, self.n))
        for i in range(self.n):
            for j in range(self.n):
                m = p @ ops[i].conj().T @ ops[j] @ p
                out[i, j] = opnorm(m - self.lambdas[i, j] * self.unitaries[i][j] @ p)
        return out


@dataclass(eq=False)
class ClassicKLResult:
    lambda_matrix: np.ndarray
    is_positive: bool
    trace: complex
    residual: float


@dataclass(eq=False)
class AnchorFamily:
    anchor_projection: np.ndarray
    intertwiners: list[np.ndarray]
    range_projections: list[np.ndarray]


class RoundTrip(NamedTuple):
    kl_holds: bool
    isoclinic_holds: bool
    consistent: bool
    witness: KLWitness | None
    family: FamilyReport | None


def _code(p_c, tol):
    p_c = as_matrix(p_c, "p_c")
    check_projection(p_c, tol)
    return p_c, orthonormal_basis(p_c, tol).basis


def _ops(ops, dim):
    out = [as_matrix(a, f"operator {i}") for i, a in enumerate(ops)]
    if not out:
        raise ValueError("need at least one operator")
    for i, a in enumerate(out):
        if a.shape != (dim, dim):
            raise DimensionMismatch(f"operator {i} has shape {a.shape}, expected {(dim, dim)}")
    return out


def phase_deviation(u, p_c, tol: Tolerance = DEFAULT_TOL) -> float:
    """Distance of ``u`` restricted to ``range(p_c)`` from the nearest ``c * I``, ``|c| = 1``.

    Computed exactly from the eigenphases: the optimal ``c`` sits at the middle
    of the shortest arc containing all of them.
    """
    p_c, b = _code(p_c, tol)
    w = b.conj().T @ as_matrix(u) @ b
    theta = np.sort(np.mod(np.angle(np.linalg.eigvals(w)), 2 * np.pi))
    gaps = np.diff(np.concatenate([theta, [theta[0] + 2 * np.pi]]))
    arc = 2 * np.pi - gaps.max()
    return float(2 * np.sin(arc / 4))


def kl_classic_check(errors: Sequence, p_c, tol: Tolerance = DEFAULT_TOL) -> ClassicKLResult:
    """Classic conditions ``P E_i^H E_j P = lam_ij P``.

    Raises :class:`ConditionFailed` at the first failing ``(i, j)`` in row-major order.
    """
    p_c, _ = _code(p_c, tol)
    errs = _ops(errors, p_c.shape[0])
    tr = float(np.trace(p_c).real)
    n = len(errs)
    lam = np.zeros((n, n), dtype=np.complex128)
    worst = 0.0
    for i in range(n):
        for j in range(n):
            m = p_c @ errs[i].conj().T @ errs[j] @ p_c
            lam[i, j] = np.trace(m) / tr
            res = opnorm(m - lam[i, j] * p_c)
            if not tol.allows(res, opnorm(m)):
                raise ConditionFailed(i, j, res)
            worst = max(worst, res)
    herm = 0.5 * (lam + lam.conj().T)
    positive = bool(np.linalg.eigvalsh(herm).min() >= -tol.abs_tol)
    return ClassicKLResult(lambda_matrix=lam, is_positive=positive, trace=complex(np.trace(lam)), residual=worst)


def kl_general_check(ops: Sequence, p_c, tol: Tolerance = DEFAULT_TOL) -> KLWitness:
    """Generalized conditions; returns a witness or raises :class:`ConditionFailed`.

    For each pair the sandwich is compressed to ``range(P)``; it has the
    required form iff all its singular values coincide.  The failure payload
    is the singular-value spread.
    """
    p_c, b = _code(p_c, tol)
    a = _ops(ops, p_c.shape[0])
    n = len(a)
    dim = p_c.shape[0]
    eye = np.eye(dim)
    ab = [x @ b for x in a]

    lam = np.zeros((n, n))
    res = np.zeros((n, n))
    units: list[list[np.ndarray]] = [[eye] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            r = ab[i].conj().T @ ab[j]
            uw, s, vwh = np.linalg.svd(r)
            spread = float(s.max() - s.min())
            if not tol.allows(spread, s.max()):
                raise ConditionFailed(i, j, spread, f"pair ({i}, {j}) has unequal singular values on the code "
                                                    f"(spread {spread:.3e})")
            value = float(s.mean())
            u = eye
            if i != j and value > tol.bound(s.max()):
                u = extend_to_unitary(b @ (uw @ vwh) @ b.conj().T, p_c, tol)
            elif i != j:
                value = 0.0
            m = p_c @ a[i].conj().T @ a[j] @ p_c
            residual = opnorm(m - value * u @ p_c)
            if not tol.allows(residual, opnorm(m)):
                raise ConditionFailed(i, j, residual)
            lam[i, j], res[i, j], units[i][j] = value, residual, u

    for i in range(n):
        if lam[i, i] <= tol.abs_tol:
            for j in range(n):
                if lam[i, j] > tol.abs_tol or lam[j, i] > tol.abs_tol:
                    raise ConditionFailed(i, j, max(lam[i, j], lam[j, i]),
                                          f"operator {i} annihilates the code but pair ({i}, {j}) is nonzero")
    return KLWitness(lambdas=lam.astype(np.complex128), unitaries=units, residuals=res, code_projection=p_c)


def range_projections(ops: Sequence, p_c, tol: Tolerance = DEFAULT_TOL) -> list[np.ndarray]:
    """Projections onto ``range(A_i P)``; a zero matrix where ``A_i P = 0``."""
    p_c, _ = _code(p_c, tol)
    out = []
    for a in _ops(ops, p_c.shape[0]):
        try:
            out.append(projection_from_subspace(orthonormal_basis(a @ p_c, tol)))
        except ZeroMatrix:
            out.append(np.zeros_like(p_c))
    return out


def intertwiners_from_family(ps: Sequence, anchor_index: int = 0, tol: Tolerance = DEFAULT_TOL) -> AnchorFamily:
    """Partial isometries from the anchor range onto every member range.

    ``V_i = B_i X Z^H B_c^H`` where ``B_i^H B_c = X S Z^H`` is an SVD.  When the
    overlap has full rank this is exactly the polar isometry of ``P_i P_c``;
    for orthogonal members it pairs the SVD bases index by index.
    """
    ps = [as_matrix(p, f"projection {i}") for i, p in enumerate(ps)]
    if not 0 <= anchor_index < len(ps):
        raise IndexError(f"anchor_index {anchor_index} out of range")
    ranks = [check_projection(p, tol, i) for i, p in enumerate(ps)]
    if len(set(ranks)) != 1:
        raise RankMismatch(f"projection ranks differ: {ranks}")
    p_c = ps[anchor_index]
    b_c = orthonormal_basis(p_c, tol).basis
    vs = []
    for i, p in enumerate(ps):
        if i == anchor_index:
            vs.append(p_c.copy())
            continue
        b_i = orthonormal_basis(p, tol).basis
        x, _, zh = np.linalg.svd(b_i.conj().T @ b_c)
        vs.append(b_i @ (x @ zh) @ b_c.conj().T)
    return AnchorFamily(anchor_projection=p_c, intertwiners=vs, range_projections=list(ps))


def anchor_family_from_intertwiners(vs: Sequence, p_c, tol: Tolerance = DEFAULT_TOL) -> AnchorFamily:
    """Wrap given partial isometries, checking the common initial projection."""
    p_c, _ = _code(p_c, tol)
    vs = _ops(vs, p_c.shape[0])
    for i, v in enumerate(vs):
        r = opnorm(v.conj().T @ v - p_c)
        if not tol.allows(r, 1.0):
            raise NotCompatible(f"intertwiner {i} does not have p_c as initial projection (residual {r:.3e})")
    return AnchorFamily(anchor_projection=p_c, intertwiners=vs, range_projections=[v @ v.conj().T for v in vs])


def witness_from_isoclinic(family: AnchorFamily, tol: Tolerance = DEFAULT_TOL) -> KLWitness:
    """Witness ``P V_i^H V_j P = g_ij U_ij P`` with ``g_ij = sqrt(lam_ij)``."""
    p_c = family.anchor_projection
    vs = family.intertwiners
    ps = family.range_projections
    n = len(vs)
    dim = p_c.shape[0]
    eye = np.eye(dim)
    rank = float(np.trace(p_c).real)

    gam = np.zeros((n, n))
    res = np.zeros((n, n))
    units: list[list[np.ndarray]] = [[eye] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            lam = min(max(float(np.trace(ps[i] @ ps[j]).real) / rank, 0.0), 1.0)
            iso = opnorm(ps[i] @ ps[j] @ ps[i] - lam * ps[i])
            if not tol.allows(iso, 1.0):
                raise IsoclinicViolation(i, j, iso)
            g = float(np.sqrt(lam))
            m = p_c @ vs[i].conj().T @ vs[j] @ p_c
            u = eye
            if i != j and g > tol.bound(1.0):
                try:
                    u = extend_to_unitary(m / g, p_c, tol)
                except NotCompatible:
                    raise IsoclinicViolation(i, j, opnorm(m @ m.conj().T - lam * p_c)) from None
            elif i != j:
                g = 0.0
            gam[i, j], units[i][j] = g, u
            res[i, j] = opnorm(m - g * u @ p_c)
    return KLWitness(lambdas=gam.astype(np.complex128), unitaries=units, residuals=res,
                     code_projection=p_c)


def theorem34_roundtrip(ops: Sequence, p_c, tol: Tolerance = DEFAULT_TOL) -> RoundTrip:
    """Run both sides of the KL/isoclinic equivalence and compare verdicts.

    Every operator must act on the code as a nonzero multiple of an isometry.
    """
    p_c, b = _code(p_c, tol)
    a = _ops(ops, p_c.shape[0])
    for i, x in enumerate(a):
        g = (x @ b).conj().T @ (x @ b)
        ev = np.linalg.eigvalsh(0.5 * (g + g.conj().T))
        spread = float(ev.max() - ev.min())
        if ev.max() <= tol.abs_tol or not tol.allows(spread, ev.max()):
            raise NotScaledIsometry(i, spread)

    try:
        witness = kl_general_check(a, p_c, tol)
        kl_holds = True
    except ConditionFailed:
        witness, kl_holds = None, False

    if len(a) < 2:
        family, iso_holds = None, True
    else:
        family = isoclinic_family_check(range_projections(a, p_c, tol), tol)
        iso_holds = family.verdict
    return RoundTrip(kl_holds, iso_holds, kl_holds == iso_holds, witness, family)
