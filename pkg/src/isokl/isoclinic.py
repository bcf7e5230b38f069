"""Canonical angles and isoclinic tests for equal-dimensional subspaces.

Two ``k``-dimensional subspaces with projections ``Pv`` and ``Pw`` are
isoclinic at angle ``theta`` iff::

    Pv Pw Pv = lam * Pv   and   Pw Pv Pw = lam * Pw,   lam = cos(theta)**2

Some published statements write ``lam = cos(theta)``; the squared form is the
one consistent with the projection equations (e.g. ``lam = 1/2`` at
``theta = pi/4``) and is used throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, RankMismatch
from .linalg import (
    DEFAULT_TOL,
    Subspace,
    Tolerance,
    as_matrix,
    check_projection,
    opnorm,
    orthonormal_basis,
)


@dataclass(frozen=True, eq=False)
class IsoclinicCertificate:
    lam: float
    angle: float
    residual: float


@dataclass(eq=False)
class FamilyReport:
    verdict: bool
    lambda_matrix: np.ndarray
    worst_residual: float
    failing_pairs: list[tuple[int, int]] = field(default_factory=list)
    residuals: np.ndarray | None = None


def _sorted_angles(cosines: np.ndarray) -> np.ndarray:
    c = np.clip(np.asarray(cosines, dtype=float), 0.0, 1.0)
    return np.sort(np.arccos(c))


def canonical_angles(v: Subspace, w: Subspace, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Canonical angles in ``[0, pi/2]``, nondecreasing, ``min(dim v, dim w)`` of them."""
    if v.ambient_dim != w.ambient_dim:
        raise DimensionMismatch(f"ambient dimensions differ: {v.ambient_dim} vs {w.ambient_dim}")
    s = np.linalg.svd(v.basis.conj().T @ w.basis, compute_uv=False)
    k = min(v.dim, w.dim)
    s = np.concatenate([s, np.zeros(max(0, k - s.size))])[:k]
    return _sorted_angles(s)


def _equal_rank_projections(pv, pw, tol):
    pv = as_matrix(pv, "pv")
    pw = as_matrix(pw, "pw")
    if pv.shape != pw.shape:
        raise DimensionMismatch(f"projection shapes differ: {pv.shape} vs {pw.shape}")
    rv = check_projection(pv, tol, 0)
    rw = check_projection(pw, tol, 1)
    if rv != rw:
        raise RankMismatch(f"projection ranks differ: {rv} vs {rw}")
    return pv, pw, rv


def angles_via_eigen_oracle(pv, pw, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Angles from the spectrum of ``Pv Pw Pv`` compressed to ``range(Pv)``.

    Independent cross-check of :func:`canonical_angles`: no product of basis
    matrices is decomposed, only a Hermitian eigenproblem is solved.
    """
    pv, pw, _ = _equal_rank_projections(pv, pw, tol)
    b = orthonormal_basis(pv, tol).basis
    compressed = b.conj().T @ pv @ pw @ pv @ b
    mu = np.linalg.eigvalsh(0.5 * (compressed + compressed.conj().T))
    return _sorted_angles(np.sqrt(np.clip(mu, 0.0, 1.0)))


def _pair_lambda_residual(pv, pw, rank):
    lam = float(np.trace(pv @ pw).real) / rank if rank else 0.0
    lam = min(max(lam, 0.0), 1.0)
    r1 = opnorm(pv @ pw @ pv - lam * pv)
    r2 = opnorm(pw @ pv @ pw - lam * pw)
    return lam, max(r1, r2)


def isoclinic_pair_check(pv, pw, tol: Tolerance = DEFAULT_TOL) -> IsoclinicCertificate | None:
    """Certificate if the two projections satisfy the isoclinic equations, else ``None``.

    ``lam`` is the least-squares scalar ``tr(Pv Pw Pv) / tr(Pv)``.
    """
    pv, pw, rank = _equal_rank_projections(pv, pw, tol)
    lam, res = _pair_lambda_residual(pv, pw, rank)
    if not tol.allows(res, 1.0):
        return None
    return IsoclinicCertificate(lam=lam, angle=float(np.arccos(np.sqrt(lam))), residual=res)


def isoclinic_family_check(ps, tol: Tolerance = DEFAULT_TOL) -> FamilyReport:
    """Check every unordered pair; all failing pairs are reported, no early exit."""
    ps = [as_matrix(p, f"projection {i}") for i, p in enumerate(ps)]
    if len(ps) < 2:
        raise ValueError("need at least two projections")
    shape = ps[0].shape
    ranks = []
    for i, p in enumerate(ps):
        if p.shape != shape:
            raise DimensionMismatch(f"projection {i} has shape {p.shape}, expected {shape}")
        ranks.append(check_projection(p, tol, i))
    if len(set(ranks)) != 1:
        raise RankMismatch(f"projection ranks differ: {ranks}")
    rank = ranks[0]

    n = len(ps)
    lam = np.eye(n)
    res = np.zeros((n, n))
    failing = []
    for i in range(n):
        for j in range(i + 1, n):
            l_ij, r_ij = _pair_lambda_residual(ps[i], ps[j], rank)
            lam[i, j] = lam[j, i] = l_ij
            res[i, j] = res[j, i] = r_ij
            if not tol.allows(r_ij, 1.0):
                failing.append((i, j))
    return FamilyReport(
        verdict=not failing,
        lambda_matrix=lam,
        worst_residual=float(res.max()),
        failing_pairs=failing,
        residuals=res,
    )
