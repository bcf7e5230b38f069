"""Mutually unbiased measurements (MUMs).

Two ``d``-outcome projective measurements ``{P_a}``, ``{Q_b}`` are mutually
unbiased when ``P_a = d P_a Q_b P_a`` and ``Q_b = d Q_b P_a Q_b`` for all
``a, b``.  This module validates measurements and MUM families, builds MUMs
from omega-commuting unitaries, checks the KL-style intertwiner form, and
extracts the block canonical form of a 2-element MUM.

Canonical coordinates are ``C^k (x) C^d``; index ``i * d + a`` is ``e_i (x) |a>``.
Block tables are 0-based numpy arrays ``blocks[b, i, j]`` of ``k x k`` matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .construct import omega_commuting_generators, omega_rotated_family
from .errors import (
    CrossPairFailed,
    DimensionMismatch,
    MeasurementInvalid,
    NotCompatible,
    NotProjection,
    RankMismatch,
    RelationViolated,
)
from .linalg import DEFAULT_TOL, Tolerance, as_matrix, check_projection, check_unitary_residual, opnorm


@dataclass(eq=False)
class Measurement:
    d: int
    dim: int
    effects: list[np.ndarray]
    ranks: list[int] = field(default_factory=list)


@dataclass(eq=False)
class MUMFamily:
    measurements: list[Measurement]
    d: int
    dim: int
    k: int
    max_residual: float = 0.0


@dataclass(eq=False)
class CanonicalForm:
    k: int
    d: int
    blocks: np.ndarray  # shape (d, d, d, k, k): blocks[b, i, j]
    basis_change: np.ndarray
    outcome_order: list[int] = field(default_factory=list)


@dataclass(eq=False)
class MUMKLResult:
    verdict: bool
    unitaries: list[list[np.ndarray]]
    residuals: np.ndarray
    failing_pairs: list[tuple[int, int]]


def measurement_check(effects: Sequence, tol: Tolerance = DEFAULT_TOL) -> Measurement:
    """Validate a projective measurement; raise :class:`MeasurementInvalid` on the first failure."""
    effects = [as_matrix(e, f"effect {a}") for a, e in enumerate(effects)]
    if not effects:
        raise MeasurementInvalid("nonempty", (), 0.0)
    dim = effects[0].shape[0]
    for a, e in enumerate(effects):
        if e.shape != (dim, dim):
            raise DimensionMismatch(f"effect {a} has shape {e.shape}, expected {(dim, dim)}")
    ranks = []
    for a, e in enumerate(effects):
        try:
            ranks.append(check_projection(e, tol, a))
        except NotProjection as exc:
            raise MeasurementInvalid("projection", (a,), exc.residual or 0.0) from None
    for a in range(len(effects)):
        for b in range(a + 1, len(effects)):
            r = opnorm(effects[a] @ effects[b])
            if not tol.allows(r, 1.0):
                raise MeasurementInvalid("orthogonality", (a, b), r)
    r = opnorm(sum(effects) - np.eye(dim))
    if not tol.allows(r, 1.0):
        raise MeasurementInvalid("completeness", (), r)
    return Measurement(d=len(effects), dim=dim, effects=effects, ranks=ranks)


def _as_measurement(m, tol):
    return m if isinstance(m, Measurement) else measurement_check(m, tol)


def mum_check(family: Sequence, tol: Tolerance = DEFAULT_TOL) -> MUMFamily:
    """Verify both unbiasedness equations for every cross pair of every pair of measurements."""
    ms = [_as_measurement(m, tol) for m in family]
    if len(ms) < 2:
        raise ValueError("a MUM family needs at least two measurements")
    d, dim = ms[0].d, ms[0].dim
    for i, m in enumerate(ms):
        if m.d != d or m.dim != dim:
            raise DimensionMismatch(f"measurement {i} has (d, dim) = {(m.d, m.dim)}, expected {(d, dim)}")
    ranks = sorted({r for m in ms for r in m.ranks})
    if len(ranks) != 1 or ranks[0] * d != dim:
        raise RankMismatch(f"effects must share rank dim/d = {dim / d:g}; found ranks {ranks}")

    worst = 0.0
    for s in range(len(ms)):
        for t in range(s + 1, len(ms)):
            for a, p in enumerate(ms[s].effects):
                for b, q in enumerate(ms[t].effects):
                    r = max(opnorm(p - d * p @ q @ p), opnorm(q - d * q @ p @ q))
                    if not tol.allows(r, d):
                        raise CrossPairFailed((s, t), (a, b), r)
                    worst = max(worst, r)
    return MUMFamily(measurements=ms, d=d, dim=dim, k=ranks[0], max_residual=worst)


def mum_from_construction(d: int, n: int, tol: Tolerance = DEFAULT_TOL) -> MUMFamily:
    """``n`` graph measurements ``{P_(omega^r A_i)}_r`` from an omega-commuting family."""
    fam = omega_commuting_generators(d, n, tol)
    measurements = [measurement_check(omega_rotated_family(a, d, tol), tol) for a in fam.members]
    return mum_check(measurements, tol)


def mum_kl_check(vs: Sequence, ws: Sequence, p_c, tol: Tolerance = DEFAULT_TOL) -> MUMKLResult:
    """Check ``P V_a^H W_b P = U_ab P / sqrt(d)`` with ``U_ab`` unitary commuting with ``P``.

    The scalar is pinned to ``1/sqrt(d)``: on ``range(P)`` every singular value
    of the sandwich must equal it.  ``U_ab`` is the polar unitary there and the
    identity on the complement.
    """
    p_c = as_matrix(p_c, "p_c")
    check_projection(p_c, tol)
    vs = [as_matrix(v, f"vs[{a}]") for a, v in enumerate(vs)]
    ws = [as_matrix(w, f"ws[{b}]") for b, w in enumerate(ws)]
    if len(vs) != len(ws):
        raise DimensionMismatch(f"{len(vs)} V operators but {len(ws)} W operators")
    for name, group in (("vs", vs), ("ws", ws)):
        for a, v in enumerate(group):
            if v.shape != p_c.shape:
                raise DimensionMismatch(f"{name}[{a}] has shape {v.shape}, expected {p_c.shape}")
            r = opnorm(v.conj().T @ v - p_c)
            if not tol.allows(r, 1.0):
                raise NotCompatible(f"{name}[{a}] does not have p_c as initial projection (residual {r:.3e})")
        measurement_check([v @ v.conj().T for v in group], tol)

    d = len(vs)
    u_c, s_c, _ = np.linalg.svd(p_c)
    b = u_c[:, : int(np.sum(s_c > 0.5))]
    comp = np.eye(p_c.shape[0]) - p_c
    scale = 1 / np.sqrt(d)
    units = [[comp] * d for _ in range(d)]
    res = np.zeros((d, d))
    failing = []
    for a in range(d):
        for bb in range(d):
            r = (vs[a] @ b).conj().T @ (ws[bb] @ b)
            uw, _, vwh = np.linalg.svd(r)
            u = b @ (uw @ vwh) @ b.conj().T + comp
            m = p_c @ vs[a].conj().T @ ws[bb] @ p_c
            res[a, bb] = opnorm(m - scale * u @ p_c)
            units[a][bb] = u
            if not tol.allows(res[a, bb], 1.0):
                failing.append((a, bb))
    return MUMKLResult(verdict=not failing, unitaries=units, residuals=res, failing_pairs=failing)


def _unit(d: int, i: int, j: int) -> np.ndarray:
    e = np.zeros((d, d))
    e[i, j] = 1.0
    return e


def _kron_basis(k: int, d: int, a: int, b: int) -> np.ndarray:
    return np.kron(np.eye(k), _unit(d, a, b))


def canonical_form_extract(family: MUMFamily, tol: Tolerance = DEFAULT_TOL, anchor: int = 0) -> CanonicalForm:
    """Block canonical form of a 2-element MUM.

    The anchor effect ``P_1`` of the first measurement (index ``anchor``) plays
    the code projection.  ``W_b = sqrt(d) Q_b P_1`` maps ``range(P_1)`` onto
    ``range(Q_b)``.  Effects of the first measurement are orthogonal to
    ``P_1``, so they are reached through ``Q_1``: ``V_a = d P_a Q_1 P_1``.
    All of these are partial isometries with initial projection ``P_1``.  The
    basis change sends ``V_a e_i`` to ``e_i (x) |a>`` where ``e_i`` are the
    leading left singular vectors of ``P_1``; in this gauge every block of
    ``Q_1`` is the identity.
    """
    if len(family.measurements) != 2:
        raise ValueError("canonical form extraction needs exactly two measurements")
    d, k, dim = family.d, family.k, family.dim
    order = [anchor] + [a for a in range(d) if a != anchor]
    ps = [family.measurements[0].effects[a] for a in order]
    qs = family.measurements[1].effects
    p1 = ps[0]

    e = np.linalg.svd(p1)[0][:, :k]
    sq = np.sqrt(d)
    vs = [p1] + [d * p @ qs[0] @ p1 for p in ps[1:]]
    u = np.zeros((dim, dim), dtype=np.complex128)
    for a, v in enumerate(vs):
        cols = v @ e
        for i in range(k):
            u[i * d + a, :] = cols[:, i].conj()
    r = check_unitary_residual(u)
    if not tol.allows(r, d):
        raise RelationViolated("basis_change unitary", (), r)
    for a, p in enumerate(ps):
        r = opnorm(u @ p @ u.conj().T - _kron_basis(k, d, a, a))
        if not tol.allows(r, d):
            raise RelationViolated("effect_form", (a,), r)

    blocks = np.zeros((d, d, d, k, k), dtype=np.complex128)
    for b, q in enumerate(qs):
        wc = (u @ (sq * q @ p1) @ u.conj().T).reshape(k, d, k, d)
        col = [sq * wc[:, j, :, 0] for j in range(d)]
        for i in range(d):
            for j in range(d):
                blocks[b, i, j] = col[i] @ col[j].conj().T
    cf = CanonicalForm(k=k, d=d, blocks=blocks, basis_change=u, outcome_order=order)
    report = canonical_relations_check(cf, tol)
    if not report.verdict:
        name = max(report.residuals, key=report.residuals.get)
        raise RelationViolated(name, report.worst_indices[name], report.residuals[name])
    return cf


@dataclass(eq=False)
class RelationsReport:
    verdict: bool
    residuals: dict[str, float]
    worst_indices: dict[str, tuple[int, ...]]


def canonical_relations_check(cf: CanonicalForm, tol: Tolerance = DEFAULT_TOL) -> RelationsReport:
    """Residual of each relation family, maximised over indices.

    ``identity``: ``V^b_ii = I``; ``adjoint``: ``(V^b_ij)^H = V^b_ji``;
    ``chain``: ``V^b_{i1 i2} = V^b_{i1 j} V^b_{j i2}``;
    ``completeness``: ``sum_b V^b_ij = delta_ij d I``.
    """
    v, d, k = cf.blocks, cf.d, cf.k
    eye = np.eye(k)
    worst = {n: (0.0, ()) for n in ("identity", "adjoint", "chain", "completeness")}

    def note(name, r, idx):
        if r > worst[name][0]:
            worst[name] = (r, idx)

    for b in range(d):
        for i in range(d):
            note("identity", opnorm(v[b, i, i] - eye), (b, i))
            for j in range(d):
                note("adjoint", opnorm(v[b, i, j].conj().T - v[b, j, i]), (b, i, j))
                for i2 in range(d):
                    note("chain", opnorm(v[b, i, i2] - v[b, i, j] @ v[b, j, i2]), (b, i, i2, j))
    for i in range(d):
        for j in range(d):
            note("completeness", opnorm(v[:, i, j].sum(axis=0) - (d if i == j else 0) * eye), (i, j))
    residuals = {n: r for n, (r, _) in worst.items()}
    ok = all(tol.allows(r, d) for r in residuals.values())
    return RelationsReport(verdict=ok, residuals=residuals, worst_indices={n: idx for n, (_, idx) in worst.items()})


def canonical_effects(cf: CanonicalForm) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Rebuild ``P_a`` and ``Q_b`` in the original coordinates and outcome order."""
    d, k, u = cf.d, cf.k, cf.basis_change
    uh = u.conj().T
    p_canon = [uh @ _kron_basis(k, d, a, a) @ u for a in range(d)]
    ps = [None] * d
    for pos, a in enumerate(cf.outcome_order or range(d)):
        ps[a] = p_canon[pos]
    qs = []
    for b in range(d):
        q = sum(np.kron(cf.blocks[b, i, j], _unit(d, i, j)) for i in range(d) for j in range(d)) / d
        qs.append(uh @ q @ u)
    return ps, qs


def canonical_intertwiners(cf: CanonicalForm) -> tuple[np.ndarray, list[np.ndarray], list[np.ndarray]]:
    """``(P_C, [V_a], [W_b])`` in canonical coordinates.

    ``P_C = I (x) |1><1|``, ``V_a = I (x) |a><1|`` and
    ``W_b = (1/sqrt d) sum_j V^b_j1 (x) |j><1|``.
    """
    d, k = cf.d, cf.k
    p_c = np.kron(np.eye(k), _unit(d, 0, 0))
    vs = [np.kron(np.eye(k), _unit(d, a, 0)) for a in range(d)]
    ws = [sum(np.kron(cf.blocks[b, j, 0], _unit(d, j, 0)) for j in range(d)) / np.sqrt(d) for b in range(d)]
    return p_c.astype(np.complex128), vs, ws
