"""Acceptance gate: one check per criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v`` or ``python tests/test_acceptance.py``.
"""

import itertools
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import dense_pauli, haar, isoclinic_ops, ket, proj, random_complex  # noqa: E402
from isokl.construct import (  # noqa: E402
    crossing_unitary,
    graph_projection,
    kestelman_family,
    omega_commuting_generators,
    p_infinity,
    two_adic,
)
from isokl.errors import ConditionFailed, InvalidGroup  # noqa: E402
from isokl.isoclinic import (  # noqa: E402
    angles_via_eigen_oracle,
    canonical_angles,
    isoclinic_family_check,
    isoclinic_pair_check,
)
from isokl.kl import kl_classic_check, kl_general_check, phase_deviation, range_projections  # noqa: E402
from isokl.linalg import Subspace, opnorm, orthonormal_basis  # noqa: E402
from isokl.mum import (  # noqa: E402
    canonical_effects,
    canonical_form_extract,
    canonical_relations_check,
    mum_check,
    mum_from_construction,
)
from isokl.pauli import (  # noqa: E402
    ErrorClass,
    StabilizerGroup,
    pauli_commutes,
    pauli_mul,
    pauli_parse,
    pauli_to_matrix,
    stabilizer_projection,
    verify_prop41,
)


def criterion_1():
    worst_lam = worst_ang = 0.0
    for m in (2, 4, 8):
        fam = kestelman_family(m).members
        ps = [p_infinity(m)] + [graph_projection(a) for a in fam]
        rep = isoclinic_family_check(ps)
        if not rep.verdict or len(fam) != {2: 3, 4: 5, 8: 7}[m]:
            return False, f"m={m}: family check failed"
        off = rep.lambda_matrix[~np.eye(len(ps), dtype=bool)]
        worst_lam = max(worst_lam, np.abs(off - 0.5).max())
        subs = [orthonormal_basis(p) for p in ps]
        for v, w in itertools.combinations(subs, 2):
            worst_ang = max(worst_ang, np.abs(canonical_angles(v, w) - np.pi / 4).max())
    ok = worst_lam <= 1e-10 and worst_ang <= 1e-8
    return ok, f"max |lam - 1/2| = {worst_lam:.2e}, max |angle - pi/4| = {worst_ang:.2e}"


def criterion_2():
    for m in range(2, 65, 2):
        fam = kestelman_family(m).members
        q, _ = two_adic(m)
        if len(fam) != 2 * q + 1:
            return False, f"m={m}: {len(fam)} members"
        eye = np.eye(m)
        for a in fam:
            if np.abs(a - a.conj().T).max() != 0 or np.abs(a @ a - eye).max() != 0:
                return False, f"m={m}: member not exactly Hermitian unitary"
        for a, b in itertools.combinations(fam, 2):
            if np.abs(a @ b + b @ a).max() != 0:
                return False, f"m={m}: anti-commutation residual nonzero"
    return True, "all even m <= 64 exact with 2q+1 members"


def criterion_3():
    worst = worst_c = 0.0
    for d, n in [(2, 2), (3, 2), (4, 2), (5, 2), (2, 3), (2, 4)]:
        fam = mum_from_construction(d, n)
        fam = mum_check(fam.measurements)
        for meas in fam.measurements:
            worst_c = max(worst_c, opnorm(sum(meas.effects) - np.eye(fam.dim)))
        for s, t in itertools.combinations(fam.measurements, 2):
            for p, q in itertools.product(s.effects, t.effects):
                worst = max(worst, opnorm(p @ q @ p - p / d), opnorm(q @ p @ q - q / d))
        worst = max(worst, fam.max_residual / d)
    ok = worst <= 1e-10 and worst_c <= 1e-11
    return ok, f"cross-scalar residual {worst:.2e}, completeness {worst_c:.2e}"


def criterion_4():
    worst_u = worst_f = 0.0
    for d in (2, 3, 4, 5):
        a, b = omega_commuting_generators(d, 2).members
        for r, s in itertools.product(range(d), repeat=2):
            u = crossing_unitary(a, r, b, s, d)
            worst_u = max(worst_u, opnorm(u @ u.conj().T - np.eye(d)))
            if d == 2 and r == s:
                worst_f = max(worst_f, np.abs(u - (np.eye(2) + a @ b) / np.sqrt(2)).max())
    ok = worst_u <= 1e-10 and worst_f <= 1e-12
    return ok, f"unitarity {worst_u:.2e}, (I+AB)/sqrt2 entrywise {worst_f:.2e}"


def criterion_5():
    worst_rel = worst_trip = 0.0
    for d, n in [(2, 2), (3, 2), (4, 2), (5, 2), (2, 3), (2, 4)]:
        fam = mum_from_construction(d, n)
        for s, t in itertools.combinations(range(n), 2):
            pair = mum_check([fam.measurements[s], fam.measurements[t]])
            cf = canonical_form_extract(pair)
            rep = canonical_relations_check(cf)
            worst_rel = max(worst_rel, *rep.residuals.values())
            ps, qs = canonical_effects(cf)
            for x, y in zip(ps + qs, pair.measurements[0].effects + pair.measurements[1].effects):
                worst_trip = max(worst_trip, opnorm(x - y))
    ok = worst_rel <= 1e-9 and worst_trip <= 1e-9
    return ok, f"relations {worst_rel:.2e}, round trip {worst_trip:.2e}"


def criterion_6():
    s = StabilizerGroup.from_strings("ZII,IZI")
    errs = [pauli_parse(t) for t in ("III", "XII", "IXI", "IIX")]
    errs.append(pauli_mul(pauli_parse("IIX"), pauli_parse("IIZ")))
    rep = verify_prop41(s, errs)
    logical = rep.pair_classes[0][3] is ErrorClass.LOGICAL
    dev = rep.deviations[0, 3]
    lam_zero = max(abs(rep.lambdas[0, 1]), abs(rep.lambdas[0, 2]))
    ok = rep.isoclinic and rep.consistent and logical and dev > 0.5 and lam_zero <= 1e-12
    return ok, (f"isoclinic={rep.isoclinic} consistent={rep.consistent} "
                f"(I,X3) logical={logical} dev={dev:.3f}, lam(I,X1),(I,X2) <= {lam_zero:.1e}")


def criterion_7():
    p = proj(np.array([ket("000"), ket("111")]).T)
    errs = [dense_pauli(t) for t in ("III", "XII", "IXI", "IIX")]
    res = kl_classic_check(errs, p)
    dev_delta = np.abs(res.lambda_matrix - np.eye(4)).max()
    errs.append(dense_pauli("IIZ"))
    try:
        kl_classic_check(errs, p)
        return False, "classic check accepted Z3"
    except ConditionFailed as exc:
        pair = (exc.i, exc.j)
    w = kl_general_check(errs, p)
    dev = phase_deviation(w.unitaries[0][4], p)
    ok = dev_delta <= 1e-12 and pair == (0, 4) and w.max_residual <= 1e-10 and dev > 0.5
    return ok, f"|lam - delta| = {dev_delta:.1e}, classic fails at {pair}, general U deviation {dev:.3f}"


def _trial(dim, rng):
    kind = rng.integers(0, 4)
    if kind == 0:
        # isoclinic: graph intertwiners of an anti-commuting family
        m = dim // 2
        q, _ = two_adic(m)
        ops, p = isoclinic_ops(m, rng, count=int(rng.integers(1, 2 * q + 2)))
    elif kind == 1:
        # same, one operator nudged off the family
        m = dim // 2
        ops, p = isoclinic_ops(m, rng)
        j = int(rng.integers(1, len(ops)))
        ops[j] = ops[j] @ _small_unitary(dim, rng)
    else:
        k = int(rng.integers(1, dim // 2 + 1)) if kind == 2 else 1
        p = proj(random_complex((dim, k), rng))
        ops = [haar(dim, rng) for _ in range(int(rng.integers(2, 5)))]
    return ops, p


def _small_unitary(dim, rng, eps=1e-3):
    h = random_complex((dim, dim), rng)
    h = eps * (h + h.conj().T) / 2
    w, v = np.linalg.eigh(h)
    return v @ np.diag(np.exp(1j * w)) @ v.conj().T


def criterion_8(trials=200):
    rng = np.random.default_rng(8)
    mismatches, worst, counts = [], 0.0, {True: 0, False: 0}
    for dim in (4, 8, 16):
        for t in range(trials):
            ops, p = _trial(dim, rng)
            try:
                w = kl_general_check(ops, p)
                kl_ok = True
                worst = max(worst, w.max_residual)
            except ConditionFailed:
                kl_ok = False
            iso_ok = isoclinic_family_check(range_projections(ops, p)).verdict
            counts[iso_ok] += 1
            if kl_ok != iso_ok:
                mismatches.append((dim, t))
    ok = not mismatches and worst <= 1e-9
    return ok, (f"{3 * trials} trials ({counts[True]} isoclinic, {counts[False]} not), "
                f"mismatches={len(mismatches)}, max witness residual {worst:.2e}")


def criterion_9(trials=100):
    rng = np.random.default_rng(9)
    worst_ang = worst_lam = 0.0
    certified = 0
    for n in range(2, 17):
        for t in range(trials):
            k = int(rng.integers(1, n // 2 + 1))
            if t % 4 == 0:
                # isoclinic pair at a random common angle
                theta = rng.uniform(0, np.pi / 2)
                v = np.zeros((n, k), dtype=complex)
                v[:k] = np.eye(k)
                w = np.zeros((n, k), dtype=complex)
                w[:k] = np.cos(theta) * np.eye(k)
                w[k:2 * k] = np.sin(theta) * haar(k, rng)
                u = haar(n, rng)
                vs, ws = Subspace(u @ v), Subspace(u @ w)
            else:
                vs = orthonormal_basis(random_complex((n, k), rng))
                ws = orthonormal_basis(random_complex((n, k), rng))
            pv = vs.basis @ vs.basis.conj().T
            pw = ws.basis @ ws.basis.conj().T
            a = canonical_angles(vs, ws)
            b = angles_via_eigen_oracle(pv, pw)
            worst_ang = max(worst_ang, np.abs(a - b).max())
            cert = isoclinic_pair_check(pv, pw)
            if cert is not None:
                certified += 1
                worst_lam = max(worst_lam, np.abs(np.cos(a) ** 2 - cert.lam).max())
    ok = worst_ang <= 1e-9 and worst_lam <= 1e-9
    return ok, f"oracle gap {worst_ang:.2e}, cos^2 vs lam {worst_lam:.2e} over {certified} certificates"


def _all_paulis(n):
    for prefix in ("+", "-", "+i", "-i"):
        for body in itertools.product("IXYZ", repeat=n):
            yield pauli_parse(prefix + "".join(body)), dense_pauli(prefix + "".join(body))


def _random_group(n, rng):
    g = int(rng.integers(1, n + 1))
    gens = []
    while len(gens) < g:
        cand = pauli_parse(rng.choice(["+", "-"]) + "".join(rng.choice(list("IXYZ"), size=n)))
        if (cand.x | cand.z) == 0 or not all(pauli_commutes(cand, h) for h in gens):
            continue
        try:
            StabilizerGroup(n, tuple(gens + [cand]))
        except InvalidGroup:
            continue
        gens.append(cand)
    return StabilizerGroup(n, tuple(gens))


def criterion_10():
    for n in (1, 2, 3):
        items = list(_all_paulis(n))
        for p, a in items:
            if np.abs(pauli_to_matrix(p) - a).max() != 0:
                return False, f"dense realisation mismatch for {p}"
        for (p, a), (q, b) in itertools.product(items, repeat=2):
            if np.abs(pauli_to_matrix(pauli_mul(p, q)) - a @ b).max() != 0:
                return False, f"product mismatch {p} * {q}"
            if pauli_commutes(p, q) != (np.abs(a @ b - b @ a).max() == 0):
                return False, f"commutation mismatch {p}, {q}"
    rng = np.random.default_rng(10)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(1, 7))
        s = _random_group(n, rng)
        tr = np.trace(stabilizer_projection(s)).real
        expected = 2 ** (n - len(s.generators))
        worst = max(worst, abs(tr - expected))
    ok = worst <= 1e-10
    return ok, f"exhaustive n<=3 phase-exact; 50 random groups trace error {worst:.1e}"


CRITERIA = [
    (1, "graph-subspace scalar 1/2", criterion_1),
    (2, "Kestelman count 2q+1", criterion_2),
    (3, "MUM construction", criterion_3),
    (4, "crossing-unitary unitarity", criterion_4),
    (5, "canonical form", criterion_5),
    (6, "stabilizer classification", criterion_6),
    (7, "classic KL", criterion_7),
    (8, "KL / isoclinic equivalence", criterion_8),
    (9, "angle-oracle agreement", criterion_9),
    (10, "exact Pauli layer", criterion_10),
]


def _line(num, title, ok, detail):
    return f"[{'PASS' if ok else 'FAIL'}] criterion {num:2d} {title}: {detail}"


@pytest.mark.parametrize("num,title,fn", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_criterion(num, title, fn, capsys):
    ok, detail = fn()
    with capsys.disabled():
        print("\n" + _line(num, title, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for num, title, fn in CRITERIA:
        ok, detail = fn()
        failed += not ok
        print(_line(num, title, ok, detail))
    sys.exit(1 if failed else 0)
