"""Command-line front end.

Every command prints one JSON report on stdout and a one-line summary on
stderr.  Exit status: 0 verdict true, 1 a check failed, 2 bad input or usage.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import construct, io, isoclinic, kl, mum, pauli
from .errors import (
    ConditionFailed,
    CrossPairFailed,
    IsoklError,
    MeasurementInvalid,
    RankMismatch,
    RelationViolated,
)
from .linalg import Subspace, Tolerance, orthonormal_basis, projection_from_subspace


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _cx(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


class Context:
    def __init__(self, args):
        self.tol = Tolerance(args.abs_tol, args.rel_tol)
        self.out = Path(args.out) if getattr(args, "out", None) else None
        self.written: list[str] = []

    def write(self, name: str, m) -> str | None:
        if self.out is None:
            return None
        path = io.write_cmat(self.out / name, m)
        self.written.append(str(path))
        return str(path)

    def manifest(self, data: dict, directory: Path | None = None):
        if self.out is None:
            return
        self.written.append(str(io.write_manifest(directory or self.out, data)))


def _load_subspace(path, kind, tol):
    m = io.read_cmat(path)
    if kind == "projector":
        return orthonormal_basis(m, tol)
    return orthonormal_basis(m, tol) if m.shape[1] > 0 else Subspace(m)


def _load_projection(path, kind, tol):
    m = io.read_cmat(path)
    if kind == "basis":
        return projection_from_subspace(orthonormal_basis(m, tol))
    return m


def _expand(paths):
    out = []
    for p in paths:
        p = Path(p)
        if p.is_dir():
            out.extend(sorted(str(x) for x in p.glob("*" + io.CMAT_SUFFIX)))
        else:
            out.append(str(p))
    return out


# ---------------------------------------------------------------- commands

def cmd_angles(args, ctx):
    v = _load_subspace(args.a, args.kind, ctx.tol)
    w = _load_subspace(args.b, args.kind, ctx.tol)
    angles = isoclinic.canonical_angles(v, w, ctx.tol)
    payload = {"angles": angles.tolist(), "cos_squared": (np.cos(angles) ** 2).tolist(),
               "dims": [v.dim, w.dim]}
    return True, 0.0, payload


def _lifted_family(directory: Path, tol):
    """Graph projections plus P_inf for an operator-family bundle, else None."""
    if not (directory / "manifest.json").is_file():
        return None
    man = io.read_manifest(directory)
    if man.get("kind") not in ("anticommuting", "omega"):
        return None
    members = [io.read_cmat(f) for f in _expand([directory])]
    d = int(man["d"])
    ps = [construct.p_infinity(members[0].shape[0], d)]
    ps += [construct.graph_projection(a, d, tol) for a in members]
    return ps


def cmd_isoclinic_check(args, ctx):
    files = _expand(args.files)
    lifted = _lifted_family(Path(args.files[0]), ctx.tol) if len(args.files) == 1 else None
    if lifted is not None:
        ps = lifted
    else:
        ps = [_load_projection(f, args.kind, ctx.tol) for f in files]
    rep = isoclinic.isoclinic_family_check(ps, ctx.tol)
    payload = {
        "files": files,
        "graph_lift": lifted is not None,
        "lambda_matrix": rep.lambda_matrix.tolist(),
        "failing_pairs": [{"i": i, "j": j, "residual": float(rep.residuals[i, j])} for i, j in rep.failing_pairs],
    }
    return rep.verdict, rep.worst_residual, payload


def _witness_payload(w: kl.KLWitness, ctx, verdict=True):
    units = []
    for i in range(w.n):
        for j in range(w.n):
            path = ctx.write(f"unitary_{i}_{j}{io.CMAT_SUFFIX}", w.unitaries[i][j])
            units.append(path if path else io.cmat_to_obj(w.unitaries[i][j]))
    return {
        "n": w.n,
        "lambdas": [_cx(z) for z in w.lambdas.ravel()],
        "residuals": w.residuals.ravel().tolist(),
        "unitaries": units,
        "max_residual": w.max_residual,
        "verdict": verdict,
    }


def cmd_kl_check(args, ctx):
    p_c = io.read_cmat(args.code)
    ops = [io.read_cmat(f) for f in _expand(args.ops)]
    try:
        if args.classic:
            res = kl.kl_classic_check(ops, p_c, ctx.tol)
            payload = {
                "mode": "classic",
                "lambda_matrix": [[_cx(z) for z in row] for row in res.lambda_matrix],
                "is_positive": res.is_positive,
                "trace": _cx(res.trace),
            }
            return True, res.residual, payload
        w = kl.kl_general_check(ops, p_c, ctx.tol)
        return True, w.max_residual, {"mode": "general", **_witness_payload(w, ctx)}
    except ConditionFailed as exc:
        payload = {"mode": "classic" if args.classic else "general",
                   "failure": {"i": exc.i, "j": exc.j, "residual": exc.residual, "message": str(exc)}}
        return False, exc.residual, payload


def _group(args):
    return pauli.StabilizerGroup.from_strings(args.generators)


def _errors(text):
    return [pauli.pauli_parse(e) for e in text.split(",") if e.strip()]


def cmd_stabilizer_project(args, ctx):
    s = _group(args)
    p = pauli.stabilizer_projection(s)
    trace = float(np.trace(p).real)
    residual = abs(trace - s.code_dimension)
    ctx.write("projection" + io.CMAT_SUFFIX, p)
    payload = {"n": s.n, "generators": [str(g) for g in s.generators], "rank": s.code_dimension, "trace": trace}
    return ctx.tol.allows(residual), residual, payload


def cmd_stabilizer_classify(args, ctx):
    s = _group(args)
    rows = []
    for e in _errors(args.errors):
        rows.append({"error": str(e), "class": pauli.classify_error(s, e).value,
                     "coset_phase": pauli.coset_phase(s, e)})
    return True, 0.0, {"n": s.n, "classification": rows}


def cmd_stabilizer_verify(args, ctx):
    s = _group(args)
    errs = _errors(args.errors)
    try:
        rep = pauli.verify_prop41(s, errs, ctx.tol)
    except ConditionFailed as exc:
        return False, exc.residual, {"errors": [str(e) for e in errs],
                                     "failure": {"i": exc.i, "j": exc.j, "residual": exc.residual}}
    payload = {
        "errors": [str(e) for e in errs],
        "isoclinic": rep.isoclinic,
        "consistent": rep.consistent,
        "pair_classes": [[c.value for c in row] for row in rep.pair_classes],
        "kl_nontrivial_pairs": [list(p) for p in rep.kl_nontrivial_pairs],
        "inconsistent_pairs": [list(p) for p in rep.inconsistent_pairs],
        "lambdas": rep.lambdas.tolist(),
        "deviations": rep.deviations.tolist(),
    }
    if rep.inconsistent_pairs:
        payload["failures"] = [{"i": i, "j": j, "residual": float(rep.deviations[i, j])}
                               for i, j in rep.inconsistent_pairs]
    return rep.isoclinic and rep.consistent, rep.max_residual, payload


def cmd_construct_anticommuting(args, ctx):
    fam = construct.kestelman_family(args.m)
    worst = 0.0
    for i, a in enumerate(fam.members):
        worst = max(worst, float(np.abs(a - a.conj().T).max()), float(np.abs(a @ a - np.eye(args.m)).max()))
        for b in fam.members[i + 1:]:
            worst = max(worst, float(np.abs(a @ b + b @ a).max()))
        ctx.write(f"a{i:02d}{io.CMAT_SUFFIX}", a)
    ctx.manifest({"kind": "anticommuting", "d": 2, "dim": args.m, "count": len(fam.members), "omega": [-1.0, 0.0]})
    q, p = construct.two_adic(args.m)
    return worst == 0.0, worst, {"m": args.m, "q": q, "p": p, "count": len(fam.members)}


def cmd_construct_graphs(args, ctx):
    fam = construct.kestelman_family(args.m)
    ps = [construct.p_infinity(args.m, 2)] + [construct.graph_projection(a, 2, ctx.tol) for a in fam.members]
    ctx.write("g00_inf" + io.CMAT_SUFFIX, ps[0])
    for i, p in enumerate(ps[1:], start=1):
        ctx.write(f"g{i:02d}{io.CMAT_SUFFIX}", p)
    ctx.manifest({"kind": "graphs", "d": 2, "dim": 2 * args.m, "count": len(ps), "omega": [-1.0, 0.0]})
    rep = isoclinic.isoclinic_family_check(ps, ctx.tol)
    payload = {"m": args.m, "count": len(ps), "lambda_matrix": rep.lambda_matrix.tolist()}
    return rep.verdict, rep.worst_residual, payload


def cmd_construct_omega(args, ctx):
    fam = construct.omega_commuting_generators(args.d, args.n, ctx.tol)
    for i, a in enumerate(fam.members):
        ctx.write(f"a{i:02d}{io.CMAT_SUFFIX}", a)
    ctx.manifest({"kind": "omega", "d": args.d, "dim": fam.dim, "count": len(fam.members), "omega": _cx(fam.omega)})
    worst = max(float(np.abs(a @ b - fam.omega * b @ a).max())
                for i, a in enumerate(fam.members) for b in fam.members[i + 1:])
    return True, worst, {"d": args.d, "n": args.n, "dim": fam.dim}


def _write_mum(fam: mum.MUMFamily, ctx):
    for m, meas in enumerate(fam.measurements):
        for r, e in enumerate(meas.effects):
            ctx.write(f"m{m}_r{r}{io.CMAT_SUFFIX}", e)
    ctx.manifest({"kind": "mum", "d": fam.d, "k": fam.k, "dim": fam.dim, "n_measurements": len(fam.measurements),
                  "count": fam.d * len(fam.measurements), "omega": _cx(construct.omega(fam.d))})


def cmd_construct_mum(args, ctx):
    fam = mum.mum_from_construction(args.d, args.n, ctx.tol)
    _write_mum(fam, ctx)
    return True, fam.max_residual, {"d": fam.d, "k": fam.k, "dim": fam.dim, "n_measurements": len(fam.measurements)}


def _read_mum(directory):
    directory = Path(directory)
    man = io.read_manifest(directory)
    return [[io.read_cmat(directory / f"m{m}_r{r}{io.CMAT_SUFFIX}") for r in range(man["d"])]
            for m in range(man["n_measurements"])]


def cmd_mum_check(args, ctx):
    effects = _read_mum(args.bundle)
    try:
        fam = mum.mum_check(effects, ctx.tol)
    except CrossPairFailed as exc:
        return False, exc.residual, {"failure": {"measurements": list(exc.measurements),
                                                 "outcomes": list(exc.outcomes), "residual": exc.residual}}
    except MeasurementInvalid as exc:
        return False, exc.residual, {"failure": {"invariant": exc.invariant, "indices": list(exc.indices),
                                                 "residual": exc.residual}}
    except RankMismatch as exc:
        return False, float("inf"), {"failure": {"invariant": "rank", "message": str(exc)}}
    return True, fam.max_residual, {"d": fam.d, "k": fam.k, "dim": fam.dim, "n_measurements": len(fam.measurements)}


def cmd_mum_canonical(args, ctx):
    effects = _read_mum(args.bundle)
    fam = mum.mum_check(effects[:2], ctx.tol)
    try:
        cf = mum.canonical_form_extract(fam, ctx.tol, anchor=args.anchor)
    except RelationViolated as exc:
        return False, exc.residual, {"failure": {"relation": exc.relation, "indices": list(exc.indices),
                                                 "residual": exc.residual}}
    rel = mum.canonical_relations_check(cf, ctx.tol)
    ps, qs = mum.canonical_effects(cf)
    trip = max(float(np.abs(a - b).max()) for a, b in zip(ps + qs, fam.measurements[0].effects
                                                          + fam.measurements[1].effects))
    if ctx.out is not None:
        d = cf.d
        for b in range(d):
            for i in range(d):
                for j in range(d):
                    ctx.write(f"blocks/b{b + 1}_i{i + 1}_j{j + 1}{io.CMAT_SUFFIX}", cf.blocks[b, i, j])
        ctx.write("basis_change" + io.CMAT_SUFFIX, cf.basis_change)
        ctx.manifest({"kind": "canonical", "d": cf.d, "k": cf.k, "dim": fam.dim, "n_measurements": 2,
                      "outcome_order": cf.outcome_order})
    worst = max(max(rel.residuals.values()), trip)
    payload = {"d": cf.d, "k": cf.k, "relation_residuals": rel.residuals, "round_trip_residual": trip}
    return rel.verdict and ctx.tol.allows(trip, cf.d), worst, payload


# ---------------------------------------------------------------- parser

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--abs-tol", type=float, default=1e-10)
    p.add_argument("--rel-tol", type=float, default=1e-12)
    p.add_argument("--out", default=None, help="directory for matrix output")
    p.add_argument("--reproducible", action="store_true", help="omit the timestamp field")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="isokl", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("angles", parents=[common], help="canonical angles between two subspaces")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--as", dest="kind", choices=["basis", "projector"], default="basis")
    p.set_defaults(func=cmd_angles, name="angles")

    iso = sub.add_parser("isoclinic").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    p = iso.add_parser("check", parents=[common])
    p.add_argument("files", nargs="+", help=".cmat.json files or directories")
    p.add_argument("--as", dest="kind", choices=["basis", "projector"], default="projector")
    p.set_defaults(func=cmd_isoclinic_check, name="isoclinic check")

    klp = sub.add_parser("kl").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    p = klp.add_parser("check", parents=[common])
    p.add_argument("--code", required=True, help="code projection")
    p.add_argument("--ops", nargs="+", required=True)
    p.add_argument("--classic", action="store_true")
    p.set_defaults(func=cmd_kl_check, name="kl check")

    st = sub.add_parser("stabilizer").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    for name, func, needs_errors in (("project", cmd_stabilizer_project, False),
                                     ("classify", cmd_stabilizer_classify, True),
                                     ("verify", cmd_stabilizer_verify, True)):
        p = st.add_parser(name, parents=[common])
        p.add_argument("--generators", required=True, help='comma-separated, e.g. "ZZI,IZZ"')
        if needs_errors:
            p.add_argument("--errors", required=True, help='comma-separated Pauli strings')
        p.set_defaults(func=func, name=f"stabilizer {name}")

    co = sub.add_parser("construct").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    p = co.add_parser("anticommuting", parents=[common])
    p.add_argument("--m", type=int, required=True)
    p.set_defaults(func=cmd_construct_anticommuting, name="construct anticommuting")
    p = co.add_parser("graphs", parents=[common])
    p.add_argument("--m", type=int, required=True)
    p.set_defaults(func=cmd_construct_graphs, name="construct graphs")
    for name, func in (("omega", cmd_construct_omega), ("mum", cmd_construct_mum)):
        p = co.add_parser(name, parents=[common])
        p.add_argument("--d", type=int, required=True)
        p.add_argument("--n", type=int, required=True)
        p.set_defaults(func=func, name=f"construct {name}")

    mp = sub.add_parser("mum").add_subparsers(dest="sub", required=True, parser_class=_Parser)
    p = mp.add_parser("check", parents=[common])
    p.add_argument("bundle")
    p.set_defaults(func=cmd_mum_check, name="mum check")
    p = mp.add_parser("canonical", parents=[common])
    p.add_argument("bundle")
    p.add_argument("--anchor", type=int, default=0, help="effect of the first measurement used as P_1")
    p.set_defaults(func=cmd_mum_canonical, name="mum canonical")
    return parser


def run(argv=None) -> tuple[int, dict | None]:
    """Execute a command; returns ``(exit_code, report)``.  Diagnostics go to stderr."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        ctx = Context(args)
        verdict, residual, payload = args.func(args, ctx)
    except UsageError as exc:
        print(f"isokl: usage error: {exc}", file=sys.stderr)
        return 2, None
    except (IsoklError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        msg = str(exc).replace("\n", " ")
        print(f"isokl: error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 2, None

    report = {
        "command": args.name,
        "verdict": bool(verdict),
        "max_residual": float(residual) if np.isfinite(residual) else None,
        "tolerance_used": {"abs": ctx.tol.abs_tol, "rel": ctx.tol.rel_tol},
        "payload": payload,
        "artifacts_written": ctx.written,
    }
    if not args.reproducible:
        report["timestamp"] = datetime.now(timezone.utc).isoformat()
    print(f"isokl {args.name}: {'PASS' if verdict else 'FAIL'} (max residual {residual:.3e})", file=sys.stderr)
    return (0 if verdict else 1), report


def main(argv=None) -> int:
    code, report = run(argv)
    if report is not None:
        sys.stdout.write(json.dumps(report, sort_keys=True) + "\n")
    return code


if __name__ == "__main__":
    raise SystemExit(main())
