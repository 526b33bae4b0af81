"""Batch front-end: JSON serialization of the domain objects and subcommands
for building, transforming, validating and auditing filtrations.

Schema family "qwm/1".  Complex scalars serialize as [re, im] pairs, matrices
as row-major nested arrays, subspaces as {"dim", "basis"}, filtrations as
{"dim", "steps": [{"t", "basis"}]}, projections as {"m", "matrix"}.  Exit
codes: 0 success, 1 usage/schema error, 2 validation failure (report still
emitted).
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import codes, constructions
from .errors import QwmError, SchemaError
from .filtration import MetricContext, StepFiltration, descriptors, from_classical, validate
from .geometry import AmplifiedProjection, rho
from .lipschitz import AscentBudget, commutation_lipschitz_lower, spectral_lipschitz
from .numerics import DEFAULT_CONFIG, NumericConfig
from .opspace import OperatorSubspace, span

SCHEMA = "qwm/1"


def _fmt(x: float) -> float:
    """Canonical float formatting: 12 significant digits."""
    if math.isinf(x):
        return x
    return float(f"{x:.12e}")


def emit_complex(z: complex):
    return [_fmt(float(z.real)), _fmt(float(z.imag))]


def parse_complex(obj, pointer: str) -> complex:
    if not (isinstance(obj, list) and len(obj) == 2 and all(isinstance(v, (int, float)) for v in obj)):
        raise SchemaError("complex scalar must be a [re, im] pair", pointer)
    return complex(obj[0], obj[1])


def emit_matrix(m: np.ndarray):
    return [[emit_complex(m[i, j]) for j in range(m.shape[1])] for i in range(m.shape[0])]


def parse_matrix(obj, pointer: str) -> np.ndarray:
    if not (isinstance(obj, list) and obj and all(isinstance(r, list) for r in obj)):
        raise SchemaError("matrix must be a nested array", pointer)
    rows = len(obj)
    cols = len(obj[0])
    out = np.zeros((rows, cols), dtype=complex)
    for i, row in enumerate(obj):
        if len(row) != cols:
            raise SchemaError("ragged matrix rows", f"{pointer}/{i}")
        for j, entry in enumerate(row):
            out[i, j] = parse_complex(entry, f"{pointer}/{i}/{j}")
    return out


def emit_subspace(s: OperatorSubspace):
    return {"dim": s.n, "basis": [emit_matrix(b) for b in s.basis]}


def parse_subspace(obj, pointer: str, cfg: NumericConfig) -> OperatorSubspace:
    if not isinstance(obj, dict) or "dim" not in obj or "basis" not in obj:
        raise SchemaError("subspace needs 'dim' and 'basis'", pointer)
    n = obj["dim"]
    mats = [parse_matrix(b, f"{pointer}/basis/{i}") for i, b in enumerate(obj["basis"])]
    for i, m in enumerate(mats):
        if m.shape != (n, n):
            raise SchemaError(f"basis matrix of shape {m.shape}, ambient {n}", f"{pointer}/basis/{i}")
    if not mats:
        return OperatorSubspace(n, np.zeros((0, n, n)))
    return span(mats, n, cfg)


def emit_filtration(f: StepFiltration):
    return {
        "schema": SCHEMA,
        "kind": "filtration",
        "dim": f.n,
        "steps": [
            {"t": _fmt(t), "basis": [emit_matrix(b) for b in lv.basis]}
            for t, lv in zip(f.breakpoints, f.levels)
        ],
    }


def parse_filtration(obj, cfg: NumericConfig) -> StepFiltration:
    if not isinstance(obj, dict):
        raise SchemaError("filtration must be an object", "")
    if obj.get("kind", "filtration") != "filtration":
        raise SchemaError(f"expected kind 'filtration', got {obj.get('kind')!r}", "/kind")
    if "dim" not in obj or "steps" not in obj:
        raise SchemaError("filtration needs 'dim' and 'steps'", "")
    n = obj["dim"]
    bps = []
    lvs = []
    for i, step in enumerate(obj["steps"]):
        ptr = f"/steps/{i}"
        if not isinstance(step, dict) or "t" not in step or "basis" not in step:
            raise SchemaError("step needs 't' and 'basis'", ptr)
        t = step["t"]
        if not isinstance(t, (int, float)) or not math.isfinite(t):
            raise SchemaError("breakpoints must be finite numbers", f"{ptr}/t")
        bps.append(float(t))
        lvs.append(parse_subspace({"dim": n, "basis": step["basis"]}, ptr, cfg))
    try:
        return StepFiltration(n, bps, lvs)
    except QwmError as exc:
        raise SchemaError(str(exc), "/steps")


def emit_projection(p: AmplifiedProjection):
    return {"schema": SCHEMA, "kind": "projection", "m": p.m, "matrix": emit_matrix(p.matrix)}


def parse_projection(obj, base_dim: int, cfg: NumericConfig) -> AmplifiedProjection:
    if not isinstance(obj, dict) or "matrix" not in obj:
        raise SchemaError("projection needs 'matrix'", "")
    m = obj.get("m", 1)
    if not isinstance(m, int) or m < 1:
        raise SchemaError("amplification 'm' must be a positive integer", "/m")
    mat = parse_matrix(obj["matrix"], "/matrix")
    try:
        return AmplifiedProjection(base_dim, m, mat, cfg)
    except QwmError as exc:
        raise SchemaError(str(exc), "/matrix")


def emit_real_matrix(d: np.ndarray):
    return [["inf" if math.isinf(v) else _fmt(float(v)) for v in row] for row in d]


def parse_real_matrix(obj, pointer: str) -> np.ndarray:
    rows = len(obj)
    out = np.zeros((rows, len(obj[0])))
    for i, row in enumerate(obj):
        for j, v in enumerate(row):
            if v == "inf":
                out[i, j] = math.inf
            elif isinstance(v, (int, float)):
                out[i, j] = float(v)
            else:
                raise SchemaError("distance entries must be numbers or 'inf'", f"{pointer}/{i}/{j}")
    return out


def _read_json(path: str):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}", "")


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)


def _cfg_from_args(args) -> NumericConfig:
    if args.tol is None:
        return DEFAULT_CONFIG
    return NumericConfig(rank_tol=min(args.tol, 0.1), membership_tol=args.tol, eig_cluster_tol=min(args.tol, 1e-6))


def _load_filtration(path: str, cfg: NumericConfig) -> StepFiltration:
    return parse_filtration(_read_json(path), cfg)


def cmd_validate(args, cfg) -> int:
    f = _load_filtration(args.filtration, cfg)
    ctx = None
    if args.algebra:
        gens_obj = _read_json(args.algebra)
        gens = [parse_matrix(g, f"/{i}") for i, g in enumerate(gens_obj)]
        ctx = MetricContext.from_generators(gens, f.n, cfg)
    report = validate(f, ctx, cfg)
    desc = descriptors(f, cfg) if report.is_filtration else None
    out = {
        "schema": SCHEMA,
        "kind": "validation",
        "is_filtration": report.is_filtration,
        "is_pseudometric": report.is_pseudometric,
        "is_metric": report.is_metric,
        "violations": [[str(kind), repr(where)] for kind, where in report.violations],
    }
    if desc is not None:
        out["diameter"] = "inf" if math.isinf(desc["diameter"]) else _fmt(desc["diameter"])
        out["gap"] = "inf" if math.isinf(desc["gap"]) else _fmt(desc["gap"])
        out["path_flag"] = desc["path_flag"]
    print(_dump(out))
    return 0 if report.is_filtration else 2


def cmd_gauge(args, cfg) -> int:
    f = _load_filtration(args.filtration, cfg)
    a = parse_matrix(_read_json(args.matrix), "")
    d = f.displacement_gauge(a, cfg)
    print(_dump({"schema": SCHEMA, "kind": "gauge", "displacement": "inf" if math.isinf(d) else _fmt(d)}))
    return 0


def cmd_distance(args, cfg) -> int:
    f = _load_filtration(args.filtration, cfg)
    p = parse_projection(_read_json(args.p), f.n, cfg)
    q = parse_projection(_read_json(args.q), f.n, cfg)
    r = rho(f, p, q, cfg)
    print(_dump({"schema": SCHEMA, "kind": "distance", "rho": "inf" if math.isinf(r) else _fmt(r)}))
    return 0


def cmd_lipschitz(args, cfg) -> int:
    f = _load_filtration(args.filtration, cfg)
    a = parse_matrix(_read_json(args.matrix), "")
    ls = spectral_lipschitz(f, a, amp_degree=args.amplification, cfg=cfg)
    budget = AscentBudget(restarts=args.budget, steps=200) if args.budget else AscentBudget.deterministic()
    lc = commutation_lipschitz_lower(f, a, budget=budget, seed=args.seed, cfg=cfg) if args.amplification == 1 else None
    out = {
        "schema": SCHEMA,
        "kind": "lipschitz",
        "spectral": "inf" if math.isinf(ls.value) else _fmt(ls.value),
    }
    if lc is not None:
        out["commutation_lower"] = _fmt(lc.value)
    print(_dump(out))
    return 0


def cmd_build(args, cfg) -> int:
    if args.what == "hamming":
        f = codes.hamming_filtration(args.sites, args.local_dim, cfg)
    elif args.what == "blocks":
        f = codes.block_filtration([int(b) for b in args.blocks.split(",")], cfg)
    elif args.what == "m2":
        f = constructions.m2_metric(args.a, args.b, args.c, cfg)
    elif args.what == "classical":
        d = parse_real_matrix(_read_json(args.matrix), "")
        f, _ = from_classical(d, cfg)
    else:
        raise SchemaError(f"unknown build target {args.what!r}", "")
    print(_dump(emit_filtration(f)))
    return 0


def cmd_transform(args, cfg) -> int:
    f = _load_filtration(args.filtration, cfg)
    if args.what == "truncate":
        out = constructions.truncate(f, args.at, cfg)
    elif args.what == "hoelder":
        out = constructions.hoelder(f, args.alpha, cfg)
    elif args.what == "meet":
        others = [_load_filtration(p, cfg) for p in args.with_ or []]
        out = constructions.meet([f] + others, cfg)
    elif args.what == "product":
        out = constructions.metric_product(f, _load_filtration(args.with_[0], cfg), cfg)
    elif args.what == "lp":
        out = constructions.lp_product(f, _load_filtration(args.with_[0], cfg), args.p, cfg)
    elif args.what == "direct-sum":
        out = constructions.direct_sum(f, _load_filtration(args.with_[0], cfg), args.bridge, cfg)
    else:
        raise SchemaError(f"unknown transform {args.what!r}", "")
    print(_dump(emit_filtration(out)))
    return 0


def cmd_code_check(args, cfg) -> int:
    f = _load_filtration(args.filtration, cfg)
    p = parse_matrix(_read_json(args.projector), "")
    code = codes.QuantumCode(p, f)
    audit = codes.kl_check(code, args.k, cfg)
    delta = codes.min_distance(code, cfg)
    out = {
        "schema": SCHEMA,
        "kind": "code-check",
        "detects": audit.detects,
        "worst_residual": _fmt(audit.worst_residual),
        "worst_index": audit.worst_index,
        "min_distance": "inf" if math.isinf(delta) else _fmt(delta),
    }
    if audit.detects:
        vol = codes.volume_bound(code, args.k, cfg)
        out["volume"] = {
            "dim_k": vol.dim_k,
            "code_dim": vol.code_dim,
            "bound": "inf" if math.isinf(vol.bound) else _fmt(vol.bound),
            "holds": vol.holds,
        }
    print(_dump(out))
    return 0 if audit.detects else 2


def cmd_classify_m2(args, cfg) -> int:
    f = _load_filtration(args.filtration, cfg)
    a, b, c, u = constructions.canonicalize_m2(f, cfg)
    print(
        _dump(
            {
                "schema": SCHEMA,
                "kind": "m2-classification",
                "a": _fmt(a),
                "b": _fmt(b),
                "c": "inf" if math.isinf(c) else _fmt(c),
                "unitary": emit_matrix(u),
                "reflexive": b == c,
            }
        )
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qwmetric", description=__doc__)
    ap.add_argument("--tol", type=float, default=None, help="membership tolerance override")
    ap.add_argument("--amplification", type=int, default=1, help="amplification degree for operators")
    ap.add_argument("--seed", type=int, default=0, help="seed for randomized search")
    ap.add_argument("--budget", type=int, default=0, help="random restarts for the commutation bound")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check the filtration axioms")
    p.add_argument("--filtration", required=True)
    p.add_argument("--algebra", help="JSON list of generator matrices for the context algebra")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("gauge", help="displacement gauge of a matrix")
    p.add_argument("--filtration", required=True)
    p.add_argument("--matrix", required=True)
    p.set_defaults(fn=cmd_gauge)

    p = sub.add_parser("distance", help="rho between two projections")
    p.add_argument("--filtration", required=True)
    p.add_argument("--p", required=True)
    p.add_argument("--q", required=True)
    p.set_defaults(fn=cmd_distance)

    p = sub.add_parser("lipschitz", help="spectral and commutation Lipschitz numbers")
    p.add_argument("--filtration", required=True)
    p.add_argument("--matrix", required=True)
    p.set_defaults(fn=cmd_lipschitz)

    p = sub.add_parser("build", help="construct a filtration")
    p.add_argument("what", choices=["hamming", "blocks", "m2", "classical"])
    p.add_argument("--sites", type=int, default=1)
    p.add_argument("--local-dim", type=int, default=2, dest="local_dim")
    p.add_argument("--blocks", default="1")
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--matrix", help="distance matrix JSON for 'classical'")
    p.set_defaults(fn=cmd_build)

    p = sub.add_parser("transform", help="apply a construction")
    p.add_argument("what", choices=["truncate", "hoelder", "meet", "product", "lp", "direct-sum"])
    p.add_argument("--filtration", required=True)
    p.add_argument("--with", dest="with_", action="append", help="other filtration file(s)")
    p.add_argument("--at", type=float, default=1.0, help="truncation level")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--p", type=float, default=1.0, help="exponent for lp")
    p.add_argument("--bridge", type=float, default=None)
    p.set_defaults(fn=cmd_transform)

    p = sub.add_parser("code-check", help="detectability audit, distance and volume bound")
    p.add_argument("--filtration", required=True)
    p.add_argument("--projector", required=True)
    p.add_argument("--k", type=float, default=1.0)
    p.set_defaults(fn=cmd_code_check)

    p = sub.add_parser("classify-m2", help="canonical parameters of an M_2 pseudometric")
    p.add_argument("--filtration", required=True)
    p.set_defaults(fn=cmd_classify_m2)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    cfg = _cfg_from_args(args)
    try:
        return args.fn(args, cfg)
    except SchemaError as exc:
        print(_dump({"schema": SCHEMA, "kind": "error", "error": str(exc), "pointer": exc.pointer}), file=sys.stderr)
        return 1
    except QwmError as exc:
        print(_dump({"schema": SCHEMA, "kind": "error", "error": f"{type(exc).__name__}: {exc}"}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
