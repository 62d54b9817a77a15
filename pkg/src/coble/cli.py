"""Command-line entry point: coble {gen,cubic,sextic,scan,group,classify,verify,report}."""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .chords import grow_pool, make_group
from .dualside import SEXTIC_LADDER, SEXTIC_SAMPLES, SexticResult, calibrate, sextic_interpolate
from .errors import CobleError, KernelNotOneDim, SuitabilityExhausted
from .exterior import Trivector
from .forms import HomogeneousForm
from .generate import generate, suitability_gate
from .orbits8 import classify8, default_database, fingerprint
from .pfaffloci import coble_cubic_data, cubic_by_interpolation, verify_pfaffian_identity
from .scanner import enumerate_A, rank_census
from .verify import CRITERIA, Workbench, run_all


def _stamp(doc: dict, q: int, seed: int, kind: str) -> dict:
    return {"kind": kind, "q": q, "seed": seed, "version": __version__, **doc}


def _write(args, name: str, doc: dict) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(json.dumps(doc, indent=1, sort_keys=False) + "\n")
    print(f"wrote {path}")
    return path


def _load(path: str) -> dict:
    return json.loads(Path(path).read_text())


def _omega(args, q: int | None = None) -> tuple[Trivector, dict]:
    """The trivector from --input, else a generated one for (--prime, --seed)."""
    for path in args.input or []:
        doc = _load(path)
        src = {"source": str(path)}
        if "planted_point" in doc:
            src["planted_point"] = doc["planted_point"]
        return Trivector.from_json(doc.get("omega", doc)), src
    g = generate(q or args.prime, args.seed)
    info = {"source": "generated", "attempts": len(g.attempts)}
    if g.planted_point is not None:
        info["planted_point"] = g.planted_point.tolist()
    return g.omega, info


def cmd_gen(args) -> int:
    try:
        g = generate(args.prime, args.seed)
    except SuitabilityExhausted as e:
        print(f"gen failed: {e}", file=sys.stderr)
        return 1
    doc = {**g.omega.to_json(), "seed": args.seed, "version": __version__, "gate": {"diagnostic": g.gate.diagnostic, **g.gate.info}, "attempts": g.attempts}
    if g.planted_point is not None:
        doc["planted_point"] = g.planted_point.tolist()
    _write(args, "trivector.json", doc)
    return 0


def cmd_cubic(args) -> int:
    omega, src = _omega(args)
    C, scalars = coble_cubic_data(omega)
    ok = verify_pfaffian_identity(omega)
    doc = {"form": C.to_json(), "pfaffian_scalars": list(scalars), "identity": ok, "omega": omega.to_json(), **src}
    if omega.q <= 13 and args.points:
        A = enumerate_A(omega).points
        rng = np.random.default_rng([args.seed, 2])
        pts = A[rng.choice(len(A), min(args.points, len(A)), replace=False)]
        try:
            doc["interpolation_matches"] = cubic_by_interpolation(pts, omega.q) == C
        except KernelNotOneDim as e:
            doc["interpolation_matches"] = False
            doc["kernel_dim"] = e.dim
        ok = ok and doc["interpolation_matches"]
    _write(args, "cubic.json", _stamp(doc, omega.q, args.seed, "cubic"))
    return 0 if ok else 1


def cmd_sextic(args) -> int:
    """Interpolate the sextic; a generated omega climbs the prime ladder when the kernel is not a line."""
    ladder = [args.prime] if args.input else [q for q in SEXTIC_LADDER if q >= args.prime] or [args.prime]
    tried = []
    for q in ladder:
        omega, src = _omega(args, q)
        try:
            res = sextic_interpolate(omega, args.seed, samples=args.trials or SEXTIC_SAMPLES, min_q=args.min_q)
        except KernelNotOneDim as e:
            tried.append({"q": omega.q, "kernel_dim": e.dim})
            continue
        doc = {
            "form": res.form.to_json(),
            "samples": res.samples,
            "kernel_dim": res.kernel_dim,
            "millis": res.millis,
            "ladder": tried,
            "omega": omega.to_json(),
            **src,
        }
        if args.calibrate:
            gate = suitability_gate(omega, known_points=np.array(src.get("planted_point", []), dtype=np.int64).reshape(-1, 9))
            if gate:
                pool = grow_pool(omega, gate.points, 40, np.random.default_rng([args.seed, 20]))
                ctx = make_group(omega, pool, args.seed)
                doc["calibration"] = calibrate(omega, res.form, ctx, np.random.default_rng([args.seed, 21])).to_json()
        _write(args, "sextic.json", _stamp(doc, omega.q, args.seed, "sextic"))
        return 0
    print(f"sextic: no one-dimensional kernel on the ladder {tried}", file=sys.stderr)
    return 1


def cmd_scan(args) -> int:
    omega, src = _omega(args)
    rep = enumerate_A(omega, workers=args.workers)
    doc = {**rep.to_json(), **src}
    if args.census:
        doc["rank_census"] = {str(k): v for k, v in rank_census(omega, workers=args.workers).items()}
    _write(args, "scan.json", _stamp(doc, omega.q, args.seed, "scan"))
    return 0


def cmd_group(args) -> int:
    omega, src = _omega(args)
    known = {omega.q: np.array([src["planted_point"]], dtype=np.int64)} if "planted_point" in src else {}
    wb = Workbench(seed=args.seed, provided={omega.q: omega}, known=known)
    try:
        A = wb.points(omega.q)
    except CobleError as e:
        print(f"group: {e}", file=sys.stderr)
        return 1
    ctx = wb.group(omega.q)
    rng = np.random.default_rng([args.seed, 30])
    trials = args.trials or 20
    fails = 0
    samples = []
    for _ in range(trials):
        P, Q, S = (A[rng.integers(len(A))] for _ in range(3))
        PQ = ctx.add(P, Q)
        ok = np.array_equal(PQ, ctx.add(Q, P)) and np.array_equal(ctx.add(PQ, S), ctx.add(P, ctx.add(Q, S)))
        fails += not ok
        samples.append({"P": P.tolist(), "Q": Q.tolist(), "sum": PQ.tolist(), "third": ctx.third(P, Q).tolist()})
    N = len(A)
    lagrange = all(np.array_equal(ctx.scalar_mul(N, A[i]), ctx.E) for i in rng.integers(len(A), size=min(trials, 20)))
    doc = {
        "E": ctx.E.tolist(),
        "O_E": ctx.O_E.tolist(),
        "order": N,
        "law_failures": fails,
        "lagrange": lagrange,
        "routes": dict(ctx.stats),
        "samples": samples,
        **src,
    }
    _write(args, "group.json", _stamp(doc, omega.q, args.seed, "group"))
    return 0 if fails == 0 and lagrange else 1


def cmd_classify(args) -> int:
    if not args.input:
        print("classify needs --input with an 8-variable trivector", file=sys.stderr)
        return 2
    y = Trivector.from_json(_load(args.input[0]))
    if y.n != 8:
        print("classify expects an 8-variable trivector", file=sys.stderr)
        return 2
    db = default_database()
    fp = fingerprint(y, db.q)
    label = classify8(y, db)
    doc = {"label": label, "fingerprint": {"q": fp.q, **fp.as_dict()}, "database": db.to_json()}
    _write(args, "classify.json", _stamp(doc, y.q, args.seed, "classify"))
    return 0


def cmd_verify(args) -> int:
    provided, known, sextic = {}, {}, None
    for path in args.input or []:
        doc = _load(path)
        om = Trivector.from_json(doc.get("omega", doc))
        provided[om.q] = om
        if "planted_point" in doc:
            known[om.q] = np.array([doc["planted_point"]], dtype=np.int64)
        if doc.get("kind") == "sextic":
            sextic = (om.q, HomogeneousForm.from_json(doc["form"]), doc)
    wb = Workbench(seed=args.seed, provided=provided, known=known)
    if sextic is not None:
        q, form, doc = sextic
        wb.preset_sextic(SexticResult(form, q, doc["samples"], doc["kernel_dim"], doc["millis"]))
    numbers = args.checks or [c[0] for c in CRITERIA]
    t0 = time.perf_counter()
    run = run_all(wb, numbers)
    results = run.pop("_results")
    for r in results:
        print(r.line())
    run["total_s"] = round(time.perf_counter() - t0, 1)
    run["sextic_from_file"] = sextic is not None
    _write(args, "report.json", _stamp(run, args.prime, args.seed, "verify"))
    print("all hard checks passed" if run["all_hard_passed"] else "some hard checks failed")
    return 0 if run["all_hard_passed"] else 1


def cmd_report(args) -> int:
    merged = {"kind": "report", "version": __version__, "seed": args.seed, "artifacts": {}}
    for path in args.input or []:
        doc = _load(path)
        merged["artifacts"].setdefault(doc.get("kind", Path(path).stem), []).append({"path": str(path), **doc})
    _write(args, "merged.json", merged)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="coble", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, prime, help):
        s = sub.add_parser(name, help=help)
        s.add_argument("--prime", type=int, default=prime)
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--input", action="append", help="input JSON file (repeatable)")
        s.add_argument("--out", default=".")
        s.add_argument("--points", type=int, default=None)
        s.add_argument("--trials", type=int, default=None)
        s.set_defaults(fn=fn)
        return s

    add("gen", cmd_gen, 7, "generate a suitable random trivector")
    s = add("cubic", cmd_cubic, 7, "Coble cubic of a trivector")
    s.set_defaults(points=40)
    s = add("sextic", cmd_sextic, 23, "interpolate the dual sextic")
    s.add_argument("--min-q", type=int, default=23, dest="min_q")
    s.add_argument("--calibrate", action="store_true", help="also measure the multiplicity constants")
    s = add("scan", cmd_scan, 7, "enumerate the surface A")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--census", action="store_true", help="also count points of every rank")
    add("group", cmd_group, 7, "group law on A")
    add("classify", cmd_classify, 5, "orbit label of an 8-variable trivector")
    s = add("verify", cmd_verify, 7, "run the acceptance checks")
    s.add_argument("--checks", type=int, nargs="*", help="criterion numbers to run (default all)")
    add("report", cmd_report, 7, "merge persisted artifacts")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except CobleError as e:
        print(f"{args.command}: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
