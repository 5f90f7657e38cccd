"""Command-line front end.

Subcommands: verify, dispersion, optimize-interior, close-boundary,
simulate, tables, rerun.  Numeric CSV output carries 12 significant
digits and identical invocations produce identical bytes.  Every command
that writes files also writes a run manifest (JSON, named after the first
output file) recording the command line, the resolved configuration,
content hashes of the operator data consumed, the tool version, and the
hashes of the files written; `sbpkit rerun MANIFEST` replays the stored
command line and exits nonzero unless the outputs hash-match the record.
"""

import argparse
import hashlib
import json
import math
import os
import sys
from importlib import resources

import numpy as np

from . import __version__
from . import dispersion as dsp
from . import wavesim as ws
from .closure import admm_solve, build_problem
from .operators import (CentralStencil, get_interior, get_operator,
                        list_builtin_interiors, list_builtin_operators,
                        load_operator, operator_to_dict, verify_accuracy,
                        verify_sbp, verify_upwind)
from .optimizer import FamilySpec, optimize

DEFAULT_DELTAS = (0.05, 0.025, 0.015)


def _fail(message: str, code: int = 2) -> None:
    print(f"error: {message}", file=sys.stderr)
    sys.exit(code)


# ------------------------------------------------------------------ manifest

def _sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _sha256_file(path) -> str:
    with open(path, "rb") as f:
        return _sha256_bytes(f.read())


def _builtin_hash(name: str) -> str:
    """Content hash of a builtin: packaged file, or the exact table."""
    if name in list_builtin_operators():
        ref = resources.files("sbpkit") / "_data" / f"{name}.json"
        return _sha256_bytes(ref.read_bytes())
    st = get_interior(name)
    if isinstance(st, CentralStencil):
        canon = f"central gammas={[str(g) for g in st.gammas]}"
    else:
        canon = (f"upwind r1={st.r1} r2={st.r2} "
                 f"coeffs={[str(c) for c in st.coeffs]}")
    return _sha256_bytes(canon.encode())


def _operator_sources(text: str) -> dict:
    if _looks_like_file(text):
        return {text: _sha256_file(text)}
    return {f"builtin:{text}": _builtin_hash(text)}


def _write_manifest(command: str, argv, args, outputs, sources: dict) -> str:
    config = {k: v for k, v in vars(args).items() if k != "func"}
    manifest = {
        "command": command,
        "argv": list(argv),
        "config": config,
        "operator_hashes": sources,
        "version": __version__,
        "outputs": {path: _sha256_file(path) for path in outputs},
    }
    path = outputs[0] + ".manifest.json"
    with open(path, "w") as f:
        json.dump(manifest, f, indent=1, sort_keys=True)
        f.write("\n")
    print(f"manifest: {path}")
    return path


# ----------------------------------------------------------- input resolution

def _looks_like_file(text: str) -> bool:
    return os.sep in text or text.endswith(".json") or os.path.isfile(text)


def _resolve_full_operator(text: str):
    if _looks_like_file(text):
        if not os.path.isfile(text):
            _fail(f"operator file not found: {text}")
        return load_operator(text)
    try:
        return get_operator(text)
    except KeyError as exc:
        _fail(str(exc))


def _resolve_interior(text: str):
    """(stencil, label) from a builtin name or an operator file."""
    if _looks_like_file(text):
        if not os.path.isfile(text):
            _fail(f"operator file not found: {text}")
        op = load_operator(text)
        return op.interior, op.name
    try:
        return get_interior(text), text
    except KeyError as exc:
        _fail(str(exc))


def _curve_for(stencil, label: str):
    if isinstance(stencil, CentralStencil):
        return dsp.dispersion_central(stencil, label=label)
    return dsp.dispersion_upwind(stencil, label=label)


# ------------------------------------------------------------------- verify

def cmd_verify(args, argv) -> None:
    op = _resolve_full_operator(args.operator)
    n = args.n if args.n is not None else max(op.minimum_n, 2 * op.closure.s + 2)
    if n < op.minimum_n:
        _fail(f"n = {n} below the operator's minimum grid size "
              f"{op.minimum_n}")
    sbp = verify_sbp(op, n)
    lam = verify_upwind(op, n)
    acc = verify_accuracy(op, n)
    hmin = min(float(v) for v in op.closure.h)
    order = op.interior.declared_order
    declared = (order, order // 2)
    checks = [
        ("sbp-residual", sbp <= 5e-6, f"{sbp:.6g}"),
        ("upwind-lambda-max", lam <= 1e-4, f"{lam:.6g}"),
        ("accuracy-orders", tuple(acc) == declared,
         f"{tuple(acc)} declared {declared}"),
        ("h-positivity", hmin > 0.0, f"min h = {hmin:.6g}"),
    ]
    print(f"operator {op.name}: order {order}, s = {op.closure.s}, n = {n}")
    failed = None
    for name, ok, detail in checks:
        print(f"  {name:20s} {detail:32s} {'pass' if ok else 'FAIL'}")
        if not ok and failed is None:
            failed = name
    if failed is not None:
        print(f"FAILED: {failed}")
        sys.exit(1)
    print("all checks passed")


# --------------------------------------------------------------- dispersion

def cmd_dispersion(args, argv) -> None:
    stencil, label = _resolve_interior(args.operator)
    curve = _curve_for(stencil, label)
    rep = dsp.error_report(curve)
    print(f"operator {label}")
    print(f"  eps_inf          {rep.eps_inf:.6g}  at k = {rep.k_at_eps_inf:.6g}")
    print(f"  l2 relative      {100 * rep.l2_rel:.6g} %")
    print(f"  l2 of pointwise  {100 * rep.l2_of_relative:.6g} %")
    print(f"  spurious mode    {'Y' if rep.swm else 'N'}")
    if args.table:
        deltas = args.delta or list(DEFAULT_DELTAS)
        for d in deltas:
            hstar = dsp.refinement_factor(curve, delta=d)
            print(f"  h*(delta={d:g})    {hstar:.6g}")
    outputs = []
    if args.csv:
        with open(args.csv, "w", newline="") as f:
            dsp.write_dispersion_csv(rep, curve, f)
        outputs.append(args.csv)
        print(f"wrote {args.csv}")
    if outputs:
        _write_manifest("dispersion", argv, args, outputs,
                        _operator_sources(args.operator))


# -------------------------------------------------------- optimize-interior

def _stencil_doc(stencil, extra: dict) -> dict:
    doc = {
        "offsets": list(stencil.offsets),
        "coeffs": [str(c) for c in stencil.coeffs],
        "declared_order": stencil.declared_order,
        "family": stencil.family,
    }
    doc.update(extra)
    return doc


def cmd_optimize_interior(args, argv) -> None:
    if args.a is None or args.b is None:
        _fail("optimize-interior requires --a and --b")
    try:
        spec = FamilySpec(args.a, args.b, weight=args.weight)
        res = optimize(spec)
    except ValueError as exc:
        _fail(str(exc))
    print(f"family ({args.a}, {args.b}), weight {args.weight}")
    print(f"  basis orders    {res.orders}")
    print(f"  gamma           {np.array2string(res.gamma, precision=6)}")
    print(f"  objective       {res.objective:.6g}")
    print(f"  eps_inf         {res.eps_inf:.6g}")
    print(f"  rationalized    {res.rationalized}")
    if res.relaxation_fallback:
        print("  relaxation seed fell back to least squares")
    outputs = []
    if args.json:
        doc = _stencil_doc(res.stencil, {
            "origin": {
                "command": "optimize-interior",
                "family": [args.a, args.b],
                "weight": args.weight,
                "gamma": [repr(float(g)) for g in res.gamma],
                "objective": repr(res.objective),
                "eps_inf": repr(res.eps_inf),
            }})
        with open(args.json, "w") as f:
            json.dump(doc, f, indent=1)
            f.write("\n")
        outputs.append(args.json)
        print(f"wrote {args.json}")
    if args.csv:
        rep = dsp.error_report(_curve_for(res.stencil,
                                          f"family({args.a},{args.b})"))
        curve = _curve_for(res.stencil, f"family({args.a},{args.b})")
        with open(args.csv, "w", newline="") as f:
            dsp.write_dispersion_csv(rep, curve, f)
        outputs.append(args.csv)
        print(f"wrote {args.csv}")
    if outputs:
        sources = {f"builtin:up{k}": _builtin_hash(f"up{k}")
                   for k in range(args.a, args.b + 1)}
        _write_manifest("optimize-interior", argv, args, outputs, sources)


# ----------------------------------------------------------- close-boundary

# Boundary block sizes of the shipped closures, reused as defaults.
_DEFAULT_S = {"drp4": 4, "drp5": 6, "drp6": 8, "drp7": 8,
              "up6": 8, "central6": 8}


def cmd_close_boundary(args, argv) -> None:
    stencil, label = _resolve_interior(args.operator)
    interior = stencil.as_interior() if isinstance(stencil, CentralStencil) \
        else stencil
    s = args.s if args.s is not None else _DEFAULT_S.get(label)
    if s is None:
        _fail(f"no default block size for {label!r}; pass --s")
    try:
        problem = build_problem(
            interior, s, interior.declared_order // 2,
            eps1=args.eps1, eps2=args.eps2, lam_c=args.ridge,
            t=args.t, tol=args.tol, max_iter=args.max_iter)
    except ValueError as exc:
        _fail(str(exc))
    res = admm_solve(problem)
    print(f"closure for {label}: s = {s}, boundary degree "
          f"{problem.boundary_order}")
    print(f"  converged       {res.converged}")
    print(f"  iterations      {res.iterations}")
    print(f"  residual        {res.residual:.6g}")
    print(f"  monotone        {res.monotone}")
    if not res.converged:
        print("FAILED: solver did not reach tolerance")
        sys.exit(1)
    name = f"{label}-closed"
    op = res.as_operator(name)
    n_chk = max(op.minimum_n, 2 * s + 2)
    sbp = verify_sbp(op, n_chk)
    lam = verify_upwind(op, n_chk)
    acc = verify_accuracy(op, n_chk)
    print(f"  sbp residual    {sbp:.6g}")
    print(f"  lambda_max(S)   {lam:.6g}")
    print(f"  accuracy        {tuple(acc)}")
    print(f"  h row           {np.array2string(np.asarray(op.closure.h, dtype=float), precision=6)}")
    if args.json:
        with open(args.json, "w") as f:
            json.dump(operator_to_dict(op), f, indent=1)
            f.write("\n")
        print(f"wrote {args.json}")
        _write_manifest("close-boundary", argv, args, [args.json],
                        _operator_sources(args.operator))


# ----------------------------------------------------------------- simulate

_IC_DEFAULTS = {
    "wave-packet": {"width": 0.5, "points_per_wavelength": 3.0},
    "pi-packet": {"width": 0.5},
    "gaussian": {"width": 1.2},
    "zero": {},
}


def _reference_for(config: ws.SimConfig):
    p = dict(config.ic_params or {})
    grid = config.grid
    if config.ic_kind == "gaussian":
        profile = ws.gaussian_profile(p.get("center", 4.0),
                                      p.get("width", 1.0))
    elif config.ic_kind == "pi-packet":
        profile = ws.pi_packet_profile(grid, p.get("center", 4.0),
                                       p.get("width", 0.5))
    elif config.ic_kind == "wave-packet":
        profile = ws.wave_packet_profile(
            grid, p.get("center", 4.0), p.get("width", 0.5),
            p.get("points_per_wavelength", 3.0))
    else:
        return None
    if config.bc == "periodic":
        return ws.periodic_transport_reference(profile, grid)
    return ws.reflecting_images_reference(profile, grid)


def cmd_simulate(args, argv) -> None:
    grid = ws.Grid1D(ws.EXPERIMENT_DOMAIN[0], ws.EXPERIMENT_DOMAIN[1],
                     args.grid)
    params = dict(_IC_DEFAULTS.get(args.ic, {}))
    try:
        config = ws.SimConfig(args.operator, grid, t_end=args.tend,
                              cfl=args.cfl, bc=args.bc, ic_kind=args.ic,
                              ic_params=params)
        result = ws.simulate(config, reference=_reference_for(config),
                             sample_every=args.sample_every)
    except (ValueError, KeyError) as exc:
        _fail(str(exc))
    e0, e1 = result.energy[0], result.energy[-1]
    print(f"{args.operator} on n = {grid.n}, bc = {args.bc}, "
          f"ic = {args.ic}, t_end = {args.tend:g}")
    print(f"  steps           {result.steps}  (dt = {result.dt:.6g})")
    print(f"  energy ratio    {e1 / e0:.12g}")
    print(f"  max step growth {result.energy_growth_max:.6g}")
    if result.l1_rel is not None:
        print(f"  final l1 error  {result.l1_rel[-1]:.6g}")
    outputs = []
    if args.csv:
        ws.write_series_csv(args.csv, result.times, result.energy,
                            result.l1_rel)
        outputs.append(args.csv)
        print(f"wrote {args.csv}")
        if args.snapshot:
            stem, ext = os.path.splitext(args.csv)
            redo = ws.simulate(config, snapshot_times=args.snapshot)
            for t_snap, state in redo.snapshots:
                path = f"{stem}-snap{t_snap:g}{ext or '.csv'}"
                ws.write_snapshot_csv(path, grid, state)
                outputs.append(path)
                print(f"wrote {path}")
    elif args.snapshot:
        _fail("--snapshot requires --csv to derive output names")
    if outputs:
        _write_manifest("simulate", argv, args, outputs,
                        _operator_sources(args.operator))


# ------------------------------------------------------------------- tables

def cmd_tables(args, argv) -> None:
    deltas = args.delta or list(DEFAULT_DELTAS)
    phase_ks = [math.pi / 4, math.pi / 2, 3 * math.pi / 4, math.pi]
    rows = []
    for name in list_builtin_interiors():
        stencil = get_interior(name)
        curve = _curve_for(stencil, name)
        rep = dsp.error_report(curve)
        vp = [float(curve.omega_at(np.array([k]))[0] / k) for k in phase_ks]
        hs = [dsp.refinement_factor(curve, delta=d) for d in deltas]
        order = (stencil.declared_order if not isinstance(stencil, CentralStencil)
                 else stencil.declared_order)
        family = ("central" if isinstance(stencil, CentralStencil)
                  else stencil.family)
        rows.append((name, family, order, rep, vp, hs))

    prefix = args.csv or "tables"
    l2_path = f"{prefix}_l2.csv"
    phase_path = f"{prefix}_phase.csv"
    hstar_path = f"{prefix}_hstar.csv"

    with open(l2_path, "w", newline="") as f:
        f.write("name,family,order,eps_inf,l2_rel_pct,l2_of_rel_pct,swm\n")
        for name, family, order, rep, _, _ in rows:
            f.write(f"{name},{family},{order},{rep.eps_inf:.12g},"
                    f"{100 * rep.l2_rel:.12g},{100 * rep.l2_of_relative:.12g},"
                    f"{'Y' if rep.swm else 'N'}\n")
    with open(phase_path, "w", newline="") as f:
        f.write("name," + ",".join(f"vp_at_{k:.6g}" for k in phase_ks) + "\n")
        for name, _, _, _, vp, _ in rows:
            f.write(name + "," + ",".join(f"{v:.12g}" for v in vp) + "\n")
    with open(hstar_path, "w", newline="") as f:
        f.write("name,swm," + ",".join(f"hstar_delta_{d:g}" for d in deltas)
                + "\n")
        for name, _, _, rep, _, hs in rows:
            f.write(f"{name},{'Y' if rep.swm else 'N'},"
                    + ",".join(f"{v:.12g}" for v in hs) + "\n")

    print(f"{'name':10s} {'order':5s} {'eps_inf':>10s} {'l2%':>8s} "
          f"{'l2rel%':>8s} {'swm':>4s} " +
          " ".join(f"{'h*@' + format(d, 'g'):>8s}" for d in deltas))
    for name, family, order, rep, vp, hs in rows:
        print(f"{name:10s} {order:<5d} {rep.eps_inf:10.4g} "
              f"{100 * rep.l2_rel:8.3f} {100 * rep.l2_of_relative:8.3f} "
              f"{'Y' if rep.swm else 'N':>4s} " +
              " ".join(f"{v:8.3f}" for v in hs))
    for path in (l2_path, phase_path, hstar_path):
        print(f"wrote {path}")
    sources = {f"builtin:{name}": _builtin_hash(name)
               for name in list_builtin_interiors()}
    _write_manifest("tables", argv, args, [l2_path, phase_path, hstar_path],
                    sources)


# -------------------------------------------------------------------- rerun

def cmd_rerun(args, argv) -> None:
    try:
        with open(args.manifest) as f:
            manifest = json.load(f)
    except OSError as exc:
        _fail(str(exc))
    stored = manifest.get("argv")
    recorded = manifest.get("outputs", {})
    if not stored or not recorded:
        _fail(f"{args.manifest} is not a usable run manifest")
    print(f"replaying: sbpkit {' '.join(stored)}")
    try:
        main(stored)
    except SystemExit as exc:
        if exc.code not in (None, 0):
            _fail(f"replayed command exited with {exc.code}", code=1)
    mismatched = []
    for path, digest in sorted(recorded.items()):
        now = _sha256_file(path) if os.path.isfile(path) else "missing"
        ok = now == digest
        print(f"  {path}: {'identical' if ok else 'DIFFERS'}")
        if not ok:
            mismatched.append(path)
    if mismatched:
        print(f"FAILED: {len(mismatched)} output(s) changed")
        sys.exit(1)
    print("all outputs byte-identical")


# --------------------------------------------------------------------- main

def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="sbpkit",
        description="dual-pairing SBP operator toolkit")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("verify", help="validate an operator's algebraic "
                       "identities and accuracy orders")
    q.add_argument("--operator", required=True, metavar="FILE|NAME")
    q.add_argument("--n", type=int, default=None,
                   help="grid size (default: smallest valid)")
    q.set_defaults(func=cmd_verify)

    q = sub.add_parser("dispersion", help="dispersion curve, error report, "
                       "refinement factors")
    q.add_argument("--operator", required=True, metavar="FILE|NAME")
    q.add_argument("--csv", metavar="PATH", help="write the sampled curve")
    q.add_argument("--table", action="store_true",
                   help="print h* refinement rows")
    q.add_argument("--delta", type=float, action="append",
                   help="h* tolerance (repeatable; default 0.05 0.025 0.015)")
    q.set_defaults(func=cmd_dispersion)

    q = sub.add_parser("optimize-interior", help="dispersion-optimal convex "
                       "combination of upwind interiors")
    q.add_argument("--a", type=int, required=True,
                   help="lowest family order")
    q.add_argument("--b", type=int, required=True,
                   help="highest family order")
    q.add_argument("--weight", default="uniform", metavar="SPEC",
                   help="uniform | expquad:C | indicator:K")
    q.add_argument("--json", metavar="PATH", help="write the stencil")
    q.add_argument("--csv", metavar="PATH",
                   help="write the result's dispersion curve")
    q.set_defaults(func=cmd_optimize_interior)

    q = sub.add_parser("close-boundary", help="solve an energy-stable "
                       "boundary closure for an interior stencil")
    q.add_argument("--operator", required=True, metavar="FILE|NAME",
                   help="interior stencil (builtin name or operator file)")
    q.add_argument("--s", type=int, default=None,
                   help="boundary block size (default: shipped value)")
    q.add_argument("--eps1", type=float, default=0.0,
                   help="eigenvalue slack of the dissipation cone")
    q.add_argument("--eps2", type=float, default=0.25,
                   help="lower bound on boundary quadrature weights")
    q.add_argument("--ridge", type=float, default=1e-6,
                   help="ridge coefficient of the truncation-error cost")
    q.add_argument("--t", type=float, default=1.0,
                   help="splitting penalty parameter")
    q.add_argument("--tol", type=float, default=1e-9,
                   help="convergence tolerance")
    q.add_argument("--max-iter", type=int, default=5000)
    q.add_argument("--json", metavar="PATH", help="write the closed operator")
    q.set_defaults(func=cmd_close_boundary)

    q = sub.add_parser("simulate", help="run the 1-D wave system")
    q.add_argument("--operator", default="drp6", metavar="FILE|NAME")
    q.add_argument("--grid", type=int, default=ws.EXPERIMENT_N,
                   help="number of grid points on [0, 8]")
    q.add_argument("--bc", choices=("reflecting", "periodic"),
                   default="reflecting")
    q.add_argument("--cfl", type=float, default=ws.EXPERIMENT_CFL)
    q.add_argument("--tend", type=float, default=16.0,
                   help="end time (default: one reflecting round trip)")
    q.add_argument("--ic", choices=tuple(_IC_DEFAULTS),
                   default="wave-packet")
    q.add_argument("--sample-every", type=int, default=8,
                   help="record the series every this many steps")
    q.add_argument("--csv", metavar="PATH",
                   help="write the (t, l1_rel, energy) series")
    q.add_argument("--snapshot", type=float, action="append",
                   help="also write an (x, v, sigma) snapshot at this time "
                   "(repeatable; requires --csv)")
    q.set_defaults(func=cmd_simulate)

    q = sub.add_parser("tables", help="regenerate dispersion summary tables "
                       "for all builtin interiors")
    q.add_argument("--csv", metavar="PREFIX", default="tables",
                   help="output prefix (default 'tables')")
    q.add_argument("--delta", type=float, action="append",
                   help="h* tolerance (repeatable; default 0.05 0.025 0.015)")
    q.set_defaults(func=cmd_tables)

    q = sub.add_parser("rerun", help="replay a run manifest and verify "
                       "byte-identical outputs")
    q.add_argument("manifest", metavar="MANIFEST")
    q.set_defaults(func=cmd_rerun)
    return p


def main(argv=None) -> None:
    if argv is None:
        argv = sys.argv[1:]
    parser = _build_parser()
    args = parser.parse_args(argv)
    args.func(args, list(argv))


if __name__ == "__main__":
    main()
