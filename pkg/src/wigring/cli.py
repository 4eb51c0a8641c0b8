"""Command-line interface.

Subcommands: wigner, moyal, compare, evolve, deltaw, airy-check, sweep,
report.  Field dumps are '#'-headed text; report-path commands also render
figures next to the delimited output (disable with --no-figures).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .chords import InteractionSpec
from .fock import DiagonalCase, FockPair, moyal_closed, wigner_closed
from .grids import PhaseSpaceField, PolarGrid, write_field
from .propagate import default_x1_grid, delta_w1
from .quadrature import airy_reference, toy_integral
from .semiclassic import caustic_layers, caustic_radii, semi_moyal, semi_wigner
from .sweep import SweepConfig, convergence_report, emit, load_records, run_sweep
from . import plots


def _ensure_outdir(path):
    os.makedirs(path, exist_ok=True)
    return path


def _ring_grid(pair, nr=160, ntheta=None, pad=1.1):
    l = pair.m - pair.n
    nth = ntheta if ntheta is not None else max(8 * max(l, 1), 64)
    _, rhi = caustic_radii(pair)
    return PolarGrid.build(1e-6, pad * rhi, nr, nth, min_harmonic=l)


def _field(grid, values, **meta):
    return PhaseSpaceField(grid=grid, values=values, metadata=meta)


def cmd_wigner(args):
    out = _ensure_outdir(args.outdir)
    case = DiagonalCase(args.n, args.hbar)
    grid = _ring_grid(case, nr=args.nr, ntheta=args.ntheta)
    qq, pp = grid.cart_mesh
    written = []
    if args.channel in ("exact", "both"):
        vals = wigner_closed(args.n, qq, pp, args.hbar)
        fld = _field(grid, vals, hbar=args.hbar, n=args.n, channel="exact", time=0.0)
        path = os.path.join(out, f"wigner_exact_n{args.n}.txt")
        write_field(fld, path)
        written.append(path)
        if args.figures:
            written.append(plots.save_polar_field(
                fld, os.path.join(out, f"wigner_exact_n{args.n}.png"),
                title=f"W_{args.n} exact"))
    if args.channel in ("semiclassical", "both"):
        vals = semi_wigner(case, (qq, pp), clamp=args.clamp)
        fld = _field(grid, vals, hbar=args.hbar, n=args.n, channel="semiclassical", time=0.0)
        path = os.path.join(out, f"wigner_semi_n{args.n}.txt")
        write_field(fld, path)
        written.append(path)
        if args.figures:
            written.append(plots.save_polar_field(
                fld, os.path.join(out, f"wigner_semi_n{args.n}.png"),
                title=f"W_{args.n} semiclassical"))
    for p in written:
        print(p)


def cmd_moyal(args):
    out = _ensure_outdir(args.outdir)
    pair = FockPair(args.m, args.n, +1, args.hbar)
    grid = _ring_grid(pair, nr=args.nr, ntheta=args.ntheta)
    qq, pp = grid.cart_mesh
    written = []
    if args.channel in ("exact", "both"):
        vals = moyal_closed(args.m, args.n, qq, pp, args.hbar)
        fld = _field(grid, vals, hbar=args.hbar, m=args.m, n=args.n,
                     channel="exact", time=0.0)
        path = os.path.join(out, f"moyal_exact_{args.m}_{args.n}.txt")
        write_field(fld, path)
        written.append(path)
        if args.figures:
            written.append(plots.save_polar_field(
                fld, os.path.join(out, f"moyal_exact_{args.m}_{args.n}.png"),
                title=f"Re M_{args.m}^{args.n} exact"))
    if args.channel in ("semiclassical", "both"):
        vals = semi_moyal(pair, (qq, pp), clamp=args.clamp)
        fld = _field(grid, vals, hbar=args.hbar, m=args.m, n=args.n,
                     channel="semiclassical", time=0.0)
        path = os.path.join(out, f"moyal_semi_{args.m}_{args.n}.txt")
        write_field(fld, path)
        written.append(path)
        if args.figures:
            written.append(plots.save_polar_field(
                fld, os.path.join(out, f"moyal_semi_{args.m}_{args.n}.png"),
                title=f"Re M~_{args.m}^{args.n}"))
    for p in written:
        print(p)


def cmd_compare(args):
    out = _ensure_outdir(args.outdir)
    pair = FockPair(args.m, args.n, +1, args.hbar)
    rlo, rhi = caustic_radii(pair)
    w_minus, w_plus = caustic_layers(pair)
    grid = _ring_grid(pair, nr=args.nr, ntheta=args.ntheta)
    qq, pp = grid.cart_mesh
    ex = moyal_closed(args.m, args.n, qq, pp, args.hbar)
    sc = semi_moyal(pair, (qq, pp), clamp=args.clamp)
    err = np.abs(sc - ex)
    fld = _field(grid, err, hbar=args.hbar, m=args.m, n=args.n,
                 channel="abs-error", time=0.0)
    path = os.path.join(out, f"compare_{args.m}_{args.n}.txt")
    write_field(fld, path)
    rr, _ = grid.mesh
    mid = (rr > rlo + 2 * w_minus) & (rr < rhi - 2 * w_plus)
    rel_l2 = float(np.linalg.norm(err[mid]) / np.linalg.norm(np.abs(ex[mid])))
    print(f"ring: ({rlo:.6f}, {rhi:.6f}), layers: ({w_minus:.4f}, {w_plus:.4f})")
    print(f"mid-ring relative L2 error: {rel_l2:.4e}")
    print(path)
    if args.figures:
        print(plots.save_polar_field(
            fld, os.path.join(out, f"compare_{args.m}_{args.n}.png"),
            title=f"|semi - exact| M_{args.m}^{args.n}"))
        i_theta = 0
        print(plots.save_radial_comparison(
            grid.r, np.real(ex[:, i_theta]), np.real(sc[:, i_theta]),
            os.path.join(out, f"compare_radial_{args.m}_{args.n}.png"),
            title=f"theta = 0 cut, (m, n) = ({args.m}, {args.n})"))


def _pair_from_args(args):
    return FockPair(args.m, args.n, args.sign, args.hbar)


def cmd_evolve(args):
    pair = _pair_from_args(args)
    interaction = InteractionSpec(args.kind, args.eps, t=args.t)
    grid = default_x1_grid(pair)
    for method in args.methods.split(","):
        rf = delta_w1(pair, interaction, method.strip(), grid, sign=args.sign,
                      t=args.t, mode=args.flow_mode)
        print(f"[{method}] status={rf.status} max|dW1|={rf.max_abs:.6e} "
              f"L1={rf.l1_norm:.6e}")


def cmd_deltaw(args):
    out = _ensure_outdir(args.outdir)
    pair = _pair_from_args(args)
    interaction = InteractionSpec(args.kind, args.eps, t=args.t)
    grid = default_x1_grid(pair)
    rf = delta_w1(pair, interaction, args.method, grid, sign=args.sign,
                  t=args.t, mode=args.flow_mode)
    fld = _field(grid, rf.values, hbar=args.hbar, m=args.m, n=args.n,
                 sign=args.sign, channel=f"deltaw-{args.method}",
                 kind=args.kind, eps=args.eps, time=args.t)
    path = os.path.join(out, f"deltaw_{args.method}.txt")
    write_field(fld, path)
    summary = {
        "method": args.method, "status": rf.status,
        "max_abs": rf.max_abs, "l1": rf.l1_norm,
        "diagnostics": {k: v for k, v in rf.diagnostics.items()
                        if isinstance(v, (int, float, str))},
    }
    print(json.dumps(summary, indent=2, sort_keys=True, default=repr))
    print(path)
    if args.figures:
        print(plots.save_polar_field(
            fld, os.path.join(out, f"deltaw_{args.method}.png"),
            title=f"delta W1 ({args.method}, {args.kind}, eps={args.eps:g})"))


def cmd_airy_check(args):
    out = _ensure_outdir(args.outdir)
    hbars = [float(tok) for tok in args.hbars.split(",")]
    rows = []
    for hbar in hbars:
        lam = args.lam
        if args.fixed_y is not None:
            lam = args.fixed_y * args.eps ** (1.0 / 3.0) * hbar ** (2.0 / 3.0)
        toy = toy_integral(lam, args.eps, hbar)
        ref = airy_reference(lam, args.eps, hbar)
        rows.append({
            "hbar": hbar, "lam": lam, "eps": args.eps,
            "toy": float(toy), "toy_estimate": toy.estimate,
            "airy": ref, "rel_err": abs(float(toy) - ref) / abs(ref),
        })
    header = "hbar lam toy toy_estimate airy rel_err"
    print(header)
    for row in rows:
        print(f'{row["hbar"]:g} {row["lam"]:.6g} {row["toy"]:.9e} '
              f'{row["toy_estimate"]:.2e} {row["airy"]:.9e} {row["rel_err"]:.4e}')
    csv_path = os.path.join(out, "airy_check.csv")
    with open(csv_path, "w") as fh:
        fh.write("hbar,lam,eps,toy,toy_estimate,airy,rel_err\n")
        for row in rows:
            fh.write(",".join(repr(row[k]) for k in
                              ("hbar", "lam", "eps", "toy", "toy_estimate",
                               "airy", "rel_err")) + "\n")
    print(csv_path)
    if args.figures:
        print(plots.save_airy_rows(rows, os.path.join(out, "airy_check.png")))


def cmd_sweep(args):
    data = {}
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
    for name in ("mode", "e_m", "e_n", "m", "n", "sign", "t", "seed", "outdir",
                 "flow_mode"):
        val = getattr(args, name, None)
        if val is not None:
            data[name] = val
    for name, cast in (("hbar_list", float), ("eps_list", float)):
        val = getattr(args, name, None)
        if val is not None:
            data[name] = [cast(tok) for tok in val.split(",")]
    for name in ("kinds", "methods"):
        val = getattr(args, name, None)
        if val is not None:
            data[name] = [tok.strip() for tok in val.split(",")]
    if "outdir" not in data or not data["outdir"]:
        raise SystemExit("sweep requires --outdir (or outdir in the config file)")
    config = SweepConfig.from_dict(data)
    _ensure_outdir(config.outdir)
    records = run_sweep(config, progress=lambda rec: print(
        f'{rec["key"]} -> {rec["status"]}', flush=True))
    print(emit(records, "csv", os.path.join(config.outdir, "sweep.csv")))
    print(emit(records, "json", os.path.join(config.outdir, "sweep.json")))


def cmd_report(args):
    out = _ensure_outdir(args.outdir)
    records = load_records(args.records)
    rows = convergence_report(records)
    cols = ["hbar", "kind", "method", "n_records", "converged_fraction",
            "max_estimate_ratio", "norm_monotone_in_eps"]
    print(" ".join(cols))
    for row in rows:
        print(" ".join(str(row[c]) for c in cols))
    csv_path = os.path.join(out, "report.csv")
    with open(csv_path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for row in rows:
            fh.write(",".join("" if row[c] is None else
                              (repr(row[c]) if isinstance(row[c], float) else str(row[c]))
                              for c in cols) + "\n")
    print(csv_path)
    if args.figures:
        print(plots.save_convergence(rows, os.path.join(out, "report_convergence.png")))
        print(plots.save_sweep_norms(records, os.path.join(out, "report_norms.png")))


def _add_pair_flags(sp, need_pair=True):
    sp.add_argument("--m", type=int, required=need_pair)
    sp.add_argument("--n", type=int, required=need_pair)
    sp.add_argument("--hbar", type=float, default=1.0)


def build_parser():
    ap = argparse.ArgumentParser(prog="wigring", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("wigner", help="dump exact/semiclassical single-state Wigner fields")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--hbar", type=float, default=1.0)
    sp.add_argument("--channel", choices=("exact", "semiclassical", "both"), default="both")
    sp.add_argument("--nr", type=int, default=160)
    sp.add_argument("--ntheta", type=int, default=None)
    sp.add_argument("--outdir", default="out")
    sp.add_argument("--no-figures", dest="figures", action="store_false")
    sp.add_argument("--no-clamp", dest="clamp", action="store_false",
                    help="raw caustic amplitudes (no boundary-layer clamping)")
    sp.set_defaults(func=cmd_wigner)

    sp = sub.add_parser("moyal", help="dump exact/semiclassical transition fields")
    _add_pair_flags(sp)
    sp.add_argument("--channel", choices=("exact", "semiclassical", "both"), default="both")
    sp.add_argument("--nr", type=int, default=160)
    sp.add_argument("--ntheta", type=int, default=None)
    sp.add_argument("--outdir", default="out")
    sp.add_argument("--no-figures", dest="figures", action="store_false")
    sp.add_argument("--no-clamp", dest="clamp", action="store_false",
                    help="raw caustic amplitudes (no boundary-layer clamping)")
    sp.set_defaults(func=cmd_moyal)

    sp = sub.add_parser("compare", help="semiclassical-vs-exact error map")
    _add_pair_flags(sp)
    sp.add_argument("--nr", type=int, default=200)
    sp.add_argument("--ntheta", type=int, default=None)
    sp.add_argument("--outdir", default="out")
    sp.add_argument("--no-figures", dest="figures", action="store_false")
    sp.add_argument("--no-clamp", dest="clamp", action="store_false",
                    help="raw caustic amplitudes (no boundary-layer clamping)")
    sp.set_defaults(func=cmd_compare)

    for name, fn in (("evolve", cmd_evolve), ("deltaw", cmd_deltaw)):
        sp = sub.add_parser(name, help=f"{name} at a single parameter point")
        _add_pair_flags(sp)
        sp.add_argument("--sign", type=int, choices=(1, -1), default=1)
        sp.add_argument("--kind", choices=("cubic", "quartic"), default="cubic")
        sp.add_argument("--eps", type=float, default=1e-2)
        sp.add_argument("--t", type=float, default=1.0)
        sp.add_argument("--flow-mode", dest="flow_mode",
                        choices=("perturbation", "full"), default="perturbation")
        if name == "evolve":
            sp.add_argument("--methods", default="exact,liouville,semiclassical")
        else:
            sp.add_argument("--method", default="semiclassical",
                            choices=("exact", "liouville", "semiclassical"))
            sp.add_argument("--outdir", default="out")
            sp.add_argument("--no-figures", dest="figures", action="store_false")
        sp.set_defaults(func=fn)

    sp = sub.add_parser("airy-check", help="toy shifted integral against the Airy reference")
    sp.add_argument("--lam", type=float, default=0.5)
    sp.add_argument("--eps", type=float, default=1.0)
    sp.add_argument("--hbars", default="0.05,0.02,0.01,0.005")
    sp.add_argument("--fixed-y", dest="fixed_y", type=float, default=None,
                    help="scan with lam = y eps^{1/3} hbar^{2/3} (the regime "
                         "where the finite-range integral tracks the Airy value)")
    sp.add_argument("--outdir", default="out")
    sp.add_argument("--no-figures", dest="figures", action="store_false")
    sp.set_defaults(func=cmd_airy_check)

    sp = sub.add_parser("sweep", help="run the (lambda, epsilon, hbar) scan")
    sp.add_argument("--config", default=None)
    sp.add_argument("--outdir", default=None)
    sp.add_argument("--mode", choices=("fixed_energies", "fixed_quanta"), default=None)
    sp.add_argument("--e-m", dest="e_m", type=float, default=None)
    sp.add_argument("--e-n", dest="e_n", type=float, default=None)
    sp.add_argument("--m", type=int, default=None)
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--sign", type=int, choices=(1, -1), default=None)
    sp.add_argument("--t", type=float, default=None)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--flow-mode", dest="flow_mode",
                    choices=("perturbation", "full"), default=None)
    sp.add_argument("--hbar-list", dest="hbar_list", default=None)
    sp.add_argument("--eps-list", dest="eps_list", default=None)
    sp.add_argument("--kinds", default=None)
    sp.add_argument("--methods", default=None)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("report", help="convergence summary of sweep records")
    sp.add_argument("--records", required=True)
    sp.add_argument("--outdir", default="out")
    sp.add_argument("--no-figures", dest="figures", action="store_false")
    sp.set_defaults(func=cmd_report)

    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    args.func(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
