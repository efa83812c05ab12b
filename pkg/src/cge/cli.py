"""Deterministic, file-based command line surface.

Subcommands: exponent, capacity-mc, grow, render, disconnect, shrinkage,
dimension, field, subordinator, validate. Every stochastic command requires
--seed and embeds (seed, parameters, version) in a JSON manifest next to
its outputs; reruns with the same flags produce byte-identical files. CSV
files carry a header row, LF endings, and 17-significant-digit floats; SVG
uses a fixed 1000x1000 viewBox. Outputs are written atomically (temp file
plus rename). The environment variable CGE_THREADS caps the worker count
used for replicated runs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from . import exponent as exp_mod
from . import growth as growth_mod
from . import field as field_mod
from . import subordinator as sub_mod
from . import capacity as cap_mod
from ._rng import stream
from .hypergeom import CapacityLaplaceParams, capacity_laplace

EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_SCHEMA = 3


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _atomic_write(path: Path, data):
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    mode = "wb" if isinstance(data, bytes) else "w"
    with open(tmp, mode, newline="" if mode == "w" else None) as fh:
        fh.write(data)
    os.replace(tmp, path)


def _write_csv(path: Path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, (int, float, np.floating))
                              else str(v) for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def _manifest(path: Path, command, args, extra=None):
    doc = {
        "command": command,
        "version": __version__,
        "parameters": {k: v for k, v in sorted(vars(args).items())
                       if k not in ("func",)},
    }
    if extra:
        doc.update(extra)
    _atomic_write(path, json.dumps(doc, indent=2, sort_keys=True,
                                   default=str) + "\n")


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("CGE_THREADS", "1")))
    except ValueError:
        return 1


def _parallel(fn, items):
    """Order-preserving map; threads only when CGE_THREADS > 1."""
    w = _workers()
    if w <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=w) as ex:
        return list(ex.map(fn, items))


# ----------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------

def cmd_exponent(args):
    if not (0.0 <= args.kappa < 4.0):
        print("exponent requires kappa in [0, 4): the Laplace exponent "
              "diverges for every positive lambda at kappa >= 4",
              file=sys.stderr)
        return EXIT_USAGE
    out = Path(args.out)
    table = exp_mod.ExponentTable.build(args.kappa)
    exp_mod.write_lambda_csv(out / "lambda_table.csv", table)
    curve = exp_mod.LegendreCurve.build(args.kappa)
    exp_mod.write_legendre_csv(out / "legendre.csv", curve)
    rows, amin = exp_mod.dimension_bound_curve(
        args.kappa, curve.alpha_grid[curve.alpha_grid >= 0.5 * curve.alpha_min])
    _write_csv(out / "dimension_bound.csv",
               ["kappa", "alpha", "bound", "region"],
               [(args.kappa, a, b, reg) for a, b, reg in rows])
    _manifest(out / "manifest.json", "exponent", args, {
        "lambda_prime_zero": table.lambda_prime_zero,
        "alpha_min": curve.alpha_min,
        "blowup_boundary": table.blowup_boundary,
    })
    return 0


def cmd_capacity_mc(args):
    out = Path(args.out)
    theta = args.theta
    ana = capacity_laplace(CapacityLaplaceParams(args.kappa, args.lam), theta)
    r = cap_mod.mc_capacity_laplace(args.kappa, args.lam, theta,
                                    args.replicas, args.seed,
                                    step_base=args.step_base)
    _write_csv(out / "capacity_mc.csv",
               ["kappa", "lambda", "theta", "estimate", "stderr",
                "analytic", "n", "step_base"],
               [(args.kappa, args.lam, theta, r.estimate, r.stderr,
                 ana, r.n, r.step_base)])
    _manifest(out / "manifest.json", "capacity-mc", args,
              {"moment_diverges": r.moment_diverges})
    return 0


def _events_csv(path, rec):
    rows = []
    for ev in rec.events:
        for tid, cap in sorted(ev.per_target_capacity.items()):
            rows.append((ev.component, ev.arrival_time, ev.endpoints.angle_a,
                         ev.endpoints.angle_b, tid, cap))
    _write_csv(path, ["component", "time", "angle_a", "angle_b",
                      "target", "capacity"], rows)


def _grow_record(args, retain):
    targets = [complex(s) for s in args.targets.split(";")] if args.targets \
        else [0j]
    return growth_mod.grow(
        targets, args.kappa, args.cutoff, args.t_max, args.seed,
        run_key=("cli",), retain_traces=retain, koebe=True,
        collect_events=True,
        max_events=args.max_arcs if args.max_arcs > 0 else None), targets


def cmd_grow(args):
    out = Path(args.out)
    try:
        rec, targets = _grow_record(args, retain=args.retain)
    except ValueError as exc:
        print(f"invalid targets: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _events_csv(out / "events.csv", rec)
    rows = []
    for j, traj in enumerate(rec.trajectories):
        for t, y in traj:
            rows.append((j, t, y))
    _write_csv(out / "trajectories.csv", ["target", "time", "neg_log_cr"], rows)
    if len(targets) > 1:
        pairs = [(i, j, rec.disconnection[i, j])
                 for i in range(len(targets)) for j in range(i + 1, len(targets))]
        _write_csv(out / "disconnection.csv", ["i", "j", "time"], pairs)
    _manifest(out / "manifest.json", "grow", args, {
        "n_events": rec.n_events,
        "resample_count": rec.resample_count,
        "koebe": [rec.koebe_failures, rec.koebe_checked],
        "capped_sde": rec.capped_sde,
    })
    return 0


def _svg(arcs, invert=False, colors=None, size=1000.0):
    body = []
    pts_all = []
    polys = []
    for arc in arcs:
        v = np.asarray(arc, complex)
        if invert:
            v = 1.0 / np.conj(v)
        polys.append(v)
        pts_all.append(v)
    if invert:
        allv = np.concatenate(pts_all)
        r = min(np.abs(allv).max(), 12.0)
    else:
        r = 1.0
    scale = size / (2.0 * r)

    def xy(v):
        return (size / 2 + scale * v.real, size / 2 - scale * v.imag)

    body.append(f'<circle cx="{size/2}" cy="{size/2}" r="{scale}" '
                'fill="none" stroke="#888" stroke-width="1"/>')
    palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
               "#17becf", "#8c564b"]
    for i, v in enumerate(polys):
        col = palette[(colors[i] if colors else i) % len(palette)]
        pts = " ".join(f"{x:.3f},{y:.3f}" for x, y in (xy(z) for z in v
                                                       if np.abs(z) <= 2 * r))
        body.append(f'<polyline points="{pts}" fill="none" stroke="{col}" '
                    'stroke-width="1.2"/>')
    return ('<svg xmlns="http://www.w3.org/2000/svg" '
            f'viewBox="0 0 {size:g} {size:g}">' + "".join(body) + "</svg>\n")


def cmd_render(args):
    out = Path(args.out)
    args.retain = True
    try:
        rec, targets = _grow_record(args, retain=True)
    except ValueError as exc:
        print(f"invalid targets: {exc}", file=sys.stderr)
        return EXIT_USAGE
    snaps = [int(s) for s in args.snapshots.split(",")] if args.snapshots \
        else [len(rec.physical_arcs)]
    arcs = rec.physical_arcs
    for k in snaps:
        k = min(k, len(arcs))
        svg = _svg([a for _, _, a in arcs[:k]],
                   invert=args.invert,
                   colors=[c for _, c, _ in arcs[:k]])
        _atomic_write(out / f"growth_{k:05d}.svg", svg)
    _manifest(out / "manifest.json", "render", args,
              {"n_arcs": len(arcs), "snapshots": snaps})
    return 0


def cmd_disconnect(args):
    out = Path(args.out)
    z, w = (complex(s) for s in (args.targets or "0;0.5").split(";")[:2])
    mean, se, cens = growth_mod.disconnection_mc(
        z, w, args.kappa, args.cutoff, args.replicas, args.seed, koebe=True)
    from .conformal import green_disk
    g = green_disk(z, w)
    lp = exp_mod.lambda_prime_truncated(args.kappa, args.cutoff)
    _write_csv(out / "disconnect.csv",
               ["z", "w", "mean_T", "stderr", "censored", "green",
                "green_over_lambda_prime_trunc"],
               [(z, w, mean, se, cens, g, g / lp)])
    _manifest(out / "manifest.json", "disconnect", args, {"censored": cens})
    return 0


def cmd_shrinkage(args):
    out = Path(args.out)
    t_grid = [float(s) for s in args.grid.split(",")] if args.grid else \
        [0.5, 1.0, 2.0, 4.0, 8.0]
    rep = growth_mod.shrinkage_stats(args.kappa, args.cutoff, t_grid,
                                     args.replicas, args.seed)
    rows = []
    for i, t in enumerate(rep["t_grid"]):
        for j, r in enumerate(rep["radii"]):
            rows.append((t, r, rep["p_not_contained"][i][j]))
    _write_csv(out / "shrinkage.csv", ["t", "radius", "p_not_contained"], rows)
    _manifest(out / "manifest.json", "shrinkage", args, {})
    return 0


def cmd_dimension(args):
    out = Path(args.out)
    args.retain = True
    rec, _ = _grow_record(args, retain=True)
    est, det = growth_mod.box_dimension(rec)
    _write_csv(out / "dimension.csv",
               ["kappa", "estimate", "target", "n_arcs", "unreliable"],
               [(args.kappa, est, 1.0 + args.kappa / 8.0,
                 len(rec.physical_arcs), int(det["unreliable"]))])
    _write_csv(out / "boxcounts.csv", ["scale", "count"],
               list(zip(det["scales"], det["counts"])))
    _manifest(out / "manifest.json", "dimension", args, det)
    return 0


def cmd_field(args):
    out = Path(args.out)
    n = args.grid_n
    tree_rec = growth_mod.grow(
        _field_targets(n), args.kappa, args.cutoff, args.t_max, args.seed,
        run_key=("cli-field",))
    tree = field_mod.build_tree(tree_rec)
    weights = field_mod.WeightSpec.point_mass(1.0, 1.0)
    h = field_mod.sample_field(tree, weights, args.t_max,
                               stream(args.seed, ("cli-field-w",)))
    pts = _field_targets(n)
    _write_csv(out / "field.csv", ["x", "y", "h"],
               [(z.real, z.imag, val) for z, val in zip(pts, h)])
    _atomic_write(out / "field.pgm", _pgm(pts, h, n))
    _manifest(out / "manifest.json", "field", args, {})
    return 0


def _field_targets(n, radius=0.9):
    xs = np.linspace(-radius, radius, n)
    pts = []
    for y in xs:
        for x in xs:
            z = complex(x, y)
            if abs(z) <= radius:
                pts.append(z)
    return pts


def _pgm(pts, h, n, radius=0.9):
    img = np.full((n, n), 0, dtype=np.uint8)
    xs = np.linspace(-radius, radius, n)
    lo, hi = float(np.min(h)), float(np.max(h))
    span = hi - lo if hi > lo else 1.0
    k = 0
    for i, y in enumerate(xs):
        for j, x in enumerate(xs):
            if abs(complex(x, y)) <= radius:
                img[n - 1 - i, j] = int(255 * (h[k] - lo) / span)
                k += 1
    header = f"P5\n{n} {n}\n255\n".encode()
    return header + img.tobytes()


def cmd_subordinator(args):
    out = Path(args.out)
    spec = sub_mod.LevySpec.exponential(2.0)
    rng = stream(args.seed, ("cli-sub",))
    rows = []
    for i in range(args.replicas):
        p = sub_mod.first_passage(spec, args.level, rng)
        rows.append((i, p.L, p.G, p.D, p.overshoot))
    _write_csv(out / "passages.csv", ["replica", "L", "G", "D", "overshoot"],
               rows)
    rep = sub_mod.overshoot_tail(spec, 1.0, [1.0, 5.0], [0.5, 1.0, 2.0],
                                 min(args.replicas, 5000),
                                 stream(args.seed, ("cli-sub-tail",)))
    rows = []
    for i, x in enumerate(rep["x_grid"]):
        for j, y in enumerate(rep["y_grid"]):
            rows.append((x, y, rep["tail"][i][j]))
    _write_csv(out / "overshoot.csv", ["x", "y", "p_tail"], rows)
    _manifest(out / "manifest.json", "subordinator", args,
              {"c_star": rep["c_star"]})
    return 0


def cmd_validate(args):
    from . import acceptance
    try:
        tol = acceptance.load_tolerances(args.tolerances)
    except acceptance.ToleranceSchemaError as exc:
        print(f"tolerance schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    results = acceptance.run_all(tol, seed=args.seed,
                                 include_long=args.long_suite)
    out = Path(args.out)
    _atomic_write(out / "validate.json",
                  json.dumps(results, indent=2, default=str) + "\n")
    _manifest(out / "manifest.json", "validate", args,
              {"passed": sum(r["passed"] for r in results),
               "total": len(results)})
    return 0 if all(r["passed"] for r in results) else EXIT_FAIL


# ----------------------------------------------------------------------

def _add_common(p, seed=True, kappa=True):
    if kappa:
        p.add_argument("--kappa", type=float, default=2.0)
    p.add_argument("--cutoff", type=float, default=0.3)
    p.add_argument("--t-max", dest="t_max", type=float, default=5.0)
    p.add_argument("--replicas", type=int, default=100)
    if seed:
        p.add_argument("--seed", type=int, required=True,
                       help="root seed (mandatory for stochastic commands)")
    p.add_argument("--out", required=True, help="output directory")


def build_parser():
    ap = argparse.ArgumentParser(
        prog="cge",
        description="growth process of disk excursions: simulation and analytics")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exponent", help="Laplace exponent and Legendre tables")
    p.add_argument("--kappa", type=float, default=2.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_exponent)

    p = sub.add_parser("capacity-mc", help="Monte Carlo capacity transform")
    p.add_argument("--kappa", type=float, default=2.0)
    p.add_argument("--lambda", dest="lam", type=float, default=0.25)
    p.add_argument("--theta", type=float, default=float(np.pi))
    p.add_argument("--step-base", dest="step_base", type=float, default=0.005)
    p.add_argument("--replicas", type=int, default=100000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_capacity_mc)

    p = sub.add_parser("grow", help="one growth run with CSV artifacts")
    _add_common(p)
    p.add_argument("--targets", default="0",
                   help="semicolon-separated complex targets")
    p.add_argument("--max-arcs", dest="max_arcs", type=int, default=0)
    p.add_argument("--retain", action="store_true")
    p.set_defaults(func=cmd_grow)

    p = sub.add_parser("render", help="SVG snapshots of a growth run")
    _add_common(p)
    p.add_argument("--targets", default="0")
    p.add_argument("--max-arcs", dest="max_arcs", type=int, default=500)
    p.add_argument("--snapshots", default="75,150,300,500")
    p.add_argument("--invert", action="store_true",
                   help="render through the circle inversion 1/conj(z)")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("disconnect", help="disconnection time statistics")
    _add_common(p)
    p.add_argument("--targets", default="0;0.5")
    p.set_defaults(func=cmd_disconnect)

    p = sub.add_parser("shrinkage", help="containment probabilities of D_t")
    _add_common(p)
    p.add_argument("--grid", default="",
                   help="comma-separated time grid")
    p.set_defaults(func=cmd_shrinkage)

    p = sub.add_parser("dimension", help="box-counting estimate")
    _add_common(p)
    p.add_argument("--targets", default="0")
    p.add_argument("--max-arcs", dest="max_arcs", type=int, default=500)
    p.set_defaults(func=cmd_dimension)

    p = sub.add_parser("field", help="fragmentation-tree field snapshot")
    _add_common(p)
    p.add_argument("--grid", dest="grid_n", type=int, default=16)
    p.set_defaults(func=cmd_field)

    p = sub.add_parser("subordinator", help="toy subordinator diagnostics")
    p.add_argument("--level", type=float, default=2.0)
    p.add_argument("--replicas", type=int, default=2000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_subordinator)

    p = sub.add_parser("validate", help="run the acceptance suite")
    p.add_argument("--seed", type=int, default=20260809)
    p.add_argument("--long", dest="long_suite", action="store_true",
                   help="include the long kappa=2 dimension estimate")
    p.add_argument("--tolerances", default=None,
                   help="override the packaged tolerance file")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_validate)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
