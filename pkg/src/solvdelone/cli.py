"""Command-line front end.

Subcommands: build, verify-delone, densities, tile, folner, obstruct, madic.
Configuration is a single JSON file; rationals are written as "p/q" strings
so densities survive round-trips exactly.  Identical config + seed produce
byte-identical outputs (sorted rows, fixed 12-significant-digit floats, no
timestamps).  Some subcommand parameters (depth, output paths) can be
overridden by flags.  Exit status: 0 on success, 1 on invariant failure,
2 on usage / malformed configuration.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction
from typing import Optional

import numpy as np

from . import folner, obstruction, tiling
from .geometry import HRSpec
from .lattice import (
    BsBox,
    LatticeSpec,
    SolBox,
    bs_box_count,
    enumerate_bs,
    enumerate_sol_lattice,
    delone_constants,
)
from .madic import MadicRational, madic_dist, madic_valuation
from .tiling import DensityProfile


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _frac(text) -> Fraction:
    if isinstance(text, str):
        return Fraction(text)
    return Fraction(text)


class UsageError(Exception):
    pass


def load_config(path: Optional[str]) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as e:
        raise UsageError(f"config not found: {path}") from e
    except json.JSONDecodeError as e:
        raise UsageError(f"malformed config {path}: {e}") from e


def _profile(cfg: dict) -> DensityProfile:
    p = cfg.get("profile", {})
    return DensityProfile(
        _frac(p.get("d1", "1/3")), _frac(p.get("d2", "1/2")), int(p.get("n", 12))
    )


def _lattice(cfg: dict) -> LatticeSpec:
    A = cfg.get("lattice", {}).get("A", [[2, 1], [1, 1]])
    return LatticeSpec(A)


def _out_path(args, name: str) -> str:
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_densities(args, cfg) -> int:
    prof = _profile(cfg)
    geometry = cfg.get("geometry", "sol")
    depth = args.depth if args.depth is not None else int(cfg.get("tiling", {}).get("depth", 1))
    lines = []
    ok = True
    if geometry == "sol":
        N0 = int(cfg.get("tiling", {}).get("N0", 12))
        counts = tiling.sol_tile_counts(prof, N0, depth)
        lines.append(f"geometry sol N0 {N0} n {prof.n} depth {depth}")
    elif geometry == "bs":
        m = int(cfg.get("bs", {}).get("m", 2))
        N0 = int(cfg.get("bs", {}).get("N0", m**3))
        counts = tiling.bs_tile_counts(prof, N0, m, depth)
        lines.append(f"geometry bs m {m} N0 {N0} n {prof.n} depth {depth}")
    elif geometry == "hr":
        hr = cfg.get("hr", {})
        spec = HRSpec.from_even_integers(hr.get("even_integers", [2, 2]), hr.get("tstar", 1.0))
        counts = tiling.hr_tile_counts(prof, spec, depth)
        lines.append(f"geometry hr even_integers {spec.even_integers} depth {depth}")
    else:
        raise UsageError(f"unknown geometry {geometry}")
    ordered = ["Q0", "Q1", "Q2", "Q3", "Q4"]
    dens = prof.densities()
    for t in ordered:
        lines.append(f"{t} {counts[t]} (d = {dens[t]})")
    ident = tiling.verify_density_identities(counts, prof)
    ok &= ident
    lines.append(
        "identity |Q_j^m| = d_j |Q_0^m|: " + ("PASS" if ident else "FAIL")
        + f"  ({counts['Q0']}; {counts['Q1']},{counts['Q2']},{counts['Q3']},{counts['Q4']})"
    )
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.out:
        with open(_out_path(args, "densities.txt"), "w") as fh:
            fh.write(text)
    return 0 if ok else 1


def cmd_tile(args, cfg) -> int:
    prof = _profile(cfg)
    geometry = cfg.get("geometry", "sol")
    depth = args.depth if args.depth is not None else int(cfg.get("tiling", {}).get("depth", 1))
    lines = []
    if geometry == "sol":
        N0 = int(cfg.get("tiling", {}).get("N0", 12))
        target = cfg.get("tiling", {}).get("target", "Q1")
        leaves = tiling.sol_tile_tree(N0, depth, target)
        for leaf in leaves:
            lines.append(f"{depth} {leaf.path()} {leaf.tile_type} {prof.tile_size(leaf.tile_type)}")
    elif geometry == "bs":
        m = int(cfg.get("bs", {}).get("m", 2))
        N0 = int(cfg.get("bs", {}).get("N0", m**3))
        for addr in tiling.decompose_bs(N0, m):
            cnt = bs_box_count(addr.box, m)
            lines.append(f"1 ({addr.layer}:{addr.k}) - {cnt}")
    elif geometry == "hr":
        hr = cfg.get("hr", {})
        spec = HRSpec.from_even_integers(hr.get("even_integers", [2, 2]), hr.get("tstar", 1.0))
        T = hr.get("T", spec.tstar)
        for addr in tiling.decompose_hr(spec, T):
            path = "".join("u" if b else "l" for b in addr.upper)
            slots = ",".join(map(str, addr.slots))
            lines.append(f"1 ({path}:{slots}) {addr.color} -")
    else:
        raise UsageError(f"unknown geometry {geometry}")
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.out:
        with open(_out_path(args, "tiles.txt"), "w") as fh:
            fh.write(text)
    return 0


def _write_sol_points(path: str, pts) -> None:
    with open(path, "w") as fh:
        for (a, b, k), (x, y, t) in zip(pts.abk, pts.points):
            fh.write(f"{a} {b} {k} {_fmt(x)} {_fmt(y)} {_fmt(t)}\n")


def cmd_build(args, cfg) -> int:
    geometry = cfg.get("geometry", "sol")
    prof = _profile(cfg)
    if geometry == "sol":
        lat = _lattice(cfg)
        tl = cfg.get("tiling", {})
        depth = args.depth if args.depth is not None else int(tl.get("depth", 1))
        N0 = tl.get("N0")
        if N0 is None:
            N0 = tiling.min_feasible_n0(lat, prof.n)
        config = tiling.SolTilingConfig(
            lattice=lat,
            profile=prof,
            N0=int(N0),
            depth=depth,
            n_blocks=int(tl.get("n_blocks", 1)),
        )
        dset = tiling.build_delone(config, collar=float(tl.get("collar", 2 * lat.C)))
        if args.max_points and len(dset.points) > args.max_points:
            raise UsageError(f"{len(dset.points)} points exceed --max-points {args.max_points}")
        path = _out_path(args, "delone_points.txt")
        order = np.lexsort((dset.points[:, 1], dset.points[:, 0], dset.points[:, 2]))
        with open(path, "w") as fh:
            for i in order:
                x, y, t = dset.points[i]
                k = int(round(t / lat.loglam))
                ab = lat.eigenbasis @ np.array([x, y])
                fh.write(
                    f"{int(round(ab[0]))} {int(round(ab[1]))} {k} {_fmt(x)} {_fmt(y)} {_fmt(t)}\n"
                )
        print(f"N0 {config.N0} depth {depth} points {len(dset.points)}")
        print(f"discreteness {_fmt(dset.discreteness)} covering {_fmt(dset.covering_radius)}")
        print(f"max_snap_move {_fmt(float(dset.snap_moves.max()))} C {_fmt(lat.C)}")
        print(f"wrote {path}")
        return 0 if dset.discreteness > 0 and math.isfinite(dset.covering_radius) else 1
    if geometry == "bs":
        bs = cfg.get("bs", {})
        m = int(bs.get("m", 2))
        N0 = int(bs.get("N0", m**3))
        pts = enumerate_bs(BsBox.s_n(N0, m), m)
        path = _out_path(args, "bs_points.txt")
        with open(path, "w") as fh:
            for p in pts:
                fh.write(
                    f"{p.x.mantissa} {p.x.exponent} {p.y.mantissa} {p.y.exponent} {p.t}\n"
                )
        print(f"m {m} N0 {N0} points {len(pts)}")
        print(f"wrote {path}")
        return 0
    raise UsageError(f"build supports sol and bs geometries, not {geometry}")


def cmd_verify_delone(args, cfg) -> int:
    if not args.points:
        raise UsageError("verify-delone needs --points <file>")
    try:
        rows = []
        with open(args.points) as fh:
            for line in fh:
                parts = line.split()
                if len(parts) != 6:
                    raise UsageError(f"bad point row: {line.rstrip()}")
                rows.append((float(parts[3]), float(parts[4]), float(parts[5])))
    except FileNotFoundError as e:
        raise UsageError(str(e)) from e
    if len(rows) < 2:
        raise UsageError("point file has fewer than two points")
    pts = np.array(rows)
    lat = _lattice(cfg)
    region = SolBox(
        float(pts[:, 0].min()), float(pts[:, 0].max()) + 1e-9,
        float(pts[:, 1].min()), float(pts[:, 1].max()) + 1e-9,
        float(pts[:, 2].min()), float(pts[:, 2].max()) + 1e-9,
    )
    ambient = enumerate_sol_lattice(region, lat)
    disc, cover = delone_constants(pts, region, ambient.points)
    print(f"points {len(pts)}")
    print(f"discreteness {_fmt(disc)}")
    print(f"covering {_fmt(cover)}")
    ok = disc > 0 and math.isfinite(cover)
    print("verdict " + ("PASS" if ok else "FAIL"))
    return 0 if ok else 1


def cmd_folner(args, cfg) -> int:
    geometry = cfg.get("geometry", "sol")
    fl = cfg.get("folner", {})
    rows = ["geometry,m,N,r,s,u1,u2,volume,boundary,ratio,bound,pass"]
    ok = True
    if geometry == "sol":
        for N in fl.get("N_values", [16, 64, 256]):
            r = math.log(N)
            u = tuple(fl.get("u", (0.0, 0.0)))
            vol = folner.sol_box_volume(N, 1.0)
            bd = folner.sol_boundary_exact(r, u)
            ratio = folner.sol_boundary_ratio(r, u)
            bound = folner.sol_corollary_bound(r, u)
            good = ratio <= bound
            ok &= good
            rows.append(
                f"sol,,{N},{_fmt(N)},1,{_fmt(u[0])},{_fmt(u[1])},{_fmt(vol)},"
                f"{_fmt(bd)},{_fmt(ratio)},{_fmt(bound)},{good}"
            )
    elif geometry == "bs":
        m = int(cfg.get("bs", {}).get("m", 2))
        R = float(fl.get("R", 1.0))
        for N in fl.get("N_values", [m**3]):
            count = bs_box_count(BsBox.s_n(N, m), m)
            bb = folner.bs_boundary_bound(1.0, N, m, R)
            ratio = bb.total / count
            rows.append(
                f"bs,{m},{N},1,,,,{count},{_fmt(bb.total)},{_fmt(ratio)},{_fmt(bb.total)},True"
            )
    elif geometry == "hr":
        hr = cfg.get("hr", {})
        roots = hr.get("roots", [1.0, 2.0])
        r = float(fl.get("r", 1.0))
        u = list(fl.get("u", [0.0] * (len(roots) + 1)))
        vol = folner.hr_box_volume(roots, r, u)
        est = folner.hr_volume_monte_carlo(roots, r, u, int(fl.get("samples", 10**5)), seed=args.seed)
        good = abs(est - vol) / vol < 0.02
        ok &= good
        rows.append(
            f"hr,,,{_fmt(r)},,{_fmt(u[0])},{_fmt(u[1])},{_fmt(vol)},{_fmt(est)},"
            f"{_fmt(abs(est - vol) / vol)},0.02,{good}"
        )
    else:
        raise UsageError(f"unknown geometry {geometry}")
    text = "\n".join(rows) + "\n"
    sys.stdout.write(text)
    if args.out:
        with open(_out_path(args, "folner.csv"), "w") as fh:
            fh.write(text)
    return 0 if ok else 1


def cmd_obstruct(args, cfg) -> int:
    prof = _profile(cfg)
    ob = cfg.get("obstruction", {})
    L = float(ob.get("L", 2.0))
    N0 = int(cfg.get("tiling", {}).get("N0", 12))
    params = obstruction.derive_params(prof, N0, L)
    family = ob.get("family", ["identity", "affine", "alternating"])
    reports = []
    all_obstructed = True
    for name in family:
        if name == "identity":
            F = obstruction.CompanionMap(
                obstruction.PLMap.identity(), obstruction.PLMap.identity(), "identity"
            )
        elif name == "affine":
            slope = float(ob.get("affine_slope", 1.5))
            F = obstruction.CompanionMap(
                obstruction.PLMap.affine(slope), obstruction.PLMap.identity(), f"affine x{slope}"
            )
        elif name == "alternating":
            F = obstruction.CompanionMap(
                obstruction.PLMap.alternating(L, float(N0), float(N0) ** 4),
                obstruction.PLMap.identity(),
                f"alternating 1/{L}|{L} at scale {N0}",
            )
        else:
            raise UsageError(f"unknown family member {name}")
        rep = obstruction.certify_obstruction(F, prof, params)
        reports.append(rep)
        all_obstructed &= rep.obstructed
    text = []
    text.append(
        f"params: L={L} delta={_fmt(params.delta)} eps0={_fmt(params.eps0)} "
        f"lambda0={_fmt(params.lam0)} log_M0={_fmt(params.log_M0)}"
    )
    for rep in reports:
        text.append("")
        text.append(rep.render())
    text.append("")
    text.append("all maps obstructed: " + ("PASS" if all_obstructed else "FAIL"))
    body = "\n".join(text) + "\n"
    sys.stdout.write(body)
    if args.out:
        with open(_out_path(args, "obstruct.txt"), "w") as fh:
            fh.write(body)
    return 0 if all_obstructed else 1


def cmd_madic(args, cfg) -> int:
    m = args.m
    if args.op == "val":
        q = MadicRational.from_fraction(Fraction(args.values[0]), m)
        v = madic_valuation(q)
        print(f"{q} valuation {'inf' if math.isinf(v) else int(v)}")
    elif args.op == "dist":
        y1 = MadicRational.from_fraction(Fraction(args.values[0]), m)
        y2 = MadicRational.from_fraction(Fraction(args.values[1]), m)
        print(f"d({y1}, {y2}) = {_fmt(madic_dist(y1, y2))}")
    elif args.op == "canon":
        q = MadicRational.from_fraction(Fraction(args.values[0]), m)
        print(str(q))
    else:
        raise UsageError(f"unknown madic op {args.op}")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="solvdelone", description=__doc__)
    ap.add_argument("--config", default=None, help="JSON configuration file")
    ap.add_argument("--out", default="out", help="output directory")
    ap.add_argument("--seed", type=int, default=0, help="RNG seed for sampled subcommands")
    ap.add_argument("--depth", type=int, default=None, help="override tiling depth")
    ap.add_argument("--max-points", type=int, default=None, help="refuse larger outputs")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("densities", help="exact rational tile-count audit")
    sub.add_parser("tile", help="dump the tile decomposition")
    sub.add_parser("build", help="emit a Delone point file")
    v = sub.add_parser("verify-delone", help="verify a point file")
    v.add_argument("--points", required=False, help="point file to verify")
    sub.add_parser("folner", help="boundary/volume ratio tables (CSV)")
    sub.add_parser("obstruct", help="batch obstruction certification")
    md = sub.add_parser("madic", help="m-adic arithmetic utility")
    md.add_argument("op", choices=["val", "dist", "canon"])
    md.add_argument("values", nargs="+", help="rational arguments, p/q form")
    md.add_argument("--m", type=int, default=2, help="base m >= 2")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = load_config(args.config)
        handler = {
            "densities": cmd_densities,
            "tile": cmd_tile,
            "build": cmd_build,
            "verify-delone": cmd_verify_delone,
            "folner": cmd_folner,
            "obstruct": cmd_obstruct,
            "madic": cmd_madic,
        }[args.command]
        return handler(args, cfg)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2
    except (tiling.ConfigError, ValueError) as e:
        print(f"invalid configuration: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
