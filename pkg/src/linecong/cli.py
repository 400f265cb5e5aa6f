"""Command-line front end."""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from .bde import IntegrationParams, build_developable, find_folded_singularities, integrate_torsal_curve
from .congruence import eval_jet
from .contact import (
    classify_direction_map,
    contact_line_incidence,
    contact_line_self,
    contact_parallel_planes,
    contact_pencil,
    contact_with_plane_family,
    contact_with_point_family,
)
from .errors import CongruenceError
from .invariants import classify_point, focal_data
from .io import load_congruence
from .linespace import canonicalize_line, canonicalize_plane
from .surfaces import (
    Mesh,
    delta_value,
    sample_focal_surface,
    sample_middle_surface,
    sample_plane_focal_surface,
    trace_parabolic_curve,
)
from .verify import run_suite


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, str):
        return x
    return format(float(x) + 0.0, ".17g")


def _grid(text: str) -> tuple[int, int]:
    try:
        n, m = (int(s) for s in text.lower().split("x"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"grid must look like 32x32, got {text!r}") from exc
    if n < 2 or m < 2:
        raise argparse.ArgumentTypeError("grid needs at least 2 points per side")
    return n, m


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(x) for x in r])


def _grid_points(Z, grid):
    return Z.domain.grid(*grid)


# -- subcommands --------------------------------------------------------------------------

CLASSIFY_HEADER = ["u", "v", "class", "stall", "delta", "t1_re", "t1_im", "t2_re", "t2_im", "mid_x", "mid_y", "mid_z"]


def classify_row(Z, u, v) -> list:
    j = eval_jet(Z, u, v, 1)
    pc = classify_point(j)
    row = [u, v, pc.kind.value, pc.stall, float(pc.delta)]
    try:
        fd = focal_data(j)
        t1, t2 = fd.roots
        row += [t1.real, t1.imag, t2.real, t2.imag]
        mid = fd.middle_point if fd.middle_point is not None else [math.nan] * 3
        row += [float(x) for x in mid]
    except CongruenceError:
        row += [math.nan] * 7
    return row


def cmd_classify(args) -> int:
    Z = load_congruence(args.input)
    us, vs = _grid_points(Z, args.grid)
    rows = [classify_row(Z, u, v) for u in us for v in vs]
    _write_csv(args.out, CLASSIFY_HEADER, rows)
    return 0


def _merge(meshes: list[Mesh]) -> Mesh:
    verts, faces, params, off = [], [], [], 0
    for m in meshes:
        verts.append(m.vertices)
        faces += [tuple(i + off for i in f) for f in m.faces]
        params.append(m.params[:, :2])
        off += len(m.vertices)
    return Mesh(np.vstack(verts), faces, np.vstack(params))


def cmd_surface(args) -> int:
    Z = load_congruence(args.input)
    us, vs = _grid_points(Z, args.grid)
    if args.command == "focal":
        mesh = _merge(list(sample_focal_surface(Z, us, vs)))
    elif args.command == "plane-focal":
        mesh = _merge(list(sample_plane_focal_surface(Z, us, vs)))
    else:
        mesh = sample_middle_surface(Z, us, vs)
    Path(args.out).write_text(mesh.to_obj(), encoding="utf-8")
    return 0


def cmd_parabolic(args) -> int:
    Z = load_congruence(args.input)
    curves = trace_parabolic_curve(Z, resolution=args.resolution)
    rows = []
    for c in curves:
        for p, r in zip(c.points, c.residuals):
            rows.append([p[0], p[1], r, c.branch, "curve"])
    if args.folded:
        for f in find_folded_singularities(Z, curves):
            rows.append([f.point[0], f.point[1], abs(delta_value(Z, *f.point)[0]), f.branch,
                         "folded" if f.isolated else "folded_nonisolated"])
    _write_csv(args.out, ["u", "v", "delta_residual", "branch", "flag"], rows)
    return 0


def cmd_torsal(args) -> int:
    Z = load_congruence(args.input)
    curve = integrate_torsal_curve(Z, tuple(args.seed), args.branch, IntegrationParams(), reverse=args.reverse)
    rows = [[p[0], p[1], d[0], d[1]] for p, d in zip(curve.points, curve.directions)]
    _write_csv(args.out, ["u", "v", "du", "dv"], rows)
    print(f"{len(curve)} points, stopped: {curve.reason.value}", file=sys.stderr)
    if args.developable is not None:
        if not args.obj:
            raise ValueError("--developable needs --obj")
        mesh = build_developable(Z, curve, tuple(args.developable))
        Path(args.obj).write_text(mesh.to_obj(), encoding="utf-8")
    return 0


def _need(args, name):
    value = getattr(args, name)
    if value is None:
        raise ValueError(f"model {args.model} needs --{name}")
    return value


def cmd_contact(args) -> int:
    Z = load_congruence(args.input)
    z = tuple(args.at)
    m = args.model
    if m == "point":
        rep = contact_with_point_family(Z, z, _need(args, "point"))
    elif m == "plane":
        c = _need(args, "plane")
        rep = contact_with_plane_family(Z, z, canonicalize_plane(c[:3], c[3]))
    elif m == "direction":
        rep = classify_direction_map(Z, z)
    elif m == "parallel":
        rep = contact_parallel_planes(Z, z, _need(args, "alpha"))
    elif m == "pencil":
        c = _need(args, "plane")
        rep = contact_pencil(Z, z, _need(args, "point"), canonicalize_plane(c[:3], c[3]))
    else:
        if args.line is None:
            rep = contact_line_self(Z, z)
        else:
            rep = contact_line_incidence(Z, z, canonicalize_line(args.line[:3], args.line[3:]))
    text = json.dumps(rep.to_dict(), indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return 0


SUITES = {
    "all": None,
    "jet": ("jet",),
    "determinant": ("determinant",),
    "quadric": ("quadric",),
    "middle": ("middle_reality",),
    "rank": ("stall_rank",),
}


def cmd_verify(args) -> int:
    Z = load_congruence(args.input)
    res = run_suite(Z, args.samples, args.seed)
    keep = SUITES[args.suite]
    checks = {k: v for k, v in res.checks.items() if keep is None or k in keep}
    for k, v in res.residuals.items():
        print(f"{k}: {fmt(v)}")
    for k, v in checks.items():
        print(f"{k}: {'pass' if v else 'FAIL'}")
    return 0 if all(checks.values()) else 1


# -- parser ------------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="linecong", description="Affine differential geometry of line congruences")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--input", required=True, help="congruence file")
        sp.set_defaults(fn=fn)
        return sp

    sp = add("classify", cmd_classify, "pointwise classification on a grid (CSV)")
    sp.add_argument("--grid", type=_grid, default=(33, 33))
    sp.add_argument("--out", required=True)

    for name in ("focal", "middle", "plane-focal"):
        sp = add(name, cmd_surface, f"sample the {name} surface (OBJ)")
        sp.add_argument("--grid", type=_grid, default=(33, 33))
        sp.add_argument("--out", required=True)

    sp = add("parabolic", cmd_parabolic, "trace the parabolic curve (CSV)")
    sp.add_argument("--out", required=True)
    sp.add_argument("--folded", action="store_true", help="append folded singularities")
    sp.add_argument("--resolution", type=int, default=64)

    sp = add("torsal", cmd_torsal, "integrate a torsal curve (CSV)")
    sp.add_argument("--seed", type=float, nargs=2, required=True, metavar=("U", "V"))
    sp.add_argument("--branch", type=int, choices=(0, 1), default=0)
    sp.add_argument("--reverse", action="store_true")
    sp.add_argument("--out", required=True)
    sp.add_argument("--developable", type=float, nargs=2, metavar=("T0", "T1"))
    sp.add_argument("--obj")

    sp = add("contact", cmd_contact, "contact type with a model family (JSON)")
    sp.add_argument("--model", required=True, choices=("point", "plane", "direction", "parallel", "pencil", "line"))
    sp.add_argument("--at", type=float, nargs=2, required=True, metavar=("U", "V"))
    sp.add_argument("--point", type=float, nargs=3, metavar=("X", "Y", "Z"))
    sp.add_argument("--plane", type=float, nargs=4, metavar=("C1", "C2", "C3", "D"))
    sp.add_argument("--alpha", type=float, nargs=3, metavar=("A1", "A2", "A3"))
    sp.add_argument("--line", type=float, nargs=6, metavar=("A1", "A2", "A3", "X", "Y", "Z"),
                    help="direction then a point; omit for the congruence line itself")
    sp.add_argument("--out")

    sp = add("verify", cmd_verify, "run the oracle suite; exit 1 on failure")
    sp.add_argument("--suite", choices=tuple(SUITES), default="all")
    sp.add_argument("--samples", type=int, default=200)
    sp.add_argument("--seed", type=int, default=0)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (CongruenceError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
