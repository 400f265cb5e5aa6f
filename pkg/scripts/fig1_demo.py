"""Figure-1 congruence: cross-cap of the middle surface, parabolic curve, folded points.

Writes OBJ/CSV files into the output directory (default ./fig1_out) and prints a summary.
"""
import argparse
from pathlib import Path

import numpy as np

from linecong import fig1_congruence
from linecong.bde import find_folded_singularities
from linecong.surfaces import (
    cross_cap_test,
    sample_focal_surface,
    sample_middle_surface,
    trace_parabolic_curve,
)


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", default="fig1_out")
    p.add_argument("--grid", type=int, default=61)
    args = p.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    Z = fig1_congruence()
    r = cross_cap_test(Z, 0, 0)
    print(f"middle surface at (0,0): {r.verdict.value}, F1 = {r.F1}, F2 = {r.F2}")

    g = np.linspace(-0.5, 0.5, args.grid)
    (out / "middle.obj").write_text(sample_middle_surface(Z, g, g).to_obj())
    for n, sheet in enumerate(sample_focal_surface(Z, g, g)):
        (out / f"focal{n}.obj").write_text(sheet.to_obj())

    curves = trace_parabolic_curve(Z, resolution=65)
    folds = [f for f in find_folded_singularities(Z, curves) if f.isolated]
    with open(out / "parabolic.csv", "w") as fh:
        fh.write("u,v,branch\n")
        for c in curves:
            for u, v in c.points:
                fh.write(f"{u:.17g},{v:.17g},{c.branch}\n")
    print(f"parabolic curve: {len(curves)} branch(es), {sum(len(c.points) for c in curves)} points")
    for f in folds:
        print(f"folded singularity at ({f.point[0]:+.6f}, {f.point[1]:+.6f})")
    print(f"files written to {out}/")


if __name__ == "__main__":
    main()
