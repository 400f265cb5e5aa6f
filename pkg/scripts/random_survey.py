"""Survey random cubic congruences: point classes, contact types, middle-surface singularities.

For each random congruence, classify a grid of points and, along the parabolic curve,
count middle-surface cross-caps and the sign of the middle-surface convexity test.
"""
import argparse
from collections import Counter

import numpy as np

from linecong.congruence import Domain, eval_jet
from linecong.contact import contact_line_self
from linecong.errors import CongruenceError
from linecong.invariants import classify_point
from linecong.surfaces import (
    Convexity,
    cross_cap_test,
    local_convexity_on_parabolic_image,
    trace_parabolic_curve,
)
from linecong.verify import random_bchart


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", type=int, default=15)
    args = p.parse_args()
    rng = np.random.default_rng(args.seed)

    kinds, self_contact, crosscaps, convexity = Counter(), Counter(), Counter(), Counter()
    g = np.linspace(-0.9, 0.9, args.grid)
    for _ in range(args.count):
        Z = random_bchart(rng, 3)
        for u in g:
            for v in g:
                kinds[classify_point(eval_jet(Z, u, v, 1)).kind.value] += 1
                self_contact[contact_line_self(Z, (u, v)).type.value] += 1
        try:
            curves = trace_parabolic_curve(Z, Domain(-0.9, 0.9, -0.9, 0.9), resolution=33)
        except CongruenceError:
            continue
        for c in curves:
            for u, v in c.points[::4]:
                try:
                    crosscaps[cross_cap_test(Z, u, v).verdict.value] += 1
                    r = local_convexity_on_parabolic_image(Z, u, v, "middle")
                    convexity["hyperbolic" if r.verdict is Convexity.HYPERBOLIC else "not hyperbolic"] += 1
                except CongruenceError as exc:
                    crosscaps[type(exc).__name__] += 1
    print("point classes:        ", dict(kinds))
    print("line self-contact:    ", dict(self_contact))
    print("middle surface (parabolic samples):", dict(crosscaps))
    print("middle convexity (parabolic samples):", dict(convexity))


if __name__ == "__main__":
    main()
