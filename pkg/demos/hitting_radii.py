"""Hitting radii of one coloured geometric edge process.

Samples points, reveals edges in increasing length order, and reports
when minimum degree 1 and 2, connectivity, biconnectivity, and the exact
rainbow targets are first reached.  The rainbow scan is exponential in
the worst case, so the instance is kept small.
"""

import math

from rainbow_rgg import (
    build_process,
    cube_diameter,
    exact_hitting_rainbow,
    hitting_radius_kconn,
    hitting_radius_min_degree,
    sample_points,
)


def main():
    n, d, p = 12, 2, 2.0
    pts = sample_points(n, d, seed=5, p=p)
    proc = build_process(pts, cutoff=cube_diameter(d, p), K=2.0, colour_seed=6)
    print(f"n={n} d={d} p={p:g}, {len(proc.elen)} edges, "
          f"{proc.n_colours} colours")

    r1 = hitting_radius_min_degree(proc, 1)
    r2 = hitting_radius_min_degree(proc, 2)
    c1 = hitting_radius_kconn(proc, 1)
    c2 = hitting_radius_kconn(proc, 2)
    print(f"min degree >= 1 at r = {r1:.6f}")
    print(f"min degree >= 2 at r = {r2:.6f}")
    print(f"connected       at r = {c1:.6f}")
    print(f"biconnected     at r = {c2:.6f}")

    r_pm, w_pm = exact_hitting_rainbow(proc, "pm")
    r_hc, w_hc = exact_hitting_rainbow(proc, "hc")
    print(f"rainbow perfect matching at r = {r_pm:.6f} "
          f"(witness {len(w_pm)} edges)")
    print(f"rainbow Hamilton cycle   at r = {r_hc:.6f} "
          f"(witness {len(w_hc)} edges)")

    # the coincidences these radii exhibit asymptotically hold as
    # inequalities at every finite size
    assert r_pm >= r1 and r_hc >= r2
    print("inequalities r_pm >= r_1 and r_hc >= r_2 hold")


if __name__ == "__main__":
    main()
