"""End-to-end constructive run: tessellate, colour, stitch, certify.

Uses an engineered cloud whose occupancy pattern exercises every stage
(dense cells, a sparse chain leaning on its neighbours, and an isolated
sparse pocket bridged along cell paths), then validates the emitted
certificate against an independently recoloured process.
"""

import numpy as np

from rainbow_rgg import (
    PointSet,
    RainbowCertificate,
    build_process,
    build_rainbow,
    validate_certificate,
)

GRID_RADIUS = 0.45
RADIUS = 0.30
EPSILON = 0.0148
K = 20.0


def engineered_points(seed=3, m=11, per_cell=6, ring_pts=2):
    """Dense occupancy, sparse ring inside a hole, two-point centre."""
    rng = np.random.default_rng(seed)
    side = 1.0 / m
    rows = []
    for ix in range(m):
        for iy in range(m):
            in_hole = 4 <= ix <= 6 and 4 <= iy <= 6
            if (ix, iy) == (5, 5):
                count = 2
            elif in_hole:
                count = ring_pts
            else:
                count = per_cell
            if count == 0:
                continue
            base = np.array([ix, iy]) * side + 0.1 * side
            rows.append(base + rng.random((count, 2)) * 0.8 * side)
    return PointSet(points=np.vstack(rows), p=2.0)


def main():
    pts = engineered_points()
    for mode in ("hc", "pm"):
        got = build_rainbow(pts, RADIUS, mode=mode, epsilon=EPSILON, K=K,
                            colour_seed=11, grid_radius=GRID_RADIUS)
        assert isinstance(got, RainbowCertificate), got
        longest = max(length for _, _, _, length in got.edges)
        print(f"mode={mode}: {len(got.edges)} edges, longest {longest:.4f} "
              f"within target {got.target_radius:g}")

        proc = build_process(pts, cutoff=RADIUS, K=K, colour_seed=11)
        problems = validate_certificate(got.to_dict(), proc)
        print(f"  independent validation: "
              f"{'clean' if not problems else problems}")
        stages = got.meta.get("stages", {})
        if stages:
            sizes = ", ".join(f"{k}={v}" for k, v in sorted(stages.items()))
            print(f"  stage vertex counts: {sizes}")


if __name__ == "__main__":
    main()
