"""Quasiconvex paths through good level bands, and the co-area constant behind them."""

import math

import numpy as np

from quasidisk import fixtures, path_metric
from quasidisk.coarea import calibrate_omega, quasiconvex_path

disk = fixtures.flat_disk(n=3000)
pm = path_metric(disk)
omegas = [calibrate_omega(disk, w=m * disk.spacing, seed=1, pm=pm)[0] for m in (1, 2, 4)]
print("co-area constant across band widths:", ", ".join(f"{w:.3f}" for w in omegas))

rng = np.random.default_rng(0)
for _ in range(5):
    x, y = (int(v) for v in rng.choice(disk.n, 2, replace=False))
    p = quasiconvex_path(disk, x, y, pm=pm)
    print(f"disk pair ({x}, {y}): length/distance {p.ratio:.3f}, recursion depth {p.depth}, "
          f"{p.n_fallback} geodesic fallbacks")

sphere = fixtures.sphere(n=3000)
spm = path_metric(sphere)
ratios = [quasiconvex_path(sphere, int(a), int(b), pm=spm).ratio
          for a, b in rng.choice(sphere.n, (5, 2), replace=False)]
print(f"chordal sphere: worst ratio {max(ratios):.3f} (great circle over chord is at most pi/2 = {math.pi / 2:.3f})")
