"""Epsilon-chains, the score-minimizing chain and a certified quasiarc on a jittered disk."""

from quasidisk import fixtures, path_metric
from quasidisk.arcs import build_quasiarc
from quasidisk.chains import minimal_chain, score_minimizing_chain

disk = fixtures.flat_disk(n=2000)
pm = path_metric(disk)
order = disk.canonical_order
x, y = int(order[10]), int(order[1900])
r = disk.dist(x, y)
print(f"{disk.n} points, spacing {disk.spacing:.4f}, h {disk.h:.4f}; d(x, y) = {r:.3f}")

for eps in (disk.h, 2 * disk.h, 4 * disk.h):
    chain = minimal_chain(disk, x, y, eps)
    print(f"eps {eps:.3f}: minimal chain has {len(chain)} points, largest gap {chain.gaps(disk).max():.3f}")

# a chain that stays close to a reference geodesic pays little deviation cost
ref = pm.geodesic(x, y)
scored = score_minimizing_chain(disk, x, y, ref, 2 * disk.h, Q=2.0)
print(f"score-minimizing chain: {len(scored.chain)} points, score {scored.score:.2f}, "
      f"max deviation {scored.deviation:.4f}")

build = build_quasiarc(disk, x, y, r / 16, Q=2.0, pm=pm)
print(f"quasiarc at eps = r/16: {len(build.arc)} points, certified M = {build.certificate.M:.3f}")
