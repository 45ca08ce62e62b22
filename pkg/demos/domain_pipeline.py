"""End-to-end run: constants, quasiconvexity spot checks, loop, domain and its verification."""

import json

from quasidisk import fixtures
from quasidisk.io import dumps
from quasidisk.pipeline import PipelineConfig, run_pipeline

disk = fixtures.flat_disk(n=3000)
z = fixtures.center_index(disk)
report = run_pipeline(disk, z, 0.35, PipelineConfig(guard=False, seed=3))
st = report["stages"]
h = st["constants"]["hypothesis"]
print("measured constants:", ", ".join(f"{k} {v:.3f}" for k, v in h.items()))
print(f"quasiconvex spot checks: worst L = {st['quasiconvexity']['L_hat']:.3f}")
print(f"loop: chord-arc lambda {st['chord_arc']['certificate']['lambda']:.3f}")
print(f"domain: {st['domain']['n_interior']} interior points, {st['domain']['n_boundary']} on the loop")
checks = st["verification"]["checks"]
print(f"verification: lambda' {checks['lambda_prime']:.3f} <= {checks['llc_bound']:.2f}, "
      f"Ahlfors {checks['C_ahlfors']:.3f} <= {checks['ahlfors_bound']:.1f}, porosity {checks['C_porosity']:.3f}")
print("passed:", report["passed"])
with open("pipeline_report.json", "w") as fh:
    fh.write(dumps(report))
print("report keys:", sorted(json.loads(dumps(report))))
