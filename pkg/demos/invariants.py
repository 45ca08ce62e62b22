"""Sampled Assouad dimension, Ahlfors regularity, LLC constants and porosity on the fixtures."""

import math

from quasidisk import fixtures
from quasidisk.invariants import (ahlfors_regularity, assouad_dimension, llc_constants, porosity_constant,
                                  three_point_constant)
from quasidisk.quasicircle import boundary_points

grid = fixtures.grid(4900)
print(f"grid: Q = {assouad_dimension(grid).Q:.3f}, Ahlfors C = {ahlfors_regularity(grid).C:.3f}")

snow = fixtures.snowflake(2000, alpha=0.5)
print(f"snowflaked segment |x-y|^0.5: Q = {assouad_dimension(snow).Q:.3f} (a segment counts as 2-dimensional)")

strip = fixtures.strip(4000)
rep = ahlfors_regularity(strip, window=(2 * strip.spacing, 5.0))
print(f"long strip: Ahlfors ratio drifts with scale -> flagged {rep.scale_dependent}")

disk = fixtures.flat_disk(n=3000)
dumbbell = fixtures.dumbbell(n=3000)
print(f"LLC lambda: disk {llc_constants(disk).lam:.3f}, dumbbell {llc_constants(dumbbell).lam:.3f}")

rim = boundary_points(disk)
print(f"disk rim ({rim.size} points) is porous with C = {porosity_constant(disk, rim).C:.3f}")

circle = fixtures.circle_loop(256)
print(f"round circle three-point constant {three_point_constant(range(256), circle).lam:.4f} "
      f"(continuum 1; chord-arc continuum pi/2 = {math.pi / 2:.4f})")
