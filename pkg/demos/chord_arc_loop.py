"""A chord-arc loop around a center: flat disk, cone and annulus."""

import warnings

from quasidisk import fixtures
from quasidisk.quasicircle import chord_arc_pipeline
from quasidisk.render import render_svg

warnings.simplefilter("ignore")  # scales above the guard warn; here that is intended

# the annulus hole caps the default search ball at the inner radius, so that run searches the whole sample
for kind, n, R, b0 in (("flat-disk", 5000, 0.4, None), ("cone", 5000, 0.25, None), ("annulus", 6000, 0.45, 1.0)):
    space = fixtures.generate(fixtures.FixtureSpec(kind, n=n))
    z = fixtures.center_index(space)
    res = chord_arc_pipeline(space, z, R, guard=False, b0_radius=b0)
    c = res.checks
    print(f"{kind:9s} R={R}: winding {res.minimized.winding}, dist/R {c['dist_over_R']:.3f}, "
          f"sigma/4piR {c['sigma_over_4piR']:.3f}, chord-arc lambda {res.certificate.lam:.3f}, "
          f"{len(res.loop.points)} loop points")
    if kind == "flat-disk":
        render_svg(space, {"loop": res.loop.points, "marks": [z]}, "flat_disk_loop.svg")
        print("  drew flat_disk_loop.svg")
