"""Size the seat support actuator across the elevation range.

Solves the linkage angle at each arm elevation, evaluates the holding
force, and checks the peak against the hinge shear allowable.
"""

import math

from stairclimber.support import (
    SupportGeometry,
    SupportLoad,
    check_structural,
    force_profile,
)

geom = SupportGeometry(a=0.335, b=0.225, h=0.60)
load = SupportLoad(mass=120.0)

grid = [math.radians(d) for d in range(0, 91, 5)]
profile = force_profile(geom, load, grid)

print(f"payload {load.mass:.0f} kg, links a={geom.a} m b={geom.b} m h={geom.h} m")
print()
print(f"{'theta':>6} {'gamma':>8} {'force':>9}")
for theta, gamma, force in profile:
    print(f"{math.degrees(theta):5.0f}d {math.degrees(gamma):7.2f}d {force:8.1f} N")

peak = max(f for _, _, f in profile)
report = check_structural(peak, load)
print()
print(f"peak force {peak:.1f} N at the lowest posture")
print(
    f"hinge shear {peak * load.safety_factor:.0f} N demanded vs "
    f"{load.hinge_shear_limit:.0f} N allowable "
    f"(margin {report.margin:.2f}, {'ok' if report.passed else 'OVER LIMIT'})"
)
