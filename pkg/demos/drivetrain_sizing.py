"""Walk the drivetrain sizing chain: gears, torque cases, motor margin.

Shows why the drive pinion needs 18 teeth, how the three published torque
figures back-solve to different supported masses, and how much headroom
the chosen motor keeps over the worst case.
"""

import math
from dataclasses import replace

from stairclimber.drivetrain import (
    SIZING_TARGETS,
    GearDesign,
    MotorSpec,
    Pulley,
    TrackParams,
    back_solve_mass,
    contact_ratio,
    min_pinion_teeth,
    min_static_torque,
    motor_margin,
    torque_case,
)

alpha = math.radians(20.0)
teeth = min_pinion_teeth(alpha, 1.0)
gear = GearDesign(alpha, 1.0, 4.0, teeth)
print(f"pressure angle 20 deg -> at least {teeth} teeth against a rack")
print(f"module 4 mm -> pitch diameter {gear.pitch_diameter_mm:.0f} mm")
print(f"contact ratio {contact_ratio(gear):.3f} (continuous meshing needs > 1)")
print()

accel = TrackParams(M=97.0, R=0.05, r=0.036, theta=math.radians(40.0), accel=0.5)
static = replace(accel, accel=0.0)
cases = {
    "p1_accel": (Pulley.P1, accel),
    "p3_accel": (Pulley.P3, accel),
    "p3_static": (Pulley.P3, static),
}
print("per-track torque targets and the mass each one implies:")
for name, (pulley, params) in cases.items():
    target = SIZING_TARGETS[name]
    mass = back_solve_mass(pulley, target, params)
    print(f"  {name:9s}: {target:5.1f} N*m -> M = {mass:6.2f} kg")
print("the spread shows the figures were rounded independently")
print()

worst = torque_case(Pulley.P1, accel)
print(f"worst case at M = {accel.M:.0f} kg: {worst:.2f} N*m (driving P1, accelerating)")
print(f"holding speed on the slope needs {min_static_torque(static):.2f} N*m (driving P3)")

motor = MotorSpec()
mm = motor_margin(motor, worst)
print(
    f"motor {motor.rated_torque:.0f} N*m x{motor.reduction:.0f} reduction = "
    f"{mm.available:.0f} N*m available -> margin {mm.margin:.2f} "
    f"({'ok' if mm.passed else 'UNDERSIZED'})"
)
