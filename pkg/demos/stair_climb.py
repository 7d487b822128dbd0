"""Simulate a full stair climb and find the smallest torque that works.

Runs the phase-by-phase climb at the motor limit, prints what happened in
each phase, then sweeps down to the minimum constant torque that still
completes within the time horizon.
"""

from stairclimber.scenario import build_scenario
from stairclimber.stairsim import Phase, min_torque_sweep, run_climb

sc = build_scenario(
    {
        "name": "demo-climb",
        "staircase": {"approach_length_m": 0.3},
        "sim": {"rolling_resist_coeff": 0.13, "level_run_m": 0.2},
    }
)

torque = sc.motor.available_track_torque
traj = run_climb(sc.sim, sc.stairs, torque)
print(f"climb at the motor limit ({torque:.0f} N*m per track):")
print(f"  completed = {traj.completed}, fell = {traj.fall}")
print(f"  finished {traj.final.s:.2f} m in {traj.final.t:.2f} s")
for phase in Phase:
    v = traj.max_speed(phase)
    if v > 0.0:
        print(f"  max speed {v:.3f} m/s during {phase.value}")
if traj.events:
    print("  events:", ", ".join(f"{name}@{t:.2f}s" for t, name in traj.events))
print()

probes = []
needed = min_torque_sweep(sc.sim, sc.stairs, probes=probes)
print(f"minimum constant torque that completes: {needed:.2f} N*m per track")
print(f"found in {len(probes)} trial climbs:")
for p in probes:
    verdict = "fell" if p.fall else ("completed" if p.completed else "timed out")
    print(f"  {p.torque:6.2f} N*m -> {verdict}")
