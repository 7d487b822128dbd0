"""Time-stepped longitudinal dynamics of the robot on a staircase.

The climb is modelled along the path coordinate ``s``: a flat approach, an
engage zone where the chassis pitches up onto the stairs, the climb itself,
a crest zone where the chassis levels back out, and a flat run-out.  Engage
and crest each span one track length (the chassis rotates while the track
straddles the first/last stair nose); within them the pitch ramps linearly
with ``s``.

Per-track dynamics, driving pulley P3 (radius r) with torque tau:

    accel = (tau/r - M g sin(pitch) - c_rr M g cos(pitch)) / (M + m1)

integrated with semi-implicit Euler (velocity first, then position), which
keeps per-step applied work >= dKE + dPE for c_rr = 0.  Rolling resistance
c_rr acts as Coulomb friction: it opposes motion, and at rest it cancels net
drive up to its own magnitude.  Velocity is clamped to the active phase's
speed cap (ground cap on approach/run-out, stair cap otherwise).

The base plate is levelled by front actuators: extension maps linearly to
plate compensation angle through a lever arm, slew-limited and bounded by
the stroke.  plate_angle is the plate's absolute angle to the horizontal
(chassis pitch minus compensation).

Events are reported in the trajectory rather than raised: ``Fall`` when the
robot would roll backwards on the slope beyond a small tolerance (the run
stops there), ``ActuatorSaturation`` when the stroke cannot cover the
chassis pitch.  Runs are deterministic: identical inputs give bit-identical
trajectories.

Defaults for track length, plate rig and run-out length are installation
parameters, not derived from hardware measurements; override per scenario.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Sequence

from .drivetrain import MotorSpec, TrackParams, min_static_torque

__all__ = [
    "Phase",
    "Staircase",
    "PlateRig",
    "SimConfig",
    "SimState",
    "Trajectory",
    "SweepProbe",
    "Unclimbable",
    "step",
    "run_climb",
    "min_torque_sweep",
    "pitch_at",
    "phase_at",
]

_FALL_TOL = 1e-6          # m/s of backward velocity tolerated before a Fall
_MAX_INCLINATION = math.radians(40.0)

TorqueSchedule = Callable[[float], float]


class Phase(Enum):
    APPROACH = "approach"
    ENGAGE = "engage"
    CLIMB = "climb"
    CREST = "crest"
    LEVEL = "level"


class Unclimbable(RuntimeError):
    """Even the motor-limit torque cannot complete the climb."""


@dataclass(frozen=True)
class Staircase:
    """Stair geometry.  ramp_length runs along the slope; zero means no stairs."""

    inclination: float        # rad
    step_rise: float          # m
    step_run: float           # m
    ramp_length: float        # m along the slope
    approach_length: float    # m of flat ground before the first nose

    def __post_init__(self):
        if not (0.0 < self.inclination <= _MAX_INCLINATION + 1e-12):
            raise ValueError(
                f"inclination must lie in (0, {math.degrees(_MAX_INCLINATION):.0f} deg] "
                f"(got {math.degrees(self.inclination):.2f} deg)"
            )
        if self.step_rise <= 0 or self.step_run <= 0:
            raise ValueError("step rise and run must be positive")
        if abs(self.inclination - math.atan2(self.step_rise, self.step_run)) > 1e-9:
            raise ValueError("inclination must equal atan(rise/run) within 1e-9")
        if self.ramp_length < 0 or self.approach_length < 0:
            raise ValueError("lengths must be >= 0")

    @classmethod
    def from_angle(
        cls,
        inclination: float,
        step_rise: float,
        ramp_length: float,
        approach_length: float = 0.0,
    ) -> "Staircase":
        """Build a staircase from its angle, deriving the step run."""
        run = step_rise / math.tan(inclination)
        return cls(inclination, step_rise, run, ramp_length, approach_length)


@dataclass(frozen=True)
class PlateRig:
    """Plate-levelling actuator model: extension -> compensation angle."""

    lever_arm: float = 0.30        # m; plate angle compensated = ext / lever_arm
    max_rate: float = 0.05         # m/s extension slew limit
    stroke: float = 0.25           # m
    tolerance: float = math.radians(1.0)  # levelling tolerance during climb

    def __post_init__(self):
        if min(self.lever_arm, self.max_rate, self.stroke, self.tolerance) <= 0:
            raise ValueError("plate rig parameters must be positive")


@dataclass(frozen=True)
class SimConfig:
    track: TrackParams
    motor: MotorSpec
    dt: float = 1e-3               # s
    duration: float = 10.0         # s
    rolling_resist_coeff: float = 0.0
    ground_cap: float = 3.0        # m/s on approach / run-out
    stair_cap: float = 0.1         # m/s on engage / climb / crest
    track_length: float = 0.2      # m; sets engage and crest zone lengths
    level_run: float = 0.2         # m of run-out required for completion
    plate: PlateRig = PlateRig()

    def __post_init__(self):
        if self.dt <= 0 or self.duration < self.dt:
            raise ValueError("need dt > 0 and duration >= dt")
        if self.ground_cap <= 0 or self.stair_cap <= 0:
            raise ValueError("speed caps must be positive")
        if self.rolling_resist_coeff < 0:
            raise ValueError("rolling_resist_coeff must be >= 0")
        if self.track_length <= 0 or self.level_run < 0:
            raise ValueError("track_length must be > 0 and level_run >= 0")


@dataclass(frozen=True)
class SimState:
    phase: Phase
    s: float               # m along path
    v: float               # m/s
    plate_angle: float     # rad, plate absolute angle to the horizontal
    actuator_ext: float    # m, front actuator extension
    track_torque: float    # N*m applied at the track
    t: float               # s


def _zone_bounds(stairs: Staircase, cfg: SimConfig) -> tuple[float, float, float, float]:
    """Path positions of engage start, climb start, crest start, crest end."""
    zone = cfg.track_length if stairs.ramp_length > 0 else 0.0
    engage = stairs.approach_length
    climb = engage + zone
    crest = climb + stairs.ramp_length
    end = crest + zone
    return engage, climb, crest, end


def phase_at(s: float, stairs: Staircase, cfg: SimConfig) -> Phase:
    engage, climb, crest, end = _zone_bounds(stairs, cfg)
    if s < engage:
        return Phase.APPROACH
    if s < climb:
        return Phase.ENGAGE
    if s < crest:
        return Phase.CLIMB
    if s < end:
        return Phase.CREST
    return Phase.LEVEL


def pitch_at(s: float, stairs: Staircase, cfg: SimConfig) -> float:
    """Chassis pitch along the path: linear ramps through engage and crest."""
    engage, climb, crest, end = _zone_bounds(stairs, cfg)
    if s < engage or s >= end or stairs.ramp_length <= 0:
        return 0.0
    if s < climb:
        return stairs.inclination * (s - engage) / (climb - engage)
    if s < crest:
        return stairs.inclination
    return stairs.inclination * (1.0 - (s - crest) / (end - crest))


def path_end(stairs: Staircase, cfg: SimConfig) -> float:
    """Completion position: crest end plus the configured run-out."""
    return _zone_bounds(stairs, cfg)[3] + cfg.level_run


def _speed_cap(phase: Phase, cfg: SimConfig) -> float:
    if phase in (Phase.APPROACH, Phase.LEVEL):
        return cfg.ground_cap
    return cfg.stair_cap


def initial_state(cfg: SimConfig, stairs: Staircase) -> SimState:
    return SimState(phase_at(0.0, stairs, cfg), 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


def step(
    state: SimState,
    applied_torque: float,
    cfg: SimConfig,
    stairs: Staircase,
) -> tuple[SimState, tuple[str, ...]]:
    """Advance one dt.  Returns the new state and any events raised this step."""
    p = cfg.track
    pitch = pitch_at(state.s, stairs, cfg)
    thrust = applied_torque / p.r
    grade = p.M * p.gravity * math.sin(pitch)
    roll_mag = cfg.rolling_resist_coeff * p.M * p.gravity * math.cos(pitch)
    inertia = p.M + p.m1

    if state.v > 0.0:
        net = thrust - grade - roll_mag
    else:
        # at rest the resistance acts like static friction
        net0 = thrust - grade
        net = 0.0 if abs(net0) <= roll_mag else net0 - math.copysign(roll_mag, net0)

    events: list[str] = []
    v_new = state.v + net / inertia * cfg.dt
    if v_new < 0.0:
        if pitch > 0.0 and v_new < -_FALL_TOL:
            events.append("Fall")
        v_new = 0.0
    v_new = min(v_new, _speed_cap(state.phase, cfg))

    s_new = state.s + v_new * cfg.dt
    phase_new = phase_at(s_new, stairs, cfg)
    # re-clamp so the stored row respects its own phase's cap
    v_new = min(v_new, _speed_cap(phase_new, cfg))

    # plate levelling: track the chassis pitch within rate and stroke limits
    rig = cfg.plate
    pitch_new = pitch_at(s_new, stairs, cfg)
    target_ext = min(pitch_new * rig.lever_arm, rig.stroke)
    delta = target_ext - state.actuator_ext
    max_move = rig.max_rate * cfg.dt
    ext_new = state.actuator_ext + max(-max_move, min(max_move, delta))
    plate_new = pitch_new - ext_new / rig.lever_arm
    if pitch_new * rig.lever_arm > rig.stroke + 1e-12 and abs(plate_new) > rig.tolerance:
        events.append("ActuatorSaturation")

    new_state = SimState(
        phase=phase_new,
        s=s_new,
        v=v_new,
        plate_angle=plate_new,
        actuator_ext=ext_new,
        track_torque=applied_torque,
        t=state.t + cfg.dt,
    )
    return new_state, tuple(events)


@dataclass(frozen=True)
class Trajectory:
    states: tuple[SimState, ...]
    events: tuple[tuple[float, str], ...]   # (t, event name)
    peak_torque: float
    completed: bool
    fall: bool

    @property
    def final(self) -> SimState:
        return self.states[-1]

    def max_speed(self, phase: Phase | None = None) -> float:
        vs = [st.v for st in self.states if phase is None or st.phase is phase]
        return max(vs) if vs else 0.0


def _as_schedule(torque: float | TorqueSchedule) -> TorqueSchedule:
    if callable(torque):
        return torque
    value = float(torque)
    return lambda t: value


def run_climb(
    cfg: SimConfig,
    stairs: Staircase,
    torque_schedule: float | TorqueSchedule,
) -> Trajectory:
    """Run the full climb sequence under a torque schedule.

    The run ends at completion (path end reached), on a Fall, or when the
    configured duration elapses.  Fall and ActuatorSaturation are recorded
    as events; no exception is raised for them.
    """
    schedule = _as_schedule(torque_schedule)
    end = path_end(stairs, cfg)
    state = initial_state(cfg, stairs)
    states = [state]
    events: list[tuple[float, str]] = []
    peak = 0.0
    completed = state.s >= end
    fall = False
    saturated = False
    n_steps = int(round(cfg.duration / cfg.dt))
    for _ in range(n_steps):
        tau = schedule(state.t)
        peak = max(peak, abs(tau))
        state, evs = step(state, tau, cfg, stairs)
        for name in evs:
            if name == "ActuatorSaturation":
                if saturated:
                    continue        # report saturation once per onset
                saturated = True
            events.append((state.t, name))
        if not any(n == "ActuatorSaturation" for n in evs):
            saturated = False
        states.append(state)
        if any(n == "Fall" for n in evs):
            fall = True
            break
        if state.s >= end:
            completed = True
            break
    return Trajectory(
        states=tuple(states),
        events=tuple(events),
        peak_torque=peak,
        completed=completed,
        fall=fall,
    )


@dataclass(frozen=True)
class SweepProbe:
    torque: float
    completed: bool
    fall: bool
    final_v: float


def min_torque_sweep(
    cfg: SimConfig,
    stairs: Staircase,
    duration: float | None = None,
    resolution: float = 0.05,
    probes: list[SweepProbe] | None = None,
) -> float:
    """Smallest constant per-track torque that completes the climb in time.

    Bisection between the static equilibrium torque (sustained climbing is
    impossible below it) and the motor limit through the reduction, to the
    given torque resolution.  Pass a list as ``probes`` to capture every
    trial for reporting.  Raises Unclimbable when even the motor limit
    fails.
    """
    if duration is not None:
        if duration <= 0:
            raise ValueError("duration must be positive")
        cfg = replace(cfg, duration=duration)

    def climbs(tau: float) -> bool:
        traj = run_climb(cfg, stairs, tau)
        if probes is not None:
            probes.append(SweepProbe(tau, traj.completed, traj.fall, traj.final.v))
        return traj.completed and not traj.fall

    lo = min_static_torque(replace(cfg.track, theta=stairs.inclination))
    hi = cfg.motor.available_track_torque
    if not climbs(hi):
        raise Unclimbable(
            f"motor-limit torque {hi:.2f} N*m cannot complete the climb "
            f"within {cfg.duration:.1f} s"
        )
    if climbs(lo):
        return lo
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if climbs(mid):
            hi = mid
        else:
            lo = mid
    return hi


def trajectory_rows(traj: Trajectory) -> list[tuple[float, str, float, float, float, float, str]]:
    """Flatten a trajectory for CSV export.

    Columns: t, phase, s, v, plate_angle_deg, torque_Nm, events (semicolon
    joined names of events raised on the step ending at that row).
    """
    by_time: dict[float, list[str]] = {}
    for t, name in traj.events:
        by_time.setdefault(t, []).append(name)
    rows = []
    for st in traj.states:
        evs = ";".join(by_time.get(st.t, []))
        rows.append(
            (st.t, st.phase.value, st.s, st.v, math.degrees(st.plate_angle), st.track_torque, evs)
        )
    return rows
