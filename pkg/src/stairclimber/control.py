"""Teleoperation control stack as a pure state machine.

A single ordered stream of events (key presses, voice symbols, headset
updates, touch targets, sonar readings, tracker updates) drives one arbiter.
The keypad is the default mode and stays in charge of mode selection in
every mode; events that belong to an inactive mode are ignored.  Each event
produces at most one drive command, and every emitted command has passed
the same pipeline: desired efforts -> obstacle avoidance -> acceleration
slew limit -> effort cap.

arbiter_step is a pure function of (state, event).  Replaying the same
event log therefore reproduces the same command log byte for byte, which is
how scenario regression fixtures are checked.

Keymap ('2'/'8'/'4'/'6' = reverse/forward/spin-left/spin-right, '5' stop,
'A'/'B'/'C' toggle the EEG, voice and tracking modes, 'D' is
stop-everything) follows hex-keypad layout; it and the voice lexicon are
plumbing conventions of this package, not device facts.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from enum import Enum

from .eeg import EegRecord, LoessConfig, PostureState, loess_smooth, posture_transition
from .perception.sonar import RegionOccupancy, SonarTriple, region_map

__all__ = [
    "Mode",
    "KeyPress",
    "VoiceCommand",
    "EegUpdate",
    "TouchTarget",
    "SonarUpdate",
    "TrackUpdate",
    "ControlEvent",
    "DriveCommand",
    "ArbiterConfig",
    "ArbiterState",
    "arbiter_step",
    "run_events",
    "avoidance_policy",
    "mix_differential",
    "tracking_controller",
    "event_to_dict",
    "event_from_dict",
    "read_event_log",
    "write_event_log",
    "command_to_dict",
    "protocol_lines",
]

log = logging.getLogger(__name__)


class Mode(Enum):
    KEYPAD = "Keypad"
    EEG = "Eeg"
    VOICE = "Voice"
    TRACKING = "Tracking"


@dataclass(frozen=True)
class KeyPress:
    t: float
    key: str


@dataclass(frozen=True)
class VoiceCommand:
    t: float
    symbol: str


@dataclass(frozen=True)
class EegUpdate:
    t: float
    record: EegRecord


@dataclass(frozen=True)
class TouchTarget:
    t: float
    px: float
    py: float


@dataclass(frozen=True)
class SonarUpdate:
    t: float
    triple: SonarTriple


@dataclass(frozen=True)
class TrackUpdate:
    t: float
    bearing: float | None  # None means the tracker lost the target


ControlEvent = KeyPress | VoiceCommand | EegUpdate | TouchTarget | SonarUpdate | TrackUpdate


def _clamp(x: float, lim: float = 1.0) -> float:
    return min(lim, max(-lim, x))


@dataclass(frozen=True)
class DriveCommand:
    """One command to the drivers: track efforts and seat rate, all in [-1, 1]."""

    left_effort: float
    right_effort: float
    posture_rate: float = 0.0
    mode: Mode = Mode.KEYPAD

    def __post_init__(self):
        for name in ("left_effort", "right_effort", "posture_rate"):
            v = getattr(self, name)
            if not -1.0 <= v <= 1.0:
                raise ValueError(f"{name} out of [-1, 1]: {v}")

    @property
    def stopped(self) -> bool:
        return self.left_effort == 0.0 and self.right_effort == 0.0


def mix_differential(v: float, omega: float) -> tuple[float, float]:
    """Mix forward speed and turn rate into per-track efforts.

    A positive turn rate speeds up the left track, so it turns the robot
    clockwise (to the right).  Both outputs are clamped to [-1, 1].
    """
    if abs(v) > 1.0 or abs(omega) > 1.0:
        raise ValueError(f"|v| and |omega| must be <= 1 (got {v}, {omega})")
    return (_clamp(v + omega), _clamp(v - omega))


# avoidance candidates in preference order: straight, then the smaller turn,
# right before left on equal magnitude; each maps to a field-of-view cell
_CANDIDATES: tuple[tuple[frozenset[str], tuple[float, float]], ...] = (
    (frozenset("F"), (1.0, 1.0)),
    (frozenset("FR"), (1.0, 0.5)),
    (frozenset("FL"), (0.5, 1.0)),
    (frozenset("R"), (1.0, -1.0)),
    (frozenset("L"), (-1.0, 1.0)),
)


def _heading_region(left: float, right: float) -> frozenset[str] | None:
    """The field-of-view cell a command drives into; None when unsensed.

    Stopped and reversing commands have no forward heading (the rear is not
    covered by the sonar fan), so they return None and avoidance passes
    them through.
    """
    eps = 1e-12
    v = (left + right) / 2.0
    omega = (left - right) / 2.0
    if v > eps:
        if abs(omega) <= eps:
            return frozenset("F")
        return frozenset("FR") if omega > 0 else frozenset("FL")
    if abs(v) <= eps and abs(omega) > eps:
        return frozenset("R") if omega > 0 else frozenset("L")
    return None


def avoidance_policy(occ: RegionOccupancy, desired: DriveCommand) -> DriveCommand:
    """Redirect a command away from occupied field-of-view cells.

    If the cell the desired command drives into is clear, the command passes
    through unchanged.  Otherwise the first clear candidate heading wins
    (straight, veer right, veer left, spin right, spin left), rescaled to
    the desired speed; with every candidate blocked the command degrades to
    a full stop.
    """
    heading = _heading_region(desired.left_effort, desired.right_effort)
    if heading is None or not occ.is_occupied(heading):
        return desired
    speed = max(abs(desired.left_effort), abs(desired.right_effort))
    for region, (l_scale, r_scale) in _CANDIDATES:
        if not occ.is_occupied(region):
            return replace(
                desired, left_effort=l_scale * speed, right_effort=r_scale * speed
            )
    return replace(desired, left_effort=0.0, right_effort=0.0)


@dataclass(frozen=True)
class ArbiterConfig:
    """Tunable constants of the arbiter; defaults suit the demo scenarios."""

    keypad_speed: float = 1.0    # effort for '8'/'2'
    keypad_turn: float = 0.5     # spin effort for '4'/'6'
    voice_speed: float = 0.5
    voice_turn: float = 0.5
    cruise: float = 0.5          # tracking-mode forward effort
    kp: float = 1.5              # tracking steering gain, per rad of bearing
    posture_rate: float = 1.0    # seat rate magnitude
    accel_cap: float = 0.5       # m/s^2, from the drive sizing
    speed_scale: float = 3.0     # m/s of ground speed at effort 1.0
    effort_cap: float = 1.0      # active speed cap, as an effort bound
    eeg_window: int = 15         # trailing samples kept for smoothing
    loess: LoessConfig = field(default_factory=LoessConfig)
    hysteresis_lo: float = 40.0
    hysteresis_hi: float = 60.0

    def __post_init__(self):
        if not 0.0 < self.effort_cap <= 1.0:
            raise ValueError("effort_cap must lie in (0, 1]")
        if self.accel_cap <= 0 or self.speed_scale <= 0:
            raise ValueError("accel_cap and speed_scale must be positive")
        if self.eeg_window < 3:
            raise ValueError("eeg_window must be >= 3")
        for name in ("keypad_speed", "keypad_turn", "voice_speed", "voice_turn",
                     "cruise", "posture_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")

    @property
    def slew_rate(self) -> float:
        """Max effort change per second implied by the acceleration cap."""
        return self.accel_cap / self.speed_scale


@dataclass(frozen=True)
class ArbiterState:
    """Everything the arbiter remembers between events."""

    mode: Mode = Mode.KEYPAD
    occupancy: RegionOccupancy = field(default_factory=lambda: RegionOccupancy(frozenset()))
    left: float = 0.0            # efforts currently at the drivers
    right: float = 0.0
    last_t: float = 0.0          # time the drivers last got a command
    posture: PostureState = PostureState.HOLDING
    med_history: tuple[tuple[float, float], ...] = ()
    touch: tuple[float, float] | None = None


_MODE_KEYS = {"A": Mode.EEG, "B": Mode.VOICE, "C": Mode.TRACKING}
_DRIVE_KEYS = {"8", "2", "4", "6", "5"}

VOICE_SYMBOLS = ("FORWARD", "BACK", "LEFT", "RIGHT", "STOP", "RAISE", "LOWER")


def tracking_controller(
    bearing: float | None, cfg: ArbiterConfig | None = None
) -> DriveCommand:
    """Steer proportionally onto a target bearing; stop when it is lost.

    The steering law turns the heading toward the target: turn rate
    -kp * bearing, positive counterclockwise.  A lost target stops the
    robot and leaves it waiting for a new one.
    """
    if cfg is None:
        cfg = ArbiterConfig()
    if bearing is None:
        return DriveCommand(0.0, 0.0, 0.0, Mode.TRACKING)
    omega = -cfg.kp * bearing
    # mix_differential's turn argument is clockwise-positive, so flip sign;
    # clamp first so the mix preconditions hold for any bearing
    left, right = mix_differential(cfg.cruise, _clamp(-omega))
    return DriveCommand(left, right, 0.0, Mode.TRACKING)


def _smoothed_meditation(history: tuple[tuple[float, float], ...], cfg: ArbiterConfig) -> float:
    # the smoother needs three points; before that the raw value drives the band
    if len(history) < 3:
        return history[-1][1]
    return loess_smooth(list(history), cfg.loess)[-1][1]


def _emit(
    state: ArbiterState,
    cfg: ArbiterConfig,
    t: float,
    desired: DriveCommand,
) -> tuple[ArbiterState, DriveCommand]:
    """Run one desired command through avoidance, slew limit and caps."""
    cmd = avoidance_policy(state.occupancy, desired)
    if cmd.stopped:
        # stops (operator, voice, lost target, avoidance dead end) take
        # effect immediately; the accel cap governs speed-ups only
        left, right = 0.0, 0.0
    else:
        budget = cfg.slew_rate * max(0.0, t - state.last_t)
        left = state.left + _clamp(cmd.left_effort - state.left, budget)
        right = state.right + _clamp(cmd.right_effort - state.right, budget)
        left = _clamp(left, cfg.effort_cap)
        right = _clamp(right, cfg.effort_cap)
    out = DriveCommand(left, right, _clamp(cmd.posture_rate), cmd.mode)
    new_state = replace(state, left=left, right=right, last_t=t)
    return new_state, out


def _switch_mode(
    state: ArbiterState, cfg: ArbiterConfig, t: float, target: Mode
) -> tuple[ArbiterState, DriveCommand]:
    # every mode change stops the tracks and freezes the seat: leaving EEG
    # mode mid-raise holds position rather than continuing
    entering = state.mode is not target
    new_mode = target if entering else Mode.KEYPAD
    state = replace(
        state,
        mode=new_mode,
        posture=PostureState.HOLDING,
        med_history=() if new_mode is Mode.EEG else state.med_history,
    )
    return _emit(state, cfg, t, DriveCommand(0.0, 0.0, 0.0, new_mode))


def _keypad_drive(
    state: ArbiterState, cfg: ArbiterConfig, event: KeyPress
) -> tuple[ArbiterState, DriveCommand | None]:
    key = event.key
    if key == "5":
        return _emit(state, cfg, event.t, DriveCommand(0.0, 0.0, 0.0, Mode.KEYPAD))
    v, omega = {
        "8": (cfg.keypad_speed, 0.0),
        "2": (-cfg.keypad_speed, 0.0),
        "4": (0.0, -cfg.keypad_turn),
        "6": (0.0, cfg.keypad_turn),
    }[key]
    left, right = mix_differential(v, omega)
    return _emit(state, cfg, event.t, DriveCommand(left, right, 0.0, Mode.KEYPAD))


_VOICE_DRIVE = {
    "FORWARD": (1.0, 0.0),
    "BACK": (-1.0, 0.0),
    "LEFT": (0.0, -1.0),
    "RIGHT": (0.0, 1.0),
}


def _voice_command(
    state: ArbiterState, cfg: ArbiterConfig, event: VoiceCommand
) -> tuple[ArbiterState, DriveCommand | None]:
    sym = event.symbol
    if sym == "STOP":
        return _emit(state, cfg, event.t, DriveCommand(0.0, 0.0, 0.0, Mode.VOICE))
    if sym in ("RAISE", "LOWER"):
        rate = cfg.posture_rate if sym == "RAISE" else -cfg.posture_rate
        return _emit(state, cfg, event.t, DriveCommand(0.0, 0.0, rate, Mode.VOICE))
    if sym in _VOICE_DRIVE:
        v_scale, w_scale = _VOICE_DRIVE[sym]
        left, right = mix_differential(v_scale * cfg.voice_speed, w_scale * cfg.voice_turn)
        return _emit(state, cfg, event.t, DriveCommand(left, right, 0.0, Mode.VOICE))
    log.warning("ignoring unknown voice symbol %r", sym)
    return state, None


def arbiter_step(
    state: ArbiterState, event: ControlEvent, cfg: ArbiterConfig | None = None
) -> tuple[ArbiterState, DriveCommand | None]:
    """Process one event; returns the new state and at most one command.

    Pure: same (state, event, cfg) always gives the same result.  Unknown
    keys and voice symbols are ignored with a logged diagnostic.
    """
    if cfg is None:
        cfg = ArbiterConfig()

    if isinstance(event, KeyPress):
        if event.key == "D":
            # stop-everything: back to the default mode, tracks halted
            state = replace(state, mode=Mode.KEYPAD, posture=PostureState.HOLDING)
            return _emit(state, cfg, event.t, DriveCommand(0.0, 0.0, 0.0, Mode.KEYPAD))
        if event.key in _MODE_KEYS:
            return _switch_mode(state, cfg, event.t, _MODE_KEYS[event.key])
        if event.key in _DRIVE_KEYS:
            if state.mode is not Mode.KEYPAD:
                return state, None
            return _keypad_drive(state, cfg, event)
        log.warning("ignoring unknown key %r", event.key)
        return state, None

    if isinstance(event, SonarUpdate):
        # occupancy feeds the avoidance filter of later motion commands
        return replace(state, occupancy=region_map(event.triple)), None

    if isinstance(event, TouchTarget):
        # remembered for target selection; produces no drive output
        return replace(state, touch=(event.px, event.py)), None

    if isinstance(event, EegUpdate):
        if state.mode is not Mode.EEG:
            return state, None
        history = (state.med_history + ((event.t, float(event.record.meditation)),))
        history = history[-cfg.eeg_window :]
        smoothed = _smoothed_meditation(history, cfg)
        posture = posture_transition(
            smoothed, state.posture, cfg.hysteresis_lo, cfg.hysteresis_hi
        )
        rate = {
            PostureState.RAISING: cfg.posture_rate,
            PostureState.LOWERING: -cfg.posture_rate,
            PostureState.HOLDING: 0.0,
        }[posture]
        state = replace(state, med_history=history, posture=posture)
        return _emit(state, cfg, event.t, DriveCommand(0.0, 0.0, rate, Mode.EEG))

    if isinstance(event, VoiceCommand):
        if state.mode is not Mode.VOICE:
            return state, None
        return _voice_command(state, cfg, event)

    if isinstance(event, TrackUpdate):
        if state.mode is not Mode.TRACKING:
            return state, None
        return _emit(state, cfg, event.t, tracking_controller(event.bearing, cfg))

    raise TypeError(f"unknown event type: {type(event).__name__}")


def run_events(
    events,
    cfg: ArbiterConfig | None = None,
    state: ArbiterState | None = None,
) -> list[tuple[float, DriveCommand]]:
    """Fold a whole event sequence, collecting timestamped commands."""
    if state is None:
        state = ArbiterState()
    out: list[tuple[float, DriveCommand]] = []
    for event in events:
        state, cmd = arbiter_step(state, event, cfg)
        if cmd is not None:
            out.append((event.t, cmd))
    return out


# event log serialization: JSON lines, one {t, type, payload} object each


def event_to_dict(event: ControlEvent) -> dict:
    if isinstance(event, KeyPress):
        return {"t": event.t, "type": "key", "payload": {"key": event.key}}
    if isinstance(event, VoiceCommand):
        return {"t": event.t, "type": "voice", "payload": {"symbol": event.symbol}}
    if isinstance(event, EegUpdate):
        return {
            "t": event.t,
            "type": "eeg",
            "payload": {
                "attention": event.record.attention,
                "meditation": event.record.meditation,
            },
        }
    if isinstance(event, TouchTarget):
        return {"t": event.t, "type": "touch", "payload": {"px": event.px, "py": event.py}}
    if isinstance(event, SonarUpdate):
        tr = event.triple
        return {
            "t": event.t,
            "type": "sonar",
            "payload": {
                "d_left": tr.d_left,
                "d_front": tr.d_front,
                "d_right": tr.d_right,
                "max_range": tr.max_range,
                "threshold": tr.threshold,
            },
        }
    if isinstance(event, TrackUpdate):
        payload = {"lost": True} if event.bearing is None else {"bearing": event.bearing}
        return {"t": event.t, "type": "track", "payload": payload}
    raise TypeError(f"unknown event type: {type(event).__name__}")


def event_from_dict(obj: dict) -> ControlEvent:
    try:
        t = float(obj["t"])
        kind = obj["type"]
        payload = obj["payload"]
        if kind == "key":
            return KeyPress(t, str(payload["key"]))
        if kind == "voice":
            return VoiceCommand(t, str(payload["symbol"]))
        if kind == "eeg":
            return EegUpdate(
                t, EegRecord(t, int(payload["attention"]), int(payload["meditation"]))
            )
        if kind == "touch":
            return TouchTarget(t, float(payload["px"]), float(payload["py"]))
        if kind == "sonar":
            return SonarUpdate(
                t,
                SonarTriple(
                    d_left=float(payload["d_left"]),
                    d_front=float(payload["d_front"]),
                    d_right=float(payload["d_right"]),
                    max_range=float(payload.get("max_range", 4.0)),
                    threshold=float(payload.get("threshold", 0.5)),
                ),
            )
        if kind == "track":
            if payload.get("lost"):
                return TrackUpdate(t, None)
            return TrackUpdate(t, float(payload["bearing"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed event object: {obj!r}") from exc
    raise ValueError(f"unknown event type: {kind!r}")


def read_event_log(path) -> list[ControlEvent]:
    events: list[ControlEvent] = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                events.append(event_from_dict(json.loads(line)))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
    return events


def write_event_log(path, events) -> None:
    with open(path, "w") as fh:
        for event in events:
            fh.write(json.dumps(event_to_dict(event)) + "\n")


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def command_to_dict(t: float, cmd: DriveCommand) -> dict:
    return {
        "t": float(_fmt(t)),
        "mode": cmd.mode.value,
        "left": float(_fmt(cmd.left_effort)),
        "right": float(_fmt(cmd.right_effort)),
        "posture": float(_fmt(cmd.posture_rate)),
    }


def protocol_lines(commands) -> list[str]:
    """Render a command sequence as the serial line protocol.

    A MODE line announces every mode change (including the first command);
    each command then becomes one CMD line: "CMD <left> <right> <posture>".
    """
    lines: list[str] = []
    current: Mode | None = None
    for _, cmd in commands:
        if cmd.mode is not current:
            lines.append(f"MODE {cmd.mode.value}")
            current = cmd.mode
        lines.append(
            f"CMD {_fmt(cmd.left_effort)} {_fmt(cmd.right_effort)} {_fmt(cmd.posture_rate)}"
        )
    return lines
