import math

import numpy as np
import pytest

from stairclimber.control import (
    ArbiterConfig,
    ArbiterState,
    DriveCommand,
    EegUpdate,
    KeyPress,
    Mode,
    SonarUpdate,
    TouchTarget,
    TrackUpdate,
    VoiceCommand,
    avoidance_policy,
    arbiter_step,
    command_to_dict,
    event_from_dict,
    event_to_dict,
    mix_differential,
    protocol_lines,
    read_event_log,
    run_events,
    tracking_controller,
    write_event_log,
)
from stairclimber.eeg import EegRecord, PostureState
from stairclimber.perception import RegionOccupancy, SonarTriple, region_map

CFG = ArbiterConfig()
SLEW = CFG.slew_rate  # 1/6 effort per second

CLEAR, NEAR = 3.0, 0.3


def sonar(blocked: set[str]) -> SonarTriple:
    return SonarTriple(
        d_left=NEAR if "L" in blocked else CLEAR,
        d_front=NEAR if "F" in blocked else CLEAR,
        d_right=NEAR if "R" in blocked else CLEAR,
    )


def occupancy(blocked: set[str]) -> RegionOccupancy:
    return region_map(sonar(blocked))


def test_mix_differential_examples():
    assert mix_differential(0.5, 0.0) == (0.5, 0.5)
    left, right = mix_differential(0.8, 0.5)
    assert left == 1.0 and right == pytest.approx(0.3)   # clamped left, right slows
    assert mix_differential(0.0, 0.5) == (0.5, -0.5)      # spin clockwise
    assert mix_differential(-0.5, 0.0) == (-0.5, -0.5)


def test_mix_differential_validation():
    with pytest.raises(ValueError):
        mix_differential(1.2, 0.0)
    with pytest.raises(ValueError):
        mix_differential(0.0, -1.2)


def test_drive_command_validation():
    with pytest.raises(ValueError):
        DriveCommand(1.5, 0.0)
    with pytest.raises(ValueError):
        DriveCommand(0.0, 0.0, posture_rate=2.0)
    assert DriveCommand(0.0, 0.0).stopped
    assert not DriveCommand(0.1, 0.0).stopped


def test_tracking_steers_toward_target():
    right = tracking_controller(0.1, CFG)   # target right of center
    assert right.left_effort > right.right_effort
    left = tracking_controller(-0.1, CFG)
    assert left.right_effort > left.left_effort
    center = tracking_controller(0.0, CFG)
    assert center.left_effort == center.right_effort == CFG.cruise


def test_tracking_linear_in_bearing():
    for bearing in (0.02, 0.05, 0.1):
        cmd = tracking_controller(bearing, CFG)
        assert cmd.left_effort - cmd.right_effort == pytest.approx(
            2.0 * CFG.kp * bearing, rel=1e-12
        )


def test_tracking_lost_target_stops():
    cmd = tracking_controller(None, CFG)
    assert cmd.stopped and cmd.mode is Mode.TRACKING


def test_tracking_large_bearing_saturates():
    cmd = tracking_controller(2.0, CFG)  # steering demand clamps before mixing
    assert cmd.left_effort <= 1.0 and cmd.right_effort >= -1.0


STRAIGHT = DriveCommand(1.0, 1.0)

# desired straight ahead against each sensor state: clear cells pass, a
# blocked front cell deflects to the free shoulder, all-blocked stops
AVOIDANCE_TABLE = {
    frozenset(): (1.0, 1.0),
    frozenset("L"): (1.0, 1.0),
    frozenset("R"): (1.0, 1.0),
    frozenset("LR"): (1.0, 1.0),
    frozenset("F"): (1.0, 0.5),
    frozenset("LF"): (1.0, 0.5),
    frozenset("FR"): (0.5, 1.0),
    frozenset("LFR"): (0.0, 0.0),
}


def test_avoidance_truth_table():
    for blocked, expected in AVOIDANCE_TABLE.items():
        out = avoidance_policy(occupancy(set(blocked)), STRAIGHT)
        assert (out.left_effort, out.right_effort) == expected, sorted(blocked)


def test_avoidance_scales_with_desired_speed():
    out = avoidance_policy(occupancy({"F"}), DriveCommand(0.6, 0.6))
    assert (out.left_effort, out.right_effort) == (0.6, 0.3)


def test_avoidance_passes_reverse_and_stop():
    everything = occupancy({"L", "F", "R"})
    reverse = DriveCommand(-1.0, -1.0)
    assert avoidance_policy(everything, reverse) is reverse
    stop = DriveCommand(0.0, 0.0)
    assert avoidance_policy(everything, stop) is stop


def test_avoidance_redirects_blocked_turns():
    # veering right into a blocked right shoulder goes straight instead
    out = avoidance_policy(occupancy({"F", "R"}), DriveCommand(1.0, 0.5))
    assert (out.left_effort, out.right_effort) == (0.5, 1.0)
    # spinning right with only R blocked keeps the spin direction change
    out = avoidance_policy(occupancy({"R"}), DriveCommand(1.0, -1.0))
    assert (out.left_effort, out.right_effort) == (1.0, 1.0)


def test_avoidance_preserves_posture_and_mode():
    desired = DriveCommand(1.0, 1.0, posture_rate=0.5, mode=Mode.VOICE)
    out = avoidance_policy(occupancy({"F"}), desired)
    assert out.posture_rate == 0.5 and out.mode is Mode.VOICE


def drive(events, cfg=CFG):
    return run_events(events, cfg)


def test_keypad_forward_ramps_with_slew():
    cmds = drive([KeyPress(1.0, "8"), KeyPress(2.0, "8"), KeyPress(4.0, "8")])
    efforts = [(c.left_effort, c.right_effort) for _, c in cmds]
    assert efforts[0] == (pytest.approx(SLEW), pytest.approx(SLEW))
    assert efforts[1] == (pytest.approx(2 * SLEW), pytest.approx(2 * SLEW))
    # two seconds of budget between the second and third press
    assert efforts[2] == (pytest.approx(4 * SLEW), pytest.approx(4 * SLEW))


def test_stop_key_bypasses_slew():
    cmds = drive([KeyPress(1.0, "8"), KeyPress(1.5, "5")])
    assert cmds[-1][1].stopped
    assert cmds[-1][1].left_effort == 0.0


def test_keypad_turns_spin_in_place():
    cmds = drive([KeyPress(10.0, "6")])
    cmd = cmds[0][1]
    assert cmd.left_effort > 0 > cmd.right_effort
    cmds = drive([KeyPress(10.0, "4")])
    cmd = cmds[0][1]
    assert cmd.right_effort > 0 > cmd.left_effort


def test_mode_keys_switch_and_stop():
    state = ArbiterState(left=0.5, right=0.5, last_t=0.0)
    state, cmd = arbiter_step(state, KeyPress(1.0, "A"), CFG)
    assert state.mode is Mode.EEG
    assert cmd is not None and cmd.stopped and cmd.mode is Mode.EEG


def test_mode_key_repress_returns_to_keypad():
    events = [KeyPress(1.0, "B"), KeyPress(2.0, "B")]
    state = ArbiterState()
    for e in events:
        state, _ = arbiter_step(state, e, CFG)
    assert state.mode is Mode.KEYPAD


def test_stop_all_key_from_any_mode():
    for key in ("A", "B", "C"):
        state = ArbiterState()
        state, _ = arbiter_step(state, KeyPress(1.0, key), CFG)
        state, cmd = arbiter_step(state, KeyPress(2.0, "D"), CFG)
        assert state.mode is Mode.KEYPAD
        assert cmd is not None and cmd.stopped


def test_drive_keys_ignored_outside_keypad():
    state = ArbiterState(mode=Mode.EEG)
    out, cmd = arbiter_step(state, KeyPress(1.0, "8"), CFG)
    assert cmd is None and out == state


def test_unknown_key_ignored():
    state = ArbiterState()
    out, cmd = arbiter_step(state, KeyPress(1.0, "#"), CFG)
    assert cmd is None and out == state


def test_eeg_updates_only_apply_in_eeg_mode():
    record = EegRecord(0.0, 50, 90)
    state = ArbiterState()  # keypad mode
    out, cmd = arbiter_step(state, EegUpdate(1.0, record), CFG)
    assert cmd is None and out == state


def test_first_eeg_sample_can_raise_the_seat():
    # mode key, then one strong meditation sample: the seat starts moving
    # immediately, before the smoothing window fills
    state = ArbiterState()
    state, _ = arbiter_step(state, KeyPress(1.0, "A"), CFG)
    state, cmd = arbiter_step(state, EegUpdate(2.0, EegRecord(0.0, 50, 100)), CFG)
    assert cmd is not None and cmd.posture_rate > 0
    assert state.posture is PostureState.RAISING


def test_eeg_dead_band_holds_state():
    state = ArbiterState()
    state, _ = arbiter_step(state, KeyPress(0.0, "A"), CFG)
    rates = []
    for i, med in enumerate((80, 50, 30, 50)):
        state, cmd = arbiter_step(state, EegUpdate(1.0 + i, EegRecord(0.0, 50, med)), CFG)
        rates.append(cmd.posture_rate)
    # raise, hold (dead band), lower, still lowering
    assert rates[0] > 0
    assert rates[1] > 0
    assert rates[2] < 0
    assert rates[3] < 0


def test_leaving_eeg_mode_holds_the_seat():
    state = ArbiterState()
    state, _ = arbiter_step(state, KeyPress(1.0, "A"), CFG)
    state, _ = arbiter_step(state, EegUpdate(2.0, EegRecord(0.0, 50, 95)), CFG)
    assert state.posture is PostureState.RAISING
    state, cmd = arbiter_step(state, KeyPress(3.0, "A"), CFG)
    assert cmd is not None and cmd.stopped and cmd.posture_rate == 0.0
    assert state.posture is PostureState.HOLDING


def test_reentering_eeg_mode_clears_history():
    state = ArbiterState()
    state, _ = arbiter_step(state, KeyPress(1.0, "A"), CFG)
    for i in range(4):
        state, _ = arbiter_step(state, EegUpdate(2.0 + i, EegRecord(0.0, 50, 90)), CFG)
    assert len(state.med_history) == 4
    state, _ = arbiter_step(state, KeyPress(6.0, "A"), CFG)  # leave
    state, _ = arbiter_step(state, KeyPress(7.0, "A"), CFG)  # re-enter
    assert state.med_history == ()


def test_eeg_history_window_is_bounded():
    state = ArbiterState()
    state, _ = arbiter_step(state, KeyPress(0.0, "A"), CFG)
    for i in range(40):
        state, _ = arbiter_step(state, EegUpdate(1.0 + i, EegRecord(0.0, 50, 55)), CFG)
    assert len(state.med_history) == CFG.eeg_window


def test_voice_commands_only_apply_in_voice_mode():
    state = ArbiterState()
    out, cmd = arbiter_step(state, VoiceCommand(1.0, "FORWARD"), CFG)
    assert cmd is None and out == state


def test_voice_drive_and_posture():
    events = [
        KeyPress(1.0, "B"),
        VoiceCommand(2.0, "FORWARD"),
        VoiceCommand(3.0, "RAISE"),
        VoiceCommand(4.0, "STOP"),
    ]
    cmds = drive(events)
    assert [c.mode for _, c in cmds] == [Mode.VOICE] * 4
    assert cmds[1][1].left_effort > 0
    raise_cmd = cmds[2][1]
    assert raise_cmd.posture_rate == CFG.posture_rate and raise_cmd.stopped
    assert cmds[3][1].stopped


def test_voice_unknown_symbol_ignored():
    state = ArbiterState(mode=Mode.VOICE)
    out, cmd = arbiter_step(state, VoiceCommand(1.0, "DANCE"), CFG)
    assert cmd is None and out == state


def test_track_updates_only_apply_in_tracking_mode():
    state = ArbiterState()
    out, cmd = arbiter_step(state, TrackUpdate(1.0, 0.1), CFG)
    assert cmd is None and out == state


def test_tracking_mode_follows_bearings():
    events = [KeyPress(1.0, "C"), TrackUpdate(10.0, 0.1), TrackUpdate(11.0, None)]
    cmds = drive(events)
    follow = cmds[1][1]
    assert follow.left_effort > follow.right_effort > 0
    assert cmds[2][1].stopped


def test_sonar_updates_gate_later_commands():
    events = [
        SonarUpdate(1.0, sonar({"F"})),
        KeyPress(10.0, "8"),
    ]
    cmds = drive(events)
    cmd = cmds[0][1]
    # plenty of slew budget by t=10: the veer shape comes through intact
    assert cmd.right_effort == pytest.approx(cmd.left_effort / 2.0)


def test_touch_target_is_stored():
    state = ArbiterState()
    out, cmd = arbiter_step(state, TouchTarget(1.0, 55.0, 40.5), CFG)
    assert cmd is None and out.touch == (55.0, 40.5)


def test_effort_cap_limits_commands():
    cfg = ArbiterConfig(effort_cap=0.25)
    cmds = run_events([KeyPress(100.0, "8")], cfg)  # huge slew budget
    cmd = cmds[0][1]
    assert cmd.left_effort == cmd.right_effort == 0.25


def test_slew_budget_uses_elapsed_time():
    cmds = drive([KeyPress(0.5, "8"), KeyPress(0.6, "8")])
    first = cmds[0][1].left_effort
    second = cmds[1][1].left_effort
    assert first == pytest.approx(0.5 * SLEW)
    assert second - first == pytest.approx(0.1 * SLEW)


def test_replay_is_deterministic():
    rng = np.random.default_rng(12)
    events = []
    t = 0.0
    keys = ["8", "2", "4", "6", "5", "A", "B", "C", "D"]
    for _ in range(120):
        t += float(rng.uniform(0.05, 0.5))
        roll = rng.integers(0, 4)
        if roll == 0:
            events.append(KeyPress(t, keys[int(rng.integers(0, len(keys)))]))
        elif roll == 1:
            events.append(
                SonarUpdate(
                    t,
                    SonarTriple(
                        *(float(x) for x in rng.uniform(0.2, 4.0, size=3))
                    ),
                )
            )
        elif roll == 2:
            events.append(EegUpdate(t, EegRecord(0.0, 50, int(rng.integers(1, 101)))))
        else:
            events.append(TrackUpdate(t, float(rng.uniform(-0.4, 0.4))))
    a = run_events(events, CFG)
    b = run_events(events, CFG)
    assert a == b
    # all emitted efforts respect the global bounds
    for _, cmd in a:
        assert -1.0 <= cmd.left_effort <= 1.0
        assert -1.0 <= cmd.right_effort <= 1.0


def test_event_serialization_round_trip():
    # the wire form re-stamps EEG record times with the event time, so the
    # fixtures use matching timestamps
    events = [
        KeyPress(1.0, "8"),
        VoiceCommand(2.0, "STOP"),
        EegUpdate(3.0, EegRecord(3.0, 40, 60)),
        TouchTarget(4.0, 12.5, 30.0),
        SonarUpdate(5.0, SonarTriple(1.0, 2.0, 3.0)),
        TrackUpdate(6.0, 0.25),
        TrackUpdate(7.0, None),
    ]
    for event in events:
        assert event_from_dict(event_to_dict(event)) == event


def test_event_log_round_trip(tmp_path):
    events = [
        KeyPress(1.0, "A"),
        EegUpdate(2.0, EegRecord(2.0, 40, 88)),
        TrackUpdate(3.0, None),
    ]
    path = tmp_path / "events.jsonl"
    write_event_log(path, events)
    assert read_event_log(path) == events


def test_event_log_reports_bad_lines(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"t": 1.0, "type": "key", "payload": {"key": "8"}}\nnot json\n')
    with pytest.raises(ValueError, match=r"bad\.jsonl:2"):
        read_event_log(path)


def test_command_formatting():
    d = command_to_dict(1.0, DriveCommand(1 / 3, 0.0, 0.0, Mode.KEYPAD))
    assert d["left"] == pytest.approx(1 / 3, abs=1e-9)
    assert d["mode"] == "Keypad"


def test_protocol_lines_mark_mode_changes():
    cmds = drive(
        [KeyPress(1.0, "8"), KeyPress(2.0, "B"), VoiceCommand(3.0, "FORWARD")]
    )
    lines = protocol_lines(cmds)
    assert lines[0] == "MODE Keypad"
    assert lines[2] == "MODE Voice"
    assert sum(1 for l in lines if l.startswith("MODE ")) == 2
    assert all(l.startswith(("MODE ", "CMD ")) for l in lines)
