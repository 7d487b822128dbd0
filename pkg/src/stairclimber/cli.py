"""Command-line scenario runner and report generator.

Subcommands:
    design  force profile, torque tables, gear and motor sizing report
    sim     stair-climb trajectory on the scenario staircase
    sweep   minimum constant climbing torque search
    teleop  replay an event log through the control stack
    report  everything above plus power bookkeeping and a tracking self-check

All outputs are plain text, CSV or JSON lines, written under --out, and are
deterministic functions of the scenario and replay files (and --seed for
the synthetic tracking check).  Numbers are written with 9 significant
digits.  Exit codes: 0 success, 1 configuration error, 2 simulation
failure (fall, unclimbable, or incomplete within the horizon).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import drivetrain, power, stairsim, support
from .control import SonarUpdate, protocol_lines, read_event_log, run_events, command_to_dict
from .perception import (
    LkParams,
    TrackedPoint,
    fb_track,
    pixel_to_bearing,
    random_texture,
    read_sonar_log,
    render_texture,
)
from .scenario import ConfigError, Scenario, build_scenario, load_scenario

__all__ = ["main"]

SIZING_TARGETS = drivetrain.SIZING_TARGETS


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) if isinstance(v, float) else str(v) for v in row])


class _Parser(argparse.ArgumentParser):
    # argparse normally exits 2 on usage errors; bad flags are config
    # errors here, so route them through the same exit-1 path
    def error(self, message):
        raise ConfigError(message)


def _load(args) -> Scenario:
    if args.scenario is None:
        scenario = build_scenario({}, base_dir=".", default_name="default")
    else:
        scenario = load_scenario(args.scenario)
    if args.dt is not None:
        if args.dt <= 0:
            raise ConfigError(f"--dt must be positive (got {args.dt})")
        scenario = replace(scenario, sim=replace(scenario.sim, dt=args.dt))
    return scenario


def _out_dir(args, scenario: Scenario) -> Path:
    out = Path(args.out) if args.out else Path("runs") / scenario.name
    out.mkdir(parents=True, exist_ok=True)
    return out


def _design_lines(sc: Scenario) -> list[str]:
    gear = sc.gear
    tension = {
        p.name: " >= ".join(drivetrain.tension_order(p))
        for p in drivetrain.Pulley
    }
    lines = [
        f"scenario: {sc.name}",
        "",
        "[gear]",
        f"pressure angle = {_fmt(math.degrees(gear.pressure_angle))} deg",
        f"min pinion teeth = {drivetrain.min_pinion_teeth(gear.pressure_angle, gear.addendum_factor)}",
        f"teeth = {gear.teeth}",
        f"pitch diameter = {_fmt(gear.pitch_diameter_mm)} mm",
        f"contact ratio = {_fmt(drivetrain.contact_ratio(gear))}",
        "",
        "[belt tensions by driving pulley]",
    ]
    lines += [f"driver {name}: {order}" for name, order in sorted(tension.items())]

    # one mass per sizing target: the three targets do not back-solve to a
    # single consistent mass, so each is reported with its own
    lines += ["", "[sizing targets: back-solved per-track mass]"]
    cases = {
        "p1_accel": (drivetrain.Pulley.P1, replace(sc.track, theta=sc.track.theta_cap, accel=sc.track.accel_cap)),
        "p3_accel": (drivetrain.Pulley.P3, replace(sc.track, theta=sc.track.theta_cap, accel=sc.track.accel_cap)),
        "p3_static": (drivetrain.Pulley.P3, replace(sc.track, theta=sc.track.theta_cap, accel=0.0)),
    }
    masses = {}
    for target_name, target in SIZING_TARGETS.items():
        pulley, params = cases[target_name]
        mass = drivetrain.back_solve_mass(pulley, target, params)
        masses[target_name] = (mass, pulley, params)
        lines.append(f"{target_name}: {_fmt(target)} N*m -> M = {_fmt(mass)} kg")
    m_vals = [m for m, _, _ in masses.values()]
    lines.append(
        "note: the three targets imply masses spanning "
        f"{_fmt(min(m_vals))}..{_fmt(max(m_vals))} kg; they are not mutually "
        "consistent and are reported separately."
    )
    cross = {
        name: drivetrain.torque_case(pulley, replace(params, M=masses["p1_accel"][0]))
        for name, (m, pulley, params) in masses.items()
    }
    lines.append(
        "cross-check with M from p1_accel: "
        + ", ".join(f"{name} = {_fmt(tq)} N*m" for name, tq in sorted(cross.items()))
    )

    required = drivetrain.torque_case(
        drivetrain.Pulley.P1,
        replace(sc.track, theta=sc.track.theta_cap, accel=sc.track.accel_cap),
    )
    margin = drivetrain.motor_margin(sc.motor, required)
    lines += [
        "",
        "[motor]",
        f"required track torque (P1, design point) = {_fmt(required)} N*m",
        f"available track torque = {_fmt(margin.available)} N*m",
        f"margin = {_fmt(margin.margin)}",
        f"check = {'pass' if margin.passed else 'FAIL'}",
    ]

    theta_grid = np.linspace(0.0, math.pi / 2.0, 91)
    profile = support.force_profile(sc.support_geom, sc.support_load, theta_grid)
    peak = max(f for _, _, f in profile)
    structural = support.check_structural(peak, sc.support_load)
    lines += [
        "",
        "[support assembly]",
        f"peak actuator load over 0..90 deg = {_fmt(peak)} N",
        f"hinge shear limit = {_fmt(sc.support_load.hinge_shear_limit)} N "
        f"at safety factor {_fmt(sc.support_load.safety_factor)}",
        f"margin = {_fmt(structural.margin)}",
        f"check = {'pass' if structural.passed else 'FAIL'}",
    ]
    return lines


def _cmd_design(args) -> int:
    sc = _load(args)
    out = _out_dir(args, sc)
    _design_outputs(sc, out)
    print(f"design artifacts written to {out}")
    return 0


def _run_climb(sc: Scenario) -> stairsim.Trajectory:
    return stairsim.run_climb(sc.sim, sc.stairs, sc.motor.available_track_torque)


def _sim_outputs(out: Path, sc: Scenario, traj: stairsim.Trajectory) -> None:
    _write_csv(
        out / "trajectory.csv",
        ["t_s", "phase", "s_m", "v_mps", "plate_angle_deg", "torque_nm", "events"],
        stairsim.trajectory_rows(traj),
    )
    with open(out / "sim_events.jsonl", "w") as fh:
        for t, name in traj.events:
            fh.write(json.dumps({"t": float(_fmt(t)), "event": name}) + "\n")
    final = traj.final
    lines = [
        f"scenario: {sc.name}",
        f"completed = {traj.completed}",
        f"fall = {traj.fall}",
        f"final position = {_fmt(final.s)} m of {_fmt(stairsim.path_end(sc.stairs, sc.sim))} m",
        f"final time = {_fmt(final.t)} s",
        f"peak track torque = {_fmt(traj.peak_torque)} N*m",
        f"max speed overall = {_fmt(traj.max_speed())} m/s",
    ]
    for phase in stairsim.Phase:
        if any(st.phase is phase for st in traj.states):
            lines.append(f"max speed {phase.value} = {_fmt(traj.max_speed(phase))} m/s")
    (out / "sim_summary.txt").write_text("\n".join(lines) + "\n")


def _cmd_sim(args) -> int:
    sc = _load(args)
    out = _out_dir(args, sc)
    traj = _run_climb(sc)
    _sim_outputs(out, sc, traj)
    if traj.fall or not traj.completed:
        print(f"simulation failed (completed={traj.completed}, fall={traj.fall}); see {out}")
        return 2
    print(f"sim artifacts written to {out}")
    return 0


def _cmd_sweep(args) -> int:
    sc = _load(args)
    out = _out_dir(args, sc)
    probes: list[stairsim.SweepProbe] = []
    try:
        best = stairsim.min_torque_sweep(sc.sim, sc.stairs, probes=probes)
    except stairsim.Unclimbable as exc:
        _write_sweep_csv(out, probes)
        print(f"sweep failed: {exc}")
        return 2
    _write_sweep_csv(out, probes)
    static = drivetrain.min_static_torque(replace(sc.track, theta=sc.stairs.inclination))
    lines = [
        f"scenario: {sc.name}",
        f"min climbing torque = {_fmt(best)} N*m per track",
        f"static equilibrium bound = {_fmt(static)} N*m",
        f"motor limit at track = {_fmt(sc.motor.available_track_torque)} N*m",
        f"probes = {len(probes)}",
    ]
    (out / "sweep_summary.txt").write_text("\n".join(lines) + "\n")
    print(f"sweep artifacts written to {out}")
    return 0


def _write_sweep_csv(out: Path, probes) -> None:
    _write_csv(
        out / "sweep.csv",
        ["torque_nm", "completed", "fall", "final_v_mps"],
        [(p.torque, str(p.completed).lower(), str(p.fall).lower(), p.final_v) for p in probes],
    )


def _cmd_teleop(args) -> int:
    sc = _load(args)
    out = _out_dir(args, sc)
    if sc.event_log is None:
        raise ConfigError("teleop requires teleop.event_log in the scenario")
    try:
        events = list(read_event_log(sc.event_log))
    except OSError as exc:
        raise ConfigError(str(exc)) from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if sc.sonar_log is not None:
        sonar = read_sonar_log(sc.sonar_log, sc.sonar_max_range, sc.sonar_threshold)
        events.extend(SonarUpdate(t, triple) for t, triple in sonar)
    events.sort(key=lambda e: e.t)  # stable: ties keep file order, sonar last

    commands = run_events(events, sc.arbiter)
    with open(out / "commands.jsonl", "w") as fh:
        for t, cmd in commands:
            fh.write(json.dumps(command_to_dict(t, cmd)) + "\n")
    (out / "protocol.txt").write_text("\n".join(protocol_lines(commands)) + "\n")

    by_mode: dict[str, int] = {}
    stops = 0
    for _, cmd in commands:
        by_mode[cmd.mode.value] = by_mode.get(cmd.mode.value, 0) + 1
        stops += cmd.stopped
    lines = [
        f"scenario: {sc.name}",
        f"events = {len(events)}",
        f"commands = {len(commands)}",
        "commands by mode: "
        + (", ".join(f"{m} = {n}" for m, n in sorted(by_mode.items())) or "none"),
        f"stop commands = {stops}",
    ]
    (out / "teleop_summary.txt").write_text("\n".join(lines) + "\n")
    print(f"teleop artifacts written to {out}")
    return 0


def _tracking_check_lines(seed: int) -> list[str]:
    rng = np.random.default_rng(seed)
    tex = random_texture(rng)
    shift = (float(rng.uniform(-2.5, 2.5)), float(rng.uniform(-2.5, 2.5)))
    prev = render_texture(tex, 96, 96)
    nxt = render_texture(tex, 96, 96, shift=shift)
    start = TrackedPoint(48.0, 48.0)
    tracked = fb_track(prev, nxt, start, LkParams())
    lines = [
        "",
        "[tracking self-check]",
        f"seed = {seed}",
        f"true shift = ({_fmt(shift[0])}, {_fmt(shift[1])}) px",
    ]
    if tracked.lost:
        lines.append("tracking self-check = FAIL (lost)")
        return lines
    err = math.hypot(tracked.x - 48.0 - shift[0], tracked.y - 48.0 - shift[1])
    bearing = pixel_to_bearing(tracked.x, 96)
    lines += [
        f"recovered shift = ({_fmt(tracked.x - 48.0)}, {_fmt(tracked.y - 48.0)}) px",
        f"error = {_fmt(err)} px",
        f"bearing of tracked point = {_fmt(math.degrees(bearing))} deg",
        f"tracking self-check = {'pass' if err <= 0.1 else 'FAIL'}",
    ]
    return lines


def _cmd_report(args) -> int:
    sc = _load(args)
    out = _out_dir(args, sc)

    _design_outputs(sc, out)
    traj = _run_climb(sc)
    _sim_outputs(out, sc, traj)

    probes: list[stairsim.SweepProbe] = []
    sweep_failed = False
    try:
        best = stairsim.min_torque_sweep(sc.sim, sc.stairs, probes=probes)
    except stairsim.Unclimbable:
        best = None
        sweep_failed = True
    _write_sweep_csv(out, probes)

    lines = _design_lines(sc)
    lines += [
        "",
        "[climb simulation]",
        f"completed = {traj.completed}",
        f"fall = {traj.fall}",
        f"peak track torque = {_fmt(traj.peak_torque)} N*m",
        f"max speed overall = {_fmt(traj.max_speed())} m/s",
        "",
        "[minimum torque sweep]",
        "result = "
        + ("unclimbable within the horizon" if best is None else f"{_fmt(best)} N*m per track"),
    ]

    pcfg = power.PowerConfig()
    times = [st.t for st in traj.states]
    shaft = [st.track_torque / sc.motor.reduction for st in traj.states]
    currents = [power.motor_current(tq, pcfg) for tq in shaft]
    report = power.check_driver(times, currents, pcfg)
    avg = sum(currents) / len(currents)
    lines += [
        "",
        "[power]",
        f"motor torque constant = {_fmt(pcfg.k_t)} N*m/A",
        f"per-motor peak current = {_fmt(report.peak)} A "
        f"(limit {_fmt(pcfg.peak_current_limit)} A)",
        f"per-motor worst 1-s average = {_fmt(report.max_window_avg)} A "
        f"(limit {_fmt(pcfg.avg_current_limit)} A)",
        f"driver check = {'pass' if report.passed else 'FAIL'}",
        f"mean per-motor current over the climb = {_fmt(avg)} A",
        f"drive runtime at twice that draw (both motors) = "
        f"{_fmt(power.runtime_estimate(max(2.0 * avg, 1e-9), pcfg))} h",
    ]

    lines += _tracking_check_lines(args.seed)
    (out / "report.txt").write_text("\n".join(lines) + "\n")
    print(f"report written to {out / 'report.txt'}")
    return 2 if (traj.fall or not traj.completed or sweep_failed) else 0


def _design_outputs(sc: Scenario, out: Path) -> None:
    theta_grid = np.linspace(0.0, math.pi / 2.0, 91)
    profile = support.force_profile(sc.support_geom, sc.support_load, theta_grid)
    _write_csv(
        out / "force_profile.csv",
        ["theta_deg", "gamma_deg", "force_n"],
        [(math.degrees(t), math.degrees(g), f) for t, g, f in profile],
    )
    rows = []
    for theta in np.linspace(0.0, sc.track.theta_cap, 41):
        p = replace(sc.track, theta=float(theta), accel=sc.track.accel_cap)
        rows.append(
            (
                math.degrees(theta),
                drivetrain.torque_case(drivetrain.Pulley.P1, p),
                drivetrain.torque_case(drivetrain.Pulley.P3, p),
            )
        )
    _write_csv(out / "torque_vs_theta.csv", ["theta_deg", "torque_p1_nm", "torque_p3_nm"], rows)
    (out / "design_report.txt").write_text("\n".join(_design_lines(sc)) + "\n")


def main(argv=None) -> int:
    parser = _Parser(prog="stairclimber", description=__doc__.splitlines()[0])
    common = _Parser(add_help=False)
    common.add_argument("--scenario", help="scenario JSON file (defaults built in)")
    common.add_argument("--out", help="output directory (default runs/<name>)")
    common.add_argument("--seed", type=int, default=0, help="seed for synthetic frames")
    common.add_argument("--dt", type=float, default=None, help="override sim step, s")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    handlers = {
        "design": _cmd_design,
        "sim": _cmd_sim,
        "sweep": _cmd_sweep,
        "teleop": _cmd_teleop,
        "report": _cmd_report,
    }
    for name, fn in handlers.items():
        sub.add_parser(name, parents=[common]).set_defaults(handler=fn)

    try:
        args = parser.parse_args(argv)
        return args.handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (stairsim.Unclimbable,) as exc:
        print(f"simulation failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
