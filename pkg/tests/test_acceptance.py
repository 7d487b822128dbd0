"""End-to-end acceptance checks.

Each test covers one acceptance criterion and prints a single PASS/FAIL
line with the key measured figure, visible even under captured output.
"""

import csv
import json
import math
import time
from contextlib import contextmanager
from dataclasses import replace
from itertools import combinations
from pathlib import Path

import numpy as np
import pytest

from stairclimber.cli import main
from stairclimber.control import DriveCommand, avoidance_policy
from stairclimber.drivetrain import (
    GearDesign,
    MotorSpec,
    Pulley,
    TrackParams,
    back_solve_mass,
    contact_ratio,
    min_pinion_teeth,
    min_static_torque,
    torque_case,
)
from stairclimber.eeg import LoessConfig, loess_smooth
from stairclimber.perception import (
    SonarTriple,
    TrackedPoint,
    fb_track,
    random_texture,
    region_map,
    render_texture,
)
from stairclimber.scenario import build_scenario
from stairclimber.stairsim import min_torque_sweep, pitch_at, run_climb
from stairclimber.support import (
    SupportGeometry,
    SupportLoad,
    actuator_force,
    gamma_residual,
    solve_gamma,
)

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"
BASELINE = str(SCENARIOS / "baseline40.json")
FLAT = str(SCENARIOS / "flat_ground.json")
REPLAY = str(SCENARIOS / "teleop_replay.json")


@contextmanager
def criterion(capfd, number, label):
    detail = {}
    status = "FAIL"
    try:
        yield detail
        status = "PASS"
    finally:
        note = f" ({detail['note']})" if "note" in detail else ""
        with capfd.disabled():
            print(f"criterion {number:02d} {label}: {status}{note}", flush=True)


def test_c01_gear_sizing(capfd):
    with criterion(capfd, 1, "gear sizing") as detail:
        teeth = min_pinion_teeth(math.radians(20.0), 1.0)
        assert teeth == 18
        gear = GearDesign(math.radians(20.0), 1.0, 4.0, teeth)
        assert gear.pitch_diameter_mm == pytest.approx(72.0, abs=1e-9)
        mc = contact_ratio(gear)
        assert mc == pytest.approx(1.75, abs=0.01)
        detail["note"] = f"18 teeth, 72 mm, m_c = {mc:.4f}"


def test_c02_torque_cases(capfd, tmp_path):
    with criterion(capfd, 2, "track torque cases") as detail:
        accel = TrackParams(M=97.0, R=0.05, r=0.036, theta=math.radians(40.0), accel=0.5)
        static = replace(accel, accel=0.0)
        cases = [
            (Pulley.P1, accel, 35.8, 0.01),
            (Pulley.P3, accel, 25.0, 0.04),
            (Pulley.P3, static, 22.0, 0.01),
        ]
        masses = []
        for pulley, params, target, tol in cases:
            mass = back_solve_mass(pulley, target, params)
            masses.append(mass)
            forward = torque_case(pulley, replace(params, M=mass))
            assert abs(forward - target) / target <= tol
        # the published figures do not share one mass; cross-checking the
        # accelerating cases at the first mass stays inside the loose band
        cross = torque_case(Pulley.P3, replace(accel, M=masses[0]))
        assert abs(cross - 25.0) / 25.0 <= 0.04
        assert min_static_torque(replace(static, M=masses[2])) == pytest.approx(22.0, rel=0.01)
        out = tmp_path / "design"
        assert main(["design", "--out", str(out)]) == 0
        report = (out / "design_report.txt").read_text()
        for mass in masses:
            assert f"{mass:.9g}"[:9] in report
        assert "not mutually consistent" in report
        detail["note"] = "masses " + ", ".join(f"{m:.1f} kg" for m in masses)


def test_c03_minimum_torque_sweep(capfd):
    with criterion(capfd, 3, "minimum torque sweep") as detail:
        sc = build_scenario(
            {
                "staircase": {"ramp_length_m": 0.55, "approach_length_m": 0.0},
                "sim": {"track_zone_m": 0.15, "level_run_m": 0.0, "duration_s": 10.0},
            }
        )
        # frictionless: the static bound itself completes the climb
        ideal = min_torque_sweep(sc.sim, sc.stairs)
        static = min_static_torque(sc.track)
        assert static <= ideal <= 1.02 * static

        loaded = replace(sc.sim, rolling_resist_coeff=0.13)
        start = time.monotonic()
        result = min_torque_sweep(loaded, sc.stairs)
        elapsed = time.monotonic() - start
        assert abs(result - 25.4) / 25.4 <= 0.05
        assert elapsed < 10.0
        detail["note"] = f"{result:.3f} N*m per track in {elapsed:.1f} s"


def test_c04_support_linkage(capfd):
    with criterion(capfd, 4, "support linkage solve") as detail:
        geom = SupportGeometry(a=0.335, b=0.225, h=0.60)
        load = SupportLoad()
        gamma0 = solve_gamma(0.0, geom)
        assert gamma0 == pytest.approx(math.pi / 2, abs=1e-9)
        gamma_up = solve_gamma(math.pi / 2, geom)
        assert abs(actuator_force(math.pi / 2, gamma_up, geom, load)) <= 1e-9
        worst = 0.0
        for deg in range(91):
            theta = math.radians(deg)
            gamma = solve_gamma(theta, geom)
            worst = max(worst, abs(gamma_residual(gamma, theta, geom)))
        assert worst <= 1e-9
        detail["note"] = f"max residual {worst:.2e}"


def test_c05_smoothing(capfd):
    with criterion(capfd, 5, "local regression smoothing") as detail:
        cfg = LoessConfig(span=0.35)
        ts = np.arange(30.0)
        affine = [(t, 4.0 * t - 7.0) for t in ts]
        for (t, _), (_, y) in zip(affine, loess_smooth(affine, cfg)):
            assert y == pytest.approx(4.0 * t - 7.0, abs=1e-9)

        rng = np.random.default_rng(21)
        tt = np.cumsum(rng.uniform(0.5, 1.5, size=45))
        yy = 50.0 + 25.0 * np.sin(tt / 4.0) + rng.normal(0.0, 3.0, size=45)
        yy[12] += 70.0
        yy[33] -= 65.0
        series = list(zip(tt, yy))
        smoothed = loess_smooth(series, cfg)
        worst = 0.0
        q = min(len(tt), max(3, math.ceil(cfg.span * len(tt))))
        for i in range(len(tt)):
            d = np.abs(tt - tt[i])
            h = np.sort(d)[q - 1]
            w = (1.0 - np.minimum(d / h, 1.0) ** 3) ** 3
            X = np.column_stack([np.ones(len(tt)), tt])
            coef = np.linalg.solve(X.T @ (w[:, None] * X), X.T @ (w * yy))
            worst = max(worst, abs(smoothed[i][1] - (coef[0] + coef[1] * tt[i])))
        assert worst <= 1e-9
        detail["note"] = f"oracle gap {worst:.2e}"


def test_c06_feature_tracking(capfd):
    with criterion(capfd, 6, "feature tracking") as detail:
        rng = np.random.default_rng(2024)
        start = time.monotonic()
        hits = 0
        for _ in range(50):
            tex = random_texture(rng)
            shift = rng.uniform(-3.0, 3.0, size=2)
            a = render_texture(tex, 96, 96, (0.0, 0.0))
            b = render_texture(tex, 96, 96, (float(shift[0]), float(shift[1])))
            point = fb_track(a, b, TrackedPoint(48.0, 48.0))
            if point.status.value == "tracking":
                err = math.hypot(point.x - 48.0 - shift[0], point.y - 48.0 - shift[1])
                if err <= 0.1:
                    hits += 1
        assert hits >= 48  # 95% of 50

        lost = 0
        for edge in ((90.0, 48.0), (48.0, 90.0), (5.0, 48.0), (48.0, 5.0)):
            tex = random_texture(rng)
            a = render_texture(tex, 96, 96, (0.0, 0.0))
            away = 40.0 if edge[0] > 48.0 or edge[1] > 48.0 else -40.0
            shift = (away, 0.0) if edge[1] == 48.0 else (0.0, away)
            b = render_texture(tex, 96, 96, shift)
            point = fb_track(a, b, TrackedPoint(*edge))
            assert point.lost
            lost += 1
        elapsed = time.monotonic() - start
        assert elapsed < 30.0
        detail["note"] = f"{hits}/50 within 0.1 px, {lost} lost cleanly, {elapsed:.1f} s"


# desired straight ahead against every sensor state
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


def test_c07_avoidance_policy(capfd):
    with criterion(capfd, 7, "obstacle avoidance policy") as detail:
        rng = np.random.default_rng(99)
        straight = DriveCommand(1.0, 1.0)
        checked = 0
        for _ in range(20):
            thr = float(rng.uniform(0.15, 3.5))
            near = float(rng.uniform(0.05, 1.0)) * thr
            clear = thr + float(rng.uniform(0.01, 1.0)) * (4.0 - thr)
            for blocked, expected in AVOIDANCE_TABLE.items():
                triple = SonarTriple(
                    d_left=near if "L" in blocked else clear,
                    d_front=near if "F" in blocked else clear,
                    d_right=near if "R" in blocked else clear,
                    threshold=thr,
                )
                out = avoidance_policy(region_map(triple), straight)
                assert (out.left_effort, out.right_effort) == expected, (
                    sorted(blocked),
                    thr,
                )
                checked += 1
        assert checked == 160
        detail["note"] = f"{checked}/160 states match"


def test_c08_replay_determinism(capfd, tmp_path):
    with criterion(capfd, 8, "replay determinism") as detail:
        pairs = []
        for tag, args in (
            ("sim", ["sim", "--scenario", BASELINE]),
            ("teleop", ["teleop", "--scenario", REPLAY]),
        ):
            out_a = tmp_path / f"{tag}_a"
            out_b = tmp_path / f"{tag}_b"
            assert main(args + ["--out", str(out_a)]) == 0
            assert main(args + ["--out", str(out_b)]) == 0
            names = sorted(p.name for p in out_a.iterdir())
            assert names == sorted(p.name for p in out_b.iterdir())
            for name in names:
                assert (out_a / name).read_bytes() == (out_b / name).read_bytes(), name
            pairs.append(f"{tag}:{len(names)} files")
        detail["note"] = ", ".join(pairs)


def read_speeds(path):
    with open(path, newline="") as fh:
        return [float(row["v_mps"]) for row in csv.DictReader(fh)]


def test_c09_speed_caps(capfd, tmp_path):
    with criterion(capfd, 9, "speed caps") as detail:
        flat_out = tmp_path / "flat"
        assert main(["sim", "--scenario", FLAT, "--out", str(flat_out)]) == 0
        flat_max = max(read_speeds(flat_out / "trajectory.csv"))
        assert flat_max == 3.0

        climb_out = tmp_path / "climb"
        assert main(["sim", "--scenario", BASELINE, "--out", str(climb_out)]) == 0
        climb_max = max(read_speeds(climb_out / "trajectory.csv"))
        assert climb_max <= 0.1
        detail["note"] = f"flat {flat_max:.3f} m/s, stairs {climb_max:.3f} m/s"


def test_c10_energy_accounting(capfd):
    with criterion(capfd, 10, "energy accounting") as detail:
        sc = build_scenario(
            {"staircase": {"approach_length_m": 0.3}, "sim": {"level_run_m": 0.2}}
        )
        assert sc.sim.rolling_resist_coeff == 0.0
        worst = 0.0
        for torque in (26.0, 40.0):
            traj = run_climb(sc.sim, sc.stairs, torque)
            assert traj.completed and not traj.fall
            for prev, nxt in zip(traj.states, traj.states[1:]):
                ds = nxt.s - prev.s
                work = nxt.track_torque / sc.track.r * ds
                pitch = pitch_at(prev.s, sc.stairs, sc.sim)
                dpe = sc.track.M * 9.81 * math.sin(pitch) * ds
                dke = 0.5 * sc.track.M * (nxt.v**2 - prev.v**2)
                slack = (work - dpe - dke) / max(1.0, abs(work))
                worst = min(worst, slack)
                assert slack >= -1e-6
        detail["note"] = f"worst relative slack {worst:.2e}"
