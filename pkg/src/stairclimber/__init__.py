"""Design analysis and simulation toolkit for a tracked stair-climbing
rehabilitation platform.

The package splits along the machine's subsystems:

- support:    seat/backrest linkage geometry and actuator force sizing
- drivetrain: track pulley torques, gear geometry, belt tensions, motor fit
- stairsim:   staircase climb dynamics with speed caps and plate leveling
- eeg:        headset stream parsing, LOESS smoothing, posture hysteresis
- perception: sonar occupancy regions, corners, point tracking, bearings
- control:    teleoperation mode arbitration and command pipeline
- power:      battery banks, motor current, driver limits, runtime
- scenario:   JSON scenario configs tying the modules together
- cli:        scenario runner (design / sim / sweep / teleop / report)
"""

from . import control, drivetrain, eeg, perception, power, scenario, stairsim, support
from .drivetrain import GearDesign, MotorSpec, Pulley, TrackParams
from .scenario import Scenario, load_scenario
from .stairsim import SimConfig, Staircase
from .support import SupportGeometry, SupportLoad

__version__ = "0.1.0"

__all__ = [
    "control",
    "drivetrain",
    "eeg",
    "perception",
    "power",
    "scenario",
    "stairsim",
    "support",
    "GearDesign",
    "MotorSpec",
    "Pulley",
    "TrackParams",
    "Scenario",
    "load_scenario",
    "SimConfig",
    "Staircase",
    "SupportGeometry",
    "SupportLoad",
    "__version__",
]
