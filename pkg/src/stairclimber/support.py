"""User-support linkage analysis.

The user sits on a cantilever arm hinged to a vertical post and is raised or
lowered by a linear actuator.  Two relations govern the linkage:

* the actuator force needed to hold the arm at elevation ``theta``:

      F = (a + b) * m * g * cos(theta) / sin(gamma)

* a geometric constraint tying the actuator/arm angle ``gamma`` to ``theta``:

      sin(theta + gamma - 90 deg) = 2 b sin(theta/2) cos(gamma + theta/2) / h

where ``a`` is the hinge-to-payload offset along the arm, ``b`` the
hinge-to-actuator attachment distance and ``h`` the actuator base offset.
The constraint is transcendental in ``gamma`` and is solved by bracketed
bisection.

Note on units: the force relation is applied exactly as the linkage was
sized, with ``(a + b)`` in metres and no moment-arm divisor, so its output
carries an extra length dimension (N*m rather than N).  An optional
``moment_arm`` divisor is exposed for callers that want a proper force; it
defaults to 1.0 so the sizing figures are reproduced unchanged.

All angles are radians.  Degree conversion happens only at the CLI boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "SupportGeometry",
    "SupportLoad",
    "StructuralReport",
    "NoRoot",
    "SingularGamma",
    "solve_gamma",
    "gamma_residual",
    "actuator_force",
    "force_profile",
    "check_structural",
]

# Bisection bracket: gamma in (1 deg, 179 deg).  The residual changes sign
# across this bracket for all geometries of interest.
_GAMMA_LO = math.radians(1.0)
_GAMMA_HI = math.radians(179.0)


class NoRoot(ValueError):
    """The angle-constraint residual has no sign change in the bracket."""


class SingularGamma(ValueError):
    """sin(gamma) is too close to zero for the force relation."""


@dataclass(frozen=True)
class SupportGeometry:
    """Link lengths of the support linkage, metres.

    a: hinge to payload centre along the arm
    b: hinge to actuator attachment along the arm
    h: actuator base offset from the hinge
    """

    a: float
    b: float
    h: float

    def __post_init__(self):
        if not (self.a >= 0 and self.b >= 0 and self.h > 0):
            raise ValueError(f"lengths must be positive (a={self.a}, b={self.b}, h={self.h})")


@dataclass(frozen=True)
class SupportLoad:
    """Payload and structural limits for the support assembly."""

    mass: float = 120.0               # kg, design payload
    gravity: float = 9.81             # m/s^2
    hinge_shear_limit: float = 1130.0  # N, allowable shear at the actuator hinge
    safety_factor: float = 1.25

    def __post_init__(self):
        if self.mass <= 0 or self.gravity <= 0:
            raise ValueError("mass and gravity must be positive")
        if self.safety_factor < 1.0:
            raise ValueError(f"safety_factor must be >= 1 (got {self.safety_factor})")


def gamma_residual(gamma: float, theta: float, geom: SupportGeometry) -> float:
    """Residual of the angle constraint; zero at a consistent (theta, gamma)."""
    lhs = math.sin(theta + gamma - math.pi / 2)
    rhs = 2.0 * geom.b * math.sin(theta / 2.0) * math.cos(gamma + theta / 2.0) / geom.h
    return lhs - rhs


def solve_gamma(theta: float, geom: SupportGeometry, tol: float = 1e-12) -> float:
    """Solve the angle constraint for gamma at a given arm elevation theta.

    Bracketed bisection on gamma in (1 deg, 179 deg), iterated until the
    bracket is narrower than ``tol`` radians.  The returned angle satisfies
    the constraint to |residual| <= 1e-9 (much tighter in practice).

    Raises NoRoot if the residual does not change sign across the bracket.
    """
    if not (0.0 <= theta <= math.pi / 2):
        raise ValueError(f"theta must lie in [0, pi/2] (got {theta!r})")
    lo, hi = _GAMMA_LO, _GAMMA_HI
    f_lo = gamma_residual(lo, theta, geom)
    f_hi = gamma_residual(hi, theta, geom)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if f_lo * f_hi > 0.0:
        raise NoRoot(
            f"no sign change on gamma bracket [{math.degrees(lo):.1f} deg, "
            f"{math.degrees(hi):.1f} deg] at theta={math.degrees(theta):.3f} deg "
            f"(residuals {f_lo:.3e}, {f_hi:.3e})"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = gamma_residual(mid, theta, geom)
        if f_mid == 0.0:
            return mid
        if f_lo * f_mid < 0.0:
            hi = mid
        else:
            lo, f_lo = mid, f_mid
    return 0.5 * (lo + hi)


def actuator_force(
    theta: float,
    gamma: float,
    geom: SupportGeometry,
    load: SupportLoad,
    moment_arm: float = 1.0,
) -> float:
    """Actuator force magnitude holding the arm at (theta, gamma).

    Computed as (a + b) * m * g * cos(theta) / sin(gamma) / moment_arm.
    With the default moment_arm = 1.0 this reproduces the as-sized figures;
    see the module docstring for the dimensional caveat.
    """
    s = math.sin(gamma)
    if abs(s) < 1e-12:
        raise SingularGamma(f"sin(gamma) ~ 0 at gamma={gamma!r}")
    return (geom.a + geom.b) * load.mass * load.gravity * math.cos(theta) / s / moment_arm


def force_profile(
    geom: SupportGeometry,
    load: SupportLoad,
    theta_grid: list[float],
    moment_arm: float = 1.0,
) -> list[tuple[float, float, float]]:
    """Force curve over an elevation grid: (theta, gamma, force) per point.

    The grid must be strictly increasing within [0, pi/2].  NoRoot from the
    angle solve propagates, annotated with the offending theta.
    """
    if len(theta_grid) == 0:
        raise ValueError("empty grid")
    for prev, nxt in zip(theta_grid, theta_grid[1:]):
        if not nxt > prev:
            raise ValueError("theta grid must be strictly increasing")
    if theta_grid[0] < 0.0 or theta_grid[-1] > math.pi / 2:
        raise ValueError("theta grid must lie within [0, pi/2]")
    out = []
    for theta in theta_grid:
        try:
            gamma = solve_gamma(theta, geom)
        except NoRoot as exc:
            raise NoRoot(f"theta={math.degrees(theta):.3f} deg: {exc}") from exc
        out.append((theta, gamma, actuator_force(theta, gamma, geom, load, moment_arm)))
    return out


@dataclass(frozen=True)
class StructuralReport:
    passed: bool
    margin: float          # limit / (load * safety_factor); inf when load = 0
    unbounded: bool        # True when the applied load is zero


def check_structural(peak_hinge_load: float, load: SupportLoad) -> StructuralReport:
    """Check the peak hinge shear against the allowable limit.

    Passes iff peak_hinge_load * safety_factor <= hinge_shear_limit.
    A zero load reports an unbounded margin.
    """
    if peak_hinge_load < 0:
        raise ValueError("peak_hinge_load must be >= 0")
    if peak_hinge_load == 0.0:
        return StructuralReport(passed=True, margin=math.inf, unbounded=True)
    demand = peak_hinge_load * load.safety_factor
    return StructuralReport(
        passed=demand <= load.hinge_shear_limit,
        margin=load.hinge_shear_limit / demand,
        unbounded=False,
    )
