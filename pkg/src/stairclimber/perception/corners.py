"""Corner detection and touch-to-corner selection.

Corner score is the minimum eigenvalue of the 2x2 gradient structure tensor
summed over a 3x3 window, followed by strict non-maximum suppression over
the 8-neighbourhood.  Gradients are central differences, so a constant
intensity offset leaves every score unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frames import Frame

__all__ = ["Corner", "NoCorners", "detect_corners", "select_corner"]

# relative quality floor: keep corners scoring at least this fraction of the
# strongest one (same role as the quality level of the classic detector)
DEFAULT_QUALITY = 0.01
_ABS_FLOOR = 1e-9


class NoCorners(ValueError):
    """Corner selection was asked to pick from an empty list."""


@dataclass(frozen=True)
class Corner:
    x: float
    y: float
    score: float

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)


def _gradients(px: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    gx = np.zeros_like(px)
    gy = np.zeros_like(px)
    gx[:, 1:-1] = (px[:, 2:] - px[:, :-2]) / 2.0
    gy[1:-1, :] = (px[2:, :] - px[:-2, :]) / 2.0
    return gx, gy


def _box3(a: np.ndarray) -> np.ndarray:
    """Sum over the 3x3 neighbourhood, zero-padded at the borders."""
    p = np.pad(a, 1)
    c = np.cumsum(np.cumsum(p, axis=0), axis=1)
    c = np.pad(c, ((1, 0), (1, 0)))
    h, w = a.shape
    return c[3 : 3 + h, 3 : 3 + w] - c[3 : 3 + h, :w] - c[:h, 3 : 3 + w] + c[:h, :w]


def min_eig_response(frame: Frame) -> np.ndarray:
    """Per-pixel minimum eigenvalue of the 3x3-window structure tensor."""
    gx, gy = _gradients(frame.pixels)
    sxx = _box3(gx * gx)
    syy = _box3(gy * gy)
    sxy = _box3(gx * gy)
    half_trace = (sxx + syy) / 2.0
    radius = np.sqrt(((sxx - syy) / 2.0) ** 2 + sxy**2)
    return half_trace - radius


def detect_corners(frame: Frame, max_count: int | None = None) -> list[Corner]:
    """Find corners, strongest first.

    Keeps strict local maxima of the min-eigenvalue response above a
    relative quality floor; a uniform frame yields no corners.  Equal scores
    are ordered by row, then column, so the result is deterministic.
    """
    resp = min_eig_response(frame)
    floor = max(_ABS_FLOOR, DEFAULT_QUALITY * float(resp.max(initial=0.0)))
    p = np.pad(resp, 1, constant_values=-np.inf)
    is_peak = resp > floor
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dy == 0 and dx == 0:
                continue
            h, w = resp.shape
            neighbor = p[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w]
            is_peak &= resp > neighbor
    ys, xs = np.nonzero(is_peak)
    order = np.lexsort((xs, ys, -resp[ys, xs]))
    corners = [Corner(float(xs[i]), float(ys[i]), float(resp[ys[i], xs[i]])) for i in order]
    if max_count is not None:
        corners = corners[:max_count]
    return corners


def select_corner(corners: list[Corner], touch: tuple[float, float]) -> Corner:
    """Pick the corner nearest a touch point.

    Ties on distance go to the higher score, then to the earlier list
    position, so repeated selections on the same input agree.
    """
    if not corners:
        raise NoCorners("no corners to select from")
    tx, ty = touch
    best = None
    best_key = None
    for idx, c in enumerate(corners):
        d2 = (c.x - tx) ** 2 + (c.y - ty) ** 2
        key = (d2, -c.score, idx)
        if best_key is None or key < best_key:
            best, best_key = c, key
    return best
