"""Pyramidal Lucas-Kanade point tracking with a forward-backward check.

One point is tracked from frame to frame by iterative least squares on the
local brightness constraint, coarse-to-fine over a box-downsampled pyramid.
A track survives only if tracking the result backwards lands near the start
point; otherwise, or when the window leaves the frame or the local gradient
structure degenerates, the point is reported Lost and tracking stops.  No
exceptions are raised for lost tracks: losing the target is a normal
outcome, not an error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .frames import Frame

__all__ = ["LkParams", "TrackStatus", "TrackedPoint", "lk_track", "fb_track"]


@dataclass(frozen=True)
class LkParams:
    window: int = 15           # odd side length of the correlation window, px
    levels: int = 3            # pyramid depth cap; level 0 is full resolution
    max_iters: int = 30
    epsilon: float = 0.01      # stop when the update step is shorter than this, px
    min_eig: float = 1e-6      # floor on the windowed gradient tensor's min
                               # eigenvalue, per pixel; below it the solve is
                               # treated as degenerate
    fb_threshold: float = 1.0  # max forward-backward return distance, px

    def __post_init__(self):
        if self.window < 3 or self.window % 2 == 0:
            raise ValueError(f"window must be odd and >= 3 (got {self.window})")
        if self.levels < 1:
            raise ValueError(f"levels must be >= 1 (got {self.levels})")
        if self.max_iters < 1 or self.epsilon <= 0 or self.fb_threshold <= 0:
            raise ValueError("max_iters, epsilon, fb_threshold must be positive")

    @property
    def half(self) -> int:
        return self.window // 2


class TrackStatus(Enum):
    TRACKING = "tracking"
    LOST = "lost"


@dataclass(frozen=True)
class TrackedPoint:
    x: float
    y: float
    status: TrackStatus = TrackStatus.TRACKING

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)

    @property
    def lost(self) -> bool:
        return self.status is TrackStatus.LOST


class _TrackFail(Exception):
    """Internal: window left the image or the solve degenerated."""


def _pyramid(px: np.ndarray, levels: int, min_size: int) -> list[np.ndarray]:
    pyr = [px]
    while len(pyr) < levels:
        h, w = pyr[-1].shape
        if h // 2 < min_size or w // 2 < min_size:
            break
        trimmed = pyr[-1][: (h // 2) * 2, : (w // 2) * 2]
        pyr.append(trimmed.reshape(h // 2, 2, w // 2, 2).mean(axis=(1, 3)))
    return pyr


def _gradients(px: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    gx = np.zeros_like(px)
    gy = np.zeros_like(px)
    gx[:, 1:-1] = (px[:, 2:] - px[:, :-2]) / 2.0
    gy[1:-1, :] = (px[2:, :] - px[:-2, :]) / 2.0
    return gx, gy


def _window_fits(x: float, y: float, shape: tuple[int, int], hw: int) -> bool:
    # keep the whole window inside the region where central-difference
    # gradients and bilinear lookups are valid
    h, w = shape
    tol = 1e-9
    return (
        x - hw >= 1.0 - tol
        and y - hw >= 1.0 - tol
        and x + hw <= w - 2.0 + tol
        and y + hw <= h - 2.0 + tol
    )


def _bilinear(img: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    h, w = img.shape
    x0 = np.clip(np.floor(xs).astype(int), 0, w - 2)
    y0 = np.clip(np.floor(ys).astype(int), 0, h - 2)
    fx = xs - x0
    fy = ys - y0
    return (
        img[y0, x0] * (1 - fx) * (1 - fy)
        + img[y0, x0 + 1] * fx * (1 - fy)
        + img[y0 + 1, x0] * (1 - fx) * fy
        + img[y0 + 1, x0 + 1] * fx * fy
    )


def _patch_grid(x: float, y: float, hw: int) -> tuple[np.ndarray, np.ndarray]:
    offs = np.arange(-hw, hw + 1, dtype=float)
    gx, gy = np.meshgrid(x + offs, y + offs)
    return gx, gy


def _lk_level(
    prev_px: np.ndarray,
    next_px: np.ndarray,
    grads: tuple[np.ndarray, np.ndarray],
    px: float,
    py: float,
    guess: tuple[float, float],
    p: LkParams,
) -> tuple[float, float]:
    """Refine the displacement at one pyramid level; raises _TrackFail."""
    hw = p.half
    if not _window_fits(px, py, prev_px.shape, hw):
        raise _TrackFail("template window outside image")
    tx, ty = _patch_grid(px, py, hw)
    template = _bilinear(prev_px, tx, ty)
    ix = _bilinear(grads[0], tx, ty)
    iy = _bilinear(grads[1], tx, ty)

    gxx = float((ix * ix).sum())
    gxy = float((ix * iy).sum())
    gyy = float((iy * iy).sum())
    half_trace = (gxx + gyy) / 2.0
    radius = math.hypot((gxx - gyy) / 2.0, gxy)
    n_pix = (2 * hw + 1) ** 2
    if (half_trace - radius) / n_pix < p.min_eig:
        raise _TrackFail("degenerate gradient structure")
    det = gxx * gyy - gxy * gxy

    dx, dy = guess
    for _ in range(p.max_iters):
        qx, qy = px + dx, py + dy
        if not _window_fits(qx, qy, next_px.shape, hw):
            raise _TrackFail("search window outside image")
        sx, sy = _patch_grid(qx, qy, hw)
        diff = _bilinear(next_px, sx, sy) - template
        bx = float((diff * ix).sum())
        by = float((diff * iy).sum())
        step_x = -(gyy * bx - gxy * by) / det
        step_y = -(gxx * by - gxy * bx) / det
        dx += step_x
        dy += step_y
        if math.hypot(step_x, step_y) < p.epsilon:
            break
    if not _window_fits(px + dx, py + dy, next_px.shape, hw):
        raise _TrackFail("converged outside image")
    return dx, dy


def lk_track(
    prev: Frame,
    next_frame: Frame,
    point: tuple[float, float],
    params: LkParams | None = None,
) -> tuple[float, float] | None:
    """Track one point from prev to next_frame; None when the track fails.

    Coarse-to-fine: the displacement found at each pyramid level, doubled,
    seeds the next finer level.
    """
    if params is None:
        params = LkParams()
    min_size = params.window + 2
    pyr_prev = _pyramid(prev.pixels, params.levels, min_size)
    pyr_next = _pyramid(next_frame.pixels, params.levels, min_size)
    depth = min(len(pyr_prev), len(pyr_next))
    x, y = point

    dx, dy = 0.0, 0.0
    try:
        for level in reversed(range(depth)):
            scale = 2.0**level
            grads = _gradients(pyr_prev[level])
            dx, dy = _lk_level(
                pyr_prev[level],
                pyr_next[level],
                grads,
                x / scale,
                y / scale,
                (dx, dy),
                params,
            )
            if level > 0:
                dx *= 2.0
                dy *= 2.0
    except _TrackFail:
        return None
    return (x + dx, y + dy)


def fb_track(
    prev: Frame,
    next_frame: Frame,
    point: TrackedPoint,
    params: LkParams | None = None,
) -> TrackedPoint:
    """Advance a tracked point by one frame with a forward-backward gate.

    The point is tracked prev->next, then the result is tracked back
    next->prev; if the round trip misses the start by more than
    fb_threshold, or either direction fails, the point is marked Lost at
    its last known position.
    """
    if params is None:
        params = LkParams()
    if point.lost:
        return point
    forward = lk_track(prev, next_frame, point.position, params)
    if forward is None:
        return replace(point, status=TrackStatus.LOST)
    backward = lk_track(next_frame, prev, forward, params)
    if backward is None:
        return replace(point, status=TrackStatus.LOST)
    if math.dist(backward, point.position) > params.fb_threshold:
        return replace(point, status=TrackStatus.LOST)
    return TrackedPoint(forward[0], forward[1], TrackStatus.TRACKING)
