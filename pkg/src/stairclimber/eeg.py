"""EEG-driven posture control: stream parsing, LOESS smoothing, hysteresis.

The headset streams attention/meditation values scaled 1..100 over a serial
link.  The wire format here is a minimal stand-in for the headset protocol
(the real device speaks a vendor protocol; this one keeps the same shape):

    0xAA 0xAA | LEN | PAYLOAD[LEN] | SUM

with LEN = 2 (attention byte, meditation byte) and SUM the additive
checksum (LEN + payload bytes) mod 256.  The parser tolerates arbitrary
chunking and resynchronises on the next sync pair after corruption; bad
frames are dropped, never raised.

The meditation series is pre-smoothed with LOESS (locally weighted linear
regression, tricube weights) before driving the seat: raw headset values are
spiky and a single outlier must not toggle the actuators.  The posture
controller is a hysteresis band on the smoothed value: at or above the high
threshold the seat raises, at or below the low threshold it lowers, and in
between it holds its previous state.  Thresholds default to 60/40, symmetric
about the scale midpoint with a dead band wide enough to reject smoothed
noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "EegRecord",
    "EegStreamParser",
    "LoessConfig",
    "TooFewPoints",
    "loess_smooth",
    "PostureState",
    "PostureController",
    "posture_transition",
    "encode_frame",
]

SYNC = 0xAA
_PAYLOAD_LEN = 2


class TooFewPoints(ValueError):
    """Not enough samples for the requested local regression window."""


@dataclass(frozen=True)
class EegRecord:
    t: float
    attention: int   # 1..100
    meditation: int  # 1..100

    def __post_init__(self):
        for name in ("attention", "meditation"):
            v = getattr(self, name)
            if not 1 <= v <= 100:
                raise ValueError(f"{name} must lie in [1, 100] (got {v})")


def _clamp_scale(raw: int) -> int:
    return min(100, max(1, raw))


def encode_frame(attention: int, meditation: int) -> bytes:
    """Build one wire frame; the counterpart of the parser, used in tests/replay."""
    payload = bytes([attention & 0xFF, meditation & 0xFF])
    checksum = (_PAYLOAD_LEN + sum(payload)) & 0xFF
    return bytes([SYNC, SYNC, _PAYLOAD_LEN]) + payload + bytes([checksum])


class EegStreamParser:
    """Incremental frame parser for one headset stream (single owner).

    feed() accepts any chunking of the byte stream and returns the records
    completed by that chunk.  Record timestamps count frames: the n-th valid
    frame gets t = n * dt.
    """

    def __init__(self, dt: float = 1.0):
        self._buf = bytearray()
        self._count = 0
        self.dt = dt
        self.checksum_failures = 0

    def feed(self, data: bytes) -> list[EegRecord]:
        self._buf.extend(data)
        records: list[EegRecord] = []
        while True:
            start = self._buf.find(bytes([SYNC, SYNC]))
            if start < 0:
                # keep a trailing lone sync byte, drop the rest
                keep = 1 if self._buf and self._buf[-1] == SYNC else 0
                del self._buf[: len(self._buf) - keep]
                break
            if start > 0:
                del self._buf[:start]
            frame_len = 2 + 1 + _PAYLOAD_LEN + 1
            if len(self._buf) < frame_len:
                break
            length = self._buf[2]
            payload = self._buf[3 : 3 + _PAYLOAD_LEN]
            checksum = self._buf[3 + _PAYLOAD_LEN]
            ok = length == _PAYLOAD_LEN and (length + sum(payload)) & 0xFF == checksum
            if ok:
                records.append(
                    EegRecord(
                        t=self._count * self.dt,
                        attention=_clamp_scale(payload[0]),
                        meditation=_clamp_scale(payload[1]),
                    )
                )
                self._count += 1
                del self._buf[:frame_len]
            else:
                self.checksum_failures += 1
                # skip past the first sync byte and rescan
                del self._buf[:1]
        return records


@dataclass(frozen=True)
class LoessConfig:
    """Local regression settings: tricube weights, straight-line local fits."""

    span: float = 0.3  # fraction of points in each local window
    degree: int = 1    # only degree-1 fits are supported

    def __post_init__(self):
        if not 0.0 < self.span <= 1.0:
            raise ValueError(f"span must lie in (0, 1] (got {self.span})")
        if self.degree != 1:
            raise ValueError("only degree-1 local fits are supported")

    def window(self, n: int) -> int:
        # window never shrinks below degree + 2 points
        return min(n, max(self.degree + 2, math.ceil(self.span * n)))


def loess_smooth(
    series: list[tuple[float, float]] | np.ndarray,
    cfg: LoessConfig | None = None,
) -> list[tuple[float, float]]:
    """Smooth a (t, value) series with locally weighted linear regression.

    Each point is re-estimated from a weighted straight-line fit over its
    nearest-neighbour window (tricube weights, zero at the window edge).
    Output length equals input length and t values are echoed unchanged.
    Requires >= 3 points with strictly increasing t.
    """
    if cfg is None:
        cfg = LoessConfig()
    arr = np.asarray(series, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("series must be a sequence of (t, value) pairs")
    n = arr.shape[0]
    if n < cfg.degree + 2:
        raise TooFewPoints(f"need at least {cfg.degree + 2} points (got {n})")
    t = arr[:, 0]
    y = arr[:, 1]
    if not np.all(np.diff(t) > 0):
        raise ValueError("t must be strictly increasing")

    q = cfg.window(n)
    out = np.empty(n)
    for i in range(n):
        d = np.abs(t - t[i])
        h = np.partition(d, q - 1)[q - 1]
        if h == 0.0:
            out[i] = y[i]
            continue
        u = np.minimum(d / h, 1.0)
        w = (1.0 - u**3) ** 3
        out[i] = _weighted_line_at(t, y, w, t[i])
    return [(float(ti), float(yi)) for ti, yi in zip(t, out)]


def _weighted_line_at(x: np.ndarray, y: np.ndarray, w: np.ndarray, x0: float) -> float:
    """Weighted least-squares line through (x, y), evaluated at x0.

    Centred closed form: slope from weighted covariances about the weighted
    means.  Falls back to the weighted mean when the x spread degenerates.
    """
    sw = w.sum()
    xm = (w * x).sum() / sw
    ym = (w * y).sum() / sw
    dx = x - xm
    sxx = (w * dx * dx).sum()
    if sxx <= 1e-12 * sw * max(1.0, xm * xm):
        return ym
    slope = (w * dx * (y - ym)).sum() / sxx
    return ym + slope * (x0 - xm)


class PostureState(Enum):
    RAISING = "raising"
    LOWERING = "lowering"
    HOLDING = "holding"


def posture_transition(
    value: float, state: PostureState, lo: float = 40.0, hi: float = 60.0
) -> PostureState:
    """One step of the hysteresis band as a pure function."""
    if not 1.0 <= value <= 100.0:
        raise ValueError(f"value must lie in [1, 100] (got {value})")
    if value >= hi:
        return PostureState.RAISING
    if value <= lo:
        return PostureState.LOWERING
    return state  # dead band keeps the previous state


class PostureController:
    """Hysteresis band turning a smoothed meditation value into a seat rate.

    value >= hi  -> raising; value <= lo -> lowering; otherwise the previous
    state is kept.  Exactly one state is active at a time, so the same input
    sequence can never command raise and lower at the same position.
    """

    def __init__(self, lo: float = 40.0, hi: float = 60.0, rate: float = 1.0):
        if not lo < hi:
            raise ValueError(f"need lo < hi (got {lo}, {hi})")
        if rate <= 0:
            raise ValueError("rate must be positive")
        self.lo = lo
        self.hi = hi
        self.rate = rate
        self.state = PostureState.HOLDING

    def update(self, value: float) -> float:
        """Consume one smoothed value, return the actuator rate command."""
        self.state = posture_transition(value, self.state, self.lo, self.hi)
        if self.state is PostureState.RAISING:
            return self.rate
        if self.state is PostureState.LOWERING:
            return -self.rate
        return 0.0
