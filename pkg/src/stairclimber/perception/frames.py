"""Grayscale frames, PGM fixture I/O, synthetic textures and bearing math.

Frames carry float64 intensities in [0, 1] and are frozen after
construction.  The synthetic texture is a band-limited sum of cosine waves:
it can be sampled at arbitrary subpixel positions, which gives tracking
tests an exact ground truth for any fractional shift.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Frame",
    "read_pgm",
    "write_pgm",
    "CosineTexture",
    "random_texture",
    "render_texture",
    "pixel_to_bearing",
    "DEFAULT_HFOV",
]

# horizontal field of view of the onboard camera stand-in, config-overridable
DEFAULT_HFOV = math.radians(53.5)

MIN_TRACKING_SIZE = 16


@dataclass(frozen=True)
class Frame:
    """One grayscale image: float64 intensities in [0, 1], row-major."""

    pixels: np.ndarray
    timestamp: float = 0.0

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=float)
        if px.ndim != 2:
            raise ValueError(f"pixels must be 2-D (got shape {px.shape})")
        if not np.all(np.isfinite(px)):
            raise ValueError("pixels must be finite")
        if px.min() < 0.0 or px.max() > 1.0:
            raise ValueError("intensities must lie in [0, 1]")
        px = np.ascontiguousarray(px)
        px.flags.writeable = False
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def trackable(self) -> bool:
        return self.width >= MIN_TRACKING_SIZE and self.height >= MIN_TRACKING_SIZE


def read_pgm(path) -> Frame:
    """Read a binary (P5) 8-bit PGM file; '#' comment lines are skipped."""
    with open(path, "rb") as fh:
        data = fh.read()
    # header: magic, width, height, maxval as whitespace-separated tokens,
    # comments run from '#' to end of line
    tokens: list[bytes] = []
    pos = 0
    while len(tokens) < 4:
        m = re.compile(rb"\s*(#[^\n]*\n|\S+)").match(data, pos)
        if m is None:
            raise ValueError("truncated header")
        pos = m.end()
        tok = m.group(1)
        if not tok.startswith(b"#"):
            tokens.append(tok)
    if tokens[0] != b"P5":
        raise ValueError(f"not a binary PGM (magic {tokens[0]!r})")
    width, height, maxval = (int(t) for t in tokens[1:])
    if maxval != 255:
        raise ValueError(f"only 8-bit PGM supported (maxval {maxval})")
    # exactly one whitespace byte separates the header from the raster
    raster = np.frombuffer(data, dtype=np.uint8, count=width * height, offset=pos + 1)
    return Frame(raster.reshape(height, width).astype(float) / 255.0)


def write_pgm(path, frame: Frame) -> None:
    """Write a frame as binary (P5) 8-bit PGM."""
    raster = np.clip(np.rint(frame.pixels * 255.0), 0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{frame.width} {frame.height}\n255\n".encode())
        fh.write(raster.tobytes())


@dataclass(frozen=True)
class CosineTexture:
    """Band-limited scene: 0.5 plus a normalized sum of planar cosine waves.

    Normalizing by twice the total amplitude keeps samples strictly inside
    (0, 1), and the closed form can be evaluated at any real coordinate.
    """

    freqs: np.ndarray   # (k, 2) spatial frequencies, cycles per px (fx, fy)
    phases: np.ndarray  # (k,)
    amps: np.ndarray    # (k,) positive

    def __post_init__(self):
        f = np.atleast_2d(np.asarray(self.freqs, dtype=float))
        p = np.atleast_1d(np.asarray(self.phases, dtype=float))
        a = np.atleast_1d(np.asarray(self.amps, dtype=float))
        if f.shape != (len(a), 2) or p.shape != (len(a),):
            raise ValueError("freqs, phases, amps must agree in length")
        if np.any(a <= 0):
            raise ValueError("amplitudes must be positive")
        for name, arr in (("freqs", f), ("phases", p), ("amps", a)):
            arr = np.ascontiguousarray(arr)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def sample(self, x, y):
        """Intensity at real coordinates (x, y); accepts scalars or arrays."""
        x = np.asarray(x, dtype=float)[..., None]
        y = np.asarray(y, dtype=float)[..., None]
        phase = 2.0 * math.pi * (self.freqs[:, 0] * x + self.freqs[:, 1] * y)
        waves = self.amps * np.cos(phase + self.phases)
        return 0.5 + waves.sum(axis=-1) / (2.0 * self.amps.sum())


def random_texture(
    rng: np.random.Generator,
    n_waves: int = 12,
    freq_range: tuple[float, float] = (0.02, 0.15),
) -> CosineTexture:
    """Draw a random texture with isotropic frequencies in the given band.

    The band's upper end stays well under Nyquist so bilinear interpolation
    and image gradients remain accurate for subpixel work.
    """
    lo, hi = freq_range
    if not 0.0 < lo < hi < 0.5:
        raise ValueError(f"freq_range must satisfy 0 < lo < hi < 0.5 (got {freq_range})")
    mag = rng.uniform(lo, hi, size=n_waves)
    ang = rng.uniform(0.0, 2.0 * math.pi, size=n_waves)
    freqs = np.column_stack([mag * np.cos(ang), mag * np.sin(ang)])
    phases = rng.uniform(0.0, 2.0 * math.pi, size=n_waves)
    amps = rng.uniform(0.5, 1.0, size=n_waves)
    return CosineTexture(freqs, phases, amps)


def render_texture(
    tex: CosineTexture,
    width: int,
    height: int,
    shift: tuple[float, float] = (0.0, 0.0),
    timestamp: float = 0.0,
) -> Frame:
    """Rasterize a texture, with the scene translated by (sx, sy) pixels.

    A feature at (x, y) in the unshifted frame appears at (x+sx, y+sy) in
    the shifted one, so `shift` is exactly the displacement a tracker
    should recover between the two renders.
    """
    sx, sy = shift
    xs = np.arange(width, dtype=float) - sx
    ys = np.arange(height, dtype=float) - sy
    gx, gy = np.meshgrid(xs, ys)
    return Frame(tex.sample(gx, gy), timestamp=timestamp)


def pixel_to_bearing(px: float, width: int, hfov: float = DEFAULT_HFOV) -> float:
    """Horizontal bearing of an image column, positive to the right.

    Linear in the pixel offset from the image center: the center column maps
    to 0 and the edge columns to +-hfov/2.
    """
    if width < 2:
        raise ValueError(f"width must be >= 2 (got {width})")
    if not 0.0 <= px < width:
        raise ValueError(f"px must lie in [0, width) (got {px})")
    half = (width - 1) / 2.0
    return (px - half) / half * (hfov / 2.0)
