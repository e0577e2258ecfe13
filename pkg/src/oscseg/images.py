"""Grayscale images: PGM codec, noise injection, synthetic test patterns.

Intensities are float64 in [0, 1] throughout.  Only the PGM formats P2
(ASCII) and P5 (binary) with maxval <= 255 are supported; writing always
emits canonical P5 with maxval 255, so read(write(read(x))) is the
identity and write(read(x)) is byte-identical for canonical P5 input.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (InvalidSize, MalformedHeader, TruncatedData,
                     UnsupportedMaxval)


@dataclass(frozen=True)
class GrayImage:
    """A rectangular grid of pixel intensities in [0, 1], row-major."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=float)
        if px.ndim != 2 or px.size == 0:
            raise ValueError("pixels must be a nonempty 2-D array")
        if not np.all(np.isfinite(px)):
            raise ValueError("pixel intensities must be finite")
        if px.min() < 0.0 or px.max() > 1.0:
            raise ValueError("pixel intensities must lie in [0, 1]")
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape


@dataclass(frozen=True)
class NoiseSpec:
    """Additive i.i.d. Gaussian pixel noise: variance in intensity^2, seeded."""

    variance: float
    seed: int = 0

    def __post_init__(self):
        if not self.variance >= 0:
            raise ValueError(f"variance must be >= 0, got {self.variance}")


def _read_header_tokens(data: bytes, count: int, start: int):
    """Read `count` whitespace-separated tokens, skipping # comments.

    Returns (tokens, offset just past the single whitespace byte that
    terminates the last token).
    """
    tokens = []
    i = start
    n = len(data)
    while len(tokens) < count:
        while i < n and data[i:i + 1].isspace():
            i += 1
        if i < n and data[i] == ord("#"):
            j = data.find(b"\n", i)
            if j < 0:
                raise MalformedHeader("unterminated comment in header")
            i = j + 1
            continue
        j = i
        while j < n and not data[j:j + 1].isspace():
            j += 1
        if j == i:
            raise MalformedHeader("header ended before all fields were read")
        tokens.append(data[i:j])
        i = j
    if i >= n:
        raise MalformedHeader("header not terminated by whitespace")
    return tokens, i + 1


def read_pgm(data: bytes) -> GrayImage:
    """Parse a P2 or P5 PGM byte string into a GrayImage.

    Intensity = sample / maxval.  Raises MalformedHeader, UnsupportedMaxval
    or TruncatedData on broken input.
    """
    if not isinstance(data, (bytes, bytearray)):
        raise MalformedHeader("expected bytes")
    data = bytes(data)
    if len(data) < 2:
        raise MalformedHeader("file too short for a PGM magic number")
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise MalformedHeader(f"unsupported magic {magic!r}")
    try:
        tokens, offset = _read_header_tokens(data, 3, 2)
        width, height, maxval = (int(t) for t in tokens)
    except MalformedHeader:
        raise
    except ValueError as exc:
        raise MalformedHeader(f"non-numeric header field: {exc}") from exc
    if width <= 0 or height <= 0:
        raise MalformedHeader(f"non-positive dimensions {width}x{height}")
    if maxval < 1 or maxval > 255:
        raise UnsupportedMaxval(f"maxval {maxval} outside 1..255")

    n = width * height
    if magic == b"P5":
        raster = data[offset:offset + n]
        if len(raster) < n:
            raise TruncatedData(f"expected {n} bytes, got {len(raster)}")
        samples = np.frombuffer(raster, dtype=np.uint8).astype(float)
    else:
        fields = data[offset:].split()
        if len(fields) < n:
            raise TruncatedData(f"expected {n} samples, got {len(fields)}")
        try:
            samples = np.array([int(f) for f in fields[:n]], dtype=float)
        except ValueError as exc:
            raise TruncatedData(f"non-numeric sample: {exc}") from exc
    if samples.max() > maxval:
        raise TruncatedData("sample exceeds declared maxval")
    return GrayImage(samples.reshape(height, width) / maxval)


def write_pgm(image: GrayImage) -> bytes:
    """Serialize to canonical binary P5: maxval 255, sample = round(v*255)."""
    header = f"P5\n{image.width} {image.height}\n255\n".encode("ascii")
    samples = np.rint(image.pixels * 255.0).astype(np.uint8)
    return header + samples.tobytes()


def add_gaussian_noise(image: GrayImage, spec: NoiseSpec) -> GrayImage:
    """Add i.i.d. N(0, variance) to each pixel, then clamp to [0, 1].

    Deterministic per seed.  Noise is drawn with numpy's PCG64 generator
    (ziggurat normal sampling), so runs are reproducible bit-for-bit on
    any platform with the same numpy.
    """
    if spec.variance == 0:
        return GrayImage(image.pixels.copy())
    rng = np.random.default_rng(spec.seed)
    noise = rng.normal(0.0, np.sqrt(spec.variance), size=image.shape)
    return GrayImage(np.clip(image.pixels + noise, 0.0, 1.0))


def generate_quadrant_image(side: int, levels_per_quadrant: int | None = None,
                            seed: int = 0) -> GrayImage:
    """Four-square test pattern with a flat whole-image intensity histogram.

    The grid is split into 4 equal squares.  Quadrant k (row-major order:
    top-left, top-right, bottom-left, bottom-right) is filled with
    ``levels_per_quadrant`` evenly spaced intensity levels centered in the
    band [k/4, (k+1)/4), each level used an equal number of times, shuffled
    within the quadrant by the seeded RNG.  Quadrant means then sit near
    the band midpoints {0.125, 0.375, 0.625, 0.875} while the whole-image
    histogram over the four quarter-range bands is exactly uniform, which
    starves any purely intensity-histogram-based segmenter of information.

    ``levels_per_quadrant`` defaults to one level per quadrant pixel.
    """
    if side <= 0 or side % 2 != 0:
        raise InvalidSize(f"side must be an even positive integer, got {side}")
    quad_pixels = (side * side) // 4
    if levels_per_quadrant is None:
        levels_per_quadrant = quad_pixels
    if levels_per_quadrant <= 0:
        raise InvalidSize("levels_per_quadrant must be positive")
    if quad_pixels % levels_per_quadrant != 0:
        raise InvalidSize(
            f"side^2 = {side * side} is not divisible by "
            f"4 * {levels_per_quadrant}")

    rng = np.random.default_rng(seed)
    half = side // 2
    img = np.empty((side, side))
    repeats = quad_pixels // levels_per_quadrant
    for k, (r0, c0) in enumerate([(0, 0), (0, half), (half, 0), (half, half)]):
        levels = (k + (np.arange(levels_per_quadrant) + 0.5)
                  / levels_per_quadrant) / 4.0
        values = np.repeat(levels, repeats)
        rng.shuffle(values)
        img[r0:r0 + half, c0:c0 + half] = values.reshape(half, half)
    return GrayImage(img)


def quadrant_reference(side: int) -> np.ndarray:
    """Ground-truth region indices {0..3} for the quadrant test pattern."""
    if side <= 0 or side % 2 != 0:
        raise InvalidSize(f"side must be an even positive integer, got {side}")
    half = side // 2
    labels = np.zeros((side, side), dtype=int)
    labels[:half, half:] = 1
    labels[half:, :half] = 2
    labels[half:, half:] = 3
    return labels


def generate_two_region_image(side: int, intensity_a: float,
                              intensity_b: float):
    """Left/right split test image plus its ground-truth mask.

    Left half has intensity ``intensity_a``, right half ``intensity_b``.
    Returns ``(GrayImage, reference)`` where reference is an (H, W) int
    array with 0 on the left and 1 on the right.
    """
    if not (0.0 <= intensity_a <= 1.0 and 0.0 <= intensity_b <= 1.0):
        raise ValueError("intensities must lie in [0, 1]")
    if side < 2:
        raise InvalidSize(f"side must be >= 2, got {side}")
    img = np.full((side, side), float(intensity_a))
    img[:, side // 2:] = intensity_b
    ref = np.zeros((side, side), dtype=int)
    ref[:, side // 2:] = 1
    return GrayImage(img), ref
