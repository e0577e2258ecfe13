"""Per-oscillator frequency readout from simulated waveforms.

Frequency is estimated from upward level crossings of each oscillator's
output variable: with k crossings at times t_1..t_k inside the window,
f = (k - 1) / (t_k - t_1), the reciprocal mean inter-event interval.
This is exact for a locked (periodic) oscillator regardless of phase,
needs no windowing function, and degrades gracefully: two events give a
low-confidence estimate, fewer mark the node as non-oscillating.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from enum import IntEnum
from typing import Sequence

import numpy as np

from .errors import DegenerateValues, DimensionMismatch
from .models import MODELS, ModelInfo


class NodeFlag(IntEnum):
    """Status of one node's frequency estimate."""

    OK = 0
    NON_OSCILLATING = 1
    LOW_CONFIDENCE = 2


_FLAG_NAMES = {NodeFlag.OK: "OK",
               NodeFlag.NON_OSCILLATING: "NonOscillating",
               NodeFlag.LOW_CONFIDENCE: "LowConfidence"}
_FLAG_VALUES = {name: flag for flag, name in _FLAG_NAMES.items()}


@dataclass(frozen=True)
class FrequencyMap:
    """Estimated oscillation frequency of every node in the grid.

    ``freqs`` is (H, W) float64 in inverse arbitrary time units; ``flags``
    is (H, W) uint8 of NodeFlag values.  Non-oscillating nodes carry
    frequency 0.
    """

    freqs: np.ndarray
    flags: np.ndarray

    def __post_init__(self):
        freqs = np.asarray(self.freqs, dtype=float)
        flags = np.asarray(self.flags, dtype=np.uint8)
        if freqs.ndim != 2 or freqs.shape != flags.shape:
            raise DimensionMismatch("freqs and flags must share a 2-D shape")
        if not np.all(np.isfinite(freqs)) or freqs.min() < 0:
            raise ValueError("frequencies must be finite and >= 0")
        non_osc = flags == NodeFlag.NON_OSCILLATING
        if np.any(freqs[non_osc] != 0.0):
            raise ValueError("non-oscillating nodes must carry frequency 0")
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "flags", flags)

    @property
    def height(self) -> int:
        return self.freqs.shape[0]

    @property
    def width(self) -> int:
        return self.freqs.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.freqs.shape

    @property
    def ok_mask(self) -> np.ndarray:
        return self.flags == NodeFlag.OK

    @property
    def usable_mask(self) -> np.ndarray:
        """Nodes with a frequency value (OK or low-confidence)."""
        return self.flags != NodeFlag.NON_OSCILLATING

    def to_csv(self) -> str:
        """Serialize to the documented CSV layout.

        Line 1: ``width,height`` header; line 2: the two sizes; line 3:
        ``row,col,freq,flag`` header; then one row-major line per node.
        Frequencies use shortest round-trip float formatting, so output
        is byte-stable for identical maps.
        """
        lines = ["width,height", f"{self.width},{self.height}",
                 "row,col,freq,flag"]
        flags = self.flags
        freqs = self.freqs
        for r in range(self.height):
            for c in range(self.width):
                name = _FLAG_NAMES[NodeFlag(flags[r, c])]
                lines.append(f"{r},{c},{float(freqs[r, c])!r},{name}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "FrequencyMap":
        lines = [ln for ln in text.splitlines() if ln]
        if len(lines) < 3 or lines[0] != "width,height" \
                or lines[2] != "row,col,freq,flag":
            raise ValueError("not a frequency-map CSV")
        width, height = (int(v) for v in lines[1].split(","))
        freqs = np.zeros((height, width))
        flags = np.zeros((height, width), dtype=np.uint8)
        for ln in lines[3:]:
            r, c, fv, name = ln.split(",")
            freqs[int(r), int(c)] = float(fv)
            flags[int(r), int(c)] = _FLAG_VALUES[name]
        return cls(freqs, flags)


def estimate_frequency(event_times: Sequence[float],
                       window: tuple[float, float]):
    """Frequency from upward-crossing event times inside a window.

    Events outside ``window = (t_start, t_end]`` are ignored.  Returns
    ``(freq, NodeFlag)``: k >= 3 events give an OK estimate
    (k-1)/(t_k - t_1); exactly 2 give the same formula flagged
    LOW_CONFIDENCE; fewer give (0.0, NON_OSCILLATING).
    """
    t_start, t_end = window
    if not t_start < t_end:
        raise ValueError("window start must precede window end")
    times = np.asarray(event_times, dtype=float)
    inside = times[(times > t_start) & (times <= t_end)]
    k = len(inside)
    if k < 2:
        return 0.0, NodeFlag.NON_OSCILLATING
    freq = (k - 1) / (inside[-1] - inside[0])
    return float(freq), (NodeFlag.LOW_CONFIDENCE if k == 2 else NodeFlag.OK)


def interpolate_crossing(prev_value: float, next_value: float,
                         t_prev: float, t_next: float, level: float):
    """Linearly interpolated time of an upward crossing of ``level``.

    Returns None when the pair of consecutive samples does not straddle
    the level from below (prev < level <= next).
    """
    if not (prev_value < level <= next_value):
        return None
    frac = (level - prev_value) / (next_value - prev_value)
    return t_prev + frac * (t_next - t_prev)


def crossing_detector(model: ModelInfo | str, sample_prev, sample_next,
                      t_prev: float, t_next: float):
    """Upward crossing of a model's event level between two samples.

    The event variable is each model's first state component (excitatory
    x, activator x1, or Re z); the level is 0 for the neural and harmonic
    models and 0.5 for the chemical one.  Returns the interpolated event
    time, or None.
    """
    info = MODELS[model] if isinstance(model, str) else model
    prev = _first_component(sample_prev)
    nxt = _first_component(sample_next)
    return interpolate_crossing(prev, nxt, t_prev, t_next, info.event_level)


def _first_component(state) -> float:
    if dataclasses.is_dataclass(state):
        return float(dataclasses.astuple(state)[0])
    return float(np.asarray(state).ravel()[0])


@dataclass(frozen=True)
class FrequencyHistogram:
    """Equal-width histogram of the OK-flagged frequencies."""

    counts: np.ndarray
    edges: np.ndarray
    degenerate: bool = False


def frequency_histogram(fmap: FrequencyMap, bins: int) -> FrequencyHistogram:
    """Histogram the OK-flagged frequencies into ``bins`` equal-width bins.

    Bins span [min, max] of the OK frequencies and the counts sum to the
    number of OK nodes.  If every OK frequency is identical the histogram
    collapses to a single flagged bin rather than raising.
    """
    if bins < 2:
        raise ValueError(f"bins must be >= 2, got {bins}")
    values = fmap.freqs[fmap.ok_mask]
    if values.size == 0:
        raise DegenerateValues("no OK-flagged nodes to histogram")
    lo, hi = float(values.min()), float(values.max())
    if lo == hi:
        return FrequencyHistogram(counts=np.array([values.size]),
                                  edges=np.array([lo, hi]),
                                  degenerate=True)
    counts, edges = np.histogram(values, bins=bins, range=(lo, hi))
    return FrequencyHistogram(counts=counts, edges=edges)
