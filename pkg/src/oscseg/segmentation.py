"""Region labeling from frequency maps or raw intensities, plus scoring.

Two segmenters: histogram (Otsu) binary thresholding, usable both on pixel
intensities (the baseline) and on locked frequencies, and gap clustering,
which splits the sorted frequency axis wherever consecutive values are
farther apart than a threshold.  Scoring is the fraction of mislabeled
pixels against a reference mask.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DegenerateValues, DimensionMismatch
from .frequency import FrequencyMap, NodeFlag
from .images import GrayImage


@dataclass(frozen=True)
class LabelMap:
    """Integer region labels per pixel, drawn from {0 .. n_labels-1}.

    0 is the background for binary masks.
    """

    labels: np.ndarray
    n_labels: int = 0

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 2 or labels.size == 0:
            raise ValueError("labels must be a nonempty 2-D array")
        if not np.issubdtype(labels.dtype, np.integer):
            raise ValueError("labels must be integers")
        labels = labels.astype(np.int64)
        n = self.n_labels if self.n_labels else int(labels.max()) + 1
        if labels.min() < 0 or labels.max() >= n:
            raise ValueError(f"labels must lie in [0, {n})")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "n_labels", n)

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape

    def to_pgm_image(self) -> GrayImage:
        """Labels scaled onto [0, 1] for PGM export (binary becomes 0/255)."""
        if self.n_labels <= 1:
            return GrayImage(np.zeros(self.shape))
        return GrayImage(self.labels / (self.n_labels - 1))

    def to_csv(self) -> str:
        lines = ["row,col,label"]
        for r in range(self.height):
            for c in range(self.width):
                lines.append(f"{r},{c},{self.labels[r, c]}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SegmentationMetrics:
    """Mislabeled-pixel score of a segmentation against a reference."""

    mislabeled: int
    pixel_count: int

    @property
    def mislabeled_fraction(self) -> float:
        return self.mislabeled / self.pixel_count


def otsu_threshold(values, bins: int = 256) -> float:
    """Histogram threshold maximizing between-class variance.

    Values are binned into ``bins`` equal-width bins over [min, max]; every
    interior bin edge is a candidate threshold and the one maximizing
    w0 * w1 * (mu0 - mu1)^2 wins, ties going to the lower edge.  (The
    literature sometimes describes the criterion as minimizing the spread
    of the two histogram peaks; maximizing between-class variance is the
    equivalent standard formulation.)
    """
    if bins < 2:
        raise ValueError(f"bins must be >= 2, got {bins}")
    vals = np.asarray(values, dtype=float).ravel()
    if vals.size == 0:
        raise ValueError("values must be nonempty")
    if not np.all(np.isfinite(vals)):
        raise ValueError("values must be finite")
    lo, hi = float(vals.min()), float(vals.max())
    if lo == hi:
        raise DegenerateValues("all values are equal; no threshold exists")

    counts, edges = np.histogram(vals, bins=bins, range=(lo, hi))
    centers = 0.5 * (edges[:-1] + edges[1:])
    total = counts.sum()
    weighted = counts * centers
    w0 = np.cumsum(counts)[:-1] / total                  # class below edge i+1
    m0 = np.cumsum(weighted)[:-1]
    m_total = weighted.sum()
    best_score = -1.0
    best_edge = edges[1]
    for i in range(bins - 1):
        # an empty bin below the edge repeats the previous split; keeping
        # only the lowest edge of such a plateau is the tie-break rule
        if i > 0 and counts[i] == 0:
            continue
        f0 = w0[i]
        f1 = 1.0 - f0
        if f0 == 0.0 or f1 == 0.0:
            continue
        mu0 = m0[i] / (f0 * total)
        mu1 = (m_total - m0[i]) / (f1 * total)
        score = f0 * f1 * (mu0 - mu1) ** 2
        if score > best_score:
            best_score = score
            best_edge = edges[i + 1]
    if best_score < 0:
        raise DegenerateValues("no usable threshold candidate")
    return float(best_edge)


def segment_binary(values, threshold: float) -> LabelMap:
    """Binary map: label 1 where value > threshold, else 0.

    Accepts a FrequencyMap (non-oscillating nodes are forced to the
    background label), a GrayImage, or a plain array.
    """
    if not np.isfinite(threshold):
        raise ValueError("threshold must be finite")
    if isinstance(values, FrequencyMap):
        labels = (values.freqs > threshold).astype(int)
        labels[values.flags == NodeFlag.NON_OSCILLATING] = 0
    elif isinstance(values, GrayImage):
        labels = (values.pixels > threshold).astype(int)
    else:
        labels = (np.asarray(values, dtype=float) > threshold).astype(int)
    return LabelMap(labels, n_labels=2)


def cluster_by_gap(fmap: FrequencyMap, gap_threshold: float) -> LabelMap:
    """Cluster nodes by splitting the sorted frequency axis at large gaps.

    The distinct OK-flagged frequencies are sorted ascending and a new
    cluster starts wherever consecutive values differ by more than
    ``gap_threshold``; cluster indices ascend with frequency.  Nodes with
    a low-confidence estimate are assigned to the cluster whose frequency
    band they fall in; non-oscillating nodes inherit the background
    label 0.
    """
    if not gap_threshold > 0:
        raise ValueError(f"gap_threshold must be > 0, got {gap_threshold}")
    ok_values = np.unique(fmap.freqs[fmap.ok_mask])
    if ok_values.size == 0:
        raise DegenerateValues("no OK-flagged nodes to cluster")
    gaps = np.diff(ok_values)
    split_after = np.flatnonzero(gaps > gap_threshold)
    boundaries = 0.5 * (ok_values[split_after] + ok_values[split_after + 1])
    labels = np.searchsorted(boundaries, fmap.freqs, side="right").astype(int)
    labels[fmap.flags == NodeFlag.NON_OSCILLATING] = 0
    return LabelMap(labels, n_labels=len(boundaries) + 1)


def _as_label_array(m) -> np.ndarray:
    return m.labels if isinstance(m, LabelMap) else np.asarray(m)


def mislabel_rate(result, reference) -> SegmentationMetrics:
    """Fraction of pixels whose binary labels differ, polarity-minimized.

    The 0/1 assignment of a binary segmenter is arbitrary, so the error is
    evaluated under both the identity and the swapped mapping and the
    smaller count is reported.  Symmetric in its arguments.
    """
    a = _as_label_array(result)
    b = _as_label_array(reference)
    if a.shape != b.shape:
        raise DimensionMismatch(f"label maps differ in shape: "
                                f"{a.shape} vs {b.shape}")
    for arr in (a, b):
        if not np.isin(arr, (0, 1)).all():
            raise ValueError("mislabel_rate expects binary label maps")
    n = a.size
    diff = int(np.count_nonzero(a != b))
    return SegmentationMetrics(mislabeled=min(diff, n - diff), pixel_count=n)


def region_match_accuracy(result, reference) -> float:
    """Pixel accuracy under the best one-to-one cluster-to-region matching.

    Builds the confusion matrix between result clusters and reference
    regions and solves the assignment problem maximizing matched pixels;
    each result cluster may claim at most one reference region.  A
    2-cluster result scored against 4 ground-truth regions can therefore
    reach at most the two largest regions' mass, which is what makes this
    a fair multi-region score for binary baselines.
    """
    a = _as_label_array(result)
    b = _as_label_array(reference)
    if a.shape != b.shape:
        raise DimensionMismatch(f"label maps differ in shape: "
                                f"{a.shape} vs {b.shape}")
    na, nb = int(a.max()) + 1, int(b.max()) + 1
    confusion = np.zeros((na, nb), dtype=np.int64)
    np.add.at(confusion, (a.ravel(), b.ravel()), 1)
    rows, cols = linear_sum_assignment(confusion, maximize=True)
    return float(confusion[rows, cols].sum()) / a.size
