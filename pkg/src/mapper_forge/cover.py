"""Overlapping cubical covers of the lens range and their pullbacks."""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_overlap, check_points, check_positive_int
from .exceptions import ConfigurationError, DimensionMismatchError


class DegenerateRangeWarning(UserWarning):
    pass


def axis_intervals(lo: float, hi: float, n_intervals: int, overlap_frac: float):
    """Closed intervals covering ``[lo, hi]`` with uniform width and stride.

    Consecutive intervals share ``overlap_frac`` of their common width
    ``w = (hi - lo) / ((n - 1) * (1 - g) + 1)``. The outer endpoints are
    pinned to ``lo`` and ``hi`` so rounding never uncovers the extremes.
    """
    n = check_positive_int(n_intervals, "n_intervals")
    g = check_overlap(overlap_frac)
    if hi < lo:
        raise ConfigurationError(f"empty range [{lo}, {hi}]")
    if hi == lo:
        return [(float(lo), float(hi))]
    width = (hi - lo) / ((n - 1) * (1.0 - g) + 1.0)
    stride = width * (1.0 - g)
    starts = [lo + i * stride for i in range(n)]
    out = []
    for i, a in enumerate(starts):
        b = a + width
        if i + 1 < n:
            # rounding must never open a gap between neighbours
            b = max(b, starts[i + 1])
        out.append((float(a), float(b)))
    out[0] = (float(lo), out[0][1])
    out[-1] = (out[-1][0], float(hi))
    return out


@dataclass(frozen=True)
class PullbackCover:
    """Fibers of a cover: cover multi-index -> sorted point indices.

    Empty fibers are kept so cover indices stay dense.
    """

    indices: tuple
    fibers: tuple
    n_points: int

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(zip(self.indices, self.fibers))

    def fiber(self, index):
        return self.fibers[self.indices.index(tuple(index))]

    def multiplicity(self) -> np.ndarray:
        """Number of fibers each point belongs to."""
        counts = np.zeros(self.n_points, dtype=int)
        for members in self.fibers:
            counts[members] += 1
        return counts


class CubicalCover(BaseEstimator):
    """Axis-aligned box cover of the bounding box of the lens values.

    Parameters
    ----------
    n_intervals : int or sequence of int
        Intervals per lens axis; a scalar applies to every axis.
    overlap_frac : float in [0, 1)
        Fraction of an interval's width shared with its neighbour.

    After ``fit`` the per-axis intervals are in ``intervals_`` and the
    boxes, in lexicographic multi-index order, in ``cubes_``.
    """

    def __init__(self, n_intervals=10, overlap_frac=0.5):
        self.n_intervals = n_intervals
        self.overlap_frac = overlap_frac

    def _per_axis(self, dim):
        n = self.n_intervals
        if np.ndim(n) == 0:
            n = [n] * dim
        n = [check_positive_int(k, "n_intervals") for k in n]
        if len(n) != dim:
            raise DimensionMismatchError(f"{len(n)} interval counts for {dim} lens dimensions")
        return n

    def fit(self, lens_values, y=None):
        values = check_points(lens_values, name="lens_values")
        g = check_overlap(self.overlap_frac)
        counts = self._per_axis(values.shape[1])
        lo, hi = values.min(axis=0), values.max(axis=0)
        self.intervals_ = []
        for k in range(values.shape[1]):
            if lo[k] == hi[k]:
                warnings.warn(
                    f"lens axis {k} has zero extent; using a single interval [{lo[k]}, {hi[k]}]",
                    DegenerateRangeWarning,
                    stacklevel=2,
                )
            self.intervals_.append(axis_intervals(lo[k], hi[k], counts[k], g))
        self.n_features_in_ = values.shape[1]
        ranges = [range(len(iv)) for iv in self.intervals_]
        self.indices_ = [tuple(idx) for idx in itertools.product(*ranges)]
        self.cubes_ = [
            tuple(self.intervals_[k][i] for k, i in enumerate(idx)) for idx in self.indices_
        ]
        return self

    def pullback(self, lens_values) -> PullbackCover:
        """Point indices whose lens value lies in each closed box."""
        check_is_fitted(self, "cubes_")
        values = check_points(lens_values, allow_empty=True, name="lens_values")
        if values.shape[1] != self.n_features_in_:
            raise DimensionMismatchError(
                f"lens dimension {values.shape[1]} does not match cover dimension {self.n_features_in_}"
            )
        # per-axis membership masks, then intersect across axes
        masks = [
            [(values[:, k] >= a) & (values[:, k] <= b) for a, b in axis]
            for k, axis in enumerate(self.intervals_)
        ]
        fibers = []
        for idx in self.indices_:
            inside = np.ones(values.shape[0], dtype=bool)
            for k, i in enumerate(idx):
                inside &= masks[k][i]
            fibers.append(np.flatnonzero(inside))
        return PullbackCover(tuple(self.indices_), tuple(fibers), values.shape[0])

    def fit_pullback(self, lens_values) -> PullbackCover:
        return self.fit(lens_values).pullback(lens_values)

    def to_dict(self):
        check_is_fitted(self, "intervals_")
        return {
            "n_intervals": self._per_axis(self.n_features_in_),
            "overlap_frac": float(self.overlap_frac),
            "intervals": {
                str(k): [{"lo": a, "hi": b} for a, b in axis] for k, axis in enumerate(self.intervals_)
            },
        }


def build_cover(lens_values, n_intervals, overlap_frac) -> CubicalCover:
    return CubicalCover(n_intervals=n_intervals, overlap_frac=overlap_frac).fit(lens_values)


def pullback(lens_values, cover: CubicalCover) -> PullbackCover:
    return cover.pullback(lens_values)
