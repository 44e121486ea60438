"""Lens (filter) functions mapping each point to a low-dimensional value."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_points
from .datasets import Metric, pairwise_distances
from .exceptions import ConfigurationError


class CoordinateLens(TransformerMixin, BaseEstimator):
    """Project every point onto one coordinate axis."""

    def __init__(self, axis=0):
        self.axis = axis

    def fit(self, X, y=None):
        X = check_points(X, allow_empty=True)
        if not 0 <= self.axis < X.shape[1]:
            raise ConfigurationError(f"axis {self.axis} out of range for dimension {X.shape[1]}")
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_points(X, allow_empty=True)
        if X.shape[1] != self.n_features_in_:
            raise ConfigurationError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return X[:, [self.axis]].copy()


class EccentricityLens(TransformerMixin, BaseEstimator):
    """Mean distance from a point to every fitted point.

    The mean runs over the whole fitted cloud, including the point itself
    when it is part of it, so ``fit_transform`` on two points at distance 5
    gives ``[2.5, 2.5]``.
    """

    def __init__(self, metric="euclidean"):
        self.metric = metric

    def fit(self, X, y=None):
        Metric.coerce(self.metric)
        self.X_fit_ = check_points(X)
        self.n_features_in_ = self.X_fit_.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "X_fit_")
        X = check_points(X, allow_empty=True)
        D = pairwise_distances(X, self.metric, Y=self.X_fit_)
        return D.mean(axis=1, keepdims=True)

    def fit_transform(self, X, y=None):
        self.fit(X)
        D = pairwise_distances(self.X_fit_, self.metric)
        return D.mean(axis=1, keepdims=True)


@dataclass(frozen=True)
class LensSpec:
    """Serializable lens description.

    ``kind`` is ``"coordinate"`` (uses ``axis``) or ``"eccentricity"``
    (uses ``metric``).
    """

    kind: str = "coordinate"
    axis: int = 0
    metric: str = "euclidean"

    def __post_init__(self):
        if self.kind not in ("coordinate", "eccentricity"):
            raise ConfigurationError(f"unknown lens kind {self.kind!r}")
        if self.kind == "coordinate" and (isinstance(self.axis, bool) or int(self.axis) != self.axis or self.axis < 0):
            raise ConfigurationError(f"axis must be a nonnegative integer, got {self.axis!r}")
        object.__setattr__(self, "metric", Metric.coerce(self.metric).value)

    @property
    def output_dim(self) -> int:
        return 1

    def build(self):
        if self.kind == "coordinate":
            return CoordinateLens(axis=int(self.axis))
        return EccentricityLens(metric=self.metric)

    def to_dict(self):
        if self.kind == "coordinate":
            return {"kind": "coordinate", "axis": int(self.axis)}
        return {"kind": "eccentricity", "metric": self.metric}

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        kind = data.pop("kind", "coordinate")
        unknown = set(data) - {"axis", "metric"}
        if unknown:
            raise ConfigurationError(f"unknown lens fields {sorted(unknown)}")
        return cls(kind=kind, **data)


def apply_lens(dataset, lens_spec: LensSpec) -> np.ndarray:
    """Lens values as an ``(n_points, output_dim)`` array aligned with the dataset rows."""
    return lens_spec.build().fit_transform(dataset)
