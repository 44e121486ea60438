"""The Mapper estimator: lens, pullback cover, per-fiber clustering, nerve."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, clone
from sklearn.utils.validation import check_is_fitted

from ._validation import check_points, check_positive_int
from .clustering import SingleLinkageGap
from .cover import CubicalCover
from .homology import betti_gf2
from .lens import CoordinateLens
from .nerve import build_nerve, mapper_graph, refine


class Mapper(BaseEstimator):
    """Mapper complex of a point cloud.

    Parameters
    ----------
    lens : transformer, default ``CoordinateLens(0)``
        Any estimator with ``fit_transform`` returning an ``(n, m)`` array.
    cover : CubicalCover, default ``CubicalCover()``
    clusterer : clusterer, default ``SingleLinkageGap()``
        Any scikit-learn style clusterer; a clone is fitted per fiber and
        negative labels are treated as noise.
    max_dim : int, default 2
        Highest simplex dimension of the nerve.
    n_jobs : int or None
        Worker threads for per-fiber clustering (``None`` reads
        ``MAPPER_FORGE_THREADS``; 0 means one per CPU).

    Attributes
    ----------
    lens_values_, cover_, pullback_, refinement_, nerve_, graph_, betti_
    """

    def __init__(self, lens=None, cover=None, clusterer=None, max_dim=2, n_jobs=None):
        self.lens = lens
        self.cover = cover
        self.clusterer = clusterer
        self.max_dim = max_dim
        self.n_jobs = n_jobs

    def fit(self, X, y=None, lens_values=None):
        """Build the complex; ``lens_values`` overrides the lens when given."""
        X = check_points(X)
        max_dim = check_positive_int(self.max_dim, "max_dim")
        if lens_values is None:
            lens = clone(self.lens) if self.lens is not None else CoordinateLens(0)
            lens_values = lens.fit_transform(X)
        lens_values = check_points(lens_values, name="lens_values")
        if lens_values.shape[0] != X.shape[0]:
            raise ValueError(f"{lens_values.shape[0]} lens values for {X.shape[0]} points")
        self.lens_values_ = lens_values

        self.cover_ = clone(self.cover) if self.cover is not None else CubicalCover()
        self.pullback_ = self.cover_.fit_pullback(lens_values)
        uncovered = np.flatnonzero(self.pullback_.multiplicity() == 0)
        assert uncovered.size == 0, f"points {uncovered[:5].tolist()} lie in no fiber"

        clusterer = self.clusterer if self.clusterer is not None else SingleLinkageGap()
        self.refinement_ = refine(self.pullback_, X, clusterer, n_jobs=self.n_jobs)
        self.nerve_ = build_nerve(self.refinement_.elements, max_dim)
        self.graph_ = mapper_graph(self.nerve_, lens_values)
        # the top dimension of a truncated nerve is not reliable
        self.betti_ = betti_gf2(self.nerve_, up_to_dim=max(1, max_dim - 1))
        return self

    def fit_transform(self, X, y=None, lens_values=None):
        """Fit and return the Mapper graph."""
        return self.fit(X, lens_values=lens_values).graph_

    @property
    def n_vertices_(self):
        check_is_fitted(self, "nerve_")
        return len(self.nerve_.vertices)
