"""Per-fiber clustering back-ends.

Every back-end returns labels aligned with the input rows: non-noise
labels are contiguous ``0..n_clusters-1`` numbered by the smallest row
index of each cluster, and ``NOISE`` (-1, as in scikit-learn) marks points
left unclustered, which only DBSCAN produces.

``KMeans`` is the fixed-count back-end. ``SingleLinkageGap``, ``DBSCAN``
and ``AdaptiveKMeans`` pick the number of clusters from the data.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_points, check_positive_int
from .datasets import Metric, pairwise_distances
from .exceptions import ConfigurationError, DomainError, UndefinedScoreError
from .homology import DisjointSet

NOISE = -1


@dataclass(frozen=True, eq=False)
class ClusterLabeling:
    labels: np.ndarray

    def __post_init__(self):
        labels = np.array(self.labels, dtype=int)
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    @property
    def num_clusters(self) -> int:
        return len(np.unique(self.labels[self.labels != NOISE]))

    @property
    def noise_count(self) -> int:
        return int(np.count_nonzero(self.labels == NOISE))

    def clusters(self):
        """Row indices of each cluster, in label order."""
        return [np.flatnonzero(self.labels == j) for j in range(self.num_clusters)]


def canonical_labels(labels) -> np.ndarray:
    """Renumber non-noise labels by ascending first occurrence."""
    labels = np.asarray(labels, dtype=int)
    out = np.full(labels.shape, NOISE, dtype=int)
    mapping = {}
    for i, lab in enumerate(labels):
        if lab == NOISE:
            continue
        if lab not in mapping:
            mapping[lab] = len(mapping)
        out[i] = mapping[lab]
    return out


def _rng(seed):
    return np.random.Generator(np.random.PCG64(0 if seed is None else int(seed)))


# --------------------------------------------------------------------------
# k-means


def _kmeans_plusplus(X, k, rng):
    n = X.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = np.sum((X - X[chosen[0]]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=d2 / total))
        else:
            # every point coincides with a chosen center; any pick is as good
            nxt = int(rng.integers(n))
        chosen.append(nxt)
        d2 = np.minimum(d2, np.sum((X - X[nxt]) ** 2, axis=1))
    return X[chosen].copy()


def _assign(X, centers):
    d2 = np.sum((X[:, None, :] - centers[None, :, :]) ** 2, axis=2)
    labels = np.argmin(d2, axis=1)
    return labels, d2[np.arange(X.shape[0]), labels]


def _repair_empty(X, labels, d2, k):
    """Move the farthest point of a multi-point cluster into each empty cluster."""
    labels, d2 = labels.copy(), d2.copy()
    sizes = np.bincount(labels, minlength=k)
    for c in np.flatnonzero(sizes == 0):
        candidates = np.flatnonzero(sizes[labels] > 1)
        far = candidates[np.argmax(d2[candidates])]
        sizes[labels[far]] -= 1
        labels[far] = c
        sizes[c] = 1
        d2[far] = 0.0
    return labels, d2


def _lloyd(X, k, seed, max_iter, tol):
    """Lloyd iteration; returns labels, centers, per-iteration WCSS, n_iter."""
    centers = _kmeans_plusplus(X, k, _rng(seed))
    history = []
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        labels, d2 = _assign(X, centers)
        labels, d2 = _repair_empty(X, labels, d2, k)
        history.append(float(d2.sum()))
        new_centers = np.vstack([X[labels == c].mean(axis=0) for c in range(k)])
        shift = np.sqrt(np.sum((new_centers - centers) ** 2, axis=1)).max()
        centers = new_centers
        if shift < tol:
            break
    labels, d2 = _assign(X, centers)
    labels, d2 = _repair_empty(X, labels, d2, k)
    history.append(float(d2.sum()))
    for before, after in zip(history, history[1:]):
        assert after <= before + 1e-9 * max(1.0, before), "WCSS increased during Lloyd iteration"
    return labels, centers, history, n_iter


def _check_kmeans_params(X, k, max_iter, tol):
    k = check_positive_int(k, "k")
    check_positive_int(max_iter, "max_iter")
    if tol < 0:
        raise ConfigurationError(f"tol must be nonnegative, got {tol}")
    if k > X.shape[0]:
        raise ConfigurationError(f"k={k} exceeds the number of points ({X.shape[0]})")
    return k


def _prepare_kmeans_points(X, metric):
    if Metric.coerce(metric) is Metric.COSINE:
        norms = np.linalg.norm(X, axis=1, keepdims=True)
        if np.any(norms == 0):
            raise DomainError("cosine k-means is undefined for zero vectors")
        return X / norms
    return X


class KMeans(ClusterMixin, BaseEstimator):
    """Lloyd's k-means with k-means++ seeding; always returns exactly ``n_clusters`` clusters.

    Empty clusters are re-seeded with the point farthest from its
    centroid. With ``metric="cosine"`` the points are L2-normalised first.

    Attributes
    ----------
    labels_, cluster_centers_, inertia_, n_iter_
    wcss_history_ : list of float
        Within-cluster sum of squares after each assignment step.
    """

    fixed_count = True

    def __init__(self, n_clusters=2, random_state=0, max_iter=300, tol=1e-4, metric="euclidean"):
        self.n_clusters = n_clusters
        self.random_state = random_state
        self.max_iter = max_iter
        self.tol = tol
        self.metric = metric

    def fit(self, X, y=None):
        X = _prepare_kmeans_points(check_points(X), self.metric)
        k = _check_kmeans_params(X, self.n_clusters, self.max_iter, self.tol)
        labels, centers, history, n_iter = _lloyd(X, k, self.random_state, self.max_iter, self.tol)
        canon = canonical_labels(labels)
        order = [int(labels[np.flatnonzero(canon == j)[0]]) for j in range(k)]
        self.labels_ = canon
        self.cluster_centers_ = centers[order]
        self.inertia_ = history[-1]
        self.wcss_history_ = history
        self.n_iter_ = n_iter
        self.n_clusters_ = k
        return self

    def predict(self, X):
        """Index of the nearest fitted centroid."""
        check_is_fitted(self, "cluster_centers_")
        X = _prepare_kmeans_points(check_points(X, allow_empty=True), self.metric)
        return _assign(X, self.cluster_centers_)[0]


def kmeans_lloyd(points, k, seed=0, max_iter=300, tol=1e-4, metric="euclidean") -> ClusterLabeling:
    est = KMeans(n_clusters=k, random_state=seed, max_iter=max_iter, tol=tol, metric=metric).fit(points)
    return ClusterLabeling(est.labels_)


def wcss(points, labels) -> float:
    X = check_points(points)
    labels = np.asarray(labels)
    return float(sum(np.sum((X[labels == c] - X[labels == c].mean(axis=0)) ** 2) for c in np.unique(labels)))


# --------------------------------------------------------------------------
# single linkage with the largest-gap cut


def minimum_spanning_edges(D):
    """Prim's algorithm on a dense distance matrix; edges ``(u, v, w)`` in insertion order."""
    n = D.shape[0]
    if n <= 1:
        return []
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best = D[0].copy()
    parent = np.zeros(n, dtype=int)
    edges = []
    for _ in range(n - 1):
        cand = np.where(in_tree, np.inf, best)
        v = int(np.argmin(cand))
        edges.append((int(parent[v]), v, float(best[v])))
        in_tree[v] = True
        closer = (~in_tree) & (D[v] < best)
        best[closer] = D[v][closer]
        parent[closer] = v
    return edges


def single_linkage_merge_distances(points, metric="euclidean") -> list:
    """Sorted single-linkage merge heights, i.e. the MST edge lengths."""
    D = pairwise_distances(check_points(points), metric)
    return sorted(w for _, _, w in minimum_spanning_edges(D))


def largest_gap_cut(merge_distances, num_bins=10) -> float:
    """Cut threshold from the first empty histogram bin that follows an occupied one.

    The histogram spans ``[0, max]`` with ``num_bins`` equal bins. Edges
    shorter than the returned left bin edge stay inside clusters. When no
    such gap exists (including empty input) the result is ``inf``, i.e. a
    single cluster.
    """
    check_positive_int(num_bins, "num_bins", minimum=2)
    d = np.asarray(merge_distances, dtype=float)
    if d.size == 0 or d.max() <= 0:
        return float("inf")
    counts, edges = np.histogram(d, bins=num_bins, range=(0.0, float(d.max())))
    seen = False
    for i, c in enumerate(counts):
        if c:
            seen = True
        elif seen:
            return float(edges[i])
    return float("inf")


class SingleLinkageGap(ClusterMixin, BaseEstimator):
    """Single-linkage clustering cut at the first gap in the merge-height histogram.

    There is no cluster-count parameter: the cut adapts to each input.

    Attributes
    ----------
    labels_, n_clusters_
    threshold_ : float
        Merge heights strictly below this join clusters (``inf`` = one cluster).
    merge_distances_ : list of float
    """

    fixed_count = False

    def __init__(self, num_bins=10, metric="euclidean"):
        self.num_bins = num_bins
        self.metric = metric

    def fit(self, X, y=None):
        X = check_points(X)
        check_positive_int(self.num_bins, "num_bins", minimum=2)
        edges = minimum_spanning_edges(pairwise_distances(X, self.metric))
        self.merge_distances_ = sorted(w for _, _, w in edges)
        self.threshold_ = largest_gap_cut(self.merge_distances_, self.num_bins)
        ds = DisjointSet(X.shape[0])
        for u, v, w in edges:
            if w < self.threshold_:
                ds.union(u, v)
        labels = np.empty(X.shape[0], dtype=int)
        for j, part in enumerate(ds.groups()):
            labels[part] = j
        self.labels_ = labels
        self.n_clusters_ = int(labels.max()) + 1
        return self


def single_linkage_gap(points, metric="euclidean", num_bins=10) -> ClusterLabeling:
    return ClusterLabeling(SingleLinkageGap(num_bins=num_bins, metric=metric).fit(points).labels_)


# --------------------------------------------------------------------------
# DBSCAN


class DBSCAN(ClusterMixin, BaseEstimator):
    """Density clustering with explicit noise.

    A core point has at least ``min_pts`` points (itself included) within
    distance ``eps``. Border points join the lowest-numbered adjacent core
    cluster; everything else is ``NOISE``.
    """

    fixed_count = False

    def __init__(self, eps=0.5, min_pts=5, metric="euclidean"):
        self.eps = eps
        self.min_pts = min_pts
        self.metric = metric

    def fit(self, X, y=None):
        X = check_points(X)
        if not self.eps > 0:
            raise ConfigurationError(f"eps must be positive, got {self.eps}")
        check_positive_int(self.min_pts, "min_pts")
        adj = pairwise_distances(X, self.metric) <= self.eps
        core = adj.sum(axis=1) >= self.min_pts
        n = X.shape[0]
        labels = np.full(n, NOISE, dtype=int)
        current = 0
        for seed in np.flatnonzero(core):
            if labels[seed] != NOISE:
                continue
            labels[seed] = current
            stack = [seed]
            while stack:
                p = stack.pop()
                for q in np.flatnonzero(adj[p] & core & (labels == NOISE)):
                    labels[q] = current
                    stack.append(q)
            current += 1
        core_labels = labels.copy()
        for p in np.flatnonzero(~core):
            neighbours = core_labels[adj[p] & core]
            if neighbours.size:
                labels[p] = neighbours.min()
        self.core_sample_indices_ = np.flatnonzero(core)
        self.labels_ = canonical_labels(labels)
        self.n_clusters_ = current
        return self


def dbscan(points, metric="euclidean", eps=0.5, min_pts=5) -> ClusterLabeling:
    return ClusterLabeling(DBSCAN(eps=eps, min_pts=min_pts, metric=metric).fit(points).labels_)


# --------------------------------------------------------------------------
# silhouette and adaptive k-means


def silhouette_score(points, labels, metric="euclidean") -> float:
    """Mean silhouette over non-noise points; singleton clusters score 0."""
    if isinstance(labels, ClusterLabeling):
        labels = labels.labels
    labels = np.asarray(labels, dtype=int)
    X = check_points(points)
    keep = labels != NOISE
    X, labels = X[keep], labels[keep]
    ids = np.unique(labels)
    if ids.size < 2:
        raise UndefinedScoreError(f"silhouette needs at least 2 clusters, got {ids.size}")
    D = pairwise_distances(X, metric)
    member = labels[:, None] == ids[None, :]
    sizes = member.sum(axis=0)
    sums = D @ member
    own = np.searchsorted(ids, labels)
    own_size = sizes[own]
    rows = np.arange(len(labels))
    with np.errstate(invalid="ignore", divide="ignore"):
        a = sums[rows, own] / (own_size - 1)
        means = sums / sizes[None, :]
    means[rows, own] = np.inf
    b = means.min(axis=1)
    denom = np.maximum(a, b)
    s = np.zeros(len(labels))
    ok = (own_size > 1) & (denom > 0)
    s[ok] = (b[ok] - a[ok]) / denom[ok]
    return float(s.mean())


class AdaptiveKMeans(ClusterMixin, BaseEstimator):
    """k-means with k chosen per input by the silhouette score.

    Tries every k in ``[max(2, k_min), min(k_max, n_points)]`` and keeps
    the best score (ties go to the smaller k). Falls back to a single
    cluster when the best score is below ``min_score`` or when the input
    has fewer than ``2 * k_min`` points.
    """

    fixed_count = False

    def __init__(self, k_min=1, k_max=6, random_state=0, max_iter=300, tol=1e-4,
                 min_score=0.25, metric="euclidean"):
        self.k_min = k_min
        self.k_max = k_max
        self.random_state = random_state
        self.max_iter = max_iter
        self.tol = tol
        self.min_score = min_score
        self.metric = metric

    def fit(self, X, y=None):
        X = check_points(X)
        k_min = check_positive_int(self.k_min, "k_min")
        k_max = check_positive_int(self.k_max, "k_max")
        if k_min > k_max:
            raise ConfigurationError(f"k_min={k_min} exceeds k_max={k_max}")
        n = X.shape[0]
        self.scores_ = {}
        best_k, best_labels, best_score = 1, np.zeros(n, dtype=int), -np.inf
        if n >= 2 * k_min:
            for k in range(max(2, k_min), min(k_max, n) + 1):
                labels = KMeans(k, self.random_state, self.max_iter, self.tol, self.metric).fit(X).labels_
                score = silhouette_score(X, labels, self.metric)
                self.scores_[k] = score
                if score > best_score:
                    best_k, best_labels, best_score = k, labels, score
        if best_score < self.min_score:
            best_k, best_labels = 1, np.zeros(n, dtype=int)
        self.labels_ = best_labels
        self.n_clusters_ = best_k
        self.best_score_ = None if best_score == -np.inf else best_score
        # centroids of the chosen partition, also when it fell back to one cluster
        Xp = _prepare_kmeans_points(X, self.metric)
        self.cluster_centers_ = np.array([Xp[best_labels == j].mean(axis=0) for j in range(best_k)])
        return self

    def predict(self, X):
        check_is_fitted(self, "cluster_centers_")
        X = _prepare_kmeans_points(check_points(X, allow_empty=True), self.metric)
        return _assign(X, self.cluster_centers_)[0]


def adaptive_kmeans(points, k_min=1, k_max=6, seed=0, max_iter=300, tol=1e-4,
                    min_score=0.25, metric="euclidean") -> ClusterLabeling:
    est = AdaptiveKMeans(k_min, k_max, seed, max_iter, tol, min_score, metric).fit(points)
    return ClusterLabeling(est.labels_)


# --------------------------------------------------------------------------
# serializable specs

_KINDS = {
    "kmeans": (KMeans, {"k": 2, "seed": None, "max_iter": 300, "tol": 1e-4, "metric": "euclidean"}),
    "single_linkage_gap": (SingleLinkageGap, {"num_bins": 10, "metric": "euclidean"}),
    "dbscan": (DBSCAN, {"eps": 0.5, "min_pts": 5, "metric": "euclidean"}),
    "adaptive_kmeans": (AdaptiveKMeans, {"k_min": 1, "k_max": 6, "seed": None, "max_iter": 300,
                                         "tol": 1e-4, "min_score": 0.25, "metric": "euclidean"}),
}
_ALIASES = {"gap": "single_linkage_gap", "sl": "single_linkage_gap", "adaptive": "adaptive_kmeans"}
_SHORT_ARGS = {
    "kmeans": ("k", "seed"),
    "single_linkage_gap": ("num_bins",),
    "dbscan": ("eps", "min_pts"),
    "adaptive_kmeans": ("k_min", "k_max", "seed"),
}
_INT_PARAMS = {"k", "seed", "max_iter", "num_bins", "min_pts", "k_min", "k_max"}


@dataclass(frozen=True)
class ClustererSpec:
    """Serializable description of a clustering back-end.

    ``seed=None`` on the k-means kinds defers to the pipeline seed.
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        kind = _ALIASES.get(self.kind, self.kind)
        if kind not in _KINDS:
            raise ConfigurationError(f"unknown clusterer kind {self.kind!r}")
        defaults = _KINDS[kind][1]
        unknown = set(self.params) - set(defaults)
        if unknown:
            raise ConfigurationError(f"unknown parameters for {kind}: {sorted(unknown)}")
        params = {**defaults, **self.params}
        for name in _INT_PARAMS & set(params):
            if params[name] is not None:
                params[name] = int(params[name])
        for name in ("tol", "eps", "min_score"):
            if name in params:
                params[name] = float(params[name])
        params["metric"] = Metric.coerce(params["metric"]).value
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "params", params)
        self._validate()

    def _validate(self):
        p = self.params
        if self.kind == "kmeans":
            check_positive_int(p["k"], "k")
        elif self.kind == "single_linkage_gap":
            check_positive_int(p["num_bins"], "num_bins", minimum=2)
        elif self.kind == "dbscan":
            if not p["eps"] > 0:
                raise ConfigurationError(f"eps must be positive, got {p['eps']}")
            check_positive_int(p["min_pts"], "min_pts")
        else:
            check_positive_int(p["k_min"], "k_min")
            check_positive_int(p["k_max"], "k_max")
            if p["k_min"] > p["k_max"]:
                raise ConfigurationError(f"k_min={p['k_min']} exceeds k_max={p['k_max']}")
        if "max_iter" in p:
            check_positive_int(p["max_iter"], "max_iter")

    def __hash__(self):
        return hash((self.kind, tuple(sorted(self.params.items()))))

    @property
    def fixed_count(self) -> bool:
        return _KINDS[self.kind][0].fixed_count

    @property
    def name(self) -> str:
        """Short human-readable name, e.g. ``kmeans(k=2)``."""
        shown = [a for a in _SHORT_ARGS[self.kind] if self.params.get(a) is not None]
        return f"{self.kind}(" + ", ".join(f"{a}={self.params[a]}" for a in shown) + ")"

    def build(self, default_seed=0):
        """A fresh estimator for this spec."""
        p = self.params
        seed = default_seed if p.get("seed") is None else p.get("seed")
        if self.kind == "kmeans":
            return KMeans(p["k"], seed, p["max_iter"], p["tol"], p["metric"])
        if self.kind == "single_linkage_gap":
            return SingleLinkageGap(p["num_bins"], p["metric"])
        if self.kind == "dbscan":
            return DBSCAN(p["eps"], p["min_pts"], p["metric"])
        return AdaptiveKMeans(p["k_min"], p["k_max"], seed, p["max_iter"], p["tol"],
                              p["min_score"], p["metric"])

    def to_dict(self):
        return {"kind": self.kind, **self.params}

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        try:
            kind = data.pop("kind")
        except KeyError:
            raise ConfigurationError("clusterer spec needs a 'kind'") from None
        return cls(kind, data)

    @classmethod
    def parse(cls, text: str):
        """Parse the short form ``kind[:arg[:arg...]]``, e.g. ``kmeans:4`` or ``gap:10``."""
        head, *args = [t.strip() for t in text.strip().split(":")]
        kind = _ALIASES.get(head, head)
        if kind not in _SHORT_ARGS:
            raise ConfigurationError(f"unknown clusterer {head!r}")
        names = _SHORT_ARGS[kind]
        if len(args) > len(names):
            raise ConfigurationError(f"too many arguments in {text!r}; expected {kind}:{':'.join(names)}")
        params = {}
        for name, raw in zip(names, args):
            try:
                params[name] = int(raw) if name in _INT_PARAMS else float(raw)
            except ValueError:
                raise ConfigurationError(f"bad value {raw!r} for {name} in {text!r}") from None
        return cls(kind, params)
