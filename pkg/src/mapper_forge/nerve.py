"""Cluster refinement of a pullback cover and its nerve complex."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import clone

from ._validation import check_points, check_positive_int, resolve_threads
from .clustering import NOISE, canonical_labels
from .exceptions import ConfigurationError


@dataclass(frozen=True)
class RefinedElement:
    """One cluster inside one fiber: a vertex of the Mapper complex."""

    cover_index: tuple
    cluster_label: int
    members: frozenset

    def __post_init__(self):
        if not self.members:
            raise ValueError("refined elements must be nonempty")
        if self.cluster_label == NOISE:
            raise ValueError("noise does not form a refined element")

    @property
    def size(self):
        return len(self.members)


@dataclass
class FiberStats:
    cover_index: tuple
    fiber_size: int
    num_clusters: int
    noise_count: int


@dataclass(frozen=True)
class Refinement:
    elements: list
    stats: list
    labels: dict = field(repr=False)

    @property
    def noise_count(self):
        return sum(s.noise_count for s in self.stats)


def _cluster_fiber(clusterer, X, index):
    try:
        est = clone(clusterer)
        if hasattr(est, "fit_predict"):
            labels = est.fit_predict(X)
        else:
            labels = est.fit(X).labels_
    except ValueError as exc:
        raise ConfigurationError(str(exc), fiber=index) from exc
    return canonical_labels(labels)


def refine(pullback, X, clusterer, n_jobs=None) -> Refinement:
    """Cluster every nonempty fiber; one element per non-noise cluster.

    ``clusterer`` is any estimator exposing ``fit_predict`` or ``labels_``
    (a fresh clone is fitted per fiber). Negative labels count as noise.
    Elements are ordered by ``(cover_index, cluster_label)``.
    """
    X = check_points(X, allow_empty=True)
    jobs = [(idx, members) for idx, members in pullback if len(members)]
    work = lambda job: _cluster_fiber(clusterer, X[job[1]], job[0])  # noqa: E731
    workers = resolve_threads(n_jobs)
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, jobs))
    else:
        results = [work(job) for job in jobs]
    by_index = dict(zip((idx for idx, _ in jobs), zip((m for _, m in jobs), results)))

    elements, stats, labels = [], [], {}
    for idx, members in pullback:
        if not len(members):
            stats.append(FiberStats(idx, 0, 0, 0))
            continue
        members, lab = by_index[idx]
        labels[idx] = dict(zip(members.tolist(), lab.tolist()))
        n_clusters = int(lab.max()) + 1 if np.any(lab != NOISE) else 0
        for j in range(n_clusters):
            elements.append(RefinedElement(idx, j, frozenset(members[lab == j].tolist())))
        stats.append(FiberStats(idx, len(members), n_clusters, int(np.count_nonzero(lab == NOISE))))
    return Refinement(elements, stats, labels)


def refine_cover(pullback, dataset, clusterer_spec, n_jobs=None, default_seed=0):
    """Functional form of :func:`refine` taking a :class:`ClustererSpec`."""
    return refine(pullback, dataset, clusterer_spec.build(default_seed), n_jobs=n_jobs).elements


@dataclass(frozen=True)
class NerveComplex:
    """Nerve of a family of refined elements.

    ``simplices[d]`` lists sorted vertex tuples of dimension ``d``;
    ``witness[s]`` is the smallest point index common to all members of
    simplex ``s``.
    """

    vertices: list
    simplices: dict
    witness: dict
    max_dim: int

    def count(self, dim):
        return len(self.simplices.get(dim, ()))

    def to_dict(self, members=False):
        verts = []
        for i, v in enumerate(self.vertices):
            entry = {"id": i, "cover_index": list(v.cover_index), "label": v.cluster_label, "size": v.size}
            if members:
                entry["members"] = sorted(v.members)
            verts.append(entry)
        return {
            "vertices": verts,
            "simplices": {str(d): [list(s) for s in self.simplices[d]]
                          for d in sorted(self.simplices) if d > 0},
        }


def build_nerve(elements, max_dim=2) -> NerveComplex:
    """Nerve up to ``max_dim``, grown from edges by clique expansion.

    Each candidate ``(d+1)``-simplex extends a ``d``-simplex by a larger
    vertex adjacent to all of its vertices, and is kept only when the full
    intersection is nonempty.
    """
    max_dim = check_positive_int(max_dim, "max_dim")
    sets = [frozenset(e.members) if isinstance(e, RefinedElement) else frozenset(e) for e in elements]
    n = len(sets)
    simplices = {0: [(i,) for i in range(n)]}
    witness = {(i,): min(s) for i, s in enumerate(sets) if s}

    neighbours = [set() for _ in range(n)]
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            common = sets[i] & sets[j]
            if common:
                edges.append((i, j))
                witness[(i, j)] = min(common)
                neighbours[i].add(j)
                neighbours[j].add(i)
    simplices[1] = edges

    frontier = {e: sets[e[0]] & sets[e[1]] for e in edges}
    for dim in range(2, max_dim + 1):
        nxt = {}
        for simplex in sorted(frontier):
            common = frontier[simplex]
            shared = set.intersection(*(neighbours[v] for v in simplex))
            for v in sorted(u for u in shared if u > simplex[-1]):
                inter = common & sets[v]
                if inter:
                    cand = simplex + (v,)
                    nxt[cand] = inter
                    witness[cand] = min(inter)
        simplices[dim] = sorted(nxt)
        frontier = nxt
    return NerveComplex(list(elements), simplices, witness, max_dim)


@dataclass(frozen=True)
class MapperGraph:
    """1-skeleton of a nerve with per-vertex metadata.

    ``vertices`` holds dicts with ``id, cover_index, label, size,
    mean_lens``; ``edges`` holds ``(a, b, overlap)`` with ``a < b``.
    """

    vertices: list
    edges: list

    def to_dict(self):
        return {
            "vertices": self.vertices,
            "edges": [{"source": a, "target": b, "overlap": w} for a, b, w in self.edges],
        }

    @classmethod
    def from_dict(cls, data):
        verts = [dict(v, cover_index=list(v["cover_index"])) for v in data["vertices"]]
        edges = [(e["source"], e["target"], e.get("overlap", 0)) for e in data["edges"]]
        return cls(verts, edges)


def mapper_graph(nerve: NerveComplex, lens_values=None) -> MapperGraph:
    """Vertices ordered by ``(cover_index, cluster_label)`` and the nerve's edges."""
    order = sorted(range(len(nerve.vertices)),
                   key=lambda i: (tuple(nerve.vertices[i].cover_index), nerve.vertices[i].cluster_label))
    new_id = {old: new for new, old in enumerate(order)}
    lens = None if lens_values is None else check_points(lens_values, allow_empty=True)
    vertices = []
    for old in order:
        v = nerve.vertices[old]
        entry = {"id": new_id[old], "cover_index": list(v.cover_index), "label": v.cluster_label, "size": v.size}
        if lens is not None:
            entry["mean_lens"] = lens[sorted(v.members)].mean(axis=0).tolist()
        vertices.append(entry)
    edges = []
    for a, b in nerve.simplices.get(1, []):
        overlap = len(nerve.vertices[a].members & nerve.vertices[b].members)
        edges.append((*sorted((new_id[a], new_id[b])), overlap))
    edges.sort()
    return MapperGraph(vertices, edges)
