import itertools

import numpy as np
import pytest

from mapper_forge import (
    DBSCAN, KMeans, LensSpec, RefinedElement, apply_lens, build_cover, build_nerve, mapper_graph, pullback,
    refine, refine_cover,
)
from mapper_forge.clustering import ClustererSpec
from mapper_forge.exceptions import ConfigurationError


def brute_force_nerve(sets, max_dim):
    """Every vertex subset of size <= max_dim + 1 with a nonempty common intersection."""
    out = {d: [] for d in range(max_dim + 1)}
    for size in range(1, max_dim + 2):
        for combo in itertools.combinations(range(len(sets)), size):
            if frozenset.intersection(*(sets[i] for i in combo)):
                out[size - 1].append(combo)
    return out


def random_family(r, n_sets, universe=30):
    return [frozenset(r.choice(universe, size=int(r.integers(1, 9)), replace=False).tolist())
            for _ in range(n_sets)]


class TestBuildNerve:
    def test_disjoint(self):
        nerve = build_nerve([{1}, {2}, {3}])
        assert nerve.simplices[1] == []

    def test_hollow_triangle(self):
        nerve = build_nerve([{1, 2}, {2, 3}, {1, 3}])
        assert nerve.simplices[1] == [(0, 1), (0, 2), (1, 2)]
        assert nerve.simplices[2] == []

    def test_filled_triangle_witness(self):
        sets = [frozenset(s) for s in ({1, 2, 9}, {2, 3, 9}, {1, 3, 9})]
        nerve = build_nerve(sets)
        assert nerve.simplices[2] == [(0, 1, 2)]
        assert nerve.witness[(0, 1, 2)] == 9
        assert nerve.simplices == {d: v for d, v in brute_force_nerve(sets, 2).items()}

    @pytest.mark.parametrize("seed", range(50))
    def test_matches_brute_force(self, seed):
        r = np.random.default_rng(seed)
        sets = random_family(r, int(r.integers(1, 13)))
        nerve = build_nerve(sets, max_dim=3)
        assert nerve.simplices == brute_force_nerve(sets, 3)

    def test_witnesses_and_closure(self):
        r = np.random.default_rng(99)
        sets = random_family(r, 12, universe=15)
        nerve = build_nerve(sets, max_dim=4)
        for d in range(1, 5):
            for simplex in nerve.simplices[d]:
                assert len(set(simplex)) == len(simplex)
                assert all(nerve.witness[simplex] in sets[v] for v in simplex)
                for face in itertools.combinations(simplex, d):
                    assert face in nerve.simplices[d - 1]

    def test_max_dim_validated(self):
        with pytest.raises(ConfigurationError):
            build_nerve([{1}], max_dim=0)


class TestRefine:
    def _single_fiber(self, X):
        values = np.zeros((len(X), 1))
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            cover = build_cover(values, [1], 0.0)
        return pullback(values, cover)

    def test_kmeans_one(self, rng):
        X = rng.normal(size=(10, 2))
        elements = refine_cover(self._single_fiber(X), X, ClustererSpec.parse("kmeans:1"))
        assert len(elements) == 1 and elements[0].members == frozenset(range(10))

    def test_kmeans_two_blobs(self, two_blobs):
        X = two_blobs.points
        elements = refine_cover(self._single_fiber(X), X, ClustererSpec.parse("kmeans:2"))
        assert [e.members for e in elements] == [frozenset(range(50)), frozenset(range(50, 100))]

    def test_noise_excluded(self):
        blob = np.random.default_rng(3).normal(size=(40, 2)) * 0.2
        X = np.vstack([blob, [(20, 0), (0, 20), (-20, -20)]])
        ref = refine(self._single_fiber(X), X, DBSCAN(eps=0.5, min_pts=3))
        assert ref.stats[0].noise_count == 3
        assert sum(e.size for e in ref.elements) == len(X) - 3
        assert all(i not in e.members for e in ref.elements for i in (40, 41, 42))

    def test_fiber_error_attribution(self, circle):
        values = apply_lens(circle, LensSpec("coordinate", axis=1))
        pb = pullback(values, build_cover(values, [40], 0.0))
        with pytest.raises(ConfigurationError, match=r"fiber \(\d+,\)") as info:
            refine(pb, circle.points, KMeans(n_clusters=20))
        assert info.value.fiber is not None

    def test_element_order_and_containment(self, circle):
        values = apply_lens(circle, LensSpec("coordinate", axis=1))
        pb = pullback(values, build_cover(values, [4], 0.35))
        elements = refine(pb, circle.points, KMeans(3)).elements
        keys = [(e.cover_index, e.cluster_label) for e in elements]
        assert keys == sorted(keys)
        for e in elements:
            assert e.members <= set(pb.fiber(e.cover_index).tolist())

    def test_threaded_matches_serial(self, circle):
        values = apply_lens(circle, LensSpec("coordinate", axis=1))
        pb = pullback(values, build_cover(values, [6], 0.3))
        serial = refine(pb, circle.points, KMeans(3), n_jobs=1).elements
        threaded = refine(pb, circle.points, KMeans(3), n_jobs=4).elements
        assert serial == threaded

    def test_empty_element_rejected(self):
        with pytest.raises(ValueError):
            RefinedElement((0,), 0, frozenset())


def test_one_d_edges_join_neighbouring_fibers(circle):
    values = apply_lens(circle, LensSpec("coordinate", axis=1))
    pb = pullback(values, build_cover(values, [7], 0.4))
    nerve = build_nerve(refine(pb, circle.points, KMeans(3)).elements)
    for a, b in nerve.simplices[1]:
        assert abs(nerve.vertices[a].cover_index[0] - nerve.vertices[b].cover_index[0]) <= 1


class TestMapperGraph:
    def test_isolated(self):
        elements = [RefinedElement((i,), 0, frozenset({i})) for i in range(4)]
        graph = mapper_graph(build_nerve(elements))
        assert len(graph.vertices) == 4 and graph.edges == []

    def test_hollow_triangle_is_three_cycle(self):
        elements = [RefinedElement((0,), 0, frozenset({1, 2})), RefinedElement((1,), 0, frozenset({2, 3})),
                    RefinedElement((2,), 0, frozenset({1, 3}))]
        graph = mapper_graph(build_nerve(elements))
        assert graph.edges == [(0, 1, 1), (0, 2, 1), (1, 2, 1)]

    def test_vertex_order_and_metadata(self):
        elements = [RefinedElement((1,), 0, frozenset({0, 1})), RefinedElement((0,), 1, frozenset({1, 2})),
                    RefinedElement((0,), 0, frozenset({3}))]
        lens = np.array([[0.0], [2.0], [4.0], [6.0]])
        graph = mapper_graph(build_nerve(elements), lens)
        assert [(v["cover_index"], v["label"]) for v in graph.vertices] == [([0], 0), ([0], 1), ([1], 0)]
        assert graph.vertices[1]["mean_lens"] == [3.0]
        assert graph.edges == [(1, 2, 1)]
