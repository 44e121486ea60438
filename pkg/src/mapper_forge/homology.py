"""Betti numbers over GF(2) for small simplicial complexes."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations


class DisjointSet:
    """Union-find with path halving and union by size."""

    def __init__(self, n):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x):
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True

    def groups(self):
        """Parts as sorted lists, ordered by their smallest element."""
        parts = {}
        for x in range(len(self.parent)):
            parts.setdefault(self.find(x), []).append(x)
        return sorted(parts.values(), key=lambda p: p[0])


@dataclass(frozen=True)
class BettiProfile:
    betti: tuple
    euler: int

    def __getitem__(self, k):
        return self.betti[k]

    def __len__(self):
        return len(self.betti)

    def to_dict(self):
        return {"betti": list(self.betti), "euler": self.euler}


def _graph_parts(graph):
    """Accept ``(n_vertices, edges)`` or an object with ``vertices``/``edges``."""
    if isinstance(graph, tuple) and len(graph) == 2:
        n, edges = graph
    else:
        n, edges = len(graph.vertices), graph.edges
    return int(n), [tuple(e[:2]) for e in edges]


def connected_components(graph):
    """Partition of the vertices by edge connectivity, and b0."""
    n, edges = _graph_parts(graph)
    ds = DisjointSet(n)
    for a, b in edges:
        ds.union(a, b)
    parts = ds.groups()
    return parts, len(parts)


def graph_cycle_rank(graph) -> int:
    """b1 of a simple graph: ``|E| - |V| + b0``."""
    n, edges = _graph_parts(graph)
    distinct = {tuple(sorted(e)) for e in edges}
    _, b0 = connected_components(graph)
    return len(distinct) - n + b0


def gf2_rank(columns) -> int:
    """Rank over GF(2) of a matrix given as integer bitmask columns."""
    pivots = {}
    rank = 0
    for col in columns:
        while col:
            top = col.bit_length() - 1
            if top not in pivots:
                pivots[top] = col
                rank += 1
                break
            col ^= pivots[top]
    return rank


def _simplex_table(complex_):
    simplices = getattr(complex_, "simplices", complex_)
    table = {}
    for dim, simps in simplices.items():
        dim = int(dim)
        table[dim] = sorted({tuple(sorted(s)) for s in simps})
    return table


def boundary_columns(k_simplices, faces):
    """Columns of the boundary map from k-simplices to (k-1)-faces, as bitmasks."""
    row = {f: i for i, f in enumerate(faces)}
    cols = []
    for s in k_simplices:
        mask = 0
        for face in combinations(s, len(s) - 1):
            mask |= 1 << row[face]
        cols.append(mask)
    return cols


def betti_gf2(complex_, up_to_dim=None) -> BettiProfile:
    """Betti numbers ``b_0..b_up_to_dim`` with GF(2) coefficients.

    ``complex_`` is a mapping ``dim -> iterable of vertex tuples`` (or any
    object exposing one as ``.simplices``) and must be closed under faces.
    """
    table = _simplex_table(complex_)
    top = max((d for d, s in table.items() if s), default=0)
    if up_to_dim is None:
        up_to_dim = top
    counts = {d: len(table.get(d, ())) for d in range(max(top, up_to_dim) + 2)}

    ranks = {0: 0}
    for k in range(1, up_to_dim + 2):
        simps, faces = table.get(k, []), table.get(k - 1, [])
        ranks[k] = gf2_rank(boundary_columns(simps, faces)) if simps else 0
    betti = tuple(counts[k] - ranks[k] - ranks[k + 1] for k in range(up_to_dim + 1))
    euler = sum((-1) ** d * n for d, n in counts.items())
    return BettiProfile(betti, euler)
