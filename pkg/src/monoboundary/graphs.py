"""Opposite graphs, coconnected decomposition, and the isolated-vertex test
that gates the boundary-quotient relation set.

Graphs here are the commutation graphs of presentations: small, undirected,
no self-loops.  A graph splits into coconnected factors along the connected
components of its opposite (complement) graph; vertices in different factors
are always joined by an edge, so the presented monoid is the direct product
of the factor monoids.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .core import DEFAULT_MAX_SPHERE, MonoidPresentation, sphere
from .errors import InputFormatError


@dataclass(frozen=True)
class UGraph:
    vertices: tuple[str, ...]
    edges: frozenset[tuple[int, int]]  # index pairs (i, j) with i < j

    def __post_init__(self):
        if len(set(self.vertices)) != len(self.vertices):
            raise InputFormatError("graph vertices must be distinct")
        n = len(self.vertices)
        for i, j in self.edges:
            if not (0 <= i < j < n):
                raise InputFormatError(f"edge ({i}, {j}) is not a valid vertex pair")

    @classmethod
    def build(cls, vertices: Sequence[str], edges: Iterable[tuple[str, str]]) -> "UGraph":
        verts = tuple(vertices)
        index = {v: i for i, v in enumerate(verts)}
        pairs = set()
        for a, b in edges:
            if a == b:
                raise InputFormatError(f"self-loop at {a!r}")
            if a not in index or b not in index:
                raise InputFormatError(f"edge ({a!r}, {b!r}) uses an unknown vertex")
            i, j = sorted((index[a], index[b]))
            pairs.add((i, j))
        return cls(verts, frozenset(pairs))

    @classmethod
    def from_presentation(cls, p: MonoidPresentation) -> "UGraph":
        return cls(p.generators, frozenset(p.commute_pairs))

    def to_presentation(self) -> MonoidPresentation:
        return MonoidPresentation(
            self.vertices,
            [(self.vertices[i], self.vertices[j]) for i, j in self.edges],
        )

    @property
    def n(self) -> int:
        return len(self.vertices)

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.edges

    def degree(self, i: int) -> int:
        return sum(1 for e in self.edges if i in e)


def opposite(g: UGraph) -> UGraph:
    """Complement the edge set within all 2-subsets; an involution."""
    all_pairs = {(i, j) for i in range(g.n) for j in range(i + 1, g.n)}
    return UGraph(g.vertices, frozenset(all_pairs - g.edges))


def connected_components(g: UGraph) -> list[tuple[int, ...]]:
    """Vertex sets of the connected components, ordered by least vertex index."""
    adj: list[set[int]] = [set() for _ in range(g.n)]
    for i, j in g.edges:
        adj[i].add(j)
        adj[j].add(i)
    seen: set[int] = set()
    comps: list[tuple[int, ...]] = []
    for start in range(g.n):
        if start in seen:
            continue
        stack = [start]
        comp = set()
        while stack:
            v = stack.pop()
            if v in comp:
                continue
            comp.add(v)
            stack.extend(adj[v] - comp)
        seen |= comp
        comps.append(tuple(sorted(comp)))
    return comps


def induced(g: UGraph, verts: Sequence[int]) -> UGraph:
    vs = tuple(verts)
    pos = {v: i for i, v in enumerate(vs)}
    edges = frozenset(
        (min(pos[i], pos[j]), max(pos[i], pos[j]))
        for i, j in g.edges
        if i in pos and j in pos
    )
    return UGraph(tuple(g.vertices[v] for v in vs), edges)


def coconnected_components(g: UGraph) -> list[UGraph]:
    """Induced subgraphs on the connected components of the opposite graph.

    Their join (all cross-component pairs added back) reconstitutes g.
    """
    return [induced(g, comp) for comp in connected_components(opposite(g))]


def crisp_laca_applicable(g: UGraph) -> bool:
    """True iff the opposite graph has no isolated vertices."""
    op = opposite(g)
    return all(op.degree(v) >= 1 for v in range(g.n))


def product_growth_check(g: UGraph, k: int, max_size: int = DEFAULT_MAX_SPHERE) -> bool:
    """Verify that sphere sizes of the presented monoid match the convolution
    of the coconnected factors' sphere sizes up to depth k."""
    if k < 0:
        raise InputFormatError("depth must be non-negative")
    whole = g.to_presentation()
    whole_counts = [len(sphere(whole, j, max_size=max_size)) for j in range(k + 1)]
    factor_counts: list[list[int]] = []
    for factor in coconnected_components(g):
        fp = factor.to_presentation()
        factor_counts.append([len(sphere(fp, j, max_size=max_size)) for j in range(k + 1)])
    conv = [1] + [0] * k
    for counts in factor_counts:
        nxt = [0] * (k + 1)
        for a in range(k + 1):
            if conv[a] == 0:
                continue
            for b in range(k + 1 - a):
                nxt[a + b] += conv[a] * counts[b]
        conv = nxt
    return conv == whole_counts
