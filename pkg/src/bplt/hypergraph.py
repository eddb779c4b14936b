"""Multihypergraphs and the operations the Gibbs, tree and BP modules share.

Edges are kept as a canonically sorted tuple of sorted vertex tuples, so an edge id is
simply a position in `Multihypergraph.edges`. Copies of a multi-edge get distinct ids.
"""

import logging
from collections import Counter, defaultdict
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from pathlib import Path

import networkx as nx
import numpy as np

from .exceptions import ValidationError

__all__ = [
    "Multihypergraph",
    "SAW",
    "TreeLikeReport",
    "build",
    "remove_vertices",
    "contract_vertices",
    "remove_edges",
    "degree_stats",
    "enumerate_saws",
    "is_linear_hypertree",
    "parse_hypergraph",
    "format_hypergraph",
    "read_hypergraph",
    "write_hypergraph",
]

logger = logging.getLogger(__name__)

Edge = tuple[int, ...]


@dataclass(frozen=True)
class Multihypergraph:
    num_vertices: int
    edges: tuple[Edge, ...] = ()

    def __post_init__(self):
        if self.num_vertices < 0:
            raise ValidationError(f"num_vertices must be >= 0, got {self.num_vertices}")
        for edge in self.edges:
            if any(u >= v for u, v in zip(edge, edge[1:])):
                raise ValidationError(f"edge {edge} is not strictly increasing")
            if edge and (edge[0] < 0 or edge[-1] >= self.num_vertices):
                raise ValidationError(
                    f"edge {edge} has a vertex outside [0, {self.num_vertices})"
                )
        if list(self.edges) != sorted(self.edges):
            raise ValidationError("edges must be in canonical order, use build()")

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def degrees(self) -> np.ndarray:
        """Vertex degrees counted with multiplicity."""
        deg = np.zeros(self.num_vertices, dtype=np.int64)
        for edge in self.edges:
            deg[list(edge)] += 1
        return deg

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max()) if self.num_vertices else 0

    @property
    def min_degree(self) -> int:
        return int(self.degrees.min()) if self.num_vertices else 0

    @cached_property
    def incidence(self) -> tuple[tuple[int, ...], ...]:
        """Edge ids incident to each vertex, ascending."""
        incident = [[] for _ in range(self.num_vertices)]
        for edge_id, edge in enumerate(self.edges):
            for v in edge:
                incident[v].append(edge_id)
        return tuple(tuple(ids) for ids in incident)

    @cached_property
    def edge_masks(self) -> np.ndarray:
        """One bitmask per edge, bit v set iff v is in the edge."""
        if self.num_vertices > 62:
            raise ValidationError("bitmask form needs at most 62 vertices")
        masks = np.zeros(self.num_edges, dtype=np.int64)
        for edge_id, edge in enumerate(self.edges):
            masks[edge_id] = sum(1 << v for v in edge)
        return masks

    @cached_property
    def edge_array(self) -> np.ndarray:
        """Edges as an (M, k) integer array. Uniform multihypergraphs only."""
        sizes = sorted({len(edge) for edge in self.edges})
        if len(sizes) > 1:
            raise ValidationError(f"edges of sizes {sizes} do not fit one array")
        k = sizes[0] if sizes else 0
        return np.array(self.edges, dtype=np.int64).reshape(self.num_edges, k)

    def multiplicity(self, edge: Iterable[int]) -> int:
        return self.edges.count(tuple(sorted(edge)))

    def is_uniform(self, k: int) -> bool:
        return all(len(edge) == k for edge in self.edges)


@dataclass(frozen=True)
class SAW:
    """Self-avoiding walk v_1, e_1, v_2, ..., e_l, v_{l+1} with edge ids."""

    vertices: tuple[int, ...]
    edges: tuple[int, ...] = ()

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def end(self) -> int:
        return self.vertices[-1]


@dataclass
class TreeLikeReport:
    delta: int
    delta_min: int
    delta_ell: dict[int, int] = field(default_factory=dict)
    gamma: int = 0
    edge_vertex_ratio: float = 0.0
    ratios: dict[str, float] = field(default_factory=dict)


def build(num_vertices: int, edges: Iterable[Iterable[int]]) -> Multihypergraph:
    """Build a multihypergraph from vertex lists, sorting every edge and the edge list."""
    canonical = []
    for raw in edges:
        edge = tuple(sorted(int(v) for v in raw))
        if len(set(edge)) != len(edge):
            raise ValidationError(f"edge {list(raw)} repeats a vertex")
        for v in edge:
            if not 0 <= v < num_vertices:
                raise ValidationError(
                    f"vertex {v} out of range for {num_vertices} vertices"
                )
        canonical.append(edge)
    return Multihypergraph(num_vertices, tuple(sorted(canonical)))


def _check_vertex_set(G: Multihypergraph, U: Iterable[int]) -> frozenset[int]:
    U = frozenset(int(u) for u in U)
    bad = [u for u in U if not 0 <= u < G.num_vertices]
    if bad:
        raise ValidationError(f"vertices {sorted(bad)} out of range for {G.num_vertices}")
    return U


def _reindex(G: Multihypergraph, U: frozenset[int]) -> dict[int, int]:
    kept = [v for v in range(G.num_vertices) if v not in U]
    return {old: new for new, old in enumerate(kept)}


def remove_vertices(
    G: Multihypergraph, U: Iterable[int]
) -> tuple[Multihypergraph, dict[int, int]]:
    """G − U: drop U and every edge meeting U.

    Returns
    -------
    graph : Multihypergraph
        The induced multihypergraph on V \\ U, reindexed densely.
    index_map : dict[int, int]
        Old vertex index to new vertex index.
    """
    U = _check_vertex_set(G, U)
    index_map = _reindex(G, U)
    edges = [
        [index_map[v] for v in edge] for edge in G.edges if not U.intersection(edge)
    ]
    return build(len(index_map), edges), index_map


def contract_vertices(
    G: Multihypergraph, U: Iterable[int]
) -> tuple[Multihypergraph, dict[int, int]]:
    """G ⊖ U: drop U and remove it from every edge. Edges may become empty."""
    U = _check_vertex_set(G, U)
    index_map = _reindex(G, U)
    edges = [[index_map[v] for v in edge if v not in U] for edge in G.edges]
    return build(len(index_map), edges), index_map


def remove_edges(G: Multihypergraph, F: Iterable[Iterable[int]]) -> Multihypergraph:
    """G − F for a sub-multiset F of the edges."""
    remaining = Counter(G.edges)
    for raw in F:
        edge = tuple(sorted(raw))
        if remaining[edge] == 0:
            raise ValidationError(f"edge {list(edge)} is not (or no longer) in G")
        remaining[edge] -= 1
    return Multihypergraph(G.num_vertices, tuple(sorted(remaining.elements())))


def degree_stats(G: Multihypergraph, k: int) -> TreeLikeReport:
    """Degree and codegree statistics of a k-uniform multihypergraph.

    Δ_ℓ is the largest number of edges containing a common ℓ-set; only ℓ-sets inside
    some edge can have positive degree, so hashing the ℓ-subsets of every edge is exact.
    Γ is the largest number of (k−1)-sets S with S∪{v}, S∪{v'} both edges.
    """
    if k < 2:
        raise ValidationError(f"k must be >= 2, got {k}")
    if not G.is_uniform(k):
        sizes = sorted({len(e) for e in G.edges})
        raise ValidationError(f"G is not {k}-uniform (edge sizes {sizes})")

    delta = G.max_degree
    delta_min = G.min_degree
    delta_ell = {}
    for ell in range(2, k):
        counts = Counter(s for edge in G.edges for s in combinations(edge, ell))
        delta_ell[ell] = max(counts.values(), default=0)

    completions = defaultdict(set)
    for edge in set(G.edges):
        for v in edge:
            completions[tuple(u for u in edge if u != v)].add(v)
    pair_counts = Counter()
    for vertices in completions.values():
        pair_counts.update(combinations(sorted(vertices), 2))
    gamma = max(pair_counts.values(), default=0)

    edge_vertex_ratio = G.num_edges / G.num_vertices if G.num_vertices else 0.0
    ratios = {"delta": float(delta)}
    for ell, value in delta_ell.items():
        ratios[f"delta_{ell}"] = value / delta ** ((k - ell) / (k - 1)) if delta else 0.0
    ratios["gamma"] = gamma / delta if delta else 0.0
    ratios["edge_vertex"] = edge_vertex_ratio / delta if delta else 0.0
    ratios["regularity"] = delta_min / delta if delta else 1.0

    return TreeLikeReport(
        delta=delta,
        delta_min=delta_min,
        delta_ell=delta_ell,
        gamma=gamma,
        edge_vertex_ratio=edge_vertex_ratio,
        ratios=ratios,
    )


def enumerate_saws(G: Multihypergraph, v: int, max_len: int | None = None) -> list[SAW]:
    """All self-avoiding walks from v of length at most `max_len` (unbounded if None).

    Walks are produced depth first, edges by id and vertices ascending.
    """
    if not 0 <= v < G.num_vertices:
        raise ValidationError(f"vertex {v} out of range for {G.num_vertices}")
    if max_len is not None and max_len < 0:
        raise ValidationError(f"max_len must be >= 0, got {max_len}")

    walks = []

    def extend(vertices: tuple[int, ...], edges: tuple[int, ...]) -> None:
        walks.append(SAW(vertices, edges))
        if max_len is not None and len(edges) >= max_len:
            return
        for edge_id in G.incidence[vertices[-1]]:
            if edge_id in edges:
                continue
            for x in G.edges[edge_id]:
                if x not in vertices:
                    extend(vertices + (x,), edges + (edge_id,))

    extend((v,), ())
    return walks


def is_linear_hypertree(G: Multihypergraph) -> bool:
    """True iff edges pairwise meet in at most one vertex and every pair of distinct
    vertices is joined by exactly one self-avoiding walk.

    Size-0 and size-1 edges carry no walks and are ignored. For a linear hypergraph the
    second condition is the vertex/edge incidence graph being a tree.
    """
    big = [edge for edge in G.edges if len(edge) >= 2]
    pair_owner = set()
    for edge in big:
        for pair in combinations(edge, 2):
            if pair in pair_owner:
                return False
            pair_owner.add(pair)

    incidence = nx.Graph()
    incidence.add_nodes_from(("v", v) for v in range(G.num_vertices))
    for edge_id, edge in enumerate(big):
        incidence.add_edges_from((("e", edge_id), ("v", v)) for v in edge)
    if incidence.number_of_nodes() == 0:
        return True
    return nx.is_tree(incidence)


def format_hypergraph(G: Multihypergraph) -> str:
    lines = [f"{G.num_vertices} {G.num_edges}"]
    lines.extend(" ".join(str(v) for v in edge) for edge in G.edges)
    return "\n".join(lines) + "\n"


def parse_hypergraph(text: str) -> Multihypergraph:
    """Parse the text format: `N M`, then M edge lines (blank line = empty edge).

    `#` starts a comment. Lines holding only a comment are skipped entirely.
    """
    lines = []
    for raw in text.splitlines():
        if raw.lstrip().startswith("#"):
            continue
        lines.append(raw.split("#", 1)[0].strip())
    while lines and lines[0] == "":
        lines.pop(0)
    if not lines:
        raise ValidationError("empty hypergraph file")
    try:
        num_vertices, num_edges = (int(x) for x in lines[0].split())
    except ValueError as err:
        raise ValidationError(f"bad header line {lines[0]!r}, expected 'N M'") from err
    body = lines[1 : 1 + num_edges]
    if len(body) < num_edges:
        raise ValidationError(f"expected {num_edges} edge lines, found {len(body)}")
    if any(line for line in lines[1 + num_edges :]):
        raise ValidationError("trailing content after the declared edges")
    try:
        edges = [[int(x) for x in line.split()] for line in body]
    except ValueError as err:
        raise ValidationError(f"non-integer vertex in edge list: {err}") from err
    return build(num_vertices, edges)


def read_hypergraph(path: Path | str) -> Multihypergraph:
    with open(path, "rt") as f:
        return parse_hypergraph(f.read())


def write_hypergraph(G: Multihypergraph, path: Path | str) -> None:
    with open(path, "wt") as f:
        f.write(format_hypergraph(G))
