"""Subgraph counts in G(n,p) and G(n,m) as a hypergraph problem.

Copies of H in K_n form a k-uniform hypergraph G^H on the C(n,2) edges of K_n
(k = |E(H)|), which is Δ_H-regular with Δ_H = 2k (n−2)_{h−2} / |aut H|. For strictly
2-balanced H the hypergraph rates apply with p ~ c Δ_H^{−1/(k−1)}.
"""

import logging
from dataclasses import dataclass
from itertools import combinations
from math import comb, log, perm
from pathlib import Path

import networkx as nx
from networkx.algorithms.isomorphism import GraphMatcher
from sympy import Rational

from .constants import SUBGRAPH_COPY_CAP, SUBGRAPH_MAX_VERTICES, Model
from .exceptions import ValidationError
from .hypergraph import Multihypergraph, build
from .rates import rate_gnm, rate_gnp

__all__ = [
    "SimpleGraph",
    "SubgraphProfile",
    "SubgraphRate",
    "named_graph",
    "read_graph",
    "subgraph_profile",
    "delta_H",
    "build_subgraph_hypergraph",
    "rate_H",
    "rate_H_n_scaling",
    "partite_lower_bounds",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SimpleGraph:
    num_vertices: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        seen = set()
        for u, v in self.edges:
            if u == v:
                raise ValidationError(f"loop at vertex {u}")
            if not (0 <= u < self.num_vertices and 0 <= v < self.num_vertices):
                raise ValidationError(f"edge ({u}, {v}) out of range for {self.num_vertices} vertices")
            pair = (min(u, v), max(u, v))
            if pair in seen:
                raise ValidationError(f"repeated edge {pair}")
            seen.add(pair)

    @classmethod
    def from_edges(cls, num_vertices: int, edges) -> "SimpleGraph":
        return cls(num_vertices, tuple(sorted((min(u, v), max(u, v)) for u, v in edges)))

    @property
    def k(self) -> int:
        return len(self.edges)

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.num_vertices))
        graph.add_edges_from(self.edges)
        return graph

    def is_connected(self) -> bool:
        return self.num_vertices > 0 and nx.is_connected(self.to_networkx())


@dataclass(frozen=True)
class SubgraphProfile:
    m2: Rational
    strictly_2_balanced: bool
    aut: int
    chromatic_number: int


@dataclass(frozen=True)
class SubgraphRate:
    value: float
    model: Model
    k: int
    m2: Rational
    aut: int
    delta_exponent: str
    parameterization: str


def named_graph(name: str) -> SimpleGraph:
    """`K<r>`, `C<l>`, `P<l>` (path on l vertices), `K4-e` (diamond) or
    `triangle+pendant`."""
    key = name.strip().lower()
    if key == "k4-e":
        return SimpleGraph.from_edges(4, [(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)])
    if key == "triangle+pendant":
        return SimpleGraph.from_edges(4, [(0, 1), (0, 2), (1, 2), (2, 3)])
    if len(key) >= 2 and key[0] in "kcp" and key[1:].isdigit():
        size = int(key[1:])
        if key[0] == "k" and size >= 1:
            return SimpleGraph.from_edges(size, combinations(range(size), 2))
        if key[0] == "c" and size >= 3:
            return SimpleGraph.from_edges(size, [(i, (i + 1) % size) for i in range(size)])
        if key[0] == "p" and size >= 2:
            return SimpleGraph.from_edges(size, [(i, i + 1) for i in range(size - 1)])
    raise ValidationError(f"unknown graph name {name!r} (try K3, C4, P3, K4-e, triangle+pendant)")


def read_graph(path: Path | str) -> SimpleGraph:
    """Whitespace-separated edge list, vertices relabelled 0..h−1 in sorted order."""
    try:
        graph = nx.read_edgelist(path, nodetype=int, data=False)
    except (TypeError, ValueError) as err:
        raise ValidationError(f"could not read edge list {path}: {err}") from err
    relabel = {v: i for i, v in enumerate(sorted(graph.nodes))}
    return SimpleGraph.from_edges(len(relabel), [(relabel[u], relabel[v]) for u, v in graph.edges])


def _check_size(H: SimpleGraph) -> None:
    if H.num_vertices > SUBGRAPH_MAX_VERTICES:
        raise ValidationError(f"H has {H.num_vertices} vertices, at most {SUBGRAPH_MAX_VERTICES} supported")


def _automorphism_count(H: SimpleGraph) -> int:
    graph = H.to_networkx()
    return sum(1 for _ in GraphMatcher(graph, graph).isomorphisms_iter())


def _colourable(adjacency: list[set[int]], colours: int) -> bool:
    assignment = [-1] * len(adjacency)
    order = sorted(range(len(adjacency)), key=lambda v: -len(adjacency[v]))

    def place(i: int, used: int) -> bool:
        if i == len(order):
            return True
        v = order[i]
        taken = {assignment[u] for u in adjacency[v]}
        # a fresh colour is interchangeable with any other fresh colour
        for colour in range(min(used + 1, colours)):
            if colour not in taken:
                assignment[v] = colour
                if place(i + 1, max(used, colour + 1)):
                    return True
        assignment[v] = -1
        return False

    return place(0, 0)


def _chromatic_number(H: SimpleGraph) -> int:
    if H.num_vertices == 0:
        return 0
    adjacency = [set() for _ in range(H.num_vertices)]
    for u, v in H.edges:
        adjacency[u].add(v)
        adjacency[v].add(u)
    colours = 1
    while not _colourable(adjacency, colours):
        colours += 1
    return colours


def subgraph_profile(H: SimpleGraph) -> SubgraphProfile:
    """m₂(H) = max (|E(F)| − 1)/(|V(F)| − 2) over F ⊆ H with |V(F)| ≥ 3, strict 2-balance
    (|E(H)| ≥ 3 and the maximum attained only at F = H), |aut H| and χ(H).

    On a fixed vertex set the induced subgraph is the densest, so the maximum runs over
    vertex subsets only.
    """
    _check_size(H)
    if H.num_vertices < 3:
        raise ValidationError(f"2-density needs at least 3 vertices, H has {H.num_vertices}")
    best = None
    argmax = []
    for size in range(3, H.num_vertices + 1):
        for support in combinations(range(H.num_vertices), size):
            inside = set(support)
            induced = sum(1 for u, v in H.edges if u in inside and v in inside)
            density = Rational(induced - 1, size - 2)
            if best is None or density > best:
                best, argmax = density, [support]
            elif density == best:
                argmax.append(support)
    strictly = H.k >= 3 and argmax == [tuple(range(H.num_vertices))]
    return SubgraphProfile(
        m2=best,
        strictly_2_balanced=strictly,
        aut=_automorphism_count(H),
        chromatic_number=_chromatic_number(H),
    )


def delta_H(H: SimpleGraph, n: int) -> int:
    """Copies of H in K_n through a fixed edge: 2k (n−2)_{h−2} / |aut H|."""
    _check_size(H)
    if n < H.num_vertices:
        raise ValidationError(f"n = {n} must be >= h = {H.num_vertices}")
    aut = _automorphism_count(H)
    value, remainder = divmod(2 * H.k * perm(n - 2, H.num_vertices - 2), aut)
    if remainder:
        raise ArithmeticError(f"2k(n-2)_(h-2) is not divisible by |aut H| = {aut}")
    return value


def build_subgraph_hypergraph(
    H: SimpleGraph, n: int, copy_cap: int = SUBGRAPH_COPY_CAP
) -> Multihypergraph:
    """G^H: one vertex per edge of K_n (in `combinations` order), one k-edge per copy of
    H in K_n."""
    _check_size(H)
    h = H.num_vertices
    if n < h:
        raise ValidationError(f"n = {n} must be >= h = {h}")
    aut = _automorphism_count(H)
    expected, remainder = divmod(perm(n, h), aut)
    if remainder:
        raise ArithmeticError(f"(n)_h is not divisible by |aut H| = {aut}")
    if expected > copy_cap:
        raise ValidationError(f"K_{n} holds {expected} copies of H, above the cap of {copy_cap}")

    pair_index = {pair: i for i, pair in enumerate(combinations(range(n), 2))}
    complete = nx.complete_graph(n)
    copies = set()
    for mapping in GraphMatcher(complete, H.to_networkx()).subgraph_monomorphisms_iter():
        image = {hv: gv for gv, hv in mapping.items()}
        copies.add(
            tuple(sorted(pair_index[tuple(sorted((image[u], image[v])))] for u, v in H.edges))
        )
    if len(copies) != expected:
        raise ArithmeticError(f"found {len(copies)} copies of H in K_{n}, expected {expected}")
    logger.debug("G^H on %d vertices with %d edges", comb(n, 2), len(copies))
    return build(comb(n, 2), sorted(copies))


def _require_balanced(H: SimpleGraph) -> SubgraphProfile:
    profile = subgraph_profile(H)
    if not profile.strictly_2_balanced:
        raise ValidationError("H is not strictly 2-balanced; the rate formulas do not apply")
    return profile


def rate_H(H: SimpleGraph, value: float, eta: float, model: Model | str = Model.gnp) -> SubgraphRate:
    """Limit of Δ_H^{1/(k−1)} C(n,2)^{−1} log P(X_H ≤ η E X_H), with `value` the constant c
    (G(n,p)) or b (G(n,m)) of the Δ_H-parameterization."""
    model = Model(model)
    profile = _require_balanced(H)
    k = H.k
    if model is Model.gnp:
        rate = rate_gnp(k, value, eta)
        parameterization = (
            f"p ~ c Delta_H^(-1/{k - 1}) ~ c ({profile.aut}/{2 * k})^(1/{k - 1}) n^(-{1 / profile.m2})"
        )
    else:
        rate = rate_gnm(k, value, eta)
        parameterization = (
            f"m ~ b Delta_H^(-1/{k - 1}) C(n,2) ~ b ({profile.aut}/{2 * k})^(1/{k - 1}) "
            f"n^(2-{1 / profile.m2})"
        )
    return SubgraphRate(
        value=rate,
        model=model,
        k=k,
        m2=profile.m2,
        aut=profile.aut,
        delta_exponent=f"Delta_H ~ ({2 * k}/{profile.aut}) n^{H.num_vertices - 2}",
        parameterization=parameterization,
    )


def rate_H_n_scaling(H: SimpleGraph, value: float, model: Model | str = Model.gnp) -> float:
    """H-free rate in the n-normalization: lim n^{1/m₂ − 2} log P(X_H = 0) with
    p = c n^{−1/m₂} (or m = b n^{2 − 1/m₂})."""
    model = Model(model)
    profile = _require_balanced(H)
    k = H.k
    scale = (profile.aut / (2 * k)) ** (1 / (k - 1))
    if model is Model.gnp:
        return scale * rate_gnp(k, value / scale, 0.0) / 2
    return scale * rate_gnm(k, 2 * value / scale, 0.0) / 2


def partite_lower_bounds(
    H: SimpleGraph, c: float | None = None, b: float | None = None
) -> dict[Model, float]:
    """Rates of being r-partite, r = χ(H) − 1, in the n-normalization: −c/(2r) for
    G(n,p) and b log(1 − 1/r) for G(n,m)."""
    r = subgraph_profile(H).chromatic_number - 1
    if r < 2:
        raise ValidationError("partite bounds need chi(H) >= 3")
    bounds = {}
    if c is not None:
        bounds[Model.gnp] = -c / (2 * r)
    if b is not None:
        bounds[Model.gnm] = b * log(1 - 1 / r)
    return bounds
