"""Shared hypothesis strategies and brute-force oracles.

The oracles loop over all subsets with plain Python integers and share no code with the
census engine.
"""

from itertools import combinations
from math import log

import numpy as np
from hypothesis import strategies as st

from bplt.gibbs import ModelParams
from bplt.hypergraph import Multihypergraph, build


@st.composite
def multihypergraphs(draw, min_vertices=1, max_vertices=9, max_size=3, max_edges=8, min_size=1):
    N = draw(st.integers(min_vertices, max_vertices))
    top = min(max_size, N)
    edges = draw(
        st.lists(
            st.integers(min(min_size, top), top).flatmap(
                lambda size: st.lists(
                    st.integers(0, N - 1), min_size=size, max_size=size, unique=True
                )
            ),
            max_size=max_edges,
        )
    )
    return build(N, edges)


@st.composite
def uniform_hypergraphs(draw, k=3, max_vertices=9, max_edges=8):
    N = draw(st.integers(k, max_vertices))
    edges = draw(
        st.lists(
            st.lists(st.integers(0, N - 1), min_size=k, max_size=k, unique=True),
            max_size=max_edges,
        )
    )
    return build(N, edges)


model_params = st.builds(
    ModelParams,
    lam=st.floats(0.05, 3.0),
    zeta=st.floats(0.0, 1.0),
)


def subset_weight(G: Multihypergraph, S: set[int], params: ModelParams) -> float:
    induced = sum(1 for edge in G.edges if set(edge) <= S)
    return params.lam ** len(S) * (1 - params.zeta) ** induced


def subsets(N: int):
    for size in range(N + 1):
        for S in combinations(range(N), size):
            yield set(S)


def brute_force_z(G: Multihypergraph, params: ModelParams) -> float:
    return sum(subset_weight(G, S, params) for S in subsets(G.num_vertices))


def brute_force_marginals(G: Multihypergraph, params: ModelParams) -> np.ndarray:
    occupied = np.zeros(G.num_vertices)
    total = 0.0
    for S in subsets(G.num_vertices):
        w = subset_weight(G, S, params)
        total += w
        for v in S:
            occupied[v] += w
    return occupied / total


def brute_force_lower_tail(G: Multihypergraph, p: float, threshold: int) -> float:
    N = G.num_vertices
    total = 0.0
    for S in subsets(N):
        if sum(1 for edge in G.edges if set(edge) <= S) <= threshold:
            total += p ** len(S) * (1 - p) ** (N - len(S))
    return total


def log_brute_force_z(G: Multihypergraph, params: ModelParams) -> float:
    return log(brute_force_z(G, params))


@st.composite
def linear_hypertrees(draw, max_vertices=14, max_size=3, max_singletons=3):
    """Grown edge by edge: each new edge meets the tree in exactly one vertex."""
    N = 1
    edges = []
    while draw(st.booleans()):
        size = draw(st.integers(2, max_size))
        if N + size - 1 > max_vertices:
            break
        anchor = draw(st.integers(0, N - 1))
        edges.append([anchor, *range(N, N + size - 1)])
        N += size - 1
    singletons = draw(st.lists(st.integers(0, N - 1), max_size=max_singletons))
    return build(N, edges + [[x] for x in singletons])
