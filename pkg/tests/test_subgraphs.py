from itertools import combinations, permutations
from math import log

import numpy as np
import pytest
from sympy import Rational

from bplt.constants import Model
from bplt.exceptions import ValidationError
from bplt.rates import rate_gnm, rate_gnp
from bplt.subgraphs import (
    SimpleGraph,
    build_subgraph_hypergraph,
    delta_H,
    named_graph,
    partite_lower_bounds,
    rate_H,
    rate_H_n_scaling,
    read_graph,
    subgraph_profile,
)


def brute_force_aut(H: SimpleGraph) -> int:
    edges = set(H.edges)
    count = 0
    for perm in permutations(range(H.num_vertices)):
        image = {tuple(sorted((perm[u], perm[v]))) for u, v in edges}
        count += image == edges
    return count


def brute_force_m2(H: SimpleGraph) -> Rational:
    best = None
    for size in range(3, H.num_vertices + 1):
        for support in combinations(range(H.num_vertices), size):
            inside = [e for e in H.edges if e[0] in support and e[1] in support]
            for count in range(0, len(inside) + 1):
                density = Rational(count - 1, size - 2)
                best = density if best is None else max(best, density)
    return best


@pytest.mark.parametrize(
    "name, m2, strictly, aut, chi",
    [
        ("K3", Rational(2), True, 6, 3),
        ("K4", Rational(5, 2), True, 24, 4),
        ("C4", Rational(3, 2), True, 8, 2),
        ("C5", Rational(4, 3), True, 10, 3),
        ("K4-e", Rational(2), False, 4, 3),
        ("triangle+pendant", Rational(2), False, 2, 3),
    ],
)
def test_subgraph_profile(name, m2, strictly, aut, chi):
    H = named_graph(name)
    profile = subgraph_profile(H)
    assert (profile.m2, profile.strictly_2_balanced, profile.aut, profile.chromatic_number) == (
        m2,
        strictly,
        aut,
        chi,
    )
    assert profile.aut == brute_force_aut(H)
    assert profile.m2 == brute_force_m2(H)


def test_profile_guards():
    with pytest.raises(ValidationError):
        subgraph_profile(named_graph("P2"))
    with pytest.raises(ValidationError):
        subgraph_profile(named_graph("K11"))
    # a path has only two edges, so it is never strictly 2-balanced
    assert not subgraph_profile(named_graph("P3")).strictly_2_balanced


def test_simple_graph_validation():
    with pytest.raises(ValidationError, match="loop"):
        SimpleGraph(2, ((1, 1),))
    with pytest.raises(ValidationError, match="repeated"):
        SimpleGraph.from_edges(3, [(0, 1), (1, 0)])
    with pytest.raises(ValidationError, match="out of range"):
        SimpleGraph.from_edges(2, [(0, 2)])
    assert named_graph("C4").is_connected()
    assert not SimpleGraph.from_edges(4, [(0, 1), (2, 3)]).is_connected()
    with pytest.raises(ValidationError, match="unknown graph"):
        named_graph("petersen")


def test_read_graph(tmp_path):
    path = tmp_path / "diamond.txt"
    path.write_text("10 11\n10 12\n11 12\n11 13\n12 13\n")
    H = read_graph(path)
    assert H == named_graph("K4-e")


def test_delta_H():
    K3 = named_graph("K3")
    for n in range(3, 12):
        assert delta_H(K3, n) == n - 2
    C4 = named_graph("C4")
    assert delta_H(C4, 4) == 2
    assert delta_H(C4, 6) == 12
    assert delta_H(named_graph("K4"), 4) == 1
    with pytest.raises(ValidationError):
        delta_H(C4, 3)


def test_build_subgraph_hypergraph():
    G = build_subgraph_hypergraph(named_graph("K3"), 4)
    assert (G.num_vertices, G.num_edges) == (6, 4)
    assert G.is_uniform(3)
    for name, sizes in (("K3", range(3, 9)), ("C4", range(4, 8)), ("K4-e", range(4, 7))):
        H = named_graph(name)
        for n in sizes:
            G = build_subgraph_hypergraph(H, n)
            assert np.all(G.degrees == delta_H(H, n))
    with pytest.raises(ValidationError, match="cap"):
        build_subgraph_hypergraph(named_graph("K3"), 12, copy_cap=100)


def test_subgraph_hypergraph_is_tree_like():
    # two triangles of K_n share at most one edge
    G = build_subgraph_hypergraph(named_graph("K3"), 7)
    overlaps = [len(set(a) & set(b)) for a, b in combinations(G.edges, 2)]
    assert max(overlaps) == 1


def test_rate_H():
    result = rate_H(named_graph("K3"), 1.0, 0.0)
    assert result.value == pytest.approx(rate_gnp(3, 1.0, 0.0))
    assert (result.k, result.m2, result.aut) == (3, 2, 6)
    assert "n^(-1/2)" in result.parameterization
    gnm = rate_H(named_graph("K3"), 0.5, 0.2, Model.gnm)
    assert gnm.value == pytest.approx(rate_gnm(3, 0.5, 0.2))
    assert rate_H(named_graph("C4"), 0.9, 0.0).k == 4
    with pytest.raises(ValidationError):
        rate_H(named_graph("C4"), 1.0, 0.0)
    with pytest.raises(ValidationError, match="strictly 2-balanced"):
        rate_H(named_graph("triangle+pendant"), 0.5, 0.0)


def test_n_scaling_and_partite_bounds():
    K3 = named_graph("K3")
    assert rate_H_n_scaling(K3, 0.8) == pytest.approx(rate_gnp(3, 0.8, 0.0) / 2)
    assert rate_H_n_scaling(K3, 0.3, "gnm") == pytest.approx(rate_gnm(3, 0.6, 0.0) / 2)
    bounds = partite_lower_bounds(K3, c=0.8, b=0.3)
    assert bounds == {Model.gnp: pytest.approx(-0.2), Model.gnm: pytest.approx(0.3 * log(0.5))}
    assert partite_lower_bounds(named_graph("K4"), c=1.2)[Model.gnp] == pytest.approx(-0.2)
    with pytest.raises(ValidationError):
        partite_lower_bounds(named_graph("C4"), c=0.5)
