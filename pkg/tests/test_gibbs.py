from math import log

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bplt.exceptions import EnumerationGuardError, ValidationError
from bplt.gibbs import (
    ModelParams,
    conditional_marginals,
    glauber_marginals,
    glauber_sample,
    log_z_integral,
    lower_tail_exact,
    lower_tail_exact_fixed_size,
    mc_lower_tail,
    partition_function,
    subset_census,
    summarize,
    verify_identities,
)
from bplt.hypergraph import build, contract_vertices

from conftest import (
    brute_force_lower_tail,
    brute_force_marginals,
    log_brute_force_z,
    model_params,
    multihypergraphs,
)

TRIPLE = build(3, [[0, 1, 2]])


def test_model_params_validation():
    with pytest.raises(ValidationError):
        ModelParams(-1.0, 0.5)
    with pytest.raises(ValidationError):
        ModelParams(1.0, 1.5)
    assert ModelParams.from_p(0.5).lam == pytest.approx(1.0)
    with pytest.raises(ValidationError):
        ModelParams.from_p(1.0)


def test_partition_function_examples():
    assert partition_function(build(1, []), ModelParams(2.5, 0.3)) == pytest.approx(log(3.5))
    assert partition_function(build(1, [[0]]), ModelParams(2.5, 0.3)) == pytest.approx(
        log(1 + 2.5 * 0.7)
    )
    assert partition_function(TRIPLE, ModelParams(1.0, 1.0)) == pytest.approx(log(7))


def test_partition_function_guard():
    with pytest.raises(EnumerationGuardError, match="27"):
        partition_function(build(27, []), ModelParams(1.0, 1.0))
    assert partition_function(build(3, []), ModelParams(1.0, 1.0), guard=3) == pytest.approx(3 * log(2))


@settings(max_examples=100, deadline=None)
@given(G=multihypergraphs(min_size=0), params=model_params)
def test_partition_function_matches_brute_force(G, params):
    if params.zeta == 1 and any(len(edge) == 0 for edge in G.edges):
        assert partition_function(G, params) == -np.inf
        return
    assert partition_function(G, params) == pytest.approx(log_brute_force_z(G, params), rel=1e-12, abs=1e-12)


def test_summarize_examples():
    summary = summarize(build(1, []), ModelParams(1.0, 0.0))
    assert summary.marginals.tolist() == pytest.approx([0.5])

    summary = summarize(TRIPLE, ModelParams(1.0, 1.0))
    assert summary.marginals == pytest.approx([3 / 7] * 3, abs=1e-15)
    assert summary.mean_edges == 0.0

    lam = 1.7
    G = build(4, [[0, 1], [1, 2, 3], [0, 3]])
    summary = summarize(G, ModelParams(lam, 0.0))
    assert summary.marginals == pytest.approx([lam / (1 + lam)] * 4)
    assert summary.var_size == pytest.approx(4 * lam / (1 + lam) ** 2)


def test_summarize_ratios_signal_infinite():
    summary = summarize(build(1, []), ModelParams(1.0, 0.0))
    assert summary.ratios.tolist() == pytest.approx([1.0])
    summary.marginals = np.array([1.0])
    assert summary.ratios.tolist() == [np.inf]


@settings(max_examples=100, deadline=None)
@given(G=multihypergraphs(), params=model_params)
def test_marginals_match_brute_force_and_domination(G, params):
    summary = summarize(G, params)
    assert summary.marginals == pytest.approx(brute_force_marginals(G, params), abs=1e-12)
    assert np.all(summary.marginals <= params.lam / (1 + params.lam) + 1e-12)
    assert summary.var_size >= 0 and summary.var_edges >= 0


def test_subset_census_counts_subsets():
    census = subset_census(TRIPLE)
    assert census.counts.sum() == 8
    assert census.counts[3, 1] == 1
    assert census.vertex_counts[0].sum() == 4

    census = subset_census(TRIPLE, required={0}, excluded={1})
    assert census.counts.sum() == 2


@settings(max_examples=30, deadline=None)
@given(G=multihypergraphs(max_vertices=7), lam=st.floats(0.1, 2.0), zeta=st.floats(0.0, 1.0))
def test_partition_function_monotone(G, lam, zeta):
    base = partition_function(G, ModelParams(lam, zeta))
    assert partition_function(G, ModelParams(lam * 1.1, zeta)) >= base - 1e-12
    assert partition_function(G, ModelParams(lam, min(1.0, zeta + 0.1))) <= base + 1e-12


def test_log_derivative_identity():
    G = build(6, [[0, 1, 2], [1, 3], [2, 4, 5], [0, 5]])
    lam, zeta, h = 0.8, 0.6, 1e-5
    derivative = (
        partition_function(G, ModelParams(lam + h, zeta)) - partition_function(G, ModelParams(lam - h, zeta))
    ) / (2 * h)
    mean = summarize(G, ModelParams(lam, zeta)).mean_size
    assert derivative == pytest.approx(mean / lam, rel=1e-6)


def test_log_z_integral_matches_enumeration():
    G = build(6, [[0, 1, 2], [1, 3], [2, 4, 5], [0, 5], [3]])
    params = ModelParams(1.3, 0.7)
    assert log_z_integral(G, params) == pytest.approx(partition_function(G, params), rel=1e-10)


def test_lower_tail_examples():
    assert lower_tail_exact(TRIPLE, 0.5, 0) == pytest.approx(7 / 8)
    assert lower_tail_exact(TRIPLE, 0.3, 1) == 1.0
    with pytest.raises(ValidationError):
        lower_tail_exact(TRIPLE, 1.2, 0)


def test_lower_tail_trivial_thresholds_skip_enumeration():
    G = build(30, [[0, 1]])
    assert lower_tail_exact(G, 0.3, 5) == 1.0
    assert lower_tail_exact(G, 0.3, 1) == 1.0
    assert lower_tail_exact(G, 0.3, -1) == 0.0
    assert lower_tail_exact_fixed_size(G, 10, 1) == 1.0
    assert lower_tail_exact_fixed_size(G, 10, -1) == 0.0
    with pytest.raises(EnumerationGuardError):
        lower_tail_exact(G, 0.3, 0)


@settings(max_examples=100, deadline=None)
@given(G=multihypergraphs(), p=st.floats(0.05, 0.95))
def test_hard_core_bridge(G, p):
    N = G.num_vertices
    bridge = (1 - p) ** N * np.exp(partition_function(G, ModelParams.from_p(p, 1.0)))
    assert lower_tail_exact(G, p, 0) == pytest.approx(bridge, rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(G=multihypergraphs(), p=st.floats(0.05, 0.95), threshold=st.integers(0, 4))
def test_lower_tail_matches_brute_force(G, p, threshold):
    assert lower_tail_exact(G, p, threshold) == pytest.approx(
        brute_force_lower_tail(G, p, threshold), rel=1e-12, abs=1e-15
    )


def test_lower_tail_fixed_size():
    G = build(4, [[0, 1], [2, 3]])
    # of the 6 pairs only {0,1} and {2,3} induce an edge
    assert lower_tail_exact_fixed_size(G, 2, 0) == pytest.approx(4 / 6)
    assert lower_tail_exact_fixed_size(G, 4, 1) == 0.0
    assert lower_tail_exact_fixed_size(G, 3, 1) == 1.0
    assert lower_tail_exact_fixed_size(G, 0, 0) == 1.0
    with pytest.raises(ValidationError):
        lower_tail_exact_fixed_size(G, 5, 0)


@settings(max_examples=500, deadline=None)
@given(G=multihypergraphs(max_vertices=7, max_edges=6), params=model_params, data=st.data())
def test_observation_identities(G, params, data):
    if G.num_edges == 0:
        return
    v = data.draw(st.integers(0, G.num_vertices - 1))
    e = data.draw(st.integers(0, G.num_edges - 1))
    residuals = verify_identities(G, params, v, e)
    assert residuals.max() < 1e-12


def test_identities_special_cases():
    G = build(4, [[0, 1], [1, 2, 3]])
    residuals = verify_identities(G, ModelParams(0.9, 0.0), 2, 1)
    assert residuals.edge_deletion == 0.0
    # isolated vertex: Z^in_v = λ Z_{G−v}
    H = build(3, [[1, 2]])
    residuals = verify_identities(H, ModelParams(1.4, 0.5), 0, 0)
    assert residuals.contract_in < 1e-12


def test_conditional_marginals_match_contraction():
    G = build(5, [[0, 1, 2], [2, 3], [3, 4], [0, 4]])
    params = ModelParams(1.2, 0.8)
    given_v = conditional_marginals(G, params, 2)
    contracted, index_map = contract_vertices(G, {2})
    expected = summarize(contracted, params).marginals
    assert given_v[2] == pytest.approx(1.0)
    for u, w in index_map.items():
        assert given_v[u] == pytest.approx(expected[w], abs=1e-12)


def test_glauber_sample_is_deterministic_and_respects_hard_constraint():
    G = build(2, [[0, 1]])
    params = ModelParams(1e6, 1.0)
    for seed in range(20):
        state = glauber_sample(G, params, 101, seed)
        assert state != {0, 1}
    assert glauber_sample(G, params, 51, 3) == glauber_sample(G, params, 51, 3)
    with pytest.raises(ValidationError):
        glauber_sample(G, params, 1)


def test_glauber_marginals_product_measure():
    G = build(3, [[0, 1, 2]])
    lam = 0.7
    frequencies, errors = glauber_marginals(G, ModelParams(lam, 0.0), sweeps=20_000, seed=1)
    assert np.all(np.abs(frequencies - lam / (1 + lam)) < 3 * errors + 1e-3)


def test_glauber_marginals_against_exact():
    G = build(5, [[0, 1, 2], [2, 3], [3, 4], [0, 4]])
    params = ModelParams(1.5, 0.9)
    frequencies, errors = glauber_marginals(G, params, sweeps=50_000, seed=7)
    exact = summarize(G, params).marginals
    assert np.all(np.abs(frequencies - exact) < 3 * errors + 1e-3)


def test_mc_lower_tail_examples():
    G = build(3, [[0, 1, 2]])
    estimate, error = mc_lower_tail(G, 1e-6, 0.0, 1000, seed=2)
    assert estimate == 1.0 and error == 0.0
    estimate, _ = mc_lower_tail(G, 0.5, 0.0, 1000, seed=2)
    assert estimate == mc_lower_tail(G, 0.5, 0.0, 1000, seed=2)[0]
    with pytest.raises(ValidationError):
        mc_lower_tail(G, 0.5, 1.0, 10)
    with pytest.raises(ValidationError):
        mc_lower_tail(G, 0.5, 0.5, 0)


@pytest.mark.parametrize("seed", range(20))
def test_mc_lower_tail_against_exact(seed):
    rng = np.random.default_rng(seed)
    N = int(rng.integers(3, 9))
    edges = [rng.choice(N, 3, replace=False).tolist() for _ in range(int(rng.integers(1, 7)))]
    G = build(N, edges)
    p = float(rng.uniform(0.2, 0.8))
    eta = float(rng.uniform(0.0, 0.9))
    estimate, error = mc_lower_tail(G, p, eta, 10**5, seed=seed)
    threshold = int(np.floor(eta * G.num_edges * p**3))
    exact = lower_tail_exact(G, p, threshold)
    assert abs(estimate - exact) <= 3 * error + 5e-4
