from collections import Counter
from itertools import combinations
from math import comb, exp

import numpy as np
import pytest
from sympy import Rational

from bplt.exceptions import ValidationError
from bplt.kap import (
    GridFunction,
    KapParams,
    alpha_k,
    ap_degrees,
    build_kap_hypergraph,
    functional_apply,
    kap_discrete_vs_continuum,
    kap_fixed_point,
    kap_marginal_check,
    kap_rate,
    kap_rate_bethe,
    phi_apply,
    phi_fixed_point,
)

M = 200


@pytest.fixture(scope="module")
def profile_3_1():
    return phi_fixed_point(3, 1.0, M=M)


def test_alpha_k():
    assert alpha_k(3) == 1
    assert alpha_k(4) == Rational(5, 6)
    assert alpha_k(5) == Rational(5, 6)
    assert alpha_k(6) == Rational(1, 2) * (Rational(1, 5) * 2 + Rational(1, 4) * 2 + Rational(1, 3) * 2)
    with pytest.raises(ValidationError):
        alpha_k(2)


@pytest.mark.parametrize("k", [3, 4, 5])
def test_max_degree_scales_like_alpha(k):
    n = 10**5
    assert ap_degrees(k, n).max() / (float(alpha_k(k)) * n) == pytest.approx(1.0, rel=0.02)


def test_build_kap_hypergraph():
    G = build_kap_hypergraph(3, 5)
    assert sorted(G.edges) == [(0, 1, 2), (0, 2, 4), (1, 2, 3), (2, 3, 4)]
    with pytest.raises(ValidationError):
        build_kap_hypergraph(3, 2)
    with pytest.raises(ValidationError):
        build_kap_hypergraph(2, 10)


@pytest.mark.parametrize("k", [3, 4, 5])
def test_degree_formula(k):
    for n in [k, k + 1, 17, 64, 500]:
        G = build_kap_hypergraph(k, n)
        assert ap_degrees(k, n).tolist() == G.degrees.tolist()


@pytest.mark.parametrize("k", [3, 4])
def test_pair_codegree_bounded(k):
    G = build_kap_hypergraph(k, 120)
    codegree = Counter(pair for edge in G.edges for pair in combinations(edge, 2))
    assert max(codegree.values()) <= comb(k, 2)


def test_functional_on_constants():
    c = 0.7
    f = GridFunction(np.full(M + 1, c))
    out = functional_apply(KapParams(3, c, 1.0, M), f)
    assert out.values[M // 2] == pytest.approx(c * exp(-(c**2)), rel=1e-13)
    assert out.values[0] == pytest.approx(c * exp(-(c**2) / 2), rel=1e-13)
    assert out.values[M] == pytest.approx(out.values[0], rel=1e-13)
    # with zeta = alpha_k the normalized operator coincides with F
    alpha = float(alpha_k(4))
    assert functional_apply(KapParams(4, c, alpha, M), f).values == pytest.approx(phi_apply(4, c, f).values)


def test_functional_preserves_symmetry():
    rng = np.random.default_rng(3)
    for k in (3, 4, 5):
        half = rng.uniform(0.2, 0.9, M // 2 + 1)
        values = np.concatenate([half, half[-2::-1]])
        out = functional_apply(KapParams(k, 0.9, 0.8, M), GridFunction(values)).values
        assert np.max(np.abs(out - out[::-1])) < 1e-12


def test_kap_params_validation():
    with pytest.raises(ValidationError):
        KapParams(2, 1.0)
    with pytest.raises(ValidationError):
        KapParams(3, 1.0, 1.5)
    with pytest.raises(ValidationError):
        KapParams(3, 1.0, 1.0, grid_size=2)
    with pytest.raises(ValidationError, match="must be < e"):
        kap_fixed_point(KapParams(3, 1.2, 1.0, M))


def test_profile_shape(profile_3_1):
    x = profile_3_1.values
    assert profile_3_1.grid_size == M
    assert np.max(np.abs(x - x[::-1])) < 1e-9
    assert np.argmin(x) == M // 2
    assert np.argmax(x) in (0, M)
    assert np.all(np.diff(x[: M // 2 + 1]) <= 1e-12)
    assert np.all((0 < x) & (x <= 1.0))


def test_profile_residual_and_routes(profile_3_1):
    tol = 1e-10
    moved = phi_apply(3, 1.0, profile_3_1).values
    assert np.max(np.abs(np.log(moved) - np.log(profile_3_1.values))) < 10 * tol
    direct = phi_fixed_point(3, 1.0, tol, M, route="direct")
    assert np.max(np.abs(direct.values - profile_3_1.values)) < 10 * tol
    with pytest.raises(ValidationError):
        phi_fixed_point(3, 1.0, M=M, route="sideways")
    with pytest.raises(ValidationError):
        phi_fixed_point(3, 1.2, M=M)


def test_profile_grid_refinement(profile_3_1):
    fine = phi_fixed_point(3, 1.0, M=2 * M)
    assert fine.max_jump() < profile_3_1.max_jump()
    assert np.max(np.abs(fine.values[::2] - profile_3_1.values)) < 1e-3
    assert fine(0.5) == pytest.approx(fine.values[M])


def test_warm_start_reaches_same_profile(profile_3_1):
    warm = phi_fixed_point(3, 1.0, M=M, start=phi_fixed_point(3, 0.9, M=M))
    assert np.max(np.abs(warm.values - profile_3_1.values)) < 1e-8


@pytest.mark.parametrize("k, c", [(3, 0.5), (3, 0.9), (4, 0.6)])
def test_rate_formulas_agree(k, c):
    direct = kap_rate(k, c, nodes=32, M=400)
    bethe = kap_rate_bethe(k, c, M=400)
    assert direct < 0
    assert direct == pytest.approx(bethe, abs=1e-4)


def test_kap_rate_small_c_and_monotone():
    small = kap_rate(3, 1e-2, nodes=16, M=100)
    assert -1e-4 < small < 0
    assert -1e-4 < kap_rate_bethe(3, 1e-2, M=100) < 0
    rates = [kap_rate(3, c, nodes=16, M=100) for c in (0.2, 0.4, 0.6, 0.8, 1.0)]
    assert np.all(np.diff(rates) < 0)
    with pytest.raises(ValidationError):
        kap_rate(3, 2.0)


@pytest.mark.slow
def test_bethe_rate_grid_convergence():
    coarse = kap_rate_bethe(3, 0.9, M=2000)
    fine = kap_rate_bethe(3, 0.9, M=4000)
    assert abs(coarse - fine) < 1e-5


def test_exact_marginals_are_symmetric():
    table = kap_marginal_check(3, 1.0, 12, M=M)
    assert table.exact
    assert table.j.tolist() == list(range(1, 13))
    assert np.max(np.abs(table.observed - table.observed[::-1])) < 1e-12
    assert table.predicted == pytest.approx(phi_fixed_point(3, 1.0, M=M)(table.j / 12))
    assert np.all(table.std_error == 0)
    assert table.mean_gap == pytest.approx(np.mean(np.abs(table.observed - table.predicted)))


def test_mc_marginals():
    table = kap_marginal_check(3, 1.0, 30, mode="mc", samples=20_000, seed=7, M=M)
    assert not table.exact
    assert table.observed.shape == (30,)
    assert np.all(table.std_error > 0)
    again = kap_marginal_check(3, 1.0, 30, mode="mc", samples=20_000, seed=7, M=M)
    assert again.observed.tolist() == table.observed.tolist()
    with pytest.raises(ValidationError):
        kap_marginal_check(3, 1.0, 30, mode="guess")


def test_discrete_fixed_point_approaches_profile():
    small = kap_discrete_vs_continuum(3, 0.8, 100, M=400)
    large = kap_discrete_vs_continuum(3, 0.8, 200, M=400)
    assert large.discrete_max_jump < small.discrete_max_jump
    assert np.isfinite(large.sup_gap)
    assert large.n == 200
