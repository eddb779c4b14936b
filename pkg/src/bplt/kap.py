"""k-term arithmetic progressions in a p-random subset of [n].

The k-AP hypergraph G^(k)_n has maximum degree ~ α_k n, and its BP fixed point converges
to a function on [0, 1]: the fixed point of

    F f(t) = c exp(−(ζ/α_k) Σ_{ℓ=1}^{k} ∫_0^{w_ℓ(t)} ∏_{i ∈ I_ℓ} f(t + i s) ds),

w_ℓ(t) = min(t/(ℓ−1), (1−t)/(k−ℓ)), I_ℓ = {−ℓ+1, ..., k−ℓ} \\ {0}. The normalized
operator Φ_c drops the ζ/α_k factor; F_{γc,ζ}(γ x) = γ Φ_c x for γ = (α_k/ζ)^{1/(k−1)}.

Functions are stored on the uniform grid t_i = i/M. Inner integrals use the trapezoid
rule on the grid step, with linear interpolation for the last partial step.
"""

import logging
from dataclasses import dataclass
from math import e as E_CONST

import numpy as np
from sympy import Rational

from .bp import BPParams, bp_fixed_point
from .constants import BP_MAX_ITER, GAUSS_NODES, KAP_EXACT_LIMIT, KAP_GRID, KAP_TOL, SMALL_T_FRACTION
from .exceptions import ConvergenceError, ValidationError
from .gibbs import ModelParams, summarize
from .hypergraph import Multihypergraph, build

__all__ = [
    "GridFunction",
    "KapParams",
    "MarginalTable",
    "DiscreteComparison",
    "alpha_k",
    "ap_degrees",
    "build_kap_hypergraph",
    "functional_apply",
    "phi_apply",
    "kap_fixed_point",
    "phi_fixed_point",
    "kap_rate",
    "kap_rate_bethe",
    "kap_marginal_check",
    "kap_discrete_vs_continuum",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GridFunction:
    values: np.ndarray

    @property
    def grid_size(self) -> int:
        return len(self.values) - 1

    @property
    def t(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, len(self.values))

    def __call__(self, s) -> np.ndarray:
        return np.interp(s, self.t, self.values)

    def max_jump(self) -> float:
        return float(np.max(np.abs(np.diff(self.values)), initial=0.0))


@dataclass(frozen=True)
class KapParams:
    k: int
    c: float
    zeta: float = 1.0
    grid_size: int = KAP_GRID

    def __post_init__(self):
        if self.k < 3:
            raise ValidationError(f"k must be >= 3, got {self.k}")
        if not self.c > 0:
            raise ValidationError(f"c must be > 0, got {self.c}")
        if not 0 < self.zeta <= 1:
            raise ValidationError(f"zeta must lie in (0, 1], got {self.zeta}")
        if self.grid_size < self.k:
            raise ValidationError(f"grid size must be >= k, got {self.grid_size}")

    @property
    def condition(self) -> float:
        return self.zeta * (self.k - 1) * self.c ** (self.k - 1)

    def check_contraction(self) -> None:
        if not self.condition < E_CONST:
            raise ValidationError(
                f"zeta (k-1) c^(k-1) = {self.condition:.6g} must be < e (k={self.k}, c={self.c})"
            )


@dataclass
class MarginalTable:
    j: np.ndarray
    observed: np.ndarray
    std_error: np.ndarray
    predicted: np.ndarray
    exact: bool

    @property
    def gap(self) -> np.ndarray:
        return np.abs(self.observed - self.predicted)

    @property
    def mean_gap(self) -> float:
        return float(self.gap.mean())


@dataclass
class DiscreteComparison:
    n: int
    sup_gap: float
    discrete_max_jump: float


def alpha_k(k: int) -> Rational:
    """α_k = ½ Σ_{i=1}^k min(1/(i−1), 1/(k−i)), reading 1/0 as +∞."""
    if k < 3:
        raise ValidationError(f"k must be >= 3, got {k}")
    total = Rational(0)
    for i in range(1, k + 1):
        sides = [Rational(1, d) for d in (i - 1, k - i) if d > 0]
        total += min(sides)
    return total / 2


def build_kap_hypergraph(k: int, n: int) -> Multihypergraph:
    """All k-APs {a, a+d, ..., a+(k−1)d} ⊆ [n]; the integer t is vertex t − 1."""
    if k < 3:
        raise ValidationError(f"k must be >= 3, got {k}")
    if n < k:
        raise ValidationError(f"n = {n} must be >= k = {k}")
    edges = [
        tuple(a + i * d for i in range(k))
        for d in range(1, (n - 1) // (k - 1) + 1)
        for a in range(n - (k - 1) * d)
    ]
    return build(n, edges)


def ap_degrees(k: int, n: int) -> np.ndarray:
    """deg(t) = Σ_i min(⌊(t−1)/(i−1)⌋, ⌊(n−t)/(k−i)⌋) for t = 1..n."""
    t = np.arange(1, n + 1)
    total = np.zeros(n, dtype=np.int64)
    for i in range(1, k + 1):
        left = (t - 1) // (i - 1) if i > 1 else None
        right = (n - t) // (k - i) if i < k else None
        if left is None:
            total += right
        elif right is None:
            total += left
        else:
            total += np.minimum(left, right)
    return total


def _ap_terms(values: np.ndarray, k: int) -> np.ndarray:
    """Row ℓ−1 holds ∫_0^{w_ℓ(t)} ∏_{i∈I_ℓ} f(t+is) ds at every grid point."""
    M = len(values) - 1
    grid = np.linspace(0.0, 1.0, M + 1)
    a = np.arange(M + 1)
    terms = np.zeros((k, M + 1))
    for ell in range(1, k + 1):
        offsets = [i for i in range(-ell + 1, k - ell + 1) if i != 0]
        if ell == 1:
            steps = (M - a) / (k - 1)
            whole = (M - a) // (k - 1)
        elif ell == k:
            steps = a / (k - 1)
            whole = a // (k - 1)
        else:
            steps = np.minimum(a / (ell - 1), (M - a) / (k - ell))
            whole = np.minimum(a // (ell - 1), (M - a) // (k - ell))
        j = np.arange(whole.max() + 1)
        inside = j[None, :] <= whole[:, None]

        integrand = np.ones((M + 1, len(j)))
        tail = np.ones(M + 1)
        for i in offsets:
            index = np.clip(a[:, None] + i * j[None, :], 0, M)
            integrand *= values[index]
            tail *= np.interp((a + i * steps) / M, grid, values)
        integrand = np.where(inside, integrand, 0.0)

        last = integrand[a, whole]
        trapezoid = integrand.sum(axis=1) - 0.5 * (integrand[:, 0] + last)
        partial = 0.5 * (steps - whole) * (last + tail)
        terms[ell - 1] = (trapezoid + partial) / M
    return terms


def functional_apply(params: KapParams, f: GridFunction) -> GridFunction:
    alpha = float(alpha_k(params.k))
    exponent = _ap_terms(f.values, params.k).sum(axis=0)
    return GridFunction(params.c * np.exp(-params.zeta / alpha * exponent))


def phi_apply(k: int, c: float, x: GridFunction) -> GridFunction:
    return GridFunction(c * np.exp(-_ap_terms(x.values, k).sum(axis=0)))


def _iterate(apply, start: np.ndarray, tol: float, max_iter: int, what: str) -> np.ndarray:
    x = start
    residual = np.inf
    for iteration in range(1, max_iter + 1):
        y = apply(x)
        residual = float(np.max(np.abs(np.log(y) - np.log(x))))
        if residual < tol:
            logger.debug("%s converged after %d iterations, residual %.3e", what, iteration, residual)
            return x
        x = y
    raise ConvergenceError(f"{what} did not converge", residual, max_iter)


def kap_fixed_point(
    params: KapParams,
    tol: float = KAP_TOL,
    max_iter: int = BP_MAX_ITER,
    start: GridFunction | None = None,
) -> GridFunction:
    """Fixed point of F on the grid, iterated from f ≡ c (or `start`)."""
    params.check_contraction()
    f0 = (
        np.full(params.grid_size + 1, float(params.c))
        if start is None
        else np.minimum(start.values, params.c)
    )
    values = _iterate(
        lambda v: functional_apply(params, GridFunction(v)).values,
        f0,
        tol,
        max_iter,
        "k-AP fixed point",
    )
    return GridFunction(values)


def _phi_bound(k: int) -> float:
    return (E_CONST / ((k - 1) * float(alpha_k(k)))) ** (1 / (k - 1))


def phi_fixed_point(
    k: int,
    c: float,
    tol: float = KAP_TOL,
    M: int = KAP_GRID,
    route: str = "scaling",
    start: GridFunction | None = None,
    max_iter: int = BP_MAX_ITER,
) -> GridFunction:
    """x*_{k,c}, the fixed point of Φ_c.

    `route="scaling"` solves F at c′ = γc, ζ = 1 and divides by γ = α_k^{1/(k−1)};
    `route="direct"` iterates Φ_c itself.
    """
    bound = _phi_bound(k)
    if not 0 < c < bound:
        raise ValidationError(f"c = {c} must lie in (0, (e/((k-1) alpha_k))^(1/(k-1)) = {bound:.10g}) for k={k}")
    if route == "direct":
        x0 = np.full(M + 1, float(c)) if start is None else np.minimum(start.values, c)
        values = _iterate(lambda v: phi_apply(k, c, GridFunction(v)).values, x0, tol, max_iter, "phi fixed point")
        return GridFunction(values)
    if route != "scaling":
        raise ValidationError(f"route must be 'scaling' or 'direct', got {route!r}")
    gamma = float(alpha_k(k)) ** (1 / (k - 1))
    f_start = None if start is None else GridFunction(gamma * start.values)
    f = kap_fixed_point(KapParams(k, gamma * c, 1.0, M), tol, max_iter, f_start)
    return GridFunction(f.values / gamma)


def kap_rate(
    k: int,
    c: float,
    nodes: int = GAUSS_NODES,
    M: int = KAP_GRID,
    tol: float = KAP_TOL,
) -> float:
    """∫_0^1 ∫_0^c x*_{k,t}(s)/t dt ds − c.

    Outer Gauss–Legendre over t ∈ (ε, c], ε = c·1e−6, plus ε for (0, ε] where
    x*_{k,t}/t ≈ 1; inner trapezoid over s. Nodes are solved in increasing t, each
    warm-started from the previous profile.
    """
    bound = _phi_bound(k)
    if not 0 < c < bound:
        raise ValidationError(f"c = {c} must lie in (0, {bound:.10g}) for k={k}")
    eps = c * SMALL_T_FRACTION
    x_nodes, weights = np.polynomial.legendre.leggauss(nodes)
    half = 0.5 * (c - eps)
    total = 0.0
    previous = None
    for t, w in zip(eps + half * (x_nodes + 1), weights):
        previous = phi_fixed_point(k, float(t), tol, M, start=previous)
        total += w * np.trapezoid(previous.values, dx=1 / M) / t
    return eps + half * total - c


def kap_rate_bethe(k: int, c: float, M: int = KAP_GRID, tol: float = KAP_TOL) -> float:
    """−∫_0^1 ∫_0^{(1−t)/(k−1)} ∏_{i<k} x*(t+is) ds dt − ∫_0^1 x*(log(x*/c) − 1) dt − c."""
    x = phi_fixed_point(k, c, tol, M).values
    # the ℓ = 1 term misses only the factor x(t)
    edge = np.trapezoid(x * _ap_terms(x, k)[0], dx=1 / M)
    entropy = np.trapezoid(x * (np.log(x / c) - 1), dx=1 / M)
    return float(-edge - entropy - c)


def _mc_conditional_marginals(
    G: Multihypergraph, p: float, samples: int, seed: int, chunk: int = 2_000
) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    edges = G.edge_array
    occupied_total = np.zeros(G.num_vertices)
    accepted = 0
    done = 0
    while done < samples:
        size = min(chunk, samples - done)
        draws = rng.random((size, G.num_vertices)) < p
        free = ~np.any(np.all(draws[:, edges], axis=2), axis=1)
        occupied_total += draws[free].sum(axis=0)
        accepted += int(free.sum())
        done += size
    if accepted == 0:
        raise ValidationError(f"no AP-free sample among {samples} draws; raise the sample budget")
    frequency = occupied_total / accepted
    return frequency, np.sqrt(frequency * (1 - frequency) / accepted)


def kap_marginal_check(
    k: int,
    c: float,
    n: int,
    mode: str = "auto",
    samples: int = 10**5,
    seed: int = 0,
    M: int = KAP_GRID,
    tol: float = KAP_TOL,
) -> MarginalTable:
    """n^{1/(k−1)} P(j ∈ [n]_p | no k-AP) next to x*_{k,c}(j/n), p = c n^{−1/(k−1)}.

    Exact enumeration for n ≤ 24 (`mode="auto"`), rejection sampling above.
    """
    if mode not in ("auto", "exact", "mc"):
        raise ValidationError(f"mode must be auto, exact or mc, got {mode!r}")
    exact = mode == "exact" or (mode == "auto" and n <= KAP_EXACT_LIMIT)
    G = build_kap_hypergraph(k, n)
    p = c * n ** (-1 / (k - 1))
    if not 0 < p < 1:
        raise ValidationError(f"p = {p} must lie in (0, 1)")
    scale = n ** (1 / (k - 1))
    if exact:
        marginals = summarize(G, ModelParams.from_p(p, 1.0), guard=max(n, KAP_EXACT_LIMIT)).marginals
        errors = np.zeros(n)
    else:
        marginals, errors = _mc_conditional_marginals(G, p, samples, seed)
    profile = phi_fixed_point(k, c, tol, M)
    j = np.arange(1, n + 1)
    return MarginalTable(
        j=j,
        observed=scale * marginals,
        std_error=scale * errors,
        predicted=profile(j / n),
        exact=exact,
    )


def kap_discrete_vs_continuum(
    k: int, c: float, n: int, M: int = KAP_GRID, tol: float = KAP_TOL
) -> DiscreteComparison:
    """BP fixed point on G^(k)_n against the grid fixed point of F at c′ = α_k^{1/(k−1)} c,
    vertex j compared with f(j/n)."""
    gamma = float(alpha_k(k)) ** (1 / (k - 1))
    f = kap_fixed_point(KapParams(k, gamma * c, 1.0, M), tol)
    G = build_kap_hypergraph(k, n)
    x = bp_fixed_point(G, BPParams(k, gamma * c, 1.0, G.max_degree), tol)
    gap = np.abs(x - f(np.arange(1, n + 1) / n))
    return DiscreteComparison(
        n=n,
        sup_gap=float(gap.max()),
        discrete_max_jump=float(np.max(np.abs(np.diff(x)))),
    )
