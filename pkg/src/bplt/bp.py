"""Belief Propagation for the edge-penalty model in the scaling p ~ c Δ^{−1/(k−1)}.

The operator is

    F(x)_v = c · exp(−(ζ/Δ) Σ_{e ∋ v} ∏_{u ∈ e \\ v} x_u)

on (0, c]^V. When (k−1) ζ c^{k−1} < e, F² is a contraction in the log-sup norm with
factor 1 − δ, δ = 1 − ζ c^{k−1} (k−1)/e, and the unique fixed point x* yields the Bethe
estimate Δ^{−1/(k−1)} B(x*) of log Z.
"""

import logging
from dataclasses import dataclass
from math import e as E_CONST
from math import exp, log

import numpy as np
from scipy.optimize import bisect, brentq
from scipy.special import lambertw

from .constants import BP_MAX_ITER, BP_TOL, GAUSS_NODES, SMALL_T_FRACTION, ZETA_MAX_ITER, ZETA_TOL
from .exceptions import ConvergenceError, ValidationError
from .hypergraph import Multihypergraph

__all__ = [
    "BPParams",
    "Thresholds",
    "ZetaSolution",
    "lambert_w0",
    "x_star_regular",
    "thresholds",
    "bp_apply",
    "bp_fixed_point",
    "bethe_free_energy",
    "bp_marginals",
    "bp_edge_marginals",
    "f2_contraction_ratio",
    "solve_zeta",
    "solve_zeta_regular",
    "zeta_derivative_regular",
    "log_z_bp",
    "log_z_bp_integral",
    "rate_lower_tail_bp",
]

logger = logging.getLogger(__name__)

BPVector = np.ndarray


@dataclass(frozen=True)
class BPParams:
    k: int
    c: float
    zeta: float
    delta: int

    def __post_init__(self):
        if self.k < 2:
            raise ValidationError(f"k must be >= 2, got {self.k}")
        if not self.c > 0:
            raise ValidationError(f"c must be > 0, got {self.c}")
        if not 0 < self.zeta <= 1:
            raise ValidationError(f"zeta must lie in (0, 1], got {self.zeta}")
        if self.delta < 1:
            raise ValidationError(f"delta must be >= 1, got {self.delta}")

    @classmethod
    def for_hypergraph(cls, G: Multihypergraph, k: int, c: float, zeta: float) -> "BPParams":
        """Scale by the maximum degree of G (1 for an edgeless G)."""
        return cls(k, c, zeta, max(G.max_degree, 1))

    @property
    def condition(self) -> float:
        """(k−1) ζ c^{k−1}; the solver needs this below e."""
        return (self.k - 1) * self.zeta * self.c ** (self.k - 1)

    @property
    def contraction_factor(self) -> float:
        """1 − δ, the F² contraction factor in the log-sup norm."""
        return self.condition / E_CONST

    @property
    def p(self) -> float:
        return self.c * self.delta ** (-1 / (self.k - 1))

    def check_contraction(self) -> None:
        if not self.condition < E_CONST:
            raise ValidationError(
                f"(k-1) zeta c^(k-1) = {self.condition:.6g} must be < e; "
                f"outside the contraction certificate for k={self.k}, c={self.c}, zeta={self.zeta}"
            )


@dataclass(frozen=True)
class Thresholds:
    eta_star: float
    c_bar: float
    c_small: float


@dataclass(frozen=True)
class ZetaSolution:
    zeta: float
    certified: bool


def lambert_w0(y: float) -> float:
    """Principal branch of the Lambert W function, polished by one Halley step."""
    branch = -exp(-1)
    if y < branch - 1e-15:
        raise ValidationError(f"lambert_w0 needs y >= -1/e, got {y}")
    if y <= branch:
        return -1.0
    if y == 0:
        return 0.0
    w = float(lambertw(y, 0).real)
    if w > -1 + 1e-6:
        ew = exp(w)
        f = w * ew - y
        w -= f / (ew * (w + 1) - (w + 2) * f / (2 * w + 2))
    return w


def x_star_regular(k: int, c: float, zeta: float) -> float:
    """Solution of x = c·exp(−ζ x^{k−1}):  x = (W((k−1)c^{k−1}ζ) / ((k−1)ζ))^{1/(k−1)}."""
    if not c > 0:
        raise ValidationError(f"c must be > 0, got {c}")
    if not 0 <= zeta <= 1:
        raise ValidationError(f"zeta must lie in [0, 1], got {zeta}")
    if zeta == 0:
        return float(c)
    y = (k - 1) * c ** (k - 1) * zeta
    return (lambert_w0(y) / ((k - 1) * zeta)) ** (1 / (k - 1))


def thresholds(k: int, eta: float) -> Thresholds:
    """η*_k, the regular-case bound c̄_k(η) and the general bound c_k(η)."""
    if k < 2:
        raise ValidationError(f"k must be >= 2, got {k}")
    if not 0 <= eta < 1:
        raise ValidationError(f"eta must lie in [0, 1), got {eta}")
    eta_star = exp(-k / (k - 1))
    if eta < eta_star:
        c_bar = (E_CONST / ((k - 1) * (1 - eta / eta_star))) ** (1 / (k - 1))
    else:
        c_bar = np.inf
    c_small = (E_CONST / ((1 - eta) * (k - 1))) ** (1 / (k - 1))
    return Thresholds(eta_star, c_bar, c_small)


def _edge_array(G: Multihypergraph, k: int) -> np.ndarray:
    if not G.is_uniform(k):
        sizes = sorted({len(edge) for edge in G.edges})
        raise ValidationError(f"BP needs a {k}-uniform hypergraph, edge sizes are {sizes}")
    return G.edge_array


def _neighbour_sums(G: Multihypergraph, k: int, x: np.ndarray) -> np.ndarray:
    """Σ_{e ∋ v} ∏_{u ∈ e \\ v} x_u for every v."""
    edges = _edge_array(G, k)
    sums = np.zeros(G.num_vertices)
    if len(edges) == 0:
        return sums
    values = x[edges]
    for j in range(k):
        others = np.prod(np.delete(values, j, axis=1), axis=1)
        sums += np.bincount(edges[:, j], weights=others, minlength=G.num_vertices)
    return sums


def bp_apply(G: Multihypergraph, params: BPParams, x: BPVector) -> BPVector:
    return params.c * np.exp(-params.zeta / params.delta * _neighbour_sums(G, params.k, x))


def bp_fixed_point(
    G: Multihypergraph,
    params: BPParams,
    tol: float = BP_TOL,
    max_iter: int = BP_MAX_ITER,
    x0: BPVector | None = None,
) -> BPVector:
    """Iterate F from x ≡ c (or `x0`) until ‖log F(x) − log x‖∞ < tol; returns that x."""
    params.check_contraction()
    x = np.full(G.num_vertices, float(params.c)) if x0 is None else np.asarray(x0, float)
    residual = np.inf
    for iteration in range(1, max_iter + 1):
        y = bp_apply(G, params, x)
        residual = float(np.max(np.abs(np.log(y) - np.log(x)), initial=0.0))
        if residual < tol:
            logger.debug("BP fixed point after %d iterations, residual %.3e", iteration, residual)
            return x
        x = y
    raise ConvergenceError("BP fixed point did not converge", residual, max_iter)


def bethe_free_energy(G: Multihypergraph, params: BPParams, x: BPVector) -> float:
    """B(x) = −(ζ/Δ) Σ_e ∏_{u∈e} x_u − Σ_v x_v (log(x_v/c) − 1)."""
    x = np.asarray(x, float)
    if np.any(x <= 0):
        raise ValidationError("Bethe free energy needs strictly positive entries")
    edges = _edge_array(G, params.k)
    edge_term = float(np.prod(x[edges], axis=1).sum()) if len(edges) else 0.0
    vertex_term = float(np.sum(x * (np.log(x / params.c) - 1)))
    return -params.zeta / params.delta * edge_term - vertex_term


def bp_marginals(
    G: Multihypergraph,
    params: BPParams,
    x: BPVector,
    multiplicity: np.ndarray | None = None,
) -> np.ndarray:
    """Predicted occupation probabilities x*_v Δ^{−1/(k−1)}, times (1−ζ)^{m_v} when the
    numbers m_v of size-1 edges {v} are supplied."""
    scaled = np.asarray(x, float) * params.delta ** (-1 / (params.k - 1))
    if multiplicity is not None:
        scaled = scaled * (1 - params.zeta) ** np.asarray(multiplicity)
    return scaled


def bp_edge_marginals(G: Multihypergraph, params: BPParams, x: BPVector) -> np.ndarray:
    """Predicted P(e ⊆ S) = (1−ζ) ∏_{u∈e} x*_u Δ^{−1/(k−1)}."""
    edges = _edge_array(G, params.k)
    scaled = np.asarray(x, float) * params.delta ** (-1 / (params.k - 1))
    return (1 - params.zeta) * np.prod(scaled[edges], axis=1)


def f2_contraction_ratio(
    G: Multihypergraph, params: BPParams, x: BPVector, y: BPVector
) -> float:
    """‖log F²x − log F²y‖∞ / ‖log x − log y‖∞ (0 when x = y)."""
    gap = np.max(np.abs(np.log(x) - np.log(y)), initial=0.0)
    if gap == 0:
        return 0.0
    fx = bp_apply(G, params, bp_apply(G, params, x))
    fy = bp_apply(G, params, bp_apply(G, params, y))
    return float(np.max(np.abs(np.log(fx) - np.log(fy)), initial=0.0) / gap)


def _edge_product_sum(G: Multihypergraph, k: int, x: np.ndarray) -> float:
    edges = _edge_array(G, k)
    return float(np.prod(x[edges], axis=1).sum())


def solve_zeta(
    G: Multihypergraph,
    k: int,
    c: float,
    eta: float,
    tol: float = ZETA_TOL,
    regular: bool = False,
    bp_tol: float = BP_TOL,
) -> tuple[float, BPVector]:
    """Find ζ ∈ (0, 1−η] with (1−ζ) Σ_e ∏_{u∈e} x*_u(ζ) = η c^k |E| by bisection.

    With `regular=True` the caller asserts near-regularity; c may then go up to c̄_k(η)
    and the bracket is cut at the contraction certificate.
    """
    if not 0 <= eta < 1:
        raise ValidationError(f"eta must lie in [0, 1), got {eta}")
    if G.num_edges == 0:
        raise ValidationError("the zeta equation needs at least one edge")
    bounds = thresholds(k, eta)
    limit = bounds.c_bar if regular else bounds.c_small
    if not c < limit:
        name = "c_bar" if regular else "c_k"
        raise ValidationError(f"c = {c} must be < {name}({eta}) = {limit:.10g} for k={k}")
    delta = max(G.max_degree, 1)
    if eta == 0:
        params = BPParams(k, c, 1.0, delta)
        return 1.0, bp_fixed_point(G, params, bp_tol)

    scale = c**k * G.num_edges
    cache: dict[float, np.ndarray] = {}

    def target(zeta: float) -> float:
        if zeta == 0:
            return 1 - eta
        x = bp_fixed_point(G, BPParams(k, c, zeta, delta), bp_tol)
        cache[zeta] = x
        return (1 - zeta) * _edge_product_sum(G, k, x) / scale - eta

    hi = 1 - eta
    if regular:
        hi = min(hi, (1 - 1e-12) * E_CONST / ((k - 1) * c ** (k - 1)))
    upper = target(hi)
    if upper > 0:
        raise ConvergenceError("zeta bracket [0, %.6g] has no sign change" % hi, upper, 0)
    if upper == 0:
        return hi, cache[hi]
    zeta, result = bisect(target, 0.0, hi, xtol=1e-15, maxiter=ZETA_MAX_ITER, full_output=True, disp=False)
    residual = abs(target(zeta))
    if residual >= tol:
        raise ConvergenceError("zeta bisection did not reach the tolerance", residual, result.iterations)
    logger.debug("zeta = %.12g after %d bisection steps", zeta, result.iterations)
    return float(zeta), cache[zeta]


def _regular_zeta_target(k: int, c: float, eta: float, zeta: float) -> float:
    return (1 - zeta) * (x_star_regular(k, c, zeta) / c) ** k - eta


def solve_zeta_regular(k: int, c: float, eta: float, tol: float = ZETA_TOL) -> ZetaSolution:
    """Unique ζ ∈ [0, 1] with (1−ζ) x*_k(c,ζ)^k c^{−k} = η, plus whether (k−1)ζc^{k−1} < e."""
    if not 0 <= eta <= 1:
        raise ValidationError(f"eta must lie in [0, 1], got {eta}")
    if not c > 0:
        raise ValidationError(f"c must be > 0, got {c}")
    if eta == 0:
        zeta = 1.0
    elif eta == 1:
        zeta = 0.0
    else:
        zeta = brentq(lambda z: _regular_zeta_target(k, c, eta, z), 0.0, 1.0, xtol=1e-16, maxiter=ZETA_MAX_ITER)
        residual = abs(_regular_zeta_target(k, c, eta, zeta)) * c**k
        if residual >= tol:
            raise ConvergenceError("regular zeta equation not solved", residual, ZETA_MAX_ITER)
    certified = (k - 1) * zeta * c ** (k - 1) < E_CONST
    return ZetaSolution(float(zeta), certified)


def zeta_derivative_regular(k: int, c: float, eta: float) -> float:
    """dζ/dc along the solution of (1−ζ) x*_k(c,ζ)^k = η c^k."""
    zeta = solve_zeta_regular(k, c, eta).zeta
    if zeta in (0.0, 1.0):
        return 0.0
    w = lambert_w0((k - 1) * c ** (k - 1) * zeta)
    return -(k * (k - 1) * (1 - zeta) * zeta * w) / (c * (k - 1) * zeta + c * (k - zeta) * w)


def log_z_bp(G: Multihypergraph, params: BPParams, tol: float = BP_TOL) -> float:
    """Bethe estimate Δ^{−1/(k−1)} B(x*) of log Z_G(λ, ζ) at p = c Δ^{−1/(k−1)}."""
    x = bp_fixed_point(G, params, tol)
    return params.delta ** (-1 / (params.k - 1)) * bethe_free_energy(G, params, x)


def log_z_bp_integral(
    G: Multihypergraph,
    params: BPParams,
    nodes: int = GAUSS_NODES,
    tol: float = BP_TOL,
) -> float:
    """Δ^{−1/(k−1)} Σ_v ∫_0^c x*_v(t)/t dt.

    Gauss–Legendre on (ε, c] with ε = c·1e−6, plus N·ε for (0, ε] where x*_v(t) ≈ t.
    Fixed points are solved in increasing t, each warm-started from the previous one.
    """
    params.check_contraction()
    eps = params.c * SMALL_T_FRACTION
    nodes_x, weights = np.polynomial.legendre.leggauss(nodes)
    half = 0.5 * (params.c - eps)
    ts = eps + half * (nodes_x + 1)
    total = 0.0
    x = None
    for t, w in zip(ts, weights):
        node_params = BPParams(params.k, float(t), params.zeta, params.delta)
        x = bp_fixed_point(G, node_params, tol, x0=None if x is None else np.minimum(x, t))
        total += w * float(np.sum(x)) / t
    integral = G.num_vertices * eps + half * total
    return params.delta ** (-1 / (params.k - 1)) * integral


def rate_lower_tail_bp(
    G: Multihypergraph,
    k: int,
    c: float,
    eta: float,
    regular: bool = False,
    tol: float = BP_TOL,
) -> float:
    """BP prediction of Δ^{1/(k−1)} |V|^{−1} log P_p(X ≤ η E X) at p = c Δ^{−1/(k−1)}:

        B(x*)/|V| − log(1−ζ) η c^k |E| / (|V| Δ) − c,

    the middle term absent at η = 0 (ζ = 1).
    """
    if G.num_vertices == 0:
        raise ValidationError("rate needs at least one vertex")
    delta = max(G.max_degree, 1)
    if eta == 0:
        bound = thresholds(k, 0.0).c_small
        if not c < bound:
            raise ValidationError(f"c = {c} must be < (e/(k-1))^(1/(k-1)) = {bound:.10g} for k={k}")
        params = BPParams(k, c, 1.0, delta)
        x = bp_fixed_point(G, params, tol)
        return bethe_free_energy(G, params, x) / G.num_vertices - c
    zeta, x = solve_zeta(G, k, c, eta, regular=regular, bp_tol=tol)
    params = BPParams(k, c, zeta, delta)
    bethe = bethe_free_energy(G, params, x) / G.num_vertices
    tail = -log(1 - zeta) * eta * c**k * G.num_edges / (G.num_vertices * delta)
    return bethe + tail - c
