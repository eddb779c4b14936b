"""Exact and Monte Carlo oracles for the edge-penalty model

    Z_G(λ, ζ) = Σ_{S ⊆ V} λ^{|S|} (1 − ζ)^{|E(S)|}

Every exact quantity is read off a `SubsetCensus`, the joint histogram of (|S|, |E(S)|)
over all 2^N subsets. The census does not depend on (λ, ζ), so one enumeration serves a
whole parameter grid.
"""

import logging
from dataclasses import dataclass
from functools import partial
from math import comb

import numpy as np
from scipy.special import logsumexp

from .constants import ENUMERATION_BLOCK_BITS, ENUMERATION_GUARD, GAUSS_NODES
from .exceptions import EnumerationGuardError, ValidationError
from .hypergraph import Multihypergraph, contract_vertices, remove_edges, remove_vertices
from .utils import parallel_map

__all__ = [
    "ModelParams",
    "SubsetCensus",
    "GibbsSummary",
    "IdentityResiduals",
    "subset_census",
    "partition_function",
    "summarize",
    "conditional_marginals",
    "lower_tail_exact",
    "lower_tail_exact_fixed_size",
    "log_z_integral",
    "verify_identities",
    "glauber_sample",
    "glauber_marginals",
    "mc_lower_tail",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ModelParams:
    lam: float
    zeta: float

    def __post_init__(self):
        if not self.lam >= 0:
            raise ValidationError(f"lambda must be >= 0, got {self.lam}")
        if not 0 <= self.zeta <= 1:
            raise ValidationError(f"zeta must lie in [0, 1], got {self.zeta}")

    @classmethod
    def from_p(cls, p: float, zeta: float = 1.0) -> "ModelParams":
        """Activity λ = p/(1−p) of the p-random subset."""
        if not 0 < p < 1:
            raise ValidationError(f"p must lie in (0, 1), got {p}")
        return cls(p / (1 - p), zeta)


@dataclass(frozen=True)
class SubsetCensus:
    """counts[s, m] = number of subsets with |S| = s and |E(S)| = m;
    vertex_counts[v, s, m] the same restricted to subsets containing v."""

    num_vertices: int
    counts: np.ndarray
    vertex_counts: np.ndarray

    def log_weights(self, params: ModelParams) -> np.ndarray:
        """log λ^s (1−ζ)^m on the histogram grid, −inf for zero weight."""
        s = np.arange(self.counts.shape[0])[:, None]
        m = np.arange(self.counts.shape[1])[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            log_lam = np.log(params.lam)
            log_keep = np.log1p(-params.zeta)
            size_term = np.where(s == 0, 0.0, s * log_lam)
            edge_term = np.where(m == 0, 0.0, m * log_keep)
        return size_term + edge_term

    def log_z(self, params: ModelParams) -> float:
        return _log_sum(self.log_weights(params), self.counts)

    def probabilities(self, params: ModelParams) -> np.ndarray:
        """P(|S| = s, |E(S)| = m) under μ_{G,λ,ζ}."""
        log_w = self.log_weights(params)
        log_z = _log_sum(log_w, self.counts)
        if log_z == -np.inf:
            raise ValidationError("partition function is 0 (an empty edge with zeta = 1)")
        with np.errstate(invalid="ignore"):
            return np.where(self.counts > 0, self.counts * np.exp(log_w - log_z), 0.0)


@dataclass
class GibbsSummary:
    log_z: float
    marginals: np.ndarray
    mean_size: float
    var_size: float
    mean_edges: float
    var_edges: float

    @property
    def ratios(self) -> np.ndarray:
        """R_v = marginal/(1 − marginal); +inf where the marginal is 1."""
        with np.errstate(divide="ignore"):
            ratios = self.marginals / (1 - self.marginals)
        if np.any(self.marginals >= 1):
            logger.warning("occupation ratio is infinite for a vertex with marginal 1")
        return np.where(self.marginals >= 1, np.inf, ratios)


@dataclass
class IdentityResiduals:
    contract_in: float
    delete_out: float
    edge_deletion: float
    conditional: float

    def max(self) -> float:
        return max(self.contract_in, self.delete_out, self.edge_deletion, self.conditional)


def _log_sum(log_w: np.ndarray, counts: np.ndarray) -> float:
    mask = counts > 0
    if not mask.any():
        return -np.inf
    return float(logsumexp(log_w[mask], b=counts[mask]))


def _census_block(
    block: int,
    bits: int,
    masks: np.ndarray,
    num_vertices: int,
    required: int,
    excluded: int,
) -> tuple[np.ndarray, np.ndarray]:
    num_edges = len(masks)
    shape = (num_vertices + 1) * (num_edges + 1)
    subsets = (np.int64(block) << bits) | np.arange(1 << bits, dtype=np.int64)
    keep = ((subsets & required) == required) & ((subsets & excluded) == 0)
    subsets = subsets[keep]
    sizes = np.bitwise_count(subsets).astype(np.int64)
    inside = np.zeros(len(subsets), dtype=np.int64)
    for mask in masks:
        inside += (subsets & mask) == mask
    flat = sizes * (num_edges + 1) + inside
    counts = np.bincount(flat, minlength=shape)
    vertex_counts = np.empty((num_vertices, shape), dtype=np.int64)
    for v in range(num_vertices):
        occupied = ((subsets >> v) & 1).astype(bool)
        vertex_counts[v] = np.bincount(flat[occupied], minlength=shape)
    return counts, vertex_counts


def subset_census(
    G: Multihypergraph,
    required: frozenset[int] | set[int] = frozenset(),
    excluded: frozenset[int] | set[int] = frozenset(),
    guard: int = ENUMERATION_GUARD,
) -> SubsetCensus:
    """Enumerate all subsets S with required ⊆ S and S ∩ excluded = ∅.

    The 2^N subsets are split into blocks over the high bits; blocks may run on a
    worker pool and are merged in block order, so the result is deterministic.
    """
    N = G.num_vertices
    if N > guard:
        raise EnumerationGuardError(N, guard)
    bits = min(N, ENUMERATION_BLOCK_BITS)
    required_mask = sum(1 << v for v in required)
    excluded_mask = sum(1 << v for v in excluded)
    worker = partial(
        _census_block,
        bits=bits,
        masks=G.edge_masks,
        num_vertices=N,
        required=required_mask,
        excluded=excluded_mask,
    )
    blocks = parallel_map(worker, range(1 << (N - bits)))

    shape = (N + 1, G.num_edges + 1)
    counts = np.zeros(shape[0] * shape[1], dtype=np.int64)
    vertex_counts = np.zeros((N, shape[0] * shape[1]), dtype=np.int64)
    for block_counts, block_vertex_counts in blocks:
        counts += block_counts
        vertex_counts += block_vertex_counts
    return SubsetCensus(N, counts.reshape(shape), vertex_counts.reshape((N, *shape)))


def partition_function(
    G: Multihypergraph, params: ModelParams, guard: int = ENUMERATION_GUARD
) -> float:
    """log Z_G(λ, ζ) by full enumeration."""
    return subset_census(G, guard=guard).log_z(params)


def _summary_from_census(census: SubsetCensus, params: ModelParams) -> GibbsSummary:
    probs = census.probabilities(params)
    s = np.arange(probs.shape[0])
    m = np.arange(probs.shape[1])
    size_dist = probs.sum(axis=1)
    edge_dist = probs.sum(axis=0)
    mean_size = float(size_dist @ s)
    mean_edges = float(edge_dist @ m)
    var_size = max(float(size_dist @ (s - mean_size) ** 2), 0.0)
    var_edges = max(float(edge_dist @ (m - mean_edges) ** 2), 0.0)

    log_w = census.log_weights(params)
    log_z = census.log_z(params)
    with np.errstate(invalid="ignore"):
        weights = np.where(census.counts > 0, np.exp(log_w - log_z), 0.0)
    marginals = np.clip((census.vertex_counts * weights).sum(axis=(1, 2)), 0.0, 1.0)
    return GibbsSummary(
        log_z=log_z,
        marginals=marginals,
        mean_size=mean_size,
        var_size=var_size,
        mean_edges=mean_edges,
        var_edges=var_edges,
    )


def summarize(
    G: Multihypergraph, params: ModelParams, guard: int = ENUMERATION_GUARD
) -> GibbsSummary:
    """Exact log Z, vertex marginals and the first two moments of |S| and |E(S)|."""
    return _summary_from_census(subset_census(G, guard=guard), params)


def conditional_marginals(
    G: Multihypergraph, params: ModelParams, v: int, guard: int = ENUMERATION_GUARD
) -> np.ndarray:
    """μ(u ∈ S | v ∈ S) for every u (1 at u = v)."""
    census = subset_census(G, required={v}, guard=guard)
    return _summary_from_census(census, params).marginals


def lower_tail_exact(
    G: Multihypergraph, p: float, threshold: int, guard: int = ENUMERATION_GUARD
) -> float:
    """P(X ≤ threshold) for the p-random subset, X the induced edge count."""
    if not 0 < p < 1:
        raise ValidationError(f"p must lie in (0, 1), got {p}")
    if threshold >= G.num_edges:
        return 1.0
    if threshold < 0:
        return 0.0
    census = subset_census(G, guard=guard)
    N = G.num_vertices
    s = np.arange(N + 1)[:, None]
    log_w = s * np.log(p) + (N - s) * np.log1p(-p)
    log_w = np.broadcast_to(log_w, census.counts.shape)
    head = slice(0, threshold + 1)
    return float(np.exp(_log_sum(log_w[:, head], census.counts[:, head])))


def lower_tail_exact_fixed_size(
    G: Multihypergraph, size: int, threshold: int, guard: int = ENUMERATION_GUARD
) -> float:
    """P(X ≤ threshold) for a uniformly random vertex subset of the given size."""
    if not 0 <= size <= G.num_vertices:
        raise ValidationError(f"subset size must lie in [0, {G.num_vertices}], got {size}")
    if threshold >= G.num_edges:
        return 1.0
    if threshold < 0:
        return 0.0
    census = subset_census(G, guard=guard)
    favourable = int(census.counts[size, : threshold + 1].sum())
    return favourable / comb(G.num_vertices, size)


def log_z_integral(
    G: Multihypergraph,
    params: ModelParams,
    nodes: int = GAUSS_NODES,
    guard: int = ENUMERATION_GUARD,
) -> float:
    """log Z via log Z(0, ζ) + ∫_0^λ E_{t,ζ}|S| / t dt (Gauss–Legendre in t)."""
    census = subset_census(G, guard=guard)
    log_z0 = census.log_z(ModelParams(0.0, params.zeta))
    if params.lam == 0:
        return log_z0
    x, w = np.polynomial.legendre.leggauss(nodes)
    t = 0.5 * params.lam * (x + 1)
    integrand = [
        _summary_from_census(census, ModelParams(ti, params.zeta)).mean_size / ti
        for ti in t
    ]
    return log_z0 + 0.5 * params.lam * float(np.dot(w, integrand))


def _relative_gap(lhs: float, rhs: float, scale: float | None = None) -> float:
    scale = max(abs(lhs), abs(rhs)) if scale is None else scale
    if scale == 0:
        return 0.0
    return abs(lhs - rhs) / scale


def verify_identities(
    G: Multihypergraph,
    params: ModelParams,
    v: int,
    e: int,
    guard: int = ENUMERATION_GUARD,
) -> IdentityResiduals:
    """Check the four observation identities at vertex v and edge id e, each side from
    its own enumeration:

    1. Z^in_v(G) = λ Z_{G⊖v}
    2. Z^out_v(G) = Z_{G−v}
    3. Z_G = Z_{G−{e}} − ζ Z^in_e(G−{e})
    4. μ_G(u ∈ S | v ∈ S) = μ_{G⊖v}(u ∈ S)

    Residuals are relative (scaled by the larger side; by Z_{G−{e}} for item 3), and
    absolute for the marginals of item 4.
    """
    if not 0 <= v < G.num_vertices:
        raise ValidationError(f"vertex {v} out of range for {G.num_vertices}")
    if not 0 <= e < G.num_edges:
        raise ValidationError(f"edge id {e} out of range for {G.num_edges} edges")

    z_g = np.exp(partition_function(G, params, guard))
    z_in = np.exp(subset_census(G, required={v}, guard=guard).log_z(params))
    z_out = np.exp(subset_census(G, excluded={v}, guard=guard).log_z(params))
    contracted, index_map = contract_vertices(G, {v})
    z_contracted = np.exp(partition_function(contracted, params, guard))
    deleted, _ = remove_vertices(G, {v})
    z_deleted = np.exp(partition_function(deleted, params, guard))

    edge = G.edges[e]
    without_e = remove_edges(G, [edge])
    z_without = np.exp(partition_function(without_e, params, guard))
    z_in_edge = np.exp(subset_census(without_e, required=set(edge), guard=guard).log_z(params))
    rhs_edge = z_without - params.zeta * z_in_edge

    conditional = 0.0
    if z_in > 0 and z_contracted > 0:
        given = conditional_marginals(G, params, v, guard)
        contracted_marginals = summarize(contracted, params, guard).marginals
        gaps = [abs(given[u] - contracted_marginals[index_map[u]]) for u in index_map]
        conditional = max(gaps, default=0.0)

    return IdentityResiduals(
        contract_in=_relative_gap(z_in, params.lam * z_contracted),
        delete_out=_relative_gap(z_out, z_deleted),
        edge_deletion=_relative_gap(z_g, rhs_edge, max(abs(z_g), abs(z_without))),
        conditional=conditional,
    )


def _conditional_edges(G: Multihypergraph) -> list[list[tuple[int, ...]]]:
    """For each vertex, the other vertices of every incident edge (one entry per copy)."""
    return [
        [tuple(u for u in G.edges[edge_id] if u != v) for edge_id in G.incidence[v]]
        for v in range(G.num_vertices)
    ]


def _heat_bath_sweep(
    state: np.ndarray,
    others: list[list[tuple[int, ...]]],
    params: ModelParams,
    uniforms: np.ndarray,
) -> None:
    for v, u in enumerate(uniforms):
        blocked = sum(all(state[x] for x in rest) for rest in others[v])
        weight = params.lam * (1 - params.zeta) ** blocked
        state[v] = u < weight / (1 + weight)


def glauber_sample(
    G: Multihypergraph, params: ModelParams, steps: int, seed: int = 0
) -> frozenset[int]:
    """State of the single-site heat-bath chain after `steps` updates.

    Starts from the empty set and scans vertices in index order. A vertex v is
    occupied with probability λ(1−ζ)^t / (1 + λ(1−ζ)^t), t the number of edges at v
    whose other vertices are all occupied.
    """
    N = G.num_vertices
    if steps < N:
        raise ValidationError(f"steps must be >= |V| = {N}, got {steps}")
    rng = np.random.default_rng(seed)
    uniforms = rng.random(steps)
    others = _conditional_edges(G)
    state = np.zeros(N, dtype=bool)
    full, rest = divmod(steps, N)
    for sweep in range(full):
        _heat_bath_sweep(state, others, params, uniforms[sweep * N : (sweep + 1) * N])
    if rest:
        _heat_bath_sweep(state, others, params, uniforms[full * N :])
    return frozenset(int(v) for v in np.flatnonzero(state))


def glauber_marginals(
    G: Multihypergraph,
    params: ModelParams,
    sweeps: int,
    burn_in: int = 100,
    seed: int = 0,
    batches: int = 50,
) -> tuple[np.ndarray, np.ndarray]:
    """Time-averaged occupation frequencies after burn-in, one sample per sweep.

    Returns
    -------
    frequencies : np.ndarray
        Empirical marginals.
    std_errors : np.ndarray
        Batch-means standard errors (autocorrelation aware).
    """
    N = G.num_vertices
    if sweeps < batches:
        raise ValidationError(f"need at least {batches} sweeps, got {sweeps}")
    rng = np.random.default_rng(seed)
    others = _conditional_edges(G)
    state = np.zeros(N, dtype=bool)
    for _ in range(burn_in):
        _heat_bath_sweep(state, others, params, rng.random(N))
    samples = np.empty((sweeps, N), dtype=bool)
    for i in range(sweeps):
        _heat_bath_sweep(state, others, params, rng.random(N))
        samples[i] = state
    frequencies = samples.mean(axis=0)
    batch_size = sweeps // batches
    batch_means = samples[: batch_size * batches].reshape(batches, batch_size, N).mean(axis=1)
    std_errors = batch_means.std(axis=0, ddof=1) / np.sqrt(batches)
    return frequencies, std_errors


def mc_lower_tail(
    G: Multihypergraph,
    p: float,
    eta: float,
    samples: int,
    seed: int = 0,
    chunk: int = 10_000,
) -> tuple[float, float]:
    """Bernoulli-sampling estimate of P(X ≤ η E X) with E X = Σ_e p^{|e|}.

    Returns the estimate and its binomial standard error.
    """
    if not 0 < p < 1:
        raise ValidationError(f"p must lie in (0, 1), got {p}")
    if not 0 <= eta < 1:
        raise ValidationError(f"eta must lie in [0, 1), got {eta}")
    if samples < 1:
        raise ValidationError(f"samples must be >= 1, got {samples}")
    sizes = np.array([len(edge) for edge in G.edges], dtype=np.int64)
    threshold = eta * float(np.sum(p**sizes))
    if threshold >= G.num_edges:
        return 1.0, 0.0

    incidence = np.zeros((G.num_vertices, G.num_edges), dtype=np.int64)
    for edge_id, edge in enumerate(G.edges):
        incidence[list(edge), edge_id] = 1
    rng = np.random.default_rng(seed)
    hits = 0
    done = 0
    while done < samples:
        n = min(chunk, samples - done)
        occupied = (rng.random((n, G.num_vertices)) < p).astype(np.int64)
        induced = ((occupied @ incidence) == sizes).sum(axis=1)
        hits += int(np.count_nonzero(induced <= threshold))
        done += n
    estimate = hits / samples
    return estimate, float(np.sqrt(estimate * (1 - estimate) / samples))
