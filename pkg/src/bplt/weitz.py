"""Self-avoiding-walk hypertrees and the pruned Weitz hypertree.

Both trees are stored the same way: nodes in breadth-first order (so every child has a
larger id than its parent) and tree edges headed at the node they hang from. A node's
label is the source vertex it copies; an edge's label is the id of the source edge it
came from. Contracted edges keep the label of the edge they were contracted from.
"""

import logging
from collections import Counter, deque
from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .constants import ENUMERATION_GUARD, TREE_NODE_CAP
from .exceptions import TreeSizeError, ValidationError
from .gibbs import ModelParams, summarize
from .hypergraph import Multihypergraph, build

__all__ = [
    "TreeNode",
    "TreeEdge",
    "LabeledHypertree",
    "DepthStats",
    "build_tsaw",
    "build_weitz",
    "tree_ratio",
    "tree_marginal",
    "tree_to_hypergraph",
    "verify_weitz_equality",
    "weitz_structure_report",
    "format_tree",
    "parse_tree",
    "write_tree",
    "read_tree",
]

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TreeNode:
    parent: int
    parent_edge: int
    depth: int
    label: int


@dataclass(frozen=True)
class TreeEdge:
    head: int
    children: tuple[int, ...]
    label: int

    @property
    def nodes(self) -> tuple[int, ...]:
        return (self.head,) + self.children

    def __len__(self) -> int:
        return 1 + len(self.children)


@dataclass(frozen=True)
class LabeledHypertree:
    nodes: tuple[TreeNode, ...]
    edges: tuple[TreeEdge, ...]
    root: int = 0

    @property
    def node_labels(self) -> tuple[int, ...]:
        return tuple(node.label for node in self.nodes)

    @property
    def edge_labels(self) -> tuple[int, ...]:
        return tuple(edge.label for edge in self.edges)

    @cached_property
    def headed(self) -> tuple[tuple[int, ...], ...]:
        """Ids of the tree edges hanging from each node."""
        out = [[] for _ in self.nodes]
        for edge_id, edge in enumerate(self.edges):
            out[edge.head].append(edge_id)
        return tuple(tuple(ids) for ids in out)

    @property
    def edge_multiplicities(self) -> dict[int, int]:
        """Number of size-1 edges at each node that has any."""
        return dict(Counter(edge.head for edge in self.edges if not edge.children))

    def incident_edges(self, node: int) -> tuple[int, ...]:
        parent_edge = self.nodes[node].parent_edge
        own = self.headed[node]
        return own if parent_edge < 0 else (parent_edge,) + own


@dataclass
class DepthStats:
    depth: int
    nodes: int
    max_discrepancy: int
    mean_discrepancy: float
    edges_by_size: dict[int, int]
    max_size_one_neighbours: int


class _TreeBuilder:
    def __init__(self, node_cap: int) -> None:
        self.node_cap = node_cap
        self.nodes: list[TreeNode] = []
        self.edges: list[TreeEdge] = []

    def add_node(self, parent: int, parent_edge: int, depth: int, label: int) -> int:
        if len(self.nodes) >= self.node_cap:
            raise TreeSizeError(self.node_cap)
        self.nodes.append(TreeNode(parent, parent_edge, depth, label))
        return len(self.nodes) - 1

    def add_edge(self, head: int, label: int, first_child: int, size: int) -> int:
        children = tuple(range(first_child, first_child + size - 1))
        self.edges.append(TreeEdge(head, children, label))
        return len(self.edges) - 1

    def finish(self) -> LabeledHypertree:
        return LabeledHypertree(tuple(self.nodes), tuple(self.edges))


def _check_vertex(G: Multihypergraph, v: int) -> None:
    if not 0 <= v < G.num_vertices:
        raise ValidationError(f"vertex {v} out of range for {G.num_vertices}")


def build_tsaw(
    G: Multihypergraph,
    v: int,
    depth_limit: int | None = None,
    node_cap: int = TREE_NODE_CAP,
) -> LabeledHypertree:
    """The self-avoiding-walk hypertree of G rooted at v.

    Nodes are the walks from v. A walk W ending at u gets one tree edge for every unused
    edge h ∋ u with h ∩ W = {u}; the edge's other vertices extend W by one step each.
    Copies of {u} become size-1 tree edges. Nodes at `depth_limit` are not expanded.
    """
    _check_vertex(G, v)
    tree = _TreeBuilder(node_cap)
    root = tree.add_node(-1, -1, 0, v)
    queue = deque([(root, (v,), ())])
    while queue:
        node, walk, used = queue.popleft()
        depth = len(used)
        if depth_limit is not None and depth >= depth_limit:
            continue
        on_walk = set(walk)
        u = walk[-1]
        for edge_id in G.incidence[u]:
            if edge_id in used:
                continue
            others = [x for x in G.edges[edge_id] if x != u]
            if on_walk.intersection(others):
                continue
            tree_edge = tree.add_edge(node, edge_id, len(tree.nodes), len(others) + 1)
            for x in others:
                child = tree.add_node(node, tree_edge, depth + 1, x)
                queue.append((child, walk + (x,), used + (edge_id,)))
    return tree.finish()


def _ranks(order: Sequence[int] | None, size: int, what: str) -> list[int]:
    if order is None:
        return list(range(size))
    if sorted(order) != list(range(size)):
        raise ValidationError(f"{what} order must be a permutation of 0..{size - 1}")
    ranks = [0] * size
    for position, item in enumerate(order):
        ranks[item] = position
    return ranks


def _weitz_from_residual(
    residual: dict[int, frozenset[int]],
    v: int,
    vertex_rank: list[int],
    edge_rank: list[int],
    depth_limit: int | None,
    node_cap: int,
) -> LabeledHypertree:
    """Breadth-first construction from residual hypergraphs.

    With incident edges e_1 < ... < e_d of u (edge order) and e_i \\ {u} =
    {w_1 < ... < w_l} (vertex order), the subtree of w_j is the tree of
    (H − {e_1..e_i}) ⊖ {u, w_1..w_{j−1}}. This is the same tree as applying the two
    pruning operations to the walk tree node by node from the root.
    """
    tree = _TreeBuilder(node_cap)
    root = tree.add_node(-1, -1, 0, v)
    queue = deque([(root, v, residual, 0)])
    while queue:
        node, u, H, depth = queue.popleft()
        if depth_limit is not None and depth >= depth_limit:
            continue
        incident = sorted((f for f, s in H.items() if u in s), key=edge_rank.__getitem__)
        for i, edge_id in enumerate(incident):
            others = sorted(H[edge_id] - {u}, key=vertex_rank.__getitem__)
            tree_edge = tree.add_edge(node, edge_id, len(tree.nodes), len(others) + 1)
            removed = set(incident[: i + 1])
            for j, w in enumerate(others):
                occupied = {u, *others[:j]}
                child_residual = {}
                for f, s in H.items():
                    if f in removed:
                        continue
                    s = s - occupied
                    if s:
                        child_residual[f] = s
                child = tree.add_node(node, tree_edge, depth + 1, w)
                queue.append((child, w, child_residual, depth + 1))
    return tree.finish()


def build_weitz(
    G: Multihypergraph,
    v: int,
    vertex_order: Sequence[int] | None = None,
    edge_order: Sequence[int] | None = None,
    depth_limit: int | None = None,
    node_cap: int = TREE_NODE_CAP,
) -> LabeledHypertree:
    """The Weitz hypertree T_v(G) whose root marginal equals the marginal of v in G.

    Orders are permutations of vertex ids and edge ids (identity by default). Empty
    edges are dropped since they cancel from every occupation ratio.
    """
    _check_vertex(G, v)
    vertex_rank = _ranks(vertex_order, G.num_vertices, "vertex")
    edge_rank = _ranks(edge_order, G.num_edges, "edge")
    residual = {f: frozenset(edge) for f, edge in enumerate(G.edges) if edge}
    return _weitz_from_residual(residual, v, vertex_rank, edge_rank, depth_limit, node_cap)


def tree_ratio(T: LabeledHypertree, params: ModelParams) -> float:
    """Occupation ratio of the root by the tree recursion

        R_w = λ ∏_{edges e at w} (1 − ζ ∏_{u ∈ e \\ w} R_u / (1 + R_u)),

    evaluated leaves first. A size-1 edge contributes the factor 1 − ζ.
    """
    ratios = np.zeros(len(T.nodes))
    for node in range(len(T.nodes) - 1, -1, -1):
        value = params.lam
        for edge_id in T.headed[node]:
            occupied = 1.0
            for child in T.edges[edge_id].children:
                occupied *= ratios[child] / (1 + ratios[child])
            value *= 1 - params.zeta * occupied
        ratios[node] = value
    return float(ratios[T.root])


def tree_marginal(T: LabeledHypertree, params: ModelParams) -> float:
    ratio = tree_ratio(T, params)
    return ratio / (1 + ratio)


def tree_to_hypergraph(T: LabeledHypertree) -> Multihypergraph:
    return build(len(T.nodes), [edge.nodes for edge in T.edges])


def verify_weitz_equality(
    G: Multihypergraph,
    v: int,
    params: ModelParams,
    vertex_order: Sequence[int] | None = None,
    edge_order: Sequence[int] | None = None,
    node_cap: int = TREE_NODE_CAP,
    guard: int = ENUMERATION_GUARD,
) -> float:
    """|μ_G(v ∈ S) − μ_T(root ∈ S)| with the left side by enumeration and the right side
    by the tree recursion on T_v(G)."""
    exact = summarize(G, params, guard).marginals[v]
    T = build_weitz(G, v, vertex_order, edge_order, node_cap=node_cap)
    residual = abs(exact - tree_marginal(T, params))
    logger.debug("weitz tree at %d: %d nodes, residual %.3e", v, len(T.nodes), residual)
    return float(residual)


def weitz_structure_report(
    G: Multihypergraph,
    v: int,
    U: set[int] | frozenset[int],
    depth: int,
    node_cap: int = TREE_NODE_CAP,
) -> list[DepthStats]:
    """Per-depth structure of T_v(G ⊖ U) against G.

    For each node w up to `depth`: the label discrepancy |π(E_T(w)) △ E_G(π(w))|, the
    sizes of the tree edges at w and the number of neighbours of w carrying a size-1
    edge. Vertex and edge labels refer to G itself.
    """
    _check_vertex(G, v)
    U = frozenset(U)
    if v in U:
        raise ValidationError(f"root {v} must not be contracted")
    residual = {}
    for f, edge in enumerate(G.edges):
        s = frozenset(edge) - U
        if s:
            residual[f] = s
    ranks = list(range(G.num_vertices))
    edge_ranks = list(range(G.num_edges))
    T = _weitz_from_residual(residual, v, ranks, edge_ranks, depth + 2, node_cap)

    carries_single = {edge.head for edge in T.edges if not edge.children}
    by_depth: dict[int, list[int]] = {}
    for node_id, node in enumerate(T.nodes):
        if node.depth <= depth:
            by_depth.setdefault(node.depth, []).append(node_id)

    report = []
    for d in sorted(by_depth):
        discrepancies = []
        sizes = Counter()
        single_neighbours = []
        for node_id in by_depth[d]:
            incident = T.incident_edges(node_id)
            tree_labels = {T.edges[e].label for e in incident}
            source_labels = set(G.incidence[T.nodes[node_id].label])
            discrepancies.append(len(tree_labels ^ source_labels))
            sizes.update(len(T.edges[e]) for e in incident)
            neighbours = {x for e in incident for x in T.edges[e].nodes} - {node_id}
            single_neighbours.append(len(neighbours & carries_single))
        report.append(
            DepthStats(
                depth=d,
                nodes=len(by_depth[d]),
                max_discrepancy=max(discrepancies),
                mean_discrepancy=float(np.mean(discrepancies)),
                edges_by_size=dict(sorted(sizes.items())),
                max_size_one_neighbours=max(single_neighbours),
            )
        )
    return report


def format_tree(T: LabeledHypertree) -> str:
    """`nodes edges` header, one `node_id parent_id parent_edge_id depth label` line per
    node, then one `edge_id size node_ids... source_label` line per edge."""
    lines = [f"{len(T.nodes)} {len(T.edges)}"]
    for node_id, node in enumerate(T.nodes):
        lines.append(f"{node_id} {node.parent} {node.parent_edge} {node.depth} {node.label}")
    for edge_id, edge in enumerate(T.edges):
        members = " ".join(str(x) for x in edge.nodes)
        lines.append(f"{edge_id} {len(edge)} {members} {edge.label}")
    return "\n".join(lines) + "\n"


def parse_tree(text: str) -> LabeledHypertree:
    rows = [line.split() for line in text.splitlines() if line.strip()]
    try:
        num_nodes, num_edges = (int(x) for x in rows[0])
        nodes = []
        for row in rows[1 : 1 + num_nodes]:
            _, parent, parent_edge, depth, label = (int(x) for x in row)
            nodes.append(TreeNode(parent, parent_edge, depth, label))
        edges = []
        for row in rows[1 + num_nodes : 1 + num_nodes + num_edges]:
            values = [int(x) for x in row]
            size = values[1]
            members = values[2 : 2 + size]
            edges.append(TreeEdge(members[0], tuple(members[1:]), values[2 + size]))
    except (IndexError, ValueError) as err:
        raise ValidationError(f"malformed tree dump: {err}") from err
    if len(nodes) != num_nodes or len(edges) != num_edges:
        raise ValidationError("tree dump is shorter than its header")
    return LabeledHypertree(tuple(nodes), tuple(edges))


def write_tree(T: LabeledHypertree, path: Path | str) -> None:
    with open(path, "wt") as f:
        f.write(format_tree(T))


def read_tree(path: Path | str) -> LabeledHypertree:
    with open(path, "rt") as f:
        return parse_tree(f.read())
