"""Attributed-graph data model, JSON I/O, normalization, and anomaly injection."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np


class SchemaError(ValueError):
    """A dataset or model document does not match its JSON schema."""


@dataclass(frozen=True)
class Graph:
    """Undirected attributed graph with optional binary anomaly labels.

    Edges are stored canonically: one row per undirected edge, ``u < v``,
    lexicographically sorted. Construction validates and canonicalizes, so
    every ``Graph`` instance satisfies the invariants (symmetry, no
    self-loops, no duplicates, feature row count equals ``num_nodes``).
    Instances are immutable; operations return new graphs.
    """

    num_nodes: int
    edges: np.ndarray
    features: np.ndarray
    labels: np.ndarray | None = None
    name: str = ""

    def __post_init__(self):
        n = self.num_nodes
        if n < 0:
            raise ValueError(f"num_nodes must be >= 0, got {n}")
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if edges.size:
            if edges.min() < 0 or edges.max() >= n:
                raise IndexError(
                    f"edge endpoint out of range [0, {n}): "
                    f"min={edges.min()}, max={edges.max()}"
                )
            if (edges[:, 0] == edges[:, 1]).any():
                bad = edges[edges[:, 0] == edges[:, 1]][0, 0]
                raise ValueError(f"self-loop on node {bad} is not allowed")
            edges = np.sort(edges, axis=1)
            edges = edges[np.lexsort((edges[:, 1], edges[:, 0]))]
            dup = (edges[1:] == edges[:-1]).all(axis=1)
            if dup.any():
                u, v = edges[1:][dup][0]
                raise ValueError(f"duplicate undirected edge ({u}, {v})")
        features = np.asarray(self.features, dtype=np.float64)
        if features.ndim != 2 or features.shape[0] != n:
            raise ValueError(
                f"features must have shape ({n}, d), got {features.shape}"
            )
        labels = self.labels
        if labels is not None:
            labels = np.asarray(labels, dtype=np.int64)
            if labels.shape != (n,):
                raise ValueError(f"labels must have shape ({n},), got {labels.shape}")
            if not np.isin(labels, (0, 1)).all():
                raise ValueError("labels must be binary (0 or 1)")
        for arr in (edges, features, labels):
            if arr is not None:
                arr.setflags(write=False)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    @property
    def num_edges(self) -> int:
        """Number of undirected edges (each counted once)."""
        return len(self.edges)

    @property
    def num_features(self) -> int:
        return self.features.shape[1]

    @cached_property
    def edge_set(self) -> frozenset[tuple[int, int]]:
        """Set of canonical ``(u, v)`` pairs with ``u < v``."""
        return frozenset(map(tuple, self.edges.tolist()))

    @cached_property
    def neighbors(self) -> tuple[np.ndarray, ...]:
        """Per-node sorted neighbor arrays."""
        if not len(self.edges):
            return tuple(np.empty(0, dtype=np.int64) for _ in range(self.num_nodes))
        both = np.concatenate([self.edges, self.edges[:, ::-1]])
        both = both[np.lexsort((both[:, 1], both[:, 0]))]
        counts = np.bincount(both[:, 0], minlength=self.num_nodes)
        return tuple(np.split(both[:, 1].copy(), np.cumsum(counts)[:-1]))

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.num_nodes, dtype=np.int64)
        if len(self.edges):
            deg += np.bincount(self.edges[:, 0], minlength=self.num_nodes)
            deg += np.bincount(self.edges[:, 1], minlength=self.num_nodes)
        return deg

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edge_set

    def validate(self) -> None:
        """Re-check all invariants; raises on violation.

        Construction already enforces these, so this is primarily a hook
        for property tests on graphs produced by transformations.
        """
        edges = self.edges
        if edges.size:
            assert (edges[:, 0] < edges[:, 1]).all(), "edges not canonical (u < v)"
            assert edges.min() >= 0 and edges.max() < self.num_nodes
            assert len(self.edge_set) == len(edges), "duplicate edges"
        assert self.features.shape[0] == self.num_nodes

    def with_features(self, features: np.ndarray) -> "Graph":
        return Graph(self.num_nodes, self.edges, features, self.labels, self.name)

    def with_edges(self, edges: np.ndarray) -> "Graph":
        return Graph(self.num_nodes, edges, self.features, self.labels, self.name)


@dataclass(frozen=True)
class AnomalyLabels:
    """Node ids of injected anomalies, by kind."""

    structural: tuple[int, ...]
    feature: tuple[int, ...]

    @property
    def all(self) -> tuple[int, ...]:
        return tuple(sorted(set(self.structural) | set(self.feature)))


def _normalize_dense(adj: np.ndarray) -> np.ndarray:
    """Symmetric normalization with self-loops: D^(-1/2) (A + I) D^(-1/2)."""
    a_tilde = adj + np.eye(adj.shape[0])
    d_inv_sqrt = 1.0 / np.sqrt(a_tilde.sum(axis=1))
    return a_tilde * d_inv_sqrt[:, None] * d_inv_sqrt[None, :]


def normalize_adjacency(g: Graph, node_subset=None) -> np.ndarray:
    """Self-loop-augmented symmetric normalized adjacency, dense.

    With ``node_subset`` (an ordered list of distinct node ids), the matrix
    is built on the adjacency induced by that ordering. Every node has
    degree >= 1 after the self-loop, so the normalization never divides
    by zero.
    """
    if node_subset is None:
        n = g.num_nodes
        adj = np.zeros((n, n))
        if len(g.edges):
            adj[g.edges[:, 0], g.edges[:, 1]] = 1.0
            adj[g.edges[:, 1], g.edges[:, 0]] = 1.0
        return _normalize_dense(adj)
    nodes = np.asarray(node_subset, dtype=np.int64)
    if len(np.unique(nodes)) != len(nodes):
        raise ValueError("node_subset must contain distinct node ids")
    if nodes.size and (nodes.min() < 0 or nodes.max() >= g.num_nodes):
        raise IndexError("node_subset id out of range")
    k = len(nodes)
    adj = np.zeros((k, k))
    edge_set = g.edge_set
    for p in range(k):
        for q in range(p + 1, k):
            u, v = int(nodes[p]), int(nodes[q])
            if (min(u, v), max(u, v)) in edge_set:
                adj[p, q] = adj[q, p] = 1.0
    return _normalize_dense(adj)


def generate_synthetic(
    n: int,
    d: int,
    num_blocks: int,
    p_in: float,
    p_out: float,
    rng: np.random.Generator,
) -> Graph:
    """Stochastic block model graph with block-separated Gaussian features.

    Each block draws a mean vector from N(0, I); node features add N(0, 0.3^2)
    noise around their block mean, so feature swaps across blocks are
    detectable. Deterministic for a fixed generator state.
    """
    if num_blocks < 1 or n < num_blocks:
        raise ValueError(f"need n >= num_blocks >= 1, got n={n}, num_blocks={num_blocks}")
    if not (0.0 <= p_out < p_in <= 1.0):
        raise ValueError(f"need 0 <= p_out < p_in <= 1, got p_in={p_in}, p_out={p_out}")
    sizes = np.full(num_blocks, n // num_blocks, dtype=np.int64)
    sizes[: n % num_blocks] += 1
    blocks = np.repeat(np.arange(num_blocks), sizes)
    means = rng.normal(0.0, 1.0, size=(num_blocks, d))
    features = means[blocks] + rng.normal(0.0, 0.3, size=(n, d))
    iu, ju = np.triu_indices(n, k=1)
    prob = np.where(blocks[iu] == blocks[ju], p_in, p_out)
    keep = rng.random(len(iu)) < prob
    edges = np.column_stack([iu[keep], ju[keep]])
    return Graph(n, edges, features, name=f"sbm_n{n}_b{num_blocks}")


def expected_sbm_edges(n: int, num_blocks: int, p_in: float, p_out: float):
    """Expected undirected edge count of ``generate_synthetic`` and its std."""
    sizes = np.full(num_blocks, n // num_blocks, dtype=np.int64)
    sizes[: n % num_blocks] += 1
    intra = int((sizes * (sizes - 1) // 2).sum())
    inter = n * (n - 1) // 2 - intra
    mean = intra * p_in + inter * p_out
    var = intra * p_in * (1 - p_in) + inter * p_out * (1 - p_out)
    return mean, float(np.sqrt(var))


def inject_anomalies(
    g: Graph,
    n_structural: int,
    n_feature: int,
    clique_size: int = 15,
    candidate_pool: int = 50,
    rng: np.random.Generator | None = None,
) -> tuple[Graph, AnomalyLabels]:
    """Inject structural (clique) and feature (far-swap) anomalies.

    Structural anomalies come in ``n_structural / clique_size`` disjoint
    groups; every missing edge inside a group is added so each group forms
    a full clique. Each feature-anomaly node samples ``candidate_pool``
    other nodes and copies the feature row of the candidate at maximum
    Euclidean distance. All anomaly nodes are drawn disjointly from nodes
    not already labeled anomalous; replacement features are taken from a
    snapshot of the original feature matrix, so the result does not depend
    on processing order.
    """
    if rng is None:
        raise ValueError("rng is required for reproducible injection")
    if n_structural < 0 or n_feature < 0:
        raise ValueError("anomaly counts must be >= 0")
    if n_structural > 0:
        if clique_size < 2:
            raise ValueError(f"clique_size must be >= 2, got {clique_size}")
        if n_structural % clique_size != 0:
            raise ValueError(
                f"n_structural ({n_structural}) must be divisible by "
                f"clique_size ({clique_size})"
            )
    total = n_structural + n_feature
    if total == 0:
        return g, AnomalyLabels(structural=(), feature=())
    if g.labels is not None:
        eligible = np.flatnonzero(g.labels == 0)
    else:
        eligible = np.arange(g.num_nodes)
    if total > len(eligible):
        raise ValueError(
            f"requested {total} anomalies but only {len(eligible)} unlabeled nodes"
        )
    if n_feature > 0:
        if candidate_pool < 1:
            raise ValueError("candidate_pool must be >= 1")
        if candidate_pool > g.num_nodes - 1:
            raise ValueError(
                f"candidate_pool ({candidate_pool}) exceeds available other "
                f"nodes ({g.num_nodes - 1})"
            )

    targets = rng.choice(eligible, size=total, replace=False)
    structural = np.sort(targets[:n_structural])
    feature = np.sort(targets[n_structural:])

    new_edges = [g.edges]
    groups = targets[:n_structural].reshape(-1, clique_size) if n_structural else []
    for group in groups:
        for a in range(len(group)):
            for b in range(a + 1, len(group)):
                u, v = int(group[a]), int(group[b])
                if not g.has_edge(u, v):
                    new_edges.append(np.array([[min(u, v), max(u, v)]], dtype=np.int64))
    edges = np.concatenate(new_edges) if len(new_edges) > 1 else g.edges

    snapshot = g.features
    new_features = snapshot.copy()
    for i in feature:
        cand = rng.choice(g.num_nodes - 1, size=candidate_pool, replace=False)
        cand[cand >= i] += 1
        dist = np.linalg.norm(snapshot[cand] - snapshot[i], axis=1)
        new_features[i] = snapshot[cand[np.argmax(dist)]]

    labels = np.zeros(g.num_nodes, dtype=np.int64) if g.labels is None else g.labels.copy()
    labels[targets] = 1
    out = Graph(g.num_nodes, edges, new_features, labels, g.name)
    marks = AnomalyLabels(
        structural=tuple(int(i) for i in structural),
        feature=tuple(int(i) for i in feature),
    )
    return out, marks


def load_graph(path, format: str = "json") -> Graph:
    """Load a dataset document (see README for the schema).

    Edge pairs may appear in either orientation; they are canonicalized to
    ``u < v``. Self-loops, repeated pairs (in any orientation), and
    out-of-range node ids are rejected.
    """
    if format != "json":
        raise ValueError(f"unsupported format {format!r}; only 'json' is supported")
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise SchemaError(f"{path}: line {e.lineno} col {e.colno}: {e.msg}") from e
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: top-level value must be an object")
    for key in ("num_nodes", "features", "edges"):
        if key not in doc:
            raise SchemaError(f"{path}: missing required field {key!r}")
    n = doc["num_nodes"]
    if not isinstance(n, int) or n < 0:
        raise SchemaError(f"{path}: field 'num_nodes' must be a non-negative int")
    feats = doc["features"]
    if not isinstance(feats, list) or len(feats) != n:
        raise SchemaError(
            f"{path}: field 'features' must list {n} rows, got "
            f"{len(feats) if isinstance(feats, list) else type(feats).__name__}"
        )
    widths = {len(row) for row in feats} if feats else set()
    if len(widths) > 1:
        raise SchemaError(f"{path}: field 'features' has ragged rows (widths {sorted(widths)})")
    if not all(isinstance(row, list) for row in feats):
        raise SchemaError(f"{path}: field 'features' rows must be lists of numbers")
    edges = doc["edges"]
    if not isinstance(edges, list):
        raise SchemaError(f"{path}: field 'edges' must be a list of [u, v] pairs")
    for idx, pair in enumerate(edges):
        if not (isinstance(pair, list) and len(pair) == 2
                and all(isinstance(x, int) for x in pair)):
            raise SchemaError(f"{path}: field 'edges[{idx}]' must be a pair of ints")
    labels = doc.get("labels")
    if labels is not None:
        if not isinstance(labels, list) or len(labels) != n:
            raise SchemaError(f"{path}: field 'labels' must list {n} entries")
        if not all(x in (0, 1) for x in labels):
            raise SchemaError(f"{path}: field 'labels' entries must be 0 or 1")
    features = np.asarray(feats, dtype=np.float64) if n else np.zeros((0, 0))
    if features.ndim == 1:
        features = features.reshape(n, 0)
    return Graph(n, np.asarray(edges, dtype=np.int64).reshape(-1, 2), features,
                 labels=None if labels is None else np.asarray(labels),
                 name=str(doc.get("name", "")))


def save_graph(g: Graph, path) -> None:
    """Write the dataset document; round-trips losslessly up to edge order."""
    doc = {
        "name": g.name,
        "num_nodes": g.num_nodes,
        "features": g.features.tolist(),
        "edges": g.edges.tolist(),
    }
    if g.labels is not None:
        doc["labels"] = g.labels.tolist()
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")
