"""Second-view construction and random-walk subgraph sampling.

Four augmentation strategies produce the second view: edge modification
(drop and add an equal number of edges), Gaussian feature noise, feature
masking, and PPR graph diffusion. Subgraphs around each target node are
sampled by random walk with restart and carry a target-masked feature
matrix plus the induced normalized adjacency.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph, _normalize_dense, normalize_adjacency


class FeasibilityError(ValueError):
    """Requested edge rewiring cannot be satisfied on this graph."""


@dataclass(frozen=True)
class AugmentConfig:
    """Knobs for building the second view.

    ``noise_sigma=None`` resolves to 0.1x the per-dimension feature std;
    ``top_k=None`` resolves to the graph's average degree.
    """

    method: str = "em"
    edge_mod_ratio: float = 0.2
    noise_sigma: float | None = None
    mask_ratio: float = 0.2
    teleport: float = 0.15
    top_k: int | None = None

    def __post_init__(self):
        if self.method not in ("em", "gnf", "fm", "gd"):
            raise ValueError(f"unknown augmentation method {self.method!r}")
        if not 0.0 <= self.edge_mod_ratio <= 1.0:
            raise ValueError(f"edge_mod_ratio must be in [0, 1], got {self.edge_mod_ratio}")
        if not 0.0 <= self.mask_ratio <= 1.0:
            raise ValueError(f"mask_ratio must be in [0, 1], got {self.mask_ratio}")
        if not 0.0 < self.teleport < 1.0:
            raise ValueError(f"teleport must be in (0, 1), got {self.teleport}")


@dataclass(frozen=True)
class SubgraphSample:
    """RWR-sampled neighborhood of a target node, fixed size.

    ``nodes[0]`` is the target. When fewer than ``size - 1`` distinct
    neighbors are reachable within the step cap, the node list is padded by
    repeating the target id; padded rows are zero in ``features_masked``
    and isolated (self-loop only) in ``norm_adj``.
    """

    nodes: tuple[int, ...]
    norm_adj: np.ndarray
    features_masked: np.ndarray
    features_full: np.ndarray
    num_real: int

    @property
    def target(self) -> int:
        return self.nodes[0]

    @property
    def size(self) -> int:
        return len(self.nodes)


def edge_modification(g: Graph, ratio: float, rng: np.random.Generator) -> Graph:
    """Drop ``round(ratio * M / 2)`` random edges and add as many new ones.

    Removals are uniform over existing edges; additions are uniform over
    the non-edges of the *input* graph, so the symmetric difference between
    input and output edge sets is exactly ``2 * round(ratio * M / 2)`` and
    the edge count is preserved.
    """
    if not 0.0 <= ratio <= 1.0:
        raise ValueError(f"ratio must be in [0, 1], got {ratio}")
    m = g.num_edges
    r = round(ratio * m / 2)
    if r == 0:
        return g
    n = g.num_nodes
    capacity = n * (n - 1) // 2 - m
    if capacity < r:
        raise FeasibilityError(
            f"cannot add {r} edges: only {capacity} non-edges available "
            f"(short by {r - capacity})"
        )
    keep = np.ones(m, dtype=bool)
    keep[rng.choice(m, size=r, replace=False)] = False

    density = m / (n * (n - 1) / 2)
    existing = g.edge_set
    added: list[tuple[int, int]] = []
    if density <= 0.5:
        chosen: set[tuple[int, int]] = set()
        attempts, cap = 0, 100 * r + 10_000
        while len(added) < r and attempts < cap:
            attempts += 1
            u = int(rng.integers(n))
            v = int(rng.integers(n))
            if u == v:
                continue
            pair = (min(u, v), max(u, v))
            if pair in existing or pair in chosen:
                continue
            chosen.add(pair)
            added.append(pair)
    if len(added) < r:
        # dense graph (or pathological rejection run): enumerate non-edges
        added = []
        iu, ju = np.triu_indices(n, k=1)
        free = np.array([(int(u), int(v)) not in existing for u, v in zip(iu, ju)])
        pool = np.flatnonzero(free)
        picks = rng.choice(pool, size=r, replace=False)
        added = [(int(iu[p]), int(ju[p])) for p in picks]
    edges = np.concatenate([g.edges[keep], np.asarray(added, dtype=np.int64)])
    return g.with_edges(edges)


def gaussian_noise_features(g: Graph, noise_sigma, rng: np.random.Generator) -> Graph:
    """Perturb every feature entry with i.i.d. N(0, noise_sigma^2) noise.

    ``noise_sigma`` may be a scalar or a per-dimension vector.
    """
    sigma = np.asarray(noise_sigma, dtype=np.float64)
    if (sigma < 0).any():
        raise ValueError("noise_sigma must be >= 0")
    noise = rng.normal(0.0, 1.0, size=g.features.shape) * sigma
    return g.with_features(g.features + noise)


def feature_mask(g: Graph, mask_ratio: float, rng: np.random.Generator) -> Graph:
    """Zero a uniform random subset of ``round(mask_ratio * N * d)`` entries."""
    if not 0.0 <= mask_ratio <= 1.0:
        raise ValueError(f"mask_ratio must be in [0, 1], got {mask_ratio}")
    total = g.features.size
    count = round(mask_ratio * total)
    if count == 0:
        return g
    flat = rng.choice(total, size=count, replace=False)
    features = g.features.copy()
    features.reshape(-1)[flat] = 0.0
    return g.with_features(features)


def graph_diffusion(g: Graph, teleport: float, top_k: int) -> Graph:
    """PPR diffusion followed by per-row top-k sparsification to 0/1 edges.

    Solves S = teleport * (I - (1 - teleport) * T)^(-1) with T the
    self-loop normalized adjacency, keeps the ``top_k`` largest positive
    off-diagonal entries of each row, and symmetrizes the result.
    """
    if not 0.0 < teleport < 1.0:
        raise ValueError(f"teleport must be in (0, 1), got {teleport}")
    if top_k < 0:
        raise ValueError("top_k must be >= 0")
    n = g.num_nodes
    if n > 20_000:
        raise ValueError(f"dense diffusion solve is guarded to N <= 20000, got {n}")
    t_sym = normalize_adjacency(g)
    system = np.eye(n) - (1.0 - teleport) * t_sym
    diffusion = teleport * np.linalg.solve(system, np.eye(n))
    pairs: set[tuple[int, int]] = set()
    for i in range(n):
        row = diffusion[i].copy()
        row[i] = -np.inf
        order = np.argsort(-row, kind="stable")[:top_k]
        for j in order:
            if row[j] > 1e-12:
                pairs.add((min(i, int(j)), max(i, int(j))))
    edges = np.asarray(sorted(pairs), dtype=np.int64).reshape(-1, 2)
    return g.with_edges(edges)


def augment_graph(g: Graph, config: AugmentConfig, rng: np.random.Generator) -> Graph:
    """Build the second view according to ``config``."""
    if config.method == "em":
        return edge_modification(g, config.edge_mod_ratio, rng)
    if config.method == "gnf":
        sigma = config.noise_sigma
        if sigma is None:
            sigma = 0.1 * g.features.std(axis=0)
        return gaussian_noise_features(g, sigma, rng)
    if config.method == "fm":
        return feature_mask(g, config.mask_ratio, rng)
    if config.method == "gd":
        top_k = config.top_k
        if top_k is None:
            top_k = max(1, round(2 * g.num_edges / max(g.num_nodes, 1)))
        return graph_diffusion(g, config.teleport, top_k)
    raise ValueError(f"unknown augmentation method {config.method!r}")


def rwr_subgraph(
    g: Graph,
    target: int,
    size: int,
    restart: float,
    rng: np.random.Generator,
) -> SubgraphSample:
    """Sample a fixed-size subgraph around ``target`` by restart walk.

    The walk restarts to the target with probability ``restart`` and
    otherwise moves to a uniform random neighbor; the first ``size - 1``
    distinct non-target nodes visited (first-visit order) join the sample.
    A step cap of ``20 * size`` bounds sampling on graphs where the
    neighborhood is too small, after which the sample is padded.
    """
    if not 0 <= target < g.num_nodes:
        raise IndexError(f"target {target} out of range [0, {g.num_nodes})")
    if size < 1:
        raise ValueError(f"size must be >= 1, got {size}")
    if not 0.0 < restart < 1.0:
        raise ValueError(f"restart must be in (0, 1), got {restart}")

    collected: list[int] = []
    seen: set[int] = set()
    current = target
    neighbors = g.neighbors
    steps_left = 20 * size
    while len(collected) < size - 1 and steps_left > 0:
        steps_left -= 1
        if rng.random() < restart:
            current = target
            continue
        nb = neighbors[current]
        if len(nb) == 0:
            current = target
            continue
        current = int(nb[rng.integers(len(nb))])
        if current != target and current not in seen:
            seen.add(current)
            collected.append(current)

    real = [target, *collected]
    num_real = len(real)
    nodes = tuple(real + [target] * (size - num_real))

    adj = np.zeros((size, size))
    edge_set = g.edge_set
    for p in range(num_real):
        for q in range(p + 1, num_real):
            u, v = nodes[p], nodes[q]
            if (min(u, v), max(u, v)) in edge_set:
                adj[p, q] = adj[q, p] = 1.0
    norm_adj = _normalize_dense(adj)

    features_full = g.features[list(nodes)]
    features_masked = features_full.copy()
    features_masked[0] = 0.0
    if num_real < size:
        features_masked[num_real:] = 0.0
    return SubgraphSample(nodes, norm_adj, features_masked, features_full, num_real)
