"""Shared fixtures and independent oracle helpers for the test suite."""

import numpy as np
import pytest

from graphcad import Graph, generate_synthetic, inject_anomalies


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_graph():
    """Deterministic 30-node, 2-block attributed graph."""
    return generate_synthetic(30, 6, 2, 0.3, 0.05, np.random.default_rng(7))


@pytest.fixture
def labeled_graph():
    """60-node graph with injected anomalies for end-to-end paths."""
    g = generate_synthetic(60, 8, 3, 0.2, 0.02, np.random.default_rng(7))
    out, _ = inject_anomalies(g, 6, 6, clique_size=3, candidate_pool=10,
                              rng=np.random.default_rng(8))
    return out


def path_graph(num_nodes: int, d: int = 2) -> Graph:
    edges = np.column_stack([np.arange(num_nodes - 1), np.arange(1, num_nodes)])
    features = np.arange(num_nodes * d, dtype=float).reshape(num_nodes, d)
    return Graph(num_nodes, edges, features)


def complete_graph(num_nodes: int, d: int = 2) -> Graph:
    iu, ju = np.triu_indices(num_nodes, k=1)
    features = np.ones((num_nodes, d))
    return Graph(num_nodes, np.column_stack([iu, ju]), features)


def random_graph(n: int, d: int, edge_prob: float, rng) -> Graph:
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(len(iu)) < edge_prob
    return Graph(n, np.column_stack([iu[keep], ju[keep]]),
                 rng.normal(size=(n, d)))
