"""Multi-round anomaly scoring with a trained scorer.

Each round rebuilds the augmented view, resamples one subgraph per node per
view, draws a fresh negative partner per node over all nodes, and scores
every node as the fused difference between negative- and positive-pair
similarities. Rounds aggregate as mean plus population standard deviation.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .augment import rwr_subgraph, augment_graph
from .config import Hyperparams
from .graph import Graph
from .model import Parameters, relu, sigmoid

_CHUNK = 512


@dataclass(frozen=True)
class ScoreTable:
    """Per-round scores (rounds x nodes) and their aggregation."""

    rounds: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    final: np.ndarray


def fuse_scores(ns_view1, ns_view2, nn_view1, nn_view2,
                view_balance: float, scale_balance: float):
    """Fuse per-branch, per-view score differences into one anomaly score.

    Views blend with ``view_balance`` (weight of view 1), then the
    node-subgraph branch blends against the node-node branch with
    ``scale_balance``.
    """
    ns = view_balance * np.asarray(ns_view1) + (1.0 - view_balance) * np.asarray(ns_view2)
    nn = view_balance * np.asarray(nn_view1) + (1.0 - view_balance) * np.asarray(nn_view2)
    fused = scale_balance * ns + (1.0 - scale_balance) * nn
    return float(fused) if np.ndim(fused) == 0 else fused


def _check_params(g: Graph, params: Parameters, hp: Hyperparams) -> None:
    if params.input_dim != g.num_features:
        raise ValueError(
            f"parameters expect {params.input_dim} feature dims, graph has "
            f"{g.num_features}"
        )
    if params.hidden_dim != hp.hidden_dim:
        raise ValueError(
            f"parameters have hidden dim {params.hidden_dim}, config says "
            f"{hp.hidden_dim}"
        )


def _view_branch_scores(view: Graph, params: Parameters, hp: Hyperparams,
                        neg: np.ndarray, rng: np.random.Generator):
    """Negative-minus-positive similarity per node for both branches."""
    n_nodes = view.num_nodes
    h = params.hidden_dim
    z = np.empty((n_nodes, h))
    e = np.empty((n_nodes, h))
    u = np.empty((n_nodes, h))
    q = np.empty((n_nodes, h))
    for start in range(0, n_nodes, _CHUNK):
        nodes = range(start, min(start + _CHUNK, n_nodes))
        samples = [rwr_subgraph(view, v, hp.subgraph_size, hp.restart_prob, rng)
                   for v in nodes]
        agg = np.stack([s.norm_adj @ s.features_masked for s in samples])
        x_self = np.stack([s.features_full[0] for s in samples])
        b, sub_n, d = agg.shape
        z[start:start + b] = relu(
            (agg.reshape(b * sub_n, d) @ params.w_ns).reshape(b, sub_n, h)
        ).mean(axis=1)
        e[start:start + b] = relu(x_self @ params.w_ns)
        u[start:start + b] = relu(agg[:, 0, :] @ params.w_nn)
        q[start:start + b] = relu(x_self @ params.w_nn)
    zb = z @ params.b_ns
    ns_diff = sigmoid(np.sum(zb[neg] * e, axis=1)) - sigmoid(np.sum(zb * e, axis=1))
    ub = u @ params.b_nn
    nn_diff = sigmoid(np.sum(ub * q[neg], axis=1)) - sigmoid(np.sum(ub * q, axis=1))
    return ns_diff, nn_diff


def score_round(g: Graph, params: Parameters, hp: Hyperparams,
                round_index: int, rng: np.random.Generator) -> np.ndarray:
    """One detection round: fresh view, samples, and negatives for all nodes."""
    _check_params(g, params, hp)
    if g.num_nodes < 2:
        raise ValueError("scoring needs at least 2 nodes for negative pairs")
    view2 = augment_graph(g, hp.augment_config(), rng)
    n = g.num_nodes
    neg = (np.arange(n) + rng.integers(1, n, size=n)) % n
    ns1, nn1 = _view_branch_scores(g, params, hp, neg, rng)
    ns2, nn2 = _view_branch_scores(view2, params, hp, neg, rng)
    scores = fuse_scores(ns1, ns2, nn1, nn2, hp.view_balance, hp.scale_balance)
    if not np.isfinite(scores).all():
        bad = int(np.flatnonzero(~np.isfinite(scores))[0])
        raise FloatingPointError(
            f"non-finite score for node {bad} in round {round_index}"
        )
    return scores


def round_rng(seed: int, round_index: int) -> np.random.Generator:
    """Independent stream per (seed, round); rounds can run in any order."""
    return np.random.default_rng(np.random.SeedSequence([seed, round_index]))


def aggregate_scores(rounds: np.ndarray) -> ScoreTable:
    """Aggregate an R x N per-round score matrix: final = mean + population std."""
    rounds = np.asarray(rounds, dtype=np.float64)
    if rounds.ndim != 2 or rounds.shape[0] < 1 or rounds.size == 0:
        raise ValueError(f"expected a non-empty R x N matrix, got shape {rounds.shape}")
    mean = rounds.mean(axis=0)
    std = np.sqrt(np.mean((rounds - mean) ** 2, axis=0))
    return ScoreTable(rounds=rounds, mean=mean, std=std, final=mean + std)


def score_all(g: Graph, params: Parameters, hp: Hyperparams,
              rounds: int | None = None, seed: int | None = None,
              threads: int | None = None) -> ScoreTable:
    """Run multi-round scoring and aggregate.

    Results are independent of ``threads``: every round derives its own
    generator from ``(seed, round_index)`` and rows land by round index.
    """
    n_rounds = hp.rounds if rounds is None else rounds
    if n_rounds < 1:
        raise ValueError(f"rounds must be >= 1, got {n_rounds}")
    base_seed = hp.seed if seed is None else seed
    matrix = np.empty((n_rounds, g.num_nodes))

    def run(r: int) -> None:
        matrix[r] = score_round(g, params, hp, r, round_rng(base_seed, r))

    workers = threads if threads is not None else (os.cpu_count() or 1)
    if workers <= 1 or n_rounds == 1:
        for r in range(n_rounds):
            run(r)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, range(n_rounds)))
    return aggregate_scores(matrix)


def write_scores_csv(table: ScoreTable, path, labels=None) -> None:
    """Scores CSV: ``node_id,score[,label]``, one row per node, full precision."""
    final = table.final
    with open(path, "w", encoding="utf-8") as fh:
        if labels is None:
            fh.write("node_id,score\n")
            for i, s in enumerate(final):
                fh.write(f"{i},{s:.17g}\n")
        else:
            fh.write("node_id,score,label\n")
            for i, (s, y) in enumerate(zip(final, labels)):
                fh.write(f"{i},{s:.17g},{int(y)}\n")


def read_scores_csv(path):
    """Read a scores CSV; returns ``(scores, labels-or-None)`` in node order."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if header[:2] != ["node_id", "score"]:
            raise ValueError(f"{path}: expected header node_id,score[,label]")
        has_labels = len(header) == 3 and header[2] == "label"
        ids, scores, labels = [], [], []
        for line in fh:
            parts = line.strip().split(",")
            ids.append(int(parts[0]))
            scores.append(float(parts[1]))
            if has_labels:
                labels.append(int(parts[2]))
    order = np.argsort(ids)
    scores = np.asarray(scores)[order]
    labels = np.asarray(labels)[order] if has_labels else None
    return scores, labels
