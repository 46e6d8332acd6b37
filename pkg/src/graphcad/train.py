"""Training loop: per-epoch view building, sampling, batching, optimization.

Each epoch rebuilds the augmented view (configurable), partitions the nodes
into random batches, samples one subgraph per node per view, pairs every
node with a random negative partner shared across all three contrasts, and
takes one optimizer step per batch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .augment import augment_graph, rwr_subgraph
from .config import Hyperparams
from .graph import Graph
from .model import (
    Parameters,
    backward,
    build_contrast_batch,
    init_parameters,
    joint_loss,
)
from .optim import AdamState, adam_step


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    loss_ns: float
    loss_nn: float
    loss_ss: float
    loss_joint: float


def make_batches(n: int, batch_size: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Random permutation of ``0..n-1`` chunked into batches.

    The last batch may be smaller, but a would-be singleton is merged into
    the previous batch so negative pairing always has a partner.
    """
    if n < 2:
        raise ValueError(f"need at least 2 nodes to form batches, got {n}")
    if batch_size < 2:
        raise ValueError(f"batch_size must be >= 2, got {batch_size}")
    perm = rng.permutation(n)
    batches = [perm[i:i + batch_size] for i in range(0, n, batch_size)]
    if len(batches) > 1 and len(batches[-1]) == 1:
        tail = batches.pop()
        batches[-1] = np.concatenate([batches[-1], tail])
    return batches


def pair_negatives(batch, rng: np.random.Generator) -> np.ndarray:
    """Uniform negative partner for each batch position.

    Returns positions ``j`` such that ``batch[k]`` is paired with
    ``batch[j[k]]``; ``j[k] != k`` always, and the partner is uniform over
    the rest of the batch. The same partner serves the node-subgraph,
    node-node, and both subgraph-subgraph negatives of a target.
    """
    b = len(batch)
    if b < 2:
        raise ValueError("negative pairing needs a batch of at least 2 nodes")
    offsets = rng.integers(1, b, size=b)
    return (np.arange(b) + offsets) % b


def sample_views(view1: Graph, view2: Graph, nodes, subgraph_size: int,
                 restart_prob: float, rng: np.random.Generator):
    """One RWR sample per node per view, drawn in node order, view 1 first."""
    samples1 = [rwr_subgraph(view1, int(v), subgraph_size, restart_prob, rng)
                for v in nodes]
    samples2 = [rwr_subgraph(view2, int(v), subgraph_size, restart_prob, rng)
                for v in nodes]
    return samples1, samples2


def train(g: Graph, hp: Hyperparams) -> tuple[Parameters, list[EpochStats]]:
    """Run the full contrastive training procedure.

    Returns the trained parameters and the per-epoch mean losses.
    Deterministic for a fixed ``hp.seed``.
    """
    if g.num_features < 1:
        raise ValueError("training needs at least one feature dimension")
    if g.num_nodes < 2:
        raise ValueError("training needs at least 2 nodes")
    rng = np.random.default_rng(hp.seed)
    params = init_parameters(g.num_features, hp.hidden_dim, rng)
    state = AdamState.for_parameters(params)
    aug_cfg = hp.augment_config()

    history: list[EpochStats] = []
    view2 = None
    for epoch in range(hp.epochs):
        if view2 is None or hp.refresh_view_each_epoch:
            view2 = augment_graph(g, aug_cfg, rng)
        batches = make_batches(g.num_nodes, hp.batch_size, rng)
        sums = np.zeros(4)
        for batch_idx, batch in enumerate(batches):
            neg = pair_negatives(batch, rng)
            samples1, samples2 = sample_views(
                g, view2, batch, hp.subgraph_size, hp.restart_prob, rng)
            cb = build_contrast_batch(samples1, samples2, neg)
            out, grads = backward(
                cb, params,
                view_balance=hp.view_balance,
                scale_balance=hp.scale_balance,
                ss_weight=hp.ss_weight,
                ss_include_positive=hp.ss_include_positive,
            )
            total = joint_loss(out.loss_ns, out.loss_nn, out.loss_ss,
                               hp.scale_balance, hp.ss_weight)
            if not np.isfinite(total):
                raise FloatingPointError(
                    f"non-finite loss at epoch {epoch}, batch {batch_idx}: "
                    f"ns={out.loss_ns}, nn={out.loss_nn}, ss={out.loss_ss}"
                )
            adam_step(params, grads, state, lr=hp.lr)
            weight = len(batch)
            sums += weight * np.array([out.loss_ns, out.loss_nn, out.loss_ss, total])
        means = sums / g.num_nodes
        history.append(EpochStats(epoch, *(float(x) for x in means)))
    return params, history


def write_training_log(history, path) -> None:
    """CSV log with one row per epoch: epoch, l_ns, l_nn, l_ss, joint."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("epoch,l_ns,l_nn,l_ss,joint\n")
        for rec in history:
            fh.write(f"{rec.epoch},{rec.loss_ns:.17g},{rec.loss_nn:.17g},"
                     f"{rec.loss_ss:.17g},{rec.loss_joint:.17g}\n")
