"""Numerical core of the contrastive scorer.

A deliberately small computation graph, all float64 numpy: one shared-weight
GCN layer + MLP per contrast branch, mean readout, bilinear scoring, three
contrast losses (node-subgraph, node-node, cross-view subgraph-subgraph),
and exact analytic gradients of the joint objective. No autodiff framework;
``backward`` implements reverse-mode differentiation of this fixed graph by
hand, which the test suite checks against central finite differences.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .graph import SchemaError

# Sigmoid outputs are clamped to [SCORE_CLIP, 1 - SCORE_CLIP] before logs;
# the clamp has zero gradient outside the open interval.
SCORE_CLIP = 1e-7

MODEL_FORMAT_VERSION = 1


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def sigmoid(t):
    """Numerically stable logistic function (branch form)."""
    t = np.asarray(t, dtype=np.float64)
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    expt = np.exp(t[~pos])
    out[~pos] = expt / (1.0 + expt)
    return out if out.ndim else float(out)


@dataclass
class Parameters:
    """Trainable matrices; one shared GCN/MLP weight and one bilinear matrix
    per contrast branch (``ns`` = node-subgraph, ``nn`` = node-node)."""

    w_ns: np.ndarray
    b_ns: np.ndarray
    w_nn: np.ndarray
    b_nn: np.ndarray

    FIELDS = ("w_ns", "b_ns", "w_nn", "b_nn")

    @property
    def input_dim(self) -> int:
        return self.w_ns.shape[0]

    @property
    def hidden_dim(self) -> int:
        return self.w_ns.shape[1]

    def arrays(self):
        return [getattr(self, name) for name in self.FIELDS]

    def copy(self) -> "Parameters":
        return type(self)(*(a.copy() for a in self.arrays()))

    def check_finite(self) -> None:
        for name in self.FIELDS:
            if not np.isfinite(getattr(self, name)).all():
                raise FloatingPointError(f"non-finite entries in {name}")


@dataclass
class Gradients(Parameters):
    """Same shapes as :class:`Parameters`, one gradient per matrix."""

    @classmethod
    def zeros(cls, input_dim: int, hidden_dim: int) -> "Gradients":
        return cls(
            np.zeros((input_dim, hidden_dim)),
            np.zeros((hidden_dim, hidden_dim)),
            np.zeros((input_dim, hidden_dim)),
            np.zeros((hidden_dim, hidden_dim)),
        )


def init_parameters(input_dim: int, hidden_dim: int, rng: np.random.Generator) -> Parameters:
    """Uniform fan-in initialization in [-1/sqrt(fan_in), 1/sqrt(fan_in)]."""
    if input_dim < 1 or hidden_dim < 1:
        raise ValueError("input_dim and hidden_dim must be >= 1")
    bw = 1.0 / np.sqrt(input_dim)
    bb = 1.0 / np.sqrt(hidden_dim)
    return Parameters(
        rng.uniform(-bw, bw, (input_dim, hidden_dim)),
        rng.uniform(-bb, bb, (hidden_dim, hidden_dim)),
        rng.uniform(-bw, bw, (input_dim, hidden_dim)),
        rng.uniform(-bb, bb, (hidden_dim, hidden_dim)),
    )


# ---------------------------------------------------------------------------
# Primitive forwards. The batched engine below inlines these for speed; the
# test suite asserts both paths agree.
# ---------------------------------------------------------------------------

def gcn_layer_forward(norm_adj: np.ndarray, h: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Single graph-convolution layer: ReLU(norm_adj @ h @ w)."""
    norm_adj = np.asarray(norm_adj, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if norm_adj.ndim != 2 or norm_adj.shape[0] != norm_adj.shape[1]:
        raise ValueError(f"norm_adj must be square, got {norm_adj.shape}")
    if h.shape[0] != norm_adj.shape[0] or h.shape[1] != w.shape[0]:
        raise ValueError(
            f"shape mismatch: norm_adj {norm_adj.shape}, h {h.shape}, w {w.shape}"
        )
    return relu(norm_adj @ h @ w)


def mlp_forward(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Single linear + ReLU transform sharing its weight with the GCN layer."""
    x = np.asarray(x, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if x.shape[-1] != w.shape[0]:
        raise ValueError(f"shape mismatch: x {x.shape}, w {w.shape}")
    return relu(x @ w)


def readout_mean(z_rows: np.ndarray) -> np.ndarray:
    """Mean over subgraph rows, masked target row included."""
    z_rows = np.asarray(z_rows, dtype=np.float64)
    if z_rows.ndim != 2 or z_rows.shape[0] < 1:
        raise ValueError(f"expected a non-empty 2-D row matrix, got shape {z_rows.shape}")
    return z_rows.mean(axis=0)


def bilinear_score(z: np.ndarray, e: np.ndarray, b: np.ndarray) -> float:
    """sigmoid(z @ b @ e^T) for two embedding vectors."""
    z = np.asarray(z, dtype=np.float64).reshape(-1)
    e = np.asarray(e, dtype=np.float64).reshape(-1)
    if b.shape != (len(z), len(e)):
        raise ValueError(f"shape mismatch: z {z.shape}, b {b.shape}, e {e.shape}")
    return float(sigmoid(z @ b @ e))


# ---------------------------------------------------------------------------
# Batched engine
# ---------------------------------------------------------------------------

@dataclass
class ContrastBatch:
    """Stacked per-view sample tensors for one training/scoring batch.

    ``aggs[v][b]`` is ``norm_adj @ features_masked`` of target ``b``'s
    sample in view ``v`` (shape ``(n, d)``), and ``x_self[v][b]`` the
    target's unmasked feature row in that view. ``neg[b]`` is the position
    inside the batch of the negative partner shared by all three contrasts.
    """

    aggs: tuple[np.ndarray, np.ndarray]
    x_self: tuple[np.ndarray, np.ndarray]
    neg: np.ndarray

    @property
    def batch_size(self) -> int:
        return self.aggs[0].shape[0]

    @property
    def subgraph_size(self) -> int:
        return self.aggs[0].shape[1]


def build_contrast_batch(view1_samples, view2_samples, neg_indices) -> ContrastBatch:
    """Assemble a :class:`ContrastBatch` from per-view sample lists."""
    if len(view1_samples) != len(view2_samples):
        raise ValueError("views must supply one sample per target each")
    aggs = []
    x_self = []
    for samples in (view1_samples, view2_samples):
        aggs.append(np.stack([s.norm_adj @ s.features_masked for s in samples]))
        x_self.append(np.stack([s.features_full[0] for s in samples]))
    neg = np.asarray(neg_indices, dtype=np.intp)
    size = len(view1_samples)
    if neg.shape != (size,):
        raise ValueError(f"neg_indices must have shape ({size},), got {neg.shape}")
    if ((neg < 0) | (neg >= size)).any():
        raise ValueError("neg_indices out of batch range")
    if (neg == np.arange(size)).any():
        raise ValueError("a target cannot be its own negative")
    return ContrastBatch((aggs[0], aggs[1]), (x_self[0], x_self[1]), neg)


@dataclass
class ContrastBatchOutput:
    """Forward results of one batch: sigmoid scores per view (rows: view 1,
    view 2), per-view BCE losses, the three contrast losses, and the
    subgraph embeddings consumed by the cross-view contrast."""

    ns_pos: np.ndarray
    ns_neg: np.ndarray
    nn_pos: np.ndarray
    nn_neg: np.ndarray
    ns_view_losses: tuple[float, float]
    nn_view_losses: tuple[float, float]
    loss_ns: float
    loss_nn: float
    loss_ss: float
    subgraph_embeddings: np.ndarray


def _check_unit_interval(name, value, closed=True):
    lo_ok = value >= 0.0 if closed else value > 0.0
    hi_ok = value <= 1.0 if closed else value < 1.0
    if not (lo_ok and hi_ok):
        bounds = "[0, 1]" if closed else "(0, 1)"
        raise ValueError(f"{name} must be in {bounds}, got {value}")


def _bce_loss_terms(pos_scores: np.ndarray, neg_scores: np.ndarray) -> float:
    sp = np.clip(pos_scores, SCORE_CLIP, 1.0 - SCORE_CLIP)
    sn = np.clip(neg_scores, SCORE_CLIP, 1.0 - SCORE_CLIP)
    return float(np.mean(-np.log(sp) - np.log(1.0 - sn)))


class _ViewState:
    """Per-view activations kept for the backward pass."""

    __slots__ = ("gcn_pre", "z", "e_pre", "e", "u_pre", "u", "q_pre", "q",
                 "t_ns_pos", "t_ns_neg", "t_nn_pos", "t_nn_neg")

    def __init__(self, agg, x_self, params: Parameters, neg: np.ndarray):
        batch, n, d = agg.shape
        gcn_pre = agg.reshape(batch * n, d) @ params.w_ns
        self.gcn_pre = gcn_pre.reshape(batch, n, -1)
        self.z = relu(self.gcn_pre).mean(axis=1)
        self.e_pre = x_self @ params.w_ns
        self.e = relu(self.e_pre)
        self.u_pre = agg[:, 0, :] @ params.w_nn
        self.u = relu(self.u_pre)
        self.q_pre = x_self @ params.w_nn
        self.q = relu(self.q_pre)
        zb = self.z @ params.b_ns
        self.t_ns_pos = np.sum(zb * self.e, axis=1)
        self.t_ns_neg = np.sum(zb[neg] * self.e, axis=1)
        ub = self.u @ params.b_nn
        self.t_nn_pos = np.sum(ub * self.q, axis=1)
        self.t_nn_neg = np.sum(ub * self.q[neg], axis=1)


def ss_contrast_loss(z1_own, z2_own, z1_neg, z2_neg, include_positive: bool = False) -> float:
    """Cross-view subgraph contrast loss, log-sum-exp stable.

    Per target: ``-(z1.z2) + log(exp(z1.z1') + exp(z1.z2'))`` where primes
    are the negative partner's subgraph embeddings. As printed in the loss
    definition, the positive term does not join the denominator unless
    ``include_positive`` is set.
    """
    z1_own = np.atleast_2d(np.asarray(z1_own, dtype=np.float64))
    z2_own = np.atleast_2d(np.asarray(z2_own, dtype=np.float64))
    z1_neg = np.atleast_2d(np.asarray(z1_neg, dtype=np.float64))
    z2_neg = np.atleast_2d(np.asarray(z2_neg, dtype=np.float64))
    for arrs in (z1_own, z2_own, z1_neg, z2_neg):
        bad = ~np.isfinite(arrs).all(axis=1)
        if bad.any():
            raise FloatingPointError(
                f"non-finite subgraph embedding for batch target {np.flatnonzero(bad)[0]}"
            )
    pos = np.sum(z1_own * z2_own, axis=1)
    neg1 = np.sum(z1_own * z1_neg, axis=1)
    neg2 = np.sum(z1_own * z2_neg, axis=1)
    if include_positive:
        stacked = np.stack([neg1, neg2, pos])
    else:
        stacked = np.stack([neg1, neg2])
    peak = stacked.max(axis=0)
    lse = peak + np.log(np.exp(stacked - peak).sum(axis=0))
    return float(np.mean(-pos + lse))


def ns_contrast_forward(batch: ContrastBatch, params: Parameters, view_balance: float):
    """Node-subgraph scores and view-weighted loss.

    Returns ``(pos_scores, neg_scores, loss, view_losses, subgraph_embeddings)``
    where score arrays have shape ``(2, B)`` (row per view) and
    ``subgraph_embeddings`` has shape ``(2, B, hidden)``.
    """
    _check_unit_interval("view_balance", view_balance)
    pos, neg, z, losses = [], [], [], []
    for v in range(2):
        state = _ViewState(batch.aggs[v], batch.x_self[v], params, batch.neg)
        pos.append(sigmoid(state.t_ns_pos))
        neg.append(sigmoid(state.t_ns_neg))
        z.append(state.z)
        losses.append(_bce_loss_terms(pos[-1], neg[-1]))
    loss = view_balance * losses[0] + (1.0 - view_balance) * losses[1]
    return np.stack(pos), np.stack(neg), loss, (losses[0], losses[1]), np.stack(z)


def nn_contrast_forward(batch: ContrastBatch, params: Parameters, view_balance: float):
    """Node-node scores and view-weighted loss; same layout as the NS twin."""
    _check_unit_interval("view_balance", view_balance)
    pos, neg, losses = [], [], []
    for v in range(2):
        state = _ViewState(batch.aggs[v], batch.x_self[v], params, batch.neg)
        pos.append(sigmoid(state.t_nn_pos))
        neg.append(sigmoid(state.t_nn_neg))
        losses.append(_bce_loss_terms(pos[-1], neg[-1]))
    loss = view_balance * losses[0] + (1.0 - view_balance) * losses[1]
    return np.stack(pos), np.stack(neg), loss, (losses[0], losses[1])


def joint_loss(l_ns: float, l_nn: float, l_ss: float,
               scale_balance: float, ss_weight: float) -> float:
    """Blend the three contrast losses into the training objective."""
    _check_unit_interval("scale_balance", scale_balance)
    _check_unit_interval("ss_weight", ss_weight)
    return scale_balance * l_ns + (1.0 - scale_balance) * l_nn + ss_weight * l_ss


def contrast_forward(batch: ContrastBatch, params: Parameters, view_balance: float,
                     ss_include_positive: bool = False) -> ContrastBatchOutput:
    """Full forward pass over a batch (both branches plus the SS loss)."""
    _check_unit_interval("view_balance", view_balance)
    states = [_ViewState(batch.aggs[v], batch.x_self[v], params, batch.neg)
              for v in range(2)]
    ns_pos = np.stack([sigmoid(s.t_ns_pos) for s in states])
    ns_neg = np.stack([sigmoid(s.t_ns_neg) for s in states])
    nn_pos = np.stack([sigmoid(s.t_nn_pos) for s in states])
    nn_neg = np.stack([sigmoid(s.t_nn_neg) for s in states])
    ns_losses = tuple(_bce_loss_terms(ns_pos[v], ns_neg[v]) for v in range(2))
    nn_losses = tuple(_bce_loss_terms(nn_pos[v], nn_neg[v]) for v in range(2))
    z = np.stack([s.z for s in states])
    loss_ss = ss_contrast_loss(z[0], z[1], z[0][batch.neg], z[1][batch.neg],
                               include_positive=ss_include_positive)
    return ContrastBatchOutput(
        ns_pos=ns_pos, ns_neg=ns_neg, nn_pos=nn_pos, nn_neg=nn_neg,
        ns_view_losses=ns_losses, nn_view_losses=nn_losses,
        loss_ns=view_balance * ns_losses[0] + (1.0 - view_balance) * ns_losses[1],
        loss_nn=view_balance * nn_losses[0] + (1.0 - view_balance) * nn_losses[1],
        loss_ss=loss_ss,
        subgraph_embeddings=z,
    )


def _bce_score_grads(t_scores: np.ndarray, positive: bool, weight: float) -> tuple[np.ndarray, np.ndarray]:
    """d(weighted mean BCE)/dt for one score vector; returns (scores, grads).

    The clamp contributes zero gradient at and beyond its boundaries.
    """
    s = sigmoid(t_scores)
    active = (s > SCORE_CLIP) & (s < 1.0 - SCORE_CLIP)
    per = weight / len(t_scores)
    grad = np.where(active, (s - 1.0) if positive else s, 0.0) * per
    return s, grad


def backward(batch: ContrastBatch, params: Parameters, view_balance: float,
             scale_balance: float, ss_weight: float,
             ss_include_positive: bool = False) -> tuple[ContrastBatchOutput, Gradients]:
    """Forward pass plus exact analytic gradients of the joint loss.

    Weight sharing is honored: both the GCN and MLP paths of a branch
    accumulate into the same weight gradient, and the SS loss backpropagates
    through the NS-branch subgraph embeddings.
    """
    _check_unit_interval("view_balance", view_balance)
    _check_unit_interval("scale_balance", scale_balance)
    _check_unit_interval("ss_weight", ss_weight)
    b = batch.batch_size
    n = batch.subgraph_size
    neg = batch.neg
    grads = Gradients.zeros(params.input_dim, params.hidden_dim)

    states = [_ViewState(batch.aggs[v], batch.x_self[v], params, neg) for v in range(2)]
    dz = [np.zeros_like(states[0].z) for _ in range(2)]

    ns_pos_s, ns_neg_s, nn_pos_s, nn_neg_s = [], [], [], []
    ns_losses, nn_losses = [], []
    for v, state in enumerate(states):
        wv = view_balance if v == 0 else 1.0 - view_balance

        sp, g_tp = _bce_score_grads(state.t_ns_pos, True, scale_balance * wv)
        sn, g_tn = _bce_score_grads(state.t_ns_neg, False, scale_balance * wv)
        ns_pos_s.append(sp)
        ns_neg_s.append(sn)
        ns_losses.append(_bce_loss_terms(sp, sn))
        de = np.zeros_like(state.e)
        # t = z . b_ns . e : pos pairs (z_i, e_i), neg pairs (z_j, e_i)
        dz[v] += g_tp[:, None] * (state.e @ params.b_ns.T)
        np.add.at(dz[v], neg, g_tn[:, None] * (state.e @ params.b_ns.T))
        de += g_tp[:, None] * (state.z @ params.b_ns)
        de += g_tn[:, None] * (state.z[neg] @ params.b_ns)
        grads.b_ns += state.z.T @ (g_tp[:, None] * state.e)
        grads.b_ns += state.z[neg].T @ (g_tn[:, None] * state.e)
        de_pre = de * (state.e_pre > 0)
        grads.w_ns += batch.x_self[v].T @ de_pre

        sp, g_tp = _bce_score_grads(state.t_nn_pos, True, (1.0 - scale_balance) * wv)
        sn, g_tn = _bce_score_grads(state.t_nn_neg, False, (1.0 - scale_balance) * wv)
        nn_pos_s.append(sp)
        nn_neg_s.append(sn)
        nn_losses.append(_bce_loss_terms(sp, sn))
        du = np.zeros_like(state.u)
        dq = np.zeros_like(state.q)
        # t = u . b_nn . q : pos pairs (u_i, q_i), neg pairs (u_i, q_j)
        du += g_tp[:, None] * (state.q @ params.b_nn.T)
        du += g_tn[:, None] * (state.q[neg] @ params.b_nn.T)
        dq += g_tp[:, None] * (state.u @ params.b_nn)
        np.add.at(dq, neg, g_tn[:, None] * (state.u @ params.b_nn))
        grads.b_nn += state.u.T @ (g_tp[:, None] * state.q)
        grads.b_nn += state.u.T @ (g_tn[:, None] * state.q[neg])
        du_pre = du * (state.u_pre > 0)
        grads.w_nn += batch.aggs[v][:, 0, :].T @ du_pre
        dq_pre = dq * (state.q_pre > 0)
        grads.w_nn += batch.x_self[v].T @ dq_pre

    # Cross-view subgraph contrast on the NS-branch embeddings.
    z1, z2 = states[0].z, states[1].z
    pos = np.sum(z1 * z2, axis=1)
    neg1 = np.sum(z1 * z1[neg], axis=1)
    neg2 = np.sum(z1 * z2[neg], axis=1)
    stacked = np.stack([neg1, neg2, pos]) if ss_include_positive else np.stack([neg1, neg2])
    peak = stacked.max(axis=0)
    expd = np.exp(stacked - peak)
    lse = peak + np.log(expd.sum(axis=0))
    softmax = expd / expd.sum(axis=0)
    loss_ss = float(np.mean(-pos + lse))
    w_ss = ss_weight / b
    d_pos = w_ss * (softmax[2] - 1.0) if ss_include_positive else np.full(b, -w_ss)
    d_neg1 = w_ss * softmax[0]
    d_neg2 = w_ss * softmax[1]
    dz[0] += d_pos[:, None] * z2 + d_neg1[:, None] * z1[neg] + d_neg2[:, None] * z2[neg]
    dz[1] += d_pos[:, None] * z1
    np.add.at(dz[0], neg, d_neg1[:, None] * z1)
    np.add.at(dz[1], neg, d_neg2[:, None] * z1)

    for v, state in enumerate(states):
        # mean readout spreads dz evenly over the n subgraph rows
        d_gcn_pre = (dz[v][:, None, :] / n) * (state.gcn_pre > 0)
        d = params.input_dim
        h = params.hidden_dim
        grads.w_ns += batch.aggs[v].reshape(b * n, d).T @ d_gcn_pre.reshape(b * n, h)

    out = ContrastBatchOutput(
        ns_pos=np.stack(ns_pos_s), ns_neg=np.stack(ns_neg_s),
        nn_pos=np.stack(nn_pos_s), nn_neg=np.stack(nn_neg_s),
        ns_view_losses=(ns_losses[0], ns_losses[1]),
        nn_view_losses=(nn_losses[0], nn_losses[1]),
        loss_ns=view_balance * ns_losses[0] + (1.0 - view_balance) * ns_losses[1],
        loss_nn=view_balance * nn_losses[0] + (1.0 - view_balance) * nn_losses[1],
        loss_ss=loss_ss,
        subgraph_embeddings=np.stack([z1, z2]),
    )
    return out, grads


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _matrix_json(mat: np.ndarray) -> str:
    rows = (",".join(_fmt(x) for x in row) for row in mat)
    return "[" + ",".join(f"[{row}]" for row in rows) + "]"


def save_model(params: Parameters, path, hyperparams: dict | None = None) -> None:
    """Write the versioned model document (floats at 17 significant digits).

    ``hyperparams`` is an optional settings object stored alongside the
    weights so scoring can reuse the training-time configuration.
    """
    params.check_finite()
    parts = [
        f'"version":{MODEL_FORMAT_VERSION}',
        f'"d":{params.input_dim}',
        f'"d_prime":{params.hidden_dim}',
        f'"W_ns":{_matrix_json(params.w_ns)}',
        f'"B_ns":{_matrix_json(params.b_ns)}',
        f'"W_nn":{_matrix_json(params.w_nn)}',
        f'"B_nn":{_matrix_json(params.b_nn)}',
    ]
    if hyperparams is not None:
        parts.append(f'"hyperparams":{json.dumps(hyperparams, sort_keys=True)}')
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("{" + ",".join(parts) + "}\n")


def load_model(path) -> tuple[Parameters, dict | None]:
    """Read a model document; returns the parameters and any stored settings."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise SchemaError(f"{path}: line {e.lineno} col {e.colno}: {e.msg}") from e
    if not isinstance(doc, dict) or doc.get("version") != MODEL_FORMAT_VERSION:
        raise SchemaError(f"{path}: expected model document version {MODEL_FORMAT_VERSION}")
    for key in ("d", "d_prime", "W_ns", "B_ns", "W_nn", "B_nn"):
        if key not in doc:
            raise SchemaError(f"{path}: missing required field {key!r}")
    d, h = doc["d"], doc["d_prime"]
    shapes = {"W_ns": (d, h), "B_ns": (h, h), "W_nn": (d, h), "B_nn": (h, h)}
    mats = {}
    for key, shape in shapes.items():
        arr = np.asarray(doc[key], dtype=np.float64)
        if arr.shape != shape:
            raise SchemaError(f"{path}: field {key!r} must have shape {shape}, got {arr.shape}")
        mats[key] = arr
    params = Parameters(mats["W_ns"], mats["B_ns"], mats["W_nn"], mats["B_nn"])
    hp = doc.get("hyperparams")
    return params, hp
