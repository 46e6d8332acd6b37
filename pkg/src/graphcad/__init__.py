"""graphcad: contrastive anomaly detection on attributed graphs.

A small numpy library plus CLI covering the full pipeline: dataset I/O and
synthesis, anomaly injection, graph augmentation, random-walk subgraph
sampling, contrastive training of a bilinear scorer, multi-round anomaly
scoring, and AUC/ROC evaluation.
"""

from .ablation import run_ablation, summarize_ablation, variant_hyperparams
from .augment import (
    AugmentConfig,
    FeasibilityError,
    SubgraphSample,
    augment_graph,
    edge_modification,
    feature_mask,
    gaussian_noise_features,
    graph_diffusion,
    rwr_subgraph,
)
from .config import Hyperparams, load_hyperparams, save_hyperparams
from .detector import ContrastAnomalyDetector
from .graph import (
    AnomalyLabels,
    Graph,
    SchemaError,
    generate_synthetic,
    inject_anomalies,
    load_graph,
    normalize_adjacency,
    save_graph,
)
from .metrics import RocCurve, auc, roc_points
from .model import (
    ContrastBatch,
    ContrastBatchOutput,
    Gradients,
    Parameters,
    backward,
    bilinear_score,
    build_contrast_batch,
    contrast_forward,
    gcn_layer_forward,
    init_parameters,
    joint_loss,
    load_model,
    mlp_forward,
    nn_contrast_forward,
    ns_contrast_forward,
    readout_mean,
    save_model,
    ss_contrast_loss,
)
from .optim import AdamState, adam_step
from .score import (
    ScoreTable,
    aggregate_scores,
    fuse_scores,
    score_all,
    score_round,
)
from .train import EpochStats, make_batches, pair_negatives, train

__version__ = "0.1.0"

__all__ = [
    "AdamState",
    "AnomalyLabels",
    "AugmentConfig",
    "ContrastAnomalyDetector",
    "ContrastBatch",
    "ContrastBatchOutput",
    "EpochStats",
    "FeasibilityError",
    "Gradients",
    "Graph",
    "Hyperparams",
    "Parameters",
    "RocCurve",
    "SchemaError",
    "ScoreTable",
    "SubgraphSample",
    "adam_step",
    "aggregate_scores",
    "auc",
    "augment_graph",
    "backward",
    "bilinear_score",
    "build_contrast_batch",
    "contrast_forward",
    "edge_modification",
    "feature_mask",
    "fuse_scores",
    "gaussian_noise_features",
    "gcn_layer_forward",
    "generate_synthetic",
    "graph_diffusion",
    "init_parameters",
    "inject_anomalies",
    "joint_loss",
    "load_graph",
    "load_hyperparams",
    "load_model",
    "make_batches",
    "mlp_forward",
    "nn_contrast_forward",
    "normalize_adjacency",
    "ns_contrast_forward",
    "pair_negatives",
    "readout_mean",
    "roc_points",
    "run_ablation",
    "rwr_subgraph",
    "save_graph",
    "save_hyperparams",
    "save_model",
    "score_all",
    "score_round",
    "ss_contrast_loss",
    "summarize_ablation",
    "train",
    "variant_hyperparams",
]
