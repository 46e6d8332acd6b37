"""scikit-learn style estimator wrapping the train/score pipeline."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .config import Hyperparams
from .graph import Graph
from .score import score_all
from .train import train


class ContrastAnomalyDetector(BaseEstimator):
    """Node anomaly detector via multi-view, multi-scale contrastive learning.

    ``fit`` trains the contrastive scorer on an attributed graph (no labels
    needed); ``decision_function`` returns one anomaly score per node,
    higher meaning more anomalous. The estimator follows scikit-learn
    conventions (``get_params`` / ``set_params`` / ``clone``), so it can sit
    inside standard tooling even though its input is a :class:`~graphcad.Graph`
    rather than a feature matrix.

    Parameters mirror :class:`~graphcad.Hyperparams`; see its docs for
    meanings and defaults. ``threads`` only parallelizes scoring rounds and
    never changes results.

    Examples
    --------
    >>> import numpy as np
    >>> from graphcad import ContrastAnomalyDetector, generate_synthetic
    >>> g = generate_synthetic(60, 8, 3, 0.2, 0.02, np.random.default_rng(0))
    >>> det = ContrastAnomalyDetector(epochs=3, rounds=4, batch_size=16)
    >>> scores = det.fit(g).decision_function(g)
    >>> scores.shape
    (60,)
    """

    def __init__(self, subgraph_size=4, hidden_dim=64, epochs=400,
                 batch_size=300, rounds=256, edge_mod_ratio=0.2,
                 view_balance=0.5, scale_balance=0.5, ss_weight=0.1,
                 lr=1e-3, restart_prob=0.15, augmentation="em",
                 noise_sigma=None, mask_ratio=0.2, teleport=0.15, top_k=None,
                 seed=0, refresh_view_each_epoch=True,
                 ss_include_positive=False, threads=None):
        self.subgraph_size = subgraph_size
        self.hidden_dim = hidden_dim
        self.epochs = epochs
        self.batch_size = batch_size
        self.rounds = rounds
        self.edge_mod_ratio = edge_mod_ratio
        self.view_balance = view_balance
        self.scale_balance = scale_balance
        self.ss_weight = ss_weight
        self.lr = lr
        self.restart_prob = restart_prob
        self.augmentation = augmentation
        self.noise_sigma = noise_sigma
        self.mask_ratio = mask_ratio
        self.teleport = teleport
        self.top_k = top_k
        self.seed = seed
        self.refresh_view_each_epoch = refresh_view_each_epoch
        self.ss_include_positive = ss_include_positive
        self.threads = threads

    def _hyperparams(self) -> Hyperparams:
        keys = Hyperparams.__dataclass_fields__
        return Hyperparams(**{k: getattr(self, k) for k in keys})

    @staticmethod
    def _check_graph(graph) -> Graph:
        if not isinstance(graph, Graph):
            raise TypeError(
                f"expected a graphcad.Graph, got {type(graph).__name__}; "
                "use load_graph() or generate_synthetic() to build one"
            )
        return graph

    def fit(self, graph: Graph, y=None) -> "ContrastAnomalyDetector":
        """Train the scorer; ``y`` is ignored (unsupervised)."""
        graph = self._check_graph(graph)
        hp = self._hyperparams()
        self.params_, self.loss_history_ = train(graph, hp)
        self.n_features_in_ = graph.num_features
        return self

    def decision_function(self, graph: Graph) -> np.ndarray:
        """Multi-round anomaly scores; higher = more anomalous."""
        graph = self._check_graph(graph)
        if not hasattr(self, "params_"):
            raise NotFittedError(
                "this ContrastAnomalyDetector is not fitted yet; call fit() first"
            )
        table = score_all(graph, self.params_, self._hyperparams(),
                          threads=self.threads)
        return table.final

    def fit_predict_scores(self, graph: Graph) -> np.ndarray:
        """Convenience: fit on the graph, then score it."""
        return self.fit(graph).decision_function(graph)
