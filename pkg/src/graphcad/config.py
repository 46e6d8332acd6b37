"""Pipeline hyperparameters and their JSON config round trip."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, replace

from .augment import AugmentConfig
from .graph import SchemaError


@dataclass(frozen=True)
class Hyperparams:
    """Every knob of the pipeline, with library-wide defaults.

    ``view_balance`` weighs the original view against the augmented view in
    losses and scores; ``scale_balance`` weighs the node-subgraph branch
    against the node-node branch; ``ss_weight`` scales the cross-view
    subgraph contrast loss. ``edge_mod_ratio`` is the fraction of edges
    rewired when building the second view.
    """

    subgraph_size: int = 4
    hidden_dim: int = 64
    epochs: int = 400
    batch_size: int = 300
    rounds: int = 256
    edge_mod_ratio: float = 0.2
    view_balance: float = 0.5
    scale_balance: float = 0.5
    ss_weight: float = 0.1
    lr: float = 1e-3
    restart_prob: float = 0.15
    augmentation: str = "em"
    noise_sigma: float | None = None
    mask_ratio: float = 0.2
    teleport: float = 0.15
    top_k: int | None = None
    seed: int = 0
    refresh_view_each_epoch: bool = True
    ss_include_positive: bool = False

    def __post_init__(self):
        for name, lo in (("subgraph_size", 1), ("hidden_dim", 1), ("epochs", 0),
                         ("batch_size", 2), ("rounds", 1)):
            val = getattr(self, name)
            if not isinstance(val, int) or val < lo:
                raise ValueError(f"{name} must be an int >= {lo}, got {val!r}")
        for name in ("view_balance", "scale_balance", "ss_weight", "edge_mod_ratio"):
            val = getattr(self, name)
            if not 0.0 <= val <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {val}")
        if not 0.0 < self.restart_prob < 1.0:
            raise ValueError(f"restart_prob must be in (0, 1), got {self.restart_prob}")
        if self.lr <= 0:
            raise ValueError(f"lr must be > 0, got {self.lr}")
        # delegates validation of the augmentation fields
        self.augment_config()

    def augment_config(self) -> AugmentConfig:
        return AugmentConfig(
            method=self.augmentation,
            edge_mod_ratio=self.edge_mod_ratio,
            noise_sigma=self.noise_sigma,
            mask_ratio=self.mask_ratio,
            teleport=self.teleport,
            top_k=self.top_k,
        )

    def to_dict(self) -> dict:
        return asdict(self)

    def replace(self, **changes) -> "Hyperparams":
        return replace(self, **changes)

    @classmethod
    def from_dict(cls, doc: dict, source: str = "<config>") -> "Hyperparams":
        unknown = set(doc) - set(cls.__dataclass_fields__)
        if unknown:
            raise SchemaError(f"{source}: unknown hyperparameter keys {sorted(unknown)}")
        try:
            return cls(**doc)
        except (TypeError, ValueError) as e:
            raise SchemaError(f"{source}: {e}") from e


def load_hyperparams(path) -> Hyperparams:
    """Read a JSON config holding any subset of the Hyperparams keys."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise SchemaError(f"{path}: line {e.lineno} col {e.colno}: {e.msg}") from e
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: config must be a JSON object")
    return Hyperparams.from_dict(doc, source=str(path))


def save_hyperparams(hp: Hyperparams, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(hp.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
