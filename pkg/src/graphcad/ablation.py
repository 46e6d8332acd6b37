"""Contrast-scale and augmentation ablations over (variant, seed) grids."""

from __future__ import annotations

from statistics import median

from .config import Hyperparams
from .graph import Graph
from .metrics import auc
from .score import score_all
from .train import train

CONTRAST_VARIANTS = ("NS", "NS+SS", "NS+NN", "NS+NN+SS")
AUGMENTATIONS = ("em", "gnf", "fm", "gd")


def variant_hyperparams(hp: Hyperparams, contrast: str) -> Hyperparams:
    """Map a contrast-scale variant onto loss/score weights.

    ``NS`` keeps only the node-subgraph branch (node-node branch gets zero
    loss weight, hence stays untrained, and drops out of score fusion);
    ``NS+SS`` adds the cross-view subgraph loss; ``NS+NN`` drops it;
    ``NS+NN+SS`` is the full model.
    """
    if contrast == "NS":
        return hp.replace(scale_balance=1.0, ss_weight=0.0)
    if contrast == "NS+SS":
        return hp.replace(scale_balance=1.0)
    if contrast == "NS+NN":
        return hp.replace(ss_weight=0.0)
    if contrast == "NS+NN+SS":
        return hp
    raise ValueError(
        f"unknown contrast variant {contrast!r}; expected one of {CONTRAST_VARIANTS}"
    )


def parse_variant(spec: str, default_augmentation: str) -> tuple[str, str]:
    """Parse ``"NS+NN"`` or ``"NS+NN:gnf"`` into (contrast, augmentation)."""
    contrast, sep, aug = spec.partition(":")
    contrast = contrast.strip().upper()
    aug = aug.strip().lower() if sep else default_augmentation
    if contrast not in CONTRAST_VARIANTS:
        raise ValueError(
            f"unknown contrast variant {contrast!r}; expected one of {CONTRAST_VARIANTS}"
        )
    if aug not in AUGMENTATIONS:
        raise ValueError(f"unknown augmentation {aug!r}; expected one of {AUGMENTATIONS}")
    return contrast, aug


def run_ablation(g: Graph, hp: Hyperparams, variants, seeds,
                 threads: int | None = None) -> list[dict]:
    """Train, score, and evaluate each (variant, seed) combination.

    ``variants`` entries are either ``"CONTRAST"`` strings (augmentation
    taken from ``hp``) or ``"CONTRAST:AUG"``. The graph must carry labels.
    Returns one row dict per run: variant, augmentation, seed, auc.
    """
    if g.labels is None:
        raise ValueError("ablation needs a labeled graph")
    resolved = [
        parse_variant(v, hp.augmentation) if isinstance(v, str) else (v[0], v[1])
        for v in variants
    ]
    rows = []
    for contrast, aug in resolved:
        for seed in seeds:
            run_hp = variant_hyperparams(hp, contrast).replace(
                seed=int(seed), augmentation=aug)
            params, _ = train(g, run_hp)
            table = score_all(g, params, run_hp, threads=threads)
            rows.append({
                "variant": contrast,
                "augmentation": aug,
                "seed": int(seed),
                "auc": auc(table.final, g.labels),
            })
    return rows


def summarize_ablation(rows) -> dict[tuple[str, str], dict[str, float]]:
    """Mean and median AUC per (variant, augmentation)."""
    grouped: dict[tuple[str, str], list[float]] = {}
    for row in rows:
        grouped.setdefault((row["variant"], row["augmentation"]), []).append(row["auc"])
    return {
        key: {"mean": sum(vals) / len(vals), "median": median(vals)}
        for key, vals in grouped.items()
    }


def write_ablation_csv(rows, path) -> None:
    """Ablation CSV: ``variant,augmentation,seed,auc`` rows."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("variant,augmentation,seed,auc\n")
        for row in rows:
            fh.write(f"{row['variant']},{row['augmentation']},"
                     f"{row['seed']},{row['auc']:.17g}\n")
