import numpy as np
import pytest

from graphcad import (
    Hyperparams,
    run_ablation,
    summarize_ablation,
    variant_hyperparams,
)
from graphcad.ablation import parse_variant, write_ablation_csv


class TestVariantMapping:
    def test_ns_only(self):
        hp = variant_hyperparams(Hyperparams(), "NS")
        assert hp.scale_balance == 1.0 and hp.ss_weight == 0.0

    def test_ns_ss(self):
        hp = variant_hyperparams(Hyperparams(ss_weight=0.1), "NS+SS")
        assert hp.scale_balance == 1.0 and hp.ss_weight == 0.1

    def test_ns_nn(self):
        hp = variant_hyperparams(Hyperparams(scale_balance=0.3), "NS+NN")
        assert hp.scale_balance == 0.3 and hp.ss_weight == 0.0

    def test_full(self):
        base = Hyperparams(scale_balance=0.3, ss_weight=0.1)
        assert variant_hyperparams(base, "NS+NN+SS") == base

    def test_unknown_rejected(self):
        with pytest.raises(ValueError, match="unknown contrast"):
            variant_hyperparams(Hyperparams(), "SS")


class TestParseVariant:
    def test_bare_contrast_uses_default_augmentation(self):
        assert parse_variant("NS+NN", "em") == ("NS+NN", "em")

    def test_explicit_augmentation(self):
        assert parse_variant("NS+NN+SS:gnf", "em") == ("NS+NN+SS", "gnf")

    def test_bad_augmentation(self):
        with pytest.raises(ValueError, match="augmentation"):
            parse_variant("NS:dropout", "em")


class TestRunAblation:
    def test_single_variant_single_seed(self, labeled_graph):
        hp = Hyperparams(epochs=1, batch_size=16, hidden_dim=8, rounds=2)
        rows = run_ablation(labeled_graph, hp, ["NS"], [0], threads=1)
        assert len(rows) == 1
        row = rows[0]
        assert row["variant"] == "NS" and row["augmentation"] == "em"
        assert row["seed"] == 0 and 0.0 <= row["auc"] <= 1.0

    def test_grid_and_summary(self, labeled_graph):
        hp = Hyperparams(epochs=1, batch_size=16, hidden_dim=8, rounds=2)
        rows = run_ablation(labeled_graph, hp, ["NS", "NS+NN:fm"], [0, 1], threads=1)
        assert len(rows) == 4
        summary = summarize_ablation(rows)
        assert set(summary) == {("NS", "em"), ("NS+NN", "fm")}
        for stats in summary.values():
            assert set(stats) == {"mean", "median"}

    def test_requires_labels(self, small_graph):
        hp = Hyperparams(epochs=1, batch_size=8, hidden_dim=4, rounds=1)
        with pytest.raises(ValueError, match="label"):
            run_ablation(small_graph, hp, ["NS"], [0])

    def test_csv_format(self, tmp_path):
        rows = [{"variant": "NS", "augmentation": "em", "seed": 3, "auc": 0.75}]
        path = tmp_path / "ablation.csv"
        write_ablation_csv(rows, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "variant,augmentation,seed,auc"
        assert lines[1] == "NS,em,3,0.75"
