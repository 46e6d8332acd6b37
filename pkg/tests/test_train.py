import numpy as np
import pytest

from graphcad import (
    Hyperparams,
    Parameters,
    build_contrast_batch,
    contrast_forward,
    generate_synthetic,
    init_parameters,
    make_batches,
    pair_negatives,
    rwr_subgraph,
    train,
)
from graphcad.train import write_training_log


class TestMakeBatches:
    def test_chunking(self, rng):
        sizes = [len(b) for b in make_batches(10, 4, rng)]
        assert sizes == [4, 4, 2]

    def test_singleton_merged(self, rng):
        sizes = [len(b) for b in make_batches(9, 4, rng)]
        assert sizes == [4, 5]

    def test_partition(self, rng):
        batches = make_batches(23, 5, rng)
        flat = np.concatenate(batches)
        assert sorted(flat.tolist()) == list(range(23))

    def test_errors(self, rng):
        with pytest.raises(ValueError):
            make_batches(1, 4, rng)
        with pytest.raises(ValueError):
            make_batches(10, 1, rng)


class TestPairNegatives:
    def test_two_nodes_forced(self, rng):
        assert pair_negatives([10, 20], rng).tolist() == [1, 0]

    def test_never_self(self, rng):
        for _ in range(50):
            pairs = pair_negatives(np.arange(7), rng)
            assert (pairs != np.arange(7)).all()

    def test_uniform_over_others(self):
        # chi-square style sanity: each of the 4 partners of position 0
        # should appear ~25000 times over 1e5 draws (3 sigma ~ 411)
        rng = np.random.default_rng(0)
        counts = np.zeros(5)
        draws = 100_000
        for _ in range(draws):
            counts[pair_negatives(np.arange(5), rng)[0]] += 1
        expected = draws / 4
        sigma = np.sqrt(draws * 0.25 * 0.75)
        assert counts[0] == 0
        assert (np.abs(counts[1:] - expected) < 3 * sigma).all()

    def test_singleton_rejected(self, rng):
        with pytest.raises(ValueError):
            pair_negatives([3], rng)


class TestTrain:
    def test_zero_epochs_returns_initialized(self, labeled_graph):
        hp = Hyperparams(epochs=0, batch_size=16, hidden_dim=8)
        params, history = train(labeled_graph, hp)
        assert history == []
        expected = init_parameters(labeled_graph.num_features, 8,
                                   np.random.default_rng(hp.seed))
        for name in Parameters.FIELDS:
            assert np.array_equal(getattr(params, name), getattr(expected, name))

    def test_deterministic(self, labeled_graph):
        hp = Hyperparams(epochs=3, batch_size=16, hidden_dim=8, seed=5)
        p1, h1 = train(labeled_graph, hp)
        p2, h2 = train(labeled_graph, hp)
        for name in Parameters.FIELDS:
            assert np.array_equal(getattr(p1, name), getattr(p2, name))
        assert h1 == h2

    def test_history_finite_and_indexed(self, labeled_graph):
        hp = Hyperparams(epochs=4, batch_size=16, hidden_dim=8)
        _, history = train(labeled_graph, hp)
        assert [rec.epoch for rec in history] == [0, 1, 2, 3]
        for rec in history:
            assert np.isfinite([rec.loss_ns, rec.loss_nn, rec.loss_ss,
                                rec.loss_joint]).all()

    def test_loss_decreases_on_synthetic_graph(self):
        # optimization sanity: median joint loss at the last epoch strictly
        # below the first, over 3 seeds
        g = generate_synthetic(200, 16, 4, 0.1, 0.01, np.random.default_rng(0))
        firsts, lasts = [], []
        for seed in (0, 1, 2):
            hp = Hyperparams(epochs=50, batch_size=64, hidden_dim=32, seed=seed)
            _, history = train(g, hp)
            firsts.append(history[0].loss_joint)
            lasts.append(history[-1].loss_joint)
        assert np.median(lasts) < np.median(firsts)

    def test_fixed_view_flag(self, labeled_graph):
        hp = Hyperparams(epochs=2, batch_size=16, hidden_dim=8,
                         refresh_view_each_epoch=False)
        params, history = train(labeled_graph, hp)
        assert len(history) == 2

    def test_degenerate_single_view(self, labeled_graph):
        # with identical samples in both views, the two per-view NS losses
        # coincide exactly
        rng = np.random.default_rng(0)
        nodes = np.arange(8)
        samples = [rwr_subgraph(labeled_graph, int(v), 4, 0.15, rng) for v in nodes]
        neg = pair_negatives(nodes, rng)
        cb = build_contrast_batch(samples, samples, neg)
        params = init_parameters(labeled_graph.num_features, 8, rng)
        out = contrast_forward(cb, params, view_balance=1.0)
        assert out.ns_view_losses[0] == out.ns_view_losses[1]
        assert out.nn_view_losses[0] == out.nn_view_losses[1]

    def test_rejects_featureless_graph(self):
        from graphcad import Graph
        g = Graph(4, [[0, 1]], np.zeros((4, 0)))
        with pytest.raises(ValueError, match="feature"):
            train(g, Hyperparams(epochs=1))

    def test_training_log_format(self, tmp_path, labeled_graph):
        hp = Hyperparams(epochs=2, batch_size=16, hidden_dim=8)
        _, history = train(labeled_graph, hp)
        path = tmp_path / "log.csv"
        write_training_log(history, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "epoch,l_ns,l_nn,l_ss,joint"
        assert len(lines) == 3
        assert lines[1].startswith("0,")


class TestHyperparams:
    def test_defaults_match_documented_values(self):
        hp = Hyperparams()
        assert (hp.subgraph_size, hp.hidden_dim, hp.epochs, hp.rounds) == (4, 64, 400, 256)
        assert (hp.edge_mod_ratio, hp.ss_weight) == (0.2, 0.1)
        assert (hp.view_balance, hp.scale_balance) == (0.5, 0.5)
        assert hp.batch_size == 300

    def test_validation(self):
        with pytest.raises(ValueError):
            Hyperparams(view_balance=1.5)
        with pytest.raises(ValueError):
            Hyperparams(epochs=-1)
        with pytest.raises(ValueError):
            Hyperparams(restart_prob=1.0)
        with pytest.raises(ValueError):
            Hyperparams(augmentation="bad")

    def test_json_round_trip(self, tmp_path):
        from graphcad import load_hyperparams, save_hyperparams
        hp = Hyperparams(view_balance=0.9, scale_balance=0.3, epochs=7)
        path = tmp_path / "cfg.json"
        save_hyperparams(hp, path)
        assert load_hyperparams(path) == hp

    def test_partial_config(self, tmp_path):
        from graphcad import load_hyperparams
        path = tmp_path / "cfg.json"
        path.write_text('{"epochs": 3, "subgraph_size": 5}')
        hp = load_hyperparams(path)
        assert hp.epochs == 3 and hp.subgraph_size == 5
        assert hp.hidden_dim == 64

    def test_unknown_key_rejected(self, tmp_path):
        from graphcad import SchemaError, load_hyperparams
        path = tmp_path / "cfg.json"
        path.write_text('{"momentum": 0.9}')
        with pytest.raises(SchemaError, match="unknown"):
            load_hyperparams(path)
