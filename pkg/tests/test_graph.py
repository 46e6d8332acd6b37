import json

import numpy as np
import pytest

from graphcad import (
    Graph,
    SchemaError,
    generate_synthetic,
    inject_anomalies,
    load_graph,
    normalize_adjacency,
    save_graph,
)
from graphcad.graph import expected_sbm_edges

from conftest import random_graph


class TestGraphInvariants:
    def test_canonicalizes_edges(self):
        g = Graph(3, [[1, 0], [2, 1]], np.zeros((3, 2)))
        assert g.edges.tolist() == [[0, 1], [1, 2]]
        assert g.num_edges == 2

    def test_rejects_self_loop(self):
        with pytest.raises(ValueError, match="self-loop"):
            Graph(3, [[0, 0]], np.zeros((3, 2)))

    def test_rejects_duplicates_either_orientation(self):
        with pytest.raises(ValueError, match="duplicate"):
            Graph(3, [[0, 1], [1, 0]], np.zeros((3, 2)))
        with pytest.raises(ValueError, match="duplicate"):
            Graph(3, [[0, 1], [0, 1]], np.zeros((3, 2)))

    def test_rejects_out_of_range(self):
        with pytest.raises(IndexError):
            Graph(3, [[0, 3]], np.zeros((3, 2)))

    def test_rejects_feature_row_mismatch(self):
        with pytest.raises(ValueError, match="features"):
            Graph(3, [[0, 1]], np.zeros((2, 2)))

    def test_neighbors_and_degrees(self):
        g = Graph(4, [[0, 1], [0, 2], [2, 3]], np.zeros((4, 1)))
        assert g.neighbors[0].tolist() == [1, 2]
        assert g.neighbors[3].tolist() == [2]
        assert g.degrees.tolist() == [2, 1, 2, 1]
        assert g.has_edge(2, 0) and not g.has_edge(1, 2)

    def test_immutability(self):
        g = Graph(3, [[0, 1]], np.zeros((3, 2)))
        with pytest.raises(ValueError):
            g.features[0, 0] = 1.0

    def test_produced_graphs_validate(self, rng):
        for _ in range(20):
            random_graph(12, 3, 0.3, rng).validate()


class TestNormalizeAdjacency:
    def test_single_isolated_node(self):
        g = Graph(1, [], np.zeros((1, 2)))
        assert normalize_adjacency(g).tolist() == [[1.0]]

    def test_two_nodes_one_edge(self):
        g = Graph(2, [[0, 1]], np.zeros((2, 2)))
        expected = [[0.5, 0.5], [0.5, 0.5]]
        assert np.allclose(normalize_adjacency(g), expected, atol=1e-15)

    def test_path_graph_hand_evaluated(self):
        g = Graph(3, [[0, 1], [1, 2]], np.zeros((3, 1)))
        m = normalize_adjacency(g)
        assert np.allclose(np.diag(m), [1 / 2, 1 / 3, 1 / 2], atol=1e-15)
        assert m[0, 1] == pytest.approx(1 / np.sqrt(6), abs=1e-15)
        assert m[0, 2] == 0.0

    def test_subset_ordering(self):
        g = Graph(4, [[0, 1], [1, 2], [2, 3]], np.zeros((4, 1)))
        m = normalize_adjacency(g, node_subset=[2, 1, 0])
        # node 2 connects node 1; node 1 connects node 0; 2-0 not adjacent
        assert m[0, 1] > 0 and m[1, 2] > 0 and m[0, 2] == 0.0

    def test_subset_rejects_duplicates(self):
        g = Graph(3, [[0, 1]], np.zeros((3, 1)))
        with pytest.raises(ValueError):
            normalize_adjacency(g, node_subset=[0, 0, 1])

    def test_rescaling_recovers_binary_adjacency(self, rng):
        # entry(i,j) * sqrt(d_i * d_j) must be exactly 0 or 1
        for _ in range(10):
            g = random_graph(10, 2, 0.4, rng)
            m = normalize_adjacency(g)
            deg = g.degrees + 1.0
            recon = m * np.sqrt(np.outer(deg, deg))
            assert np.allclose(recon, np.round(recon), atol=1e-9)
            assert set(np.round(recon).ravel().tolist()) <= {0.0, 1.0}


class TestGenerateSynthetic:
    def test_complete_graph_forced(self):
        g = generate_synthetic(4, 2, 1, 1.0, 0.0, np.random.default_rng(0))
        assert g.num_edges == 6

    def test_determinism(self):
        a = generate_synthetic(80, 5, 4, 0.1, 0.01, np.random.default_rng(3))
        b = generate_synthetic(80, 5, 4, 0.1, 0.01, np.random.default_rng(3))
        assert np.array_equal(a.edges, b.edges)
        assert np.array_equal(a.features, b.features)

    def test_edge_count_matches_expectation(self):
        # realized mean edge count over 20 seeds within 3 sigma of expectation
        mean, sigma = expected_sbm_edges(500, 5, 0.05, 0.002)
        counts = [
            generate_synthetic(500, 4, 5, 0.05, 0.002, np.random.default_rng(s)).num_edges
            for s in range(20)
        ]
        assert abs(np.mean(counts) - mean) < 3 * sigma / np.sqrt(20)

    def test_rejects_bad_probabilities(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            generate_synthetic(10, 2, 2, 0.1, 0.5, rng)
        with pytest.raises(ValueError):
            generate_synthetic(10, 2, 2, 1.5, 0.0, rng)
        with pytest.raises(ValueError):
            generate_synthetic(2, 2, 3, 0.5, 0.1, rng)


class TestInjectAnomalies:
    def test_noop(self, small_graph):
        out, marks = inject_anomalies(small_graph, 0, 0, rng=np.random.default_rng(0))
        assert out is small_graph
        assert marks.all == ()

    def test_clique_on_empty_graph(self):
        g = Graph(3, [], np.zeros((3, 2)))
        out, marks = inject_anomalies(g, 3, 0, clique_size=3,
                                      rng=np.random.default_rng(0))
        assert out.num_edges == 3  # C(3,2)
        assert marks.structural == (0, 1, 2)
        assert out.labels.tolist() == [1, 1, 1]

    def test_eat_sized_counts(self):
        g = generate_synthetic(399, 10, 3, 0.05, 0.01, np.random.default_rng(5))
        out, marks = inject_anomalies(g, 15, 15, clique_size=15,
                                      rng=np.random.default_rng(6))
        assert len(marks.all) == 30
        assert out.labels.sum() == 30
        assert set(marks.structural).isdisjoint(marks.feature)

    def test_divisibility_enforced(self, small_graph):
        with pytest.raises(ValueError, match="divisible"):
            inject_anomalies(small_graph, 5, 0, clique_size=3,
                             rng=np.random.default_rng(0))

    def test_insufficient_nodes(self, small_graph):
        with pytest.raises(ValueError, match="unlabeled"):
            inject_anomalies(small_graph, 20, 20, clique_size=20,
                             rng=np.random.default_rng(0))

    def test_only_adds_edges_and_swaps_target_rows(self, small_graph):
        out, marks = inject_anomalies(small_graph, 4, 4, clique_size=4,
                                      candidate_pool=10,
                                      rng=np.random.default_rng(1))
        assert small_graph.edge_set <= out.edge_set
        changed = np.flatnonzero((out.features != small_graph.features).any(axis=1))
        assert set(changed) <= set(marks.feature)

    def test_feature_swap_copies_existing_row(self, small_graph):
        out, marks = inject_anomalies(small_graph, 0, 5, candidate_pool=10,
                                      rng=np.random.default_rng(2))
        for i in marks.feature:
            matches = (small_graph.features == out.features[i]).all(axis=1)
            assert matches.any()

    def test_bit_reproducible(self, small_graph):
        a = inject_anomalies(small_graph, 4, 4, clique_size=2, candidate_pool=5,
                             rng=np.random.default_rng(9))
        b = inject_anomalies(small_graph, 4, 4, clique_size=2, candidate_pool=5,
                             rng=np.random.default_rng(9))
        assert np.array_equal(a[0].edges, b[0].edges)
        assert np.array_equal(a[0].features, b[0].features)
        assert a[1] == b[1]

    def test_respects_existing_labels(self):
        g = generate_synthetic(20, 3, 2, 0.3, 0.05, np.random.default_rng(0))
        labels = np.zeros(20, dtype=int)
        labels[:15] = 1
        g = Graph(g.num_nodes, g.edges, g.features, labels)
        out, marks = inject_anomalies(g, 0, 5, candidate_pool=5,
                                      rng=np.random.default_rng(1))
        assert set(marks.feature).isdisjoint(range(15))
        assert out.labels.sum() == 20


class TestJsonRoundTrip:
    def test_lossless(self, tmp_path, small_graph):
        g, _ = inject_anomalies(small_graph, 2, 2, clique_size=2,
                                candidate_pool=5, rng=np.random.default_rng(0))
        path = tmp_path / "g.json"
        save_graph(g, path)
        back = load_graph(path)
        assert back.num_nodes == g.num_nodes
        assert np.array_equal(back.edges, g.edges)
        assert np.array_equal(back.features, g.features)
        assert np.array_equal(back.labels, g.labels)
        assert back.name == g.name

    def test_accepts_three_node_file(self, tmp_path):
        doc = {"name": "t", "num_nodes": 3, "features": [[0, 1], [2, 3], [4, 5]],
               "edges": [[0, 1], [1, 2]]}
        path = tmp_path / "g.json"
        path.write_text(json.dumps(doc))
        g = load_graph(path)
        assert g.num_edges == 2
        assert g.labels is None

    def test_rejects_self_loop_file(self, tmp_path):
        doc = {"num_nodes": 2, "features": [[0.0], [0.0]], "edges": [[0, 0]]}
        path = tmp_path / "g.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(ValueError, match="self-loop"):
            load_graph(path)

    def test_parse_error_has_line_context(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"num_nodes": 2,\n  broken')
        with pytest.raises(SchemaError, match="line 2"):
            load_graph(path)

    @pytest.mark.parametrize("mutation, message", [
        (lambda d: d.pop("features"), "missing required field"),
        (lambda d: d.update(features=[[0.0], [0.0, 1.0]]), "ragged"),
        (lambda d: d.update(edges=[[0, 1, 2]]), "pair of ints"),
        (lambda d: d.update(labels=[0, 2]), "0 or 1"),
        (lambda d: d.update(num_nodes="2"), "non-negative int"),
    ])
    def test_schema_violations(self, tmp_path, mutation, message):
        doc = {"num_nodes": 2, "features": [[0.0], [1.0]], "edges": [[0, 1]]}
        mutation(doc)
        path = tmp_path / "g.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(SchemaError, match=message):
            load_graph(path)

    def test_out_of_range_index(self, tmp_path):
        doc = {"num_nodes": 2, "features": [[0.0], [1.0]], "edges": [[0, 5]]}
        path = tmp_path / "g.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(IndexError):
            load_graph(path)

    def test_unsupported_format(self, tmp_path):
        with pytest.raises(ValueError, match="format"):
            load_graph(tmp_path / "g.mat", format="mat")
