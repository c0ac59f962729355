import numpy as np
import pytest

from tabgraph.dataset import ClassLabel
from tabgraph.graphs import TableGraph
from tabgraph.gnn import (
    N_CLASSES,
    ModelParams,
    forward,
    gcn_layer,
    init_params,
    load_checkpoint,
    loss_and_grad,
    mean_readout,
    normalize_adjacency,
    predict,
    predict_proba,
    save_checkpoint,
    softmax,
)

from oracles import dense_gcn_layer, finite_diff_grads, max_relative_error, mlp_forward
from synth import random_graph


def dense_norm_adjacency(edges, n):
    """Independent dense construction of D^(-1/2) (A + I) D^(-1/2)."""
    a = np.eye(n)
    for i, j in edges:
        a[i, j] = a[j, i] = 1.0
    d_inv_sqrt = np.diag(1.0 / np.sqrt(a.sum(axis=1)))
    return d_inv_sqrt @ a @ d_inv_sqrt


def zero_params(d, h):
    return ModelParams(
        W1=np.zeros((d, h)), b1=np.zeros(h),
        W2=np.zeros((h, h)), b2=np.zeros(h),
        W3=np.zeros((h, N_CLASSES)), b3=np.zeros(N_CLASSES),
    )


class TestNormalizeAdjacency:
    def test_two_node_values(self):
        adj = normalize_adjacency([(0, 1)], 2)
        # deg = 2 for both nodes: every entry is 1/sqrt(2) * 1/sqrt(2)
        expected = np.full((2, 2), (1.0 / np.sqrt(2.0)) ** 2)
        np.testing.assert_array_equal(adj.to_dense(), expected)
        assert abs(adj.to_dense()[0, 0] - 0.5) < 1e-15

    def test_isolated_node_keeps_unit_self_loop(self):
        adj = normalize_adjacency([(0, 1)], 3)
        assert adj.to_dense()[2, 2] == 1.0

    def test_matches_dense_oracle(self):
        rng = np.random.default_rng(10)
        for _ in range(25):
            g = random_graph(rng, int(rng.integers(1, 15)), 3)
            adj = normalize_adjacency(g.edges, g.n)
            np.testing.assert_allclose(
                adj.to_dense(), dense_norm_adjacency(g.edges, g.n), atol=1e-15
            )

    def test_symmetric_exactly(self):
        rng = np.random.default_rng(11)
        g = random_graph(rng, 12, 3, edge_prob=0.4)
        dense = normalize_adjacency(g.edges, g.n).to_dense()
        np.testing.assert_array_equal(dense, dense.T)

    def test_triples_canonical_order(self):
        adj = normalize_adjacency([(2, 0), (1, 2)], 3)
        order = list(zip(adj.rows.tolist(), adj.cols.tolist()))
        assert order == sorted(order)
        assert len(order) == 3 + 2 * 2

    def test_matmul_matches_dense(self):
        rng = np.random.default_rng(12)
        for _ in range(10):
            g = random_graph(rng, int(rng.integers(1, 20)), 5)
            adj = normalize_adjacency(g.edges, g.n)
            h = rng.normal(size=(g.n, 7))
            np.testing.assert_allclose(
                adj.matmul(h), adj.to_dense() @ h, rtol=0, atol=1e-12
            )

    def test_rejects_self_loop_and_empty(self):
        with pytest.raises(ValueError, match="self-loop"):
            normalize_adjacency([(1, 1)], 3)
        with pytest.raises(ValueError, match="at least one node"):
            normalize_adjacency([], 0)


class TestLayerAndReadout:
    def test_layer_matches_dense_oracle(self):
        rng = np.random.default_rng(13)
        for _ in range(10):
            n, din, dout = 6, 5, 4
            g = random_graph(rng, n, din)
            adj = normalize_adjacency(g.edges, n)
            H = rng.normal(size=(n, din))
            W = rng.normal(size=(din, dout))
            b = rng.normal(size=dout)
            for act, relu in (("relu", True), ("none", False)):
                np.testing.assert_allclose(
                    gcn_layer(H, adj, W, b, act),
                    dense_gcn_layer(H, adj.to_dense(), W, b, relu),
                    rtol=0,
                    atol=1e-12,
                )

    def test_relu_clips(self):
        adj = normalize_adjacency([], 1)
        H = np.array([[1.0]])
        W = np.array([[-2.0, 2.0]])
        b = np.zeros(2)
        np.testing.assert_array_equal(gcn_layer(H, adj, W, b), [[0.0, 2.0]])

    def test_shape_mismatch_rejected(self):
        adj = normalize_adjacency([], 2)
        with pytest.raises(ValueError, match="shape"):
            gcn_layer(np.zeros((3, 2)), adj, np.zeros((2, 2)), np.zeros(2))
        with pytest.raises(ValueError, match="shape"):
            gcn_layer(np.zeros((2, 3)), adj, np.zeros((2, 2)), np.zeros(2))

    def test_unknown_activation_rejected(self):
        adj = normalize_adjacency([], 1)
        with pytest.raises(ValueError, match="activation"):
            gcn_layer(np.zeros((1, 1)), adj, np.zeros((1, 1)), np.zeros(1), "tanh")

    def test_mean_readout_frozen(self):
        np.testing.assert_array_equal(
            mean_readout(np.array([[1.0, 2.0], [3.0, 4.0]])), [2.0, 3.0]
        )

    def test_mean_readout_rejects_empty(self):
        with pytest.raises(ValueError):
            mean_readout(np.zeros((0, 3)))


class TestForward:
    def test_single_node_graph_equals_mlp(self):
        # with one node, A_hat = [[1]], so the network is a plain MLP
        rng = np.random.default_rng(14)
        params = init_params(5, 8, rng)
        x = rng.normal(size=(1, 5))
        g = TableGraph("s", ClassLabel.INPUT, x, ())
        logits, _ = forward(g, params)
        np.testing.assert_allclose(logits, mlp_forward(x, params)[0], rtol=0, atol=1e-12)

    def test_zero_params_give_zero_logits(self):
        g = random_graph(np.random.default_rng(15), 6, 4)
        logits, _ = forward(g, zero_params(4, 3))
        np.testing.assert_array_equal(logits, np.zeros(N_CLASSES))

    def test_permutation_invariance(self):
        rng = np.random.default_rng(16)
        for _ in range(10):
            n = int(rng.integers(2, 12))
            g = random_graph(rng, n, 6)
            params = init_params(6, 10, rng)
            base, _ = forward(g, params)
            perm = rng.permutation(n)
            inv = np.empty(n, dtype=int)
            inv[perm] = np.arange(n)
            permuted = TableGraph(
                record_id=g.record_id,
                label=g.label,
                features=g.features[perm],
                edges=tuple(
                    (min(inv[i], inv[j]), max(inv[i], inv[j])) for i, j in g.edges
                ),
            )
            got, _ = forward(permuted, params)
            assert np.max(np.abs(got - base)) < 1e-9

    def test_feature_dim_mismatch_rejected(self):
        g = random_graph(np.random.default_rng(17), 4, 5)
        with pytest.raises(ValueError, match="feature dim"):
            forward(g, zero_params(6, 3))


class TestSoftmax:
    def test_sums_to_one(self):
        p = softmax(np.array([1.0, 2.0, 3.0, 4.0]))
        assert abs(p.sum() - 1.0) < 1e-15
        assert np.all(p > 0)

    def test_stable_for_large_logits(self):
        p = softmax(np.array([1000.0, 0.0, -1000.0, 500.0]))
        assert np.all(np.isfinite(p))
        assert abs(p.sum() - 1.0) < 1e-15

    def test_invariant_to_shift(self):
        a = softmax(np.array([0.1, 0.2, 0.3, 0.4]))
        b = softmax(np.array([0.1, 0.2, 0.3, 0.4]) + 7.0)
        np.testing.assert_allclose(a, b, rtol=0, atol=1e-15)


class TestLossAndGrad:
    def test_uniform_loss_at_zero_params(self):
        g = random_graph(np.random.default_rng(18), 5, 4)
        loss, grads = loss_and_grad(g, zero_params(4, 6), ClassLabel.EXAMPLE)
        assert loss == float(np.log(4.0))
        np.testing.assert_allclose(
            grads.b3, [0.25, 0.25, -0.75, 0.25], rtol=0, atol=1e-15
        )

    def test_grad_shapes_match_params(self):
        g = random_graph(np.random.default_rng(19), 4, 3)
        params = init_params(3, 5, np.random.default_rng(20))
        _, grads = loss_and_grad(g, params, 1)
        for name, arr in params.arrays().items():
            assert grads.arrays()[name].shape == arr.shape

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(21)
        for trial in range(4):
            n = int(rng.integers(2, 7))
            g = random_graph(rng, n, 3, edge_prob=0.5, label=ClassLabel(trial % 4))
            params = init_params(3, 4, rng)
            _, analytic = loss_and_grad(g, params, g.label)
            numeric = finite_diff_grads(g, params, g.label)
            assert max_relative_error(analytic, numeric) < 1e-4, f"trial {trial}"

    def test_loss_decreases_along_negative_gradient(self):
        rng = np.random.default_rng(22)
        g = random_graph(rng, 6, 4)
        params = init_params(4, 8, rng)
        loss0, grads = loss_and_grad(g, params, 2)
        for name, arr in params.arrays().items():
            arr -= 0.05 * grads.arrays()[name]
        loss1, _ = loss_and_grad(g, params, 2)
        assert loss1 < loss0

    def test_label_out_of_range_rejected(self):
        g = random_graph(np.random.default_rng(23), 3, 2)
        with pytest.raises(ValueError, match="label"):
            loss_and_grad(g, zero_params(2, 3), 4)


class TestPredict:
    def test_tie_resolves_to_lowest_class(self):
        g = random_graph(np.random.default_rng(24), 4, 3)
        assert predict(g, zero_params(3, 2)) is ClassLabel.OBSERVATION

    def test_proba_matches_softmax_of_forward(self):
        rng = np.random.default_rng(25)
        g = random_graph(rng, 5, 4)
        params = init_params(4, 6, rng)
        logits, _ = forward(g, params)
        np.testing.assert_array_equal(predict_proba(g, params), softmax(logits))
        assert int(predict(g, params)) == int(np.argmax(logits))


class TestInitParams:
    def test_shapes_and_zero_biases(self):
        params = init_params(7, 9, np.random.default_rng(26))
        params.validate()
        assert params.d == 7 and params.h == 9
        np.testing.assert_array_equal(params.b1, np.zeros(9))
        np.testing.assert_array_equal(params.b2, np.zeros(9))
        np.testing.assert_array_equal(params.b3, np.zeros(4))

    def test_glorot_bounds(self):
        params = init_params(20, 30, np.random.default_rng(27))
        for W, fan_in, fan_out in (
            (params.W1, 20, 30),
            (params.W2, 30, 30),
            (params.W3, 30, 4),
        ):
            a = np.sqrt(6.0 / (fan_in + fan_out))
            assert np.all(np.abs(W) < a)

    def test_deterministic_for_seeded_rng(self):
        a = init_params(5, 6, np.random.default_rng(123))
        b = init_params(5, 6, np.random.default_rng(123))
        for name, arr in a.arrays().items():
            np.testing.assert_array_equal(arr, b.arrays()[name])


class TestCheckpoint:
    def test_round_trip_bitwise(self, tmp_path):
        params = init_params(6, 5, np.random.default_rng(28))
        path = tmp_path / "model.json"
        save_checkpoint(params, path)
        loaded = load_checkpoint(path)
        for name, arr in params.arrays().items():
            np.testing.assert_array_equal(arr, loaded.arrays()[name])
        assert loaded.d == 6 and loaded.h == 5

    def test_truncated_payload_rejected(self, tmp_path):
        params = init_params(3, 4, np.random.default_rng(29))
        path = tmp_path / "model.json"
        save_checkpoint(params, path)
        import json

        raw = json.loads(path.read_text())
        raw["W1"] = raw["W1"][:-1]
        path.write_text(json.dumps(raw))
        with pytest.raises(ValueError):
            load_checkpoint(path)

    def test_validate_rejects_bad_shapes(self):
        params = zero_params(3, 4)
        params.W2 = np.zeros((4, 5))
        with pytest.raises(ValueError, match="W2"):
            params.validate()

    def test_validate_rejects_non_finite(self):
        params = zero_params(3, 4)
        params.W1[0, 0] = np.nan
        with pytest.raises(ValueError, match="non-finite"):
            params.validate()
