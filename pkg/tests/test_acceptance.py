"""Acceptance gate: one test per shipped guarantee, one PASS line each.

Every test pins its tolerances and sample sizes inline and prints a single
summary line on success (visible with `pytest -s` or `-rP`). These are the
binding checks; the per-module test files cover the finer-grained behavior.
"""

import time
from fractions import Fraction

import numpy as np

from tabgraph.augment import (
    AugmentConfig,
    AUG_PRESETS,
    detect_columns,
    detect_rows,
    remove_random_edges,
    remove_random_nodes,
    swap_columns,
    swap_rows,
)
from tabgraph.cli import main as cli_main
from tabgraph.dataset import ClassLabel, DatasetManifest, serialize_records
from tabgraph.embeddings import HashEmbedder
from tabgraph.gnn import forward, init_params, loss_and_grad, predict
from tabgraph.graphs import TableGraph, build_graph
from tabgraph.training import ExperimentConfig, TrainConfig, metrics_from_confusion, run_experiment, train
from tabgraph.visibility import visibility_edges

from oracles import finite_diff_grads, max_relative_error, visibility_oracle
from synth import grid_record, imbalanced_corpus, random_graph, random_layout, separable_graphs


def _announce(line: str) -> None:
    print(f"ACCEPTANCE  {line}")


def test_visibility_matches_bruteforce_oracle():
    """>=100 random non-overlapping layouts (n <= 30): exact edge-set equality, < 10 s."""
    rng = np.random.default_rng(20240901)
    t0 = time.perf_counter()
    n_layouts = 120
    for trial in range(n_layouts):
        n = int(rng.integers(2, 31))
        words = random_layout(rng, n)
        assert visibility_edges(words) == visibility_oracle(words), f"layout {trial} (n={n})"
    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0, f"visibility oracle sweep took {elapsed:.1f}s (limit 10s)"
    _announce(f"visibility oracle equivalence: PASS ({n_layouts} layouts, {elapsed:.1f}s)")


def test_gradients_match_finite_differences():
    """>=20 random (graph, params) instances (n <= 12, h <= 16):
    central differences at eps = 1e-5, max relative error < 1e-4, < 30 s."""
    rng = np.random.default_rng(77001)
    t0 = time.perf_counter()
    worst = 0.0
    n_instances = 20
    for trial in range(n_instances):
        n = int(rng.integers(2, 13))
        d = int(rng.integers(3, 9))
        h = int(rng.integers(4, 17))
        g = random_graph(rng, n, d, edge_prob=0.4, label=ClassLabel(trial % 4))
        params = init_params(d, h, rng)
        _, analytic = loss_and_grad(g, params, g.label)
        numeric = finite_diff_grads(g, params, g.label, eps=1e-5)
        err = max_relative_error(analytic, numeric)
        worst = max(worst, err)
        assert err < 1e-4, f"instance {trial}: max relative error {err:.2e}"
    elapsed = time.perf_counter() - t0
    assert elapsed < 30.0, f"gradient check took {elapsed:.1f}s (limit 30s)"
    _announce(
        f"gradient check: PASS ({n_instances} instances, worst rel err {worst:.2e}, {elapsed:.1f}s)"
    )


def test_logits_invariant_under_node_permutation():
    """50 random graphs x random permutations: logits differ < 1e-9 per component."""
    rng = np.random.default_rng(31337)
    worst = 0.0
    for trial in range(50):
        n = int(rng.integers(2, 15))
        d = int(rng.integers(3, 8))
        g = random_graph(rng, n, d, edge_prob=0.35)
        params = init_params(d, int(rng.integers(4, 20)), rng)
        base, _ = forward(g, params)
        perm = rng.permutation(n)
        inv = np.empty(n, dtype=int)
        inv[perm] = np.arange(n)
        permuted = TableGraph(
            record_id=g.record_id,
            label=g.label,
            features=g.features[perm],
            edges=tuple((min(inv[i], inv[j]), max(inv[i], inv[j])) for i, j in g.edges),
        )
        got, _ = forward(permuted, params)
        diff = float(np.max(np.abs(got - base)))
        worst = max(worst, diff)
        assert diff < 1e-9, f"graph {trial}: max logit deviation {diff:.2e}"
    _announce(f"permutation invariance: PASS (50 graphs, worst deviation {worst:.2e})")


def test_removal_counts_stay_in_declared_interval():
    """1000 trials each: node removals in [max(1, round(0.01 n)), round(0.20 n)],
    edge removals in the analogous interval; label preserved in 100% of trials."""
    rng = np.random.default_rng(555)
    labels_kept = 0
    trials = 1000

    for _ in range(trials):
        # n >= 3 keeps the declared interval non-empty (round(0.20 * 2) = 0)
        n = int(rng.integers(3, 61))
        g = random_graph(rng, n, 4, edge_prob=0.3, label=ClassLabel(int(rng.integers(4))))
        out = remove_random_nodes(g, rng)
        removed = g.n - out.n
        assert max(1, round(0.01 * n)) <= removed <= round(0.20 * n), f"n={n}: removed {removed}"
        labels_kept += out.label is g.label

    for _ in range(trials):
        n = int(rng.integers(4, 61))  # path graph: m = n - 1 >= 3
        features = rng.normal(size=(n, 4))
        edges = tuple((i, i + 1) for i in range(n - 1))
        g = TableGraph("p", ClassLabel(int(rng.integers(4))), features, edges)
        m = len(g.edges)
        out = remove_random_edges(g, rng)
        removed = m - len(out.edges)
        assert max(1, round(0.01 * m)) <= removed <= round(0.20 * m), f"m={m}: removed {removed}"
        labels_kept += out.label is g.label

    assert labels_kept == 2 * trials
    _announce(f"augmentation bounds: PASS ({2 * trials} trials, labels preserved {labels_kept}/{2 * trials})")


def test_equal_size_swaps_are_involutions():
    """200 random grid tables: the same column (or row) swap applied twice
    restores the feature matrix bitwise."""
    rng = np.random.default_rng(909)
    emb = HashEmbedder(embed_dim=3)
    for trial in range(200):
        n_cols = int(rng.integers(2, 7))
        n_rows = int(rng.integers(2, 8))
        record = grid_record(f"grid{trial}", n_cols, n_rows)
        base = build_graph(record, emb)
        g = TableGraph(
            base.record_id, base.label, rng.normal(size=base.features.shape), base.edges
        )
        if trial % 2 == 0:
            spans = detect_columns(record)
            i, j = rng.choice(len(spans), size=2, replace=False)
            once = swap_columns(g, record, spans, int(i), int(j))
            twice = swap_columns(once, record, spans, int(i), int(j))
        else:
            rows = detect_rows(record)
            i, j = rng.choice(len(rows), size=2, replace=False)
            once = swap_rows(g, record, rows, int(i), int(j))
            twice = swap_rows(once, record, rows, int(i), int(j))
        assert np.array_equal(twice.features, g.features), f"grid {trial} not restored"
    _announce("swap involution: PASS (200 grids, bitwise restore)")


def test_detectors_recover_grid_dimensions():
    """Grids with 2 pt gaps, k, m <= 8: exactly k column spans and m row groups.

    Single-column grids are the documented degenerate case: the reading-order
    scan (new row iff x1 drops) sees no reset without a second column, so
    k = 1 yields one row group regardless of m.
    """
    for k in range(1, 9):
        for m in range(1, 9):
            record = grid_record(f"g{k}x{m}", k, m, gap_x=2.0, gap_y=2.0)
            assert len(detect_columns(record)) == k, f"columns for k={k}, m={m}"
            expected_rows = m if k >= 2 else 1
            assert len(detect_rows(record)) == expected_rows, f"rows for k={k}, m={m}"
    _announce("column/row detectors: PASS (all k, m <= 8 at 2 pt gaps)")


# Hand-computed expectations as exact rationals. F = Fraction; each entry is
# (confusion matrix, per-class P, per-class R, per-class F1, macro F1, micro).
F = Fraction
_METRIC_CASES = [
    (
        [[5, 0, 0, 0], [0, 3, 0, 0], [0, 0, 2, 0], [0, 0, 0, 1]],
        [F(1), F(1), F(1), F(1)],
        [F(1), F(1), F(1), F(1)],
        [F(1), F(1), F(1), F(1)],
        F(1),
        F(1),
    ),
    (
        [[4, 0, 0, 0], [2, 0, 0, 0], [3, 0, 0, 0], [1, 0, 0, 0]],
        [F(2, 5), F(0), F(0), F(0)],
        [F(1), F(0), F(0), F(0)],
        [F(4, 7), F(0), F(0), F(0)],
        F(1, 7),
        F(2, 5),
    ),
    (
        [[8, 4, 0, 0], [2, 6, 0, 0], [0, 0, 5, 0], [0, 0, 0, 3]],
        [F(4, 5), F(3, 5), F(1), F(1)],
        [F(2, 3), F(3, 4), F(1), F(1)],
        [F(8, 11), F(2, 3), F(1), F(1)],
        F(28, 33),
        F(11, 14),
    ),
    (
        [[7, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]],
        [F(1), F(0), F(0), F(0)],
        [F(1), F(0), F(0), F(0)],
        [F(1), F(0), F(0), F(0)],
        F(1, 4),
        F(1),
    ),
    (
        [[0, 3, 0, 0], [3, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]],
        [F(0), F(0), F(0), F(0)],
        [F(0), F(0), F(0), F(0)],
        [F(0), F(0), F(0), F(0)],
        F(0),
        F(0),
    ),
    (
        [[2, 1, 0, 1], [0, 3, 1, 0], [1, 0, 4, 0], [0, 1, 0, 2]],
        [F(2, 3), F(3, 5), F(4, 5), F(2, 3)],
        [F(1, 2), F(3, 4), F(4, 5), F(2, 3)],
        [F(4, 7), F(2, 3), F(4, 5), F(2, 3)],
        F(71, 105),
        F(11, 16),
    ),
    (
        [[3, 0, 0, 2], [0, 0, 0, 0], [1, 0, 2, 0], [0, 0, 0, 0]],
        [F(3, 4), F(0), F(1), F(0)],
        [F(3, 5), F(0), F(2, 3), F(0)],
        [F(2, 3), F(0), F(4, 5), F(0)],
        F(11, 30),
        F(5, 8),
    ),
    (
        [[1, 1, 1, 1], [1, 1, 1, 1], [1, 1, 1, 1], [1, 1, 1, 1]],
        [F(1, 4)] * 4,
        [F(1, 4)] * 4,
        [F(1, 4)] * 4,
        F(1, 4),
        F(1, 4),
    ),
    (
        [[10, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [9, 0, 0, 1]],
        [F(10, 19), F(1), F(1), F(1)],
        [F(1), F(1), F(1), F(1, 10)],
        [F(20, 29), F(1), F(1), F(2, 11)],
        F(229, 319),
        F(13, 22),
    ),
    (
        [[0, 2, 0, 0], [0, 5, 0, 0], [0, 1, 3, 0], [0, 0, 0, 4]],
        [F(0), F(5, 8), F(1), F(1)],
        [F(0), F(1), F(3, 4), F(1)],
        [F(0), F(10, 13), F(6, 7), F(1)],
        F(239, 364),
        F(4, 5),
    ),
    (
        [[50, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 1]],
        [F(1), F(0), F(0), F(1)],
        [F(1), F(0), F(0), F(1)],
        [F(1), F(0), F(0), F(1)],
        F(1, 2),
        F(1),
    ),
]


def test_metrics_reproduce_hand_computed_values():
    """>=10 fixed confusion matrices (zero-denominator cases included): per-class
    and macro metrics match exact rationals to 1e-12; macro F1 is exactly the
    mean of the reported per-class F1 values."""
    assert len(_METRIC_CASES) >= 10
    for idx, (cm, P, R, F1, macro_f1, micro) in enumerate(_METRIC_CASES):
        m = metrics_from_confusion(np.array(cm))
        for c in range(4):
            assert abs(m.precision[c] - float(P[c])) < 1e-12, f"case {idx} P[{c}]"
            assert abs(m.recall[c] - float(R[c])) < 1e-12, f"case {idx} R[{c}]"
            assert abs(m.f1[c] - float(F1[c])) < 1e-12, f"case {idx} F1[{c}]"
        assert abs(m.macro_f1 - float(macro_f1)) < 1e-12, f"case {idx} macro F1"
        assert abs(m.micro_f1 - float(micro)) < 1e-12, f"case {idx} micro"
        assert m.macro_f1 == float(np.mean(m.f1)), f"case {idx}: macro != mean(per-class)"
    _announce(f"metrics arithmetic: PASS ({len(_METRIC_CASES)} matrices, tol 1e-12)")


def test_model_fits_separable_corpus():
    """Separable 4-class corpus of 200 graphs: >= 95% train accuracy within
    50 epochs and >= 90% test accuracy, < 60 s."""
    graphs = separable_graphs(np.random.default_rng(42), 200)
    train_set = [g for i, g in enumerate(graphs) if i % 5 != 0]  # 160, class-balanced
    test_set = [g for i, g in enumerate(graphs) if i % 5 == 0]  # 40, class-balanced
    t0 = time.perf_counter()
    params = train(
        train_set, TrainConfig(epochs=30, hidden_dim=16, learning_rate=5e-3, seed=0)
    )
    elapsed = time.perf_counter() - t0
    train_acc = sum(predict(g, params) is g.label for g in train_set) / len(train_set)
    test_acc = sum(predict(g, params) is g.label for g in test_set) / len(test_set)
    assert train_acc >= 0.95, f"train accuracy {train_acc:.3f} < 0.95"
    assert test_acc >= 0.90, f"test accuracy {test_acc:.3f} < 0.90"
    assert elapsed < 60.0, f"training took {elapsed:.1f}s (limit 60s)"
    _announce(
        f"trainability: PASS (train acc {train_acc:.3f}, test acc {test_acc:.3f}, "
        f"30 epochs, {elapsed:.1f}s)"
    )


def test_augmentation_lifts_mean_macro_f1():
    """Imbalanced corpus (class ratio 18:3:1:2, 20% train split): over 5 seeds,
    mean macro F1 with all ops at target size 200 strictly exceeds the
    unaugmented mean; < 5 min."""
    records = imbalanced_corpus(seed=7)  # 180/30/10/20
    manifest = DatasetManifest(records=records, split_seed=0, train_fraction=0.2)
    emb = HashEmbedder(embed_dim=16, seed=0)

    t0 = time.perf_counter()
    noaug, auged = [], []
    for seed in range(5):
        base = TrainConfig(epochs=25, hidden_dim=32, learning_rate=1e-3, seed=1000 + seed)
        plain = run_experiment(
            manifest, emb, ExperimentConfig(train_cfg=base, split_seed=seed)
        )
        boosted = run_experiment(
            manifest,
            emb,
            ExperimentConfig(
                train_cfg=base,
                aug_cfg=AugmentConfig(ops_enabled=AUG_PRESETS["all"], seed=2000 + seed),
                target_size=200,
                split_seed=seed,
            ),
        )
        noaug.append(plain["macro"]["F1"])
        auged.append(boosted["macro"]["F1"])
    elapsed = time.perf_counter() - t0

    mean_noaug = float(np.mean(noaug))
    mean_aug = float(np.mean(auged))
    assert mean_aug > mean_noaug, (
        f"augmented mean macro F1 {mean_aug:.4f} does not exceed no-aug {mean_noaug:.4f}"
    )
    assert elapsed < 300.0, f"trend run took {elapsed:.1f}s (limit 300s)"
    _announce(
        f"augmentation trend: PASS (mean macro F1 {mean_aug:.4f} aug vs "
        f"{mean_noaug:.4f} no-aug over 5 seeds, {elapsed:.1f}s)"
    )


def test_repeated_experiment_reports_are_byte_identical(tmp_path):
    """Repeating an experiment command with identical flags yields
    byte-identical report bodies (augmented and plain)."""
    records = []
    idx = 0
    for label, count in zip(ClassLabel, (6, 4, 3, 3)):
        for _ in range(count):
            records.append(grid_record(f"r{idx}", 3, 3, label=label))
            idx += 1
    rec_path = tmp_path / "records.json"
    rec_path.write_bytes(serialize_records(records))
    man_path = tmp_path / "manifest.json"
    assert cli_main(
        ["ingest", "--records", str(rec_path), "--out", str(man_path),
         "--split-seed", "3", "--train-fraction", "0.5"]
    ) == 0

    def run(out, extra):
        argv = ["run-experiment", "--manifest", str(man_path), "--out", str(out),
                "--epochs", "3", "--hidden", "8", "--embedder", "hash:4",
                "--seed", "11"] + extra
        assert cli_main(argv) == 0

    for tag, extra in (
        ("plain", []),
        ("aug", ["--aug", "all", "--target-size", "30", "--standardize"]),
    ):
        out1, out2 = tmp_path / f"{tag}1.json", tmp_path / f"{tag}2.json"
        run(out1, extra)
        run(out2, extra)
        assert out1.read_bytes() == out2.read_bytes(), f"{tag} reports differ"
    _announce("determinism: PASS (plain + augmented reports byte-identical)")
