"""Command-line interface.

Exit codes: 0 success, 2 usage/config/validation problems, 3 numeric failure
during training. Every run is fully determined by its flags and input files;
there is no wall-clock seeding anywhere.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .augment import AUG_PRESETS, AugmentConfig, augment_to_size
from .dataset import (
    ClassLabel,
    DatasetManifest,
    RecordParseError,
    RecordValidationError,
    class_distribution,
    load_manifest,
    load_record_file,
    save_manifest,
)
from .embeddings import Embedder, HashEmbedder, VectorFileError, load_vector_table
from .gnn import load_checkpoint, predict_proba, save_checkpoint
from .graphs import build_graph, load_graphs, save_graphs
from .training import (
    ExperimentConfig,
    TrainConfig,
    TrainingDivergedError,
    confusion,
    metrics_from_confusion,
    render_report_text,
    run_experiment,
    train,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class CliError(Exception):
    pass


def make_embedder(spec: str, oov_policy: str = "zero") -> Embedder:
    """Parse an embedder spec: 'hash', 'hash:DIM', 'hash:DIM:SEED' or 'vectors:PATH'."""
    if spec == "hash":
        return HashEmbedder()
    if spec.startswith("hash:"):
        parts = spec.split(":")
        try:
            dim = int(parts[1])
            seed = int(parts[2]) if len(parts) > 2 else 0
        except (ValueError, IndexError):
            raise CliError(f"bad hash embedder spec {spec!r}") from None
        return HashEmbedder(embed_dim=dim, seed=seed)
    if spec.startswith("vectors:"):
        path = spec[len("vectors:"):]
        if not Path(path).is_file():
            raise CliError(f"vector file not found: {path}")
        return load_vector_table(path, oov_policy=oov_policy)
    raise CliError(f"unknown embedder spec {spec!r} (use hash[:DIM[:SEED]] or vectors:PATH)")


def _aug_config(preset: str, seed: int, fmin: float, fmax: float) -> AugmentConfig | None:
    if preset == "none":
        return None
    if preset not in AUG_PRESETS:
        raise CliError(f"unknown augmentation preset {preset!r} (none|rc|all)")
    return AugmentConfig(
        removal_fraction_min=fmin,
        removal_fraction_max=fmax,
        ops_enabled=AUG_PRESETS[preset],
        seed=seed,
    )


def _spawn_seeds(seed: int, n: int) -> list[int]:
    """Derive n independent 64-bit sub-seeds from one master seed."""
    children = np.random.SeedSequence(seed).spawn(n)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]


def _print_distribution(records) -> None:
    dist = class_distribution(records)
    labeled = sum(dist.values())
    for label in ClassLabel:
        print(f"{label.display_name:<14}{dist[label]:>6}")
    print(f"{'labeled':<14}{labeled:>6}")
    print(f"{'unlabeled':<14}{len(records) - labeled:>6}")


def cmd_ingest(args) -> int:
    path = Path(args.records)
    if not path.is_file():
        raise CliError(f"file not found: {path}")
    records = load_record_file(path)
    manifest = DatasetManifest(
        records=records, split_seed=args.split_seed, train_fraction=args.train_fraction
    )
    save_manifest(manifest, args.out)
    print(f"wrote manifest with {len(records)} records to {args.out}")
    _print_distribution(records)
    return EXIT_OK


def cmd_build_graphs(args) -> int:
    manifest = load_manifest(args.manifest)
    embedder = make_embedder(args.embedder, args.oov)
    records = [r for r in manifest.records if r.label is not None or args.keep_unlabeled]
    graphs = [build_graph(r, embedder) for r in records]
    save_graphs(graphs, args.out)
    print(f"built {len(graphs)} graphs (feature dim {graphs[0].feature_dim if graphs else 0})")
    return EXIT_OK


def cmd_augment(args) -> int:
    manifest = load_manifest(args.manifest)
    embedder = make_embedder(args.embedder, args.oov)
    aug_cfg = _aug_config(args.aug, args.seed, args.fraction_min, args.fraction_max)
    if aug_cfg is None:
        raise CliError("augment requires --aug rc or --aug all")
    labeled = [r for r in manifest.records if r.label is not None]
    pairs = [(build_graph(r, embedder), r) for r in labeled]
    graphs = augment_to_size(pairs, args.target_size, aug_cfg)
    save_graphs(graphs, args.out)
    print(f"augmented {len(pairs)} -> {len(graphs)} graphs")
    return EXIT_OK


def cmd_train(args) -> int:
    graphs = load_graphs(args.graphs)
    cfg = TrainConfig(
        epochs=args.epochs,
        learning_rate=args.lr,
        optimizer=args.optimizer,
        seed=args.seed,
        hidden_dim=args.hidden,
    )
    cfg.validate()
    params = train(graphs, cfg)
    save_checkpoint(params, args.out)
    print(f"trained on {len(graphs)} graphs; checkpoint saved to {args.out}")
    return EXIT_OK


def cmd_eval(args) -> int:
    params = load_checkpoint(args.model)
    graphs = load_graphs(args.graphs)
    cm = confusion(params, graphs)
    metrics = metrics_from_confusion(cm)
    report = {
        "config": {"model": str(args.model), "graphs": str(args.graphs)},
        "train_size": None,
        "test_size": len(graphs),
        "confusion": cm.tolist(),
        **metrics.to_dict(),
    }
    if args.out:
        Path(args.out).write_text(
            json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    print(render_report_text({**report, "train_size": 0}))
    return EXIT_OK


def cmd_predict(args) -> int:
    params = load_checkpoint(args.model)
    path = Path(args.records)
    if not path.is_file():
        raise CliError(f"file not found: {path}")
    records = load_record_file(path)
    embedder = make_embedder(args.embedder, args.oov)
    for record in records:
        g = build_graph(record, embedder)
        if g.feature_dim != params.d:
            raise CliError(
                f"checkpoint expects feature dim {params.d}, graphs have {g.feature_dim}"
            )
        proba = predict_proba(g, params)
        cls = ClassLabel(int(np.argmax(proba)))
        print(f"{record.id}\t{cls.display_name}\t{proba[int(cls)]:.6f}")
    return EXIT_OK


def cmd_run_experiment(args) -> int:
    manifest = load_manifest(args.manifest)
    embedder = make_embedder(args.embedder, args.oov)
    master_seed = args.seed if args.seed is not None else manifest.split_seed
    split_seed, train_seed, aug_seed = _spawn_seeds(master_seed, 3)

    aug_cfg = _aug_config(args.aug, aug_seed, args.fraction_min, args.fraction_max)
    if aug_cfg is not None and args.target_size is None:
        raise CliError("--target-size is required when augmentation is enabled")
    train_cfg = TrainConfig(
        epochs=args.epochs,
        learning_rate=args.lr,
        optimizer=args.optimizer,
        seed=train_seed,
        hidden_dim=args.hidden,
    )
    train_cfg.validate()
    cfg = ExperimentConfig(
        train_cfg=train_cfg,
        aug_cfg=aug_cfg,
        target_size=args.target_size,
        train_fraction=args.train_fraction,
        split_seed=split_seed,
        standardize=args.standardize,
        embedder_spec=args.embedder,
        extra={"seed": master_seed, "aug_preset": args.aug},
    )
    report = run_experiment(manifest, embedder, cfg)
    if args.out:
        Path(args.out).write_text(
            json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    print(render_report_text(report))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tabgraph",
        description="Table type classification over visibility graphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_embedder_flags(p):
        p.add_argument("--embedder", default="hash",
                       help="hash | hash:DIM | hash:DIM:SEED | vectors:PATH")
        p.add_argument("--oov", default="zero", choices=["zero", "hash"],
                       help="out-of-vocabulary policy for vector tables")

    p = sub.add_parser("ingest", help="validate a record file and write a manifest")
    p.add_argument("--records", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--split-seed", type=int, default=0)
    p.add_argument("--train-fraction", type=float, default=0.2)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("build-graphs", help="build visibility graphs from a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--keep-unlabeled", action="store_true")
    add_embedder_flags(p)
    p.set_defaults(func=cmd_build_graphs)

    p = sub.add_parser("augment", help="augment all labeled graphs to a target size")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--aug", default="all", help="rc | all")
    p.add_argument("--target-size", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--fraction-min", type=float, default=0.01)
    p.add_argument("--fraction-max", type=float, default=0.20)
    add_embedder_flags(p)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("train", help="train on a graphs file and save a checkpoint")
    p.add_argument("--graphs", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--hidden", type=int, default=64)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--optimizer", default="adam", choices=["adam", "sgd"])
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a graphs file")
    p.add_argument("--model", required=True)
    p.add_argument("--graphs", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("predict", help="print per-record predictions")
    p.add_argument("--model", required=True)
    p.add_argument("--records", required=True)
    add_embedder_flags(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("run-experiment", help="split, (optionally) augment, train, evaluate")
    p.add_argument("--manifest", required=True)
    p.add_argument("--aug", default="none", help="none | rc | all")
    p.add_argument("--target-size", type=int)
    p.add_argument("--seed", type=int, default=None,
                   help="master seed (default: the manifest's split_seed)")
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--hidden", type=int, default=64)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--optimizer", default="adam", choices=["adam", "sgd"])
    p.add_argument("--train-fraction", type=float, default=None)
    p.add_argument("--fraction-min", type=float, default=0.01)
    p.add_argument("--fraction-max", type=float, default=0.20)
    p.add_argument("--standardize", action="store_true")
    p.add_argument("--out")
    add_embedder_flags(p)
    p.set_defaults(func=cmd_run_experiment)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (CliError, RecordParseError, RecordValidationError, VectorFileError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as e:
        print(f"error: file not found: {e.filename}", file=sys.stderr)
        return EXIT_CONFIG
    except TrainingDivergedError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
