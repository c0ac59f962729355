"""Training loop, confusion matrix, precision/recall/F1 and the experiment runner."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .augment import AugmentConfig, augment_to_size
from .dataset import (
    ClassLabel,
    DatasetManifest,
    TableRecord,
    class_distribution,
    stratified_split,
)
from .embeddings import Embedder
from .gnn import ModelParams, init_params, loss_and_grad, predict
from .graphs import TableGraph, build_graph

N_CLASSES = 4


@dataclass
class TrainConfig:
    epochs: int = 200
    learning_rate: float = 1e-3
    optimizer: str = "adam"  # "adam" | "sgd"
    seed: int = 0
    hidden_dim: int = 64
    class_weights: tuple[float, float, float, float] | None = None
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8

    def validate(self) -> None:
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if self.hidden_dim < 1:
            raise ValueError("hidden_dim must be >= 1")
        if self.class_weights is not None and len(self.class_weights) != N_CLASSES:
            raise ValueError("class_weights must have 4 entries")

    def to_dict(self) -> dict:
        return {
            "epochs": self.epochs,
            "learning_rate": self.learning_rate,
            "optimizer": self.optimizer,
            "seed": self.seed,
            "hidden_dim": self.hidden_dim,
            "class_weights": list(self.class_weights) if self.class_weights else None,
        }


class TrainingDivergedError(RuntimeError):
    """Loss went non-finite during training."""

    def __init__(self, epoch: int, record_id: str):
        super().__init__(f"non-finite loss at epoch {epoch}, graph {record_id!r}")
        self.epoch = epoch
        self.record_id = record_id


class _Adam:
    def __init__(self, params: ModelParams, cfg: TrainConfig):
        self.cfg = cfg
        self.m = {k: np.zeros_like(v) for k, v in params.arrays().items()}
        self.v = {k: np.zeros_like(v) for k, v in params.arrays().items()}
        self.t = 0

    def step(self, params: ModelParams, grads: ModelParams) -> None:
        cfg = self.cfg
        self.t += 1
        b1, b2 = cfg.adam_beta1, cfg.adam_beta2
        garrs = grads.arrays()
        for name, p in params.arrays().items():
            g = garrs[name]
            self.m[name] = b1 * self.m[name] + (1 - b1) * g
            self.v[name] = b2 * self.v[name] + (1 - b2) * g * g
            m_hat = self.m[name] / (1 - b1**self.t)
            v_hat = self.v[name] / (1 - b2**self.t)
            p -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.adam_eps)


class _SGD:
    def __init__(self, params: ModelParams, cfg: TrainConfig):
        self.lr = cfg.learning_rate

    def step(self, params: ModelParams, grads: ModelParams) -> None:
        garrs = grads.arrays()
        for name, p in params.arrays().items():
            p -= self.lr * garrs[name]


def train(graphs: Sequence[TableGraph], cfg: TrainConfig) -> ModelParams:
    """Per-graph stochastic training over seeded shuffled epochs.

    Identical graphs + config produce bitwise-identical parameters.
    """
    cfg.validate()
    if not graphs:
        raise ValueError("training set is empty")
    d = graphs[0].feature_dim
    for g in graphs:
        if g.label is None:
            raise ValueError(f"graph {g.record_id!r} is unlabeled")
        if g.feature_dim != d:
            raise ValueError(
                f"inconsistent feature dims: {g.feature_dim} vs {d} ({g.record_id!r})"
            )

    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    params = init_params(d, cfg.hidden_dim, rng)
    opt = _Adam(params, cfg) if cfg.optimizer == "adam" else _SGD(params, cfg)

    for epoch in range(cfg.epochs):
        order = rng.permutation(len(graphs))
        for idx in order:
            g = graphs[int(idx)]
            loss, grads = loss_and_grad(g, params, g.label)
            if not math.isfinite(loss):
                raise TrainingDivergedError(epoch, g.record_id)
            if cfg.class_weights is not None:
                w = float(cfg.class_weights[int(g.label)])
                for arr in grads.arrays().values():
                    arr *= w
            opt.step(params, grads)
    return params


def confusion(params: ModelParams, graphs: Sequence[TableGraph]) -> np.ndarray:
    """4x4 count matrix; rows are true classes, columns predicted ones."""
    cm = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    for g in graphs:
        if g.label is None:
            raise ValueError(f"graph {g.record_id!r} is unlabeled")
        cm[int(g.label), int(predict(g, params))] += 1
    return cm


@dataclass
class Metrics:
    precision: np.ndarray  # per class
    recall: np.ndarray
    f1: np.ndarray
    support: np.ndarray
    macro_precision: float
    macro_recall: float
    macro_f1: float
    micro_precision: float
    micro_recall: float
    micro_f1: float

    def to_dict(self) -> dict:
        per_class = {}
        for label in ClassLabel:
            c = int(label)
            per_class[label.display_name] = {
                "P": float(self.precision[c]),
                "R": float(self.recall[c]),
                "F1": float(self.f1[c]),
                "support": int(self.support[c]),
            }
        return {
            "per_class": per_class,
            "macro": {"P": self.macro_precision, "R": self.macro_recall, "F1": self.macro_f1},
            "micro": {"P": self.micro_precision, "R": self.micro_recall, "F1": self.micro_f1},
        }


def metrics_from_confusion(cm: np.ndarray) -> Metrics:
    """Per-class and macro/micro P/R/F1 with the 0-if-zero-denominator convention."""
    cm = np.asarray(cm)
    if cm.shape != (N_CLASSES, N_CLASSES) or cm.sum() <= 0:
        raise ValueError("confusion matrix must be 4x4 with a positive total")
    tp = np.diag(cm).astype(np.float64)
    fp = cm.sum(axis=0) - tp
    fn = cm.sum(axis=1) - tp

    def safe_div(num, den):
        return np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)

    precision = safe_div(tp, tp + fp)
    recall = safe_div(tp, tp + fn)
    f1 = safe_div(2.0 * precision * recall, precision + recall)

    total = float(cm.sum())
    micro = float(tp.sum()) / total  # single-label multiclass: micro P = R = F1
    return Metrics(
        precision=precision,
        recall=recall,
        f1=f1,
        support=cm.sum(axis=1),
        macro_precision=float(np.mean(precision)),
        macro_recall=float(np.mean(recall)),
        macro_f1=float(np.mean(f1)),
        micro_precision=micro,
        micro_recall=micro,
        micro_f1=micro,
    )


def standardize_features(
    train_graphs: Sequence[TableGraph], other_graphs: Sequence[TableGraph]
) -> tuple[list[TableGraph], list[TableGraph]]:
    """Column-standardize node features using train statistics only."""
    stacked = np.vstack([g.features for g in train_graphs])
    mean = stacked.mean(axis=0)
    std = stacked.std(axis=0)
    std = np.where(std > 0, std, 1.0)

    def apply(g: TableGraph) -> TableGraph:
        return TableGraph(
            record_id=g.record_id,
            label=g.label,
            features=(g.features - mean) / std,
            edges=g.edges,
        )

    return [apply(g) for g in train_graphs], [apply(g) for g in other_graphs]


@dataclass
class ExperimentConfig:
    train_cfg: TrainConfig
    aug_cfg: AugmentConfig | None = None
    target_size: int | None = None
    train_fraction: float | None = None  # None: use the manifest's value
    split_seed: int | None = None  # None: use the manifest's value
    standardize: bool = False
    embedder_spec: str = "hash"
    extra: dict = field(default_factory=dict)


def run_experiment(
    manifest: DatasetManifest, embedder: Embedder, cfg: ExperimentConfig
) -> dict:
    """Split, optionally augment the train side, train and evaluate.

    Unlabeled records are dropped up front; augmentation never touches the
    test partition. The returned report is JSON-serializable and free of
    timestamps, so identical inputs yield byte-identical reports.
    """
    labeled = [r for r in manifest.records if r.label is not None]
    if not labeled:
        raise ValueError("manifest holds no labeled records")
    fraction = cfg.train_fraction if cfg.train_fraction is not None else manifest.train_fraction
    split_seed = cfg.split_seed if cfg.split_seed is not None else manifest.split_seed
    train_records, test_records = stratified_split(labeled, fraction, split_seed)

    train_pairs = [(build_graph(r, embedder), r) for r in train_records]
    test_graphs = [build_graph(r, embedder) for r in test_records]

    if cfg.standardize:
        base_graphs, test_graphs = standardize_features(
            [g for g, _ in train_pairs], test_graphs
        )
        train_pairs = [(g, r) for g, (_, r) in zip(base_graphs, train_pairs)]

    if cfg.aug_cfg is not None:
        target = cfg.target_size if cfg.target_size is not None else len(train_pairs)
        train_graphs = augment_to_size(train_pairs, target, cfg.aug_cfg)
    else:
        train_graphs = [g for g, _ in train_pairs]

    params = train(train_graphs, cfg.train_cfg)
    cm = confusion(params, test_graphs)
    metrics = metrics_from_confusion(cm)

    report = {
        "config": {
            "embedder": cfg.embedder_spec,
            "train": cfg.train_cfg.to_dict(),
            "augmentation": cfg.aug_cfg.to_dict() if cfg.aug_cfg is not None else None,
            "target_size": cfg.target_size,
            "train_fraction": fraction,
            "split_seed": split_seed,
            "standardize": cfg.standardize,
            **cfg.extra,
        },
        "class_distribution": {
            "train": _distribution_dict(train_records),
            "test": _distribution_dict(test_records),
        },
        "train_size": len(train_graphs),
        "test_size": len(test_graphs),
        "confusion": cm.tolist(),
        **metrics.to_dict(),
    }
    return report


def _distribution_dict(records: Sequence[TableRecord]) -> dict[str, int]:
    dist = class_distribution(list(records))
    return {label.display_name: dist[label] for label in ClassLabel}


def render_report_text(report: dict) -> str:
    """Monospace block mirroring the per-class / overall metrics table layout."""
    lines = []
    lines.append(f"{'Class':<18}{'P':>8}{'R':>8}{'F1':>8}{'support':>10}")
    per_class = report["per_class"]
    for label in ClassLabel:
        row = per_class[label.display_name]
        lines.append(
            f"{label.display_name:<18}{row['P']:>8.3f}{row['R']:>8.3f}{row['F1']:>8.3f}"
            f"{row['support']:>10d}"
        )
    macro = report["macro"]
    micro = report["micro"]
    total = report["test_size"]
    lines.append(
        f"{'All (macro)':<18}{macro['P']:>8.3f}{macro['R']:>8.3f}{macro['F1']:>8.3f}{total:>10d}"
    )
    lines.append(
        f"{'All (micro)':<18}{micro['P']:>8.3f}{micro['R']:>8.3f}{micro['F1']:>8.3f}{total:>10d}"
    )
    lines.append(f"train size: {report['train_size']}")
    return "\n".join(lines)
