"""Structure- and content-preserving graph augmentations.

Four operations generate new labeled graphs from existing ones: random node
removal, random edge removal, and feature swaps between detected columns or
rows. All operations leave their inputs untouched and preserve the class
label; `augment_to_size` expands a training set to a target size while
rebalancing classes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Sequence

import numpy as np

from .dataset import ClassLabel, TableRecord
from .graphs import TableGraph


class AugOp(Enum):
    NODE_REMOVAL = "node-removal"
    EDGE_REMOVAL = "edge-removal"
    COLUMN_SWAP = "column-swap"
    ROW_SWAP = "row-swap"


AUG_PRESETS: dict[str, tuple[AugOp, ...]] = {
    "rc": (AugOp.COLUMN_SWAP, AugOp.ROW_SWAP),
    "all": (AugOp.NODE_REMOVAL, AugOp.EDGE_REMOVAL, AugOp.COLUMN_SWAP, AugOp.ROW_SWAP),
}


@dataclass(frozen=True)
class AugmentConfig:
    removal_fraction_min: float = 0.01
    removal_fraction_max: float = 0.20
    ops_enabled: tuple[AugOp, ...] = AUG_PRESETS["all"]
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.removal_fraction_min <= self.removal_fraction_max < 1.0:
            raise ValueError(
                "removal fractions must satisfy 0 < min <= max < 1, got "
                f"[{self.removal_fraction_min}, {self.removal_fraction_max}]"
            )
        if not self.ops_enabled:
            raise ValueError("at least one augmentation op must be enabled")

    def to_dict(self) -> dict:
        return {
            "removal_fraction_min": self.removal_fraction_min,
            "removal_fraction_max": self.removal_fraction_max,
            "ops_enabled": [op.value for op in self.ops_enabled],
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "AugmentConfig":
        return cls(
            removal_fraction_min=float(raw.get("removal_fraction_min", 0.01)),
            removal_fraction_max=float(raw.get("removal_fraction_max", 0.20)),
            ops_enabled=tuple(AugOp(v) for v in raw.get("ops_enabled", ["all"])),
            seed=int(raw.get("seed", 0)),
        )


def _removal_count(total: int, cap: int, rng: np.random.Generator, fmin: float, fmax: float) -> int:
    f = rng.uniform(fmin, fmax)
    return min(max(1, round(f * total)), cap)


def remove_random_nodes(
    g: TableGraph, rng: np.random.Generator, fmin: float = 0.01, fmax: float = 0.20
) -> TableGraph:
    """Drop max(1, round(f*n)) random nodes, f ~ U[fmin, fmax); reindex the rest."""
    if g.n < 2:
        return g.copy()
    k = _removal_count(g.n, g.n - 1, rng, fmin, fmax)
    removed = set(int(i) for i in rng.choice(g.n, size=k, replace=False))
    keep = [i for i in range(g.n) if i not in removed]
    remap = {old: new for new, old in enumerate(keep)}
    edges = tuple(
        (remap[i], remap[j]) for i, j in g.edges if i not in removed and j not in removed
    )
    return TableGraph(
        record_id=g.record_id, label=g.label, features=g.features[keep].copy(), edges=edges
    )


def remove_random_edges(
    g: TableGraph, rng: np.random.Generator, fmin: float = 0.01, fmax: float = 0.20
) -> TableGraph:
    """Drop max(1, round(f*|E|)) random edges; nodes and features stay put."""
    m = len(g.edges)
    if m == 0:
        return g.copy()
    k = _removal_count(m, m, rng, fmin, fmax)
    removed = set(int(i) for i in rng.choice(m, size=k, replace=False))
    edges = tuple(e for i, e in enumerate(g.edges) if i not in removed)
    return TableGraph(
        record_id=g.record_id, label=g.label, features=g.features.copy(), edges=edges
    )


def detect_columns(record: TableRecord, resolution: float = 1.0) -> list[tuple[float, float]]:
    """Projection-profile column spans, as half-open [x_start, x_end) page intervals.

    An occupancy vector over the table width (one bin per `resolution` points)
    is marked for every word's [x1, x2] extent; maximal runs of occupied bins
    become columns. Known limitation: a gap between words of the same logical
    column splits that column.
    """
    if not record.words:
        return []
    tbx1, _, tbx2, _ = record.table_bbox
    width = tbx2 - tbx1
    nbins = max(1, math.ceil(width / resolution))
    occupied = np.zeros(nbins, dtype=bool)
    for w in record.words:
        lo = max(0, math.floor((w.x1 - tbx1) / resolution))
        hi = min(nbins, math.ceil((w.x2 - tbx1) / resolution))
        if hi <= lo:  # degenerate after clamping
            hi = min(nbins, lo + 1)
        occupied[lo:hi] = True

    spans: list[tuple[float, float]] = []
    start = None
    for b in range(nbins):
        if occupied[b] and start is None:
            start = b
        elif not occupied[b] and start is not None:
            spans.append((tbx1 + start * resolution, tbx1 + b * resolution))
            start = None
    if start is not None:
        spans.append((tbx1 + start * resolution, tbx1 + nbins * resolution))
    return spans


def detect_rows(record: TableRecord) -> list[list[int]]:
    """Group word indices into rows by the reading-order scan.

    Words arrive left-to-right, top-to-bottom; a word whose x1 falls below its
    predecessor's starts a new row. Multi-line cells are a known limitation.
    """
    rows: list[list[int]] = []
    prev_x1 = None
    for k, w in enumerate(record.words):
        if prev_x1 is None or w.x1 < prev_x1:
            rows.append([k])
        else:
            rows[-1].append(k)
        prev_x1 = w.x1
    return rows


def _swap_by_rank(
    g: TableGraph, group_a: list[int], group_b: list[int], sort_key
) -> TableGraph:
    """Exchange feature rows pairwise by rank; surplus nodes keep theirs."""
    a_sorted = sorted(group_a, key=sort_key)
    b_sorted = sorted(group_b, key=sort_key)
    features = g.features.copy()
    for ia, ib in zip(a_sorted, b_sorted):
        features[[ia, ib]] = features[[ib, ia]]
    return TableGraph(record_id=g.record_id, label=g.label, features=features, edges=g.edges)


def column_members(
    record: TableRecord, spans: Sequence[tuple[float, float]], span_index: int
) -> list[int]:
    """Word indices whose box center x falls inside the half-open span."""
    x_start, x_end = spans[span_index]
    return [
        i for i, w in enumerate(record.words) if x_start <= (w.x1 + w.x2) / 2.0 < x_end
    ]


def swap_columns(
    g: TableGraph,
    record: TableRecord,
    spans: Sequence[tuple[float, float]],
    i: int,
    j: int,
) -> TableGraph:
    """Swap node features between columns i and j, paired by (cy, cx) rank."""
    if i == j:
        raise ValueError("column indices must differ")
    members_i = column_members(record, spans, i)
    members_j = column_members(record, spans, j)
    if not members_i or not members_j:
        return g.copy()

    def key(idx: int):
        w = record.words[idx]
        return ((w.y1 + w.y2) / 2.0, (w.x1 + w.x2) / 2.0)

    return _swap_by_rank(g, members_i, members_j, key)


def swap_rows(
    g: TableGraph, record: TableRecord, rows: Sequence[list[int]], i: int, j: int
) -> TableGraph:
    """Swap node features between rows i and j, paired by center-x rank."""
    if i == j:
        raise ValueError("row indices must differ")
    if not rows[i] or not rows[j]:
        return g.copy()

    def key(idx: int):
        w = record.words[idx]
        return (w.x1 + w.x2) / 2.0

    return _swap_by_rank(g, list(rows[i]), list(rows[j]), key)


def _rebalance_quotas(counts: dict[ClassLabel, int], target: int) -> dict[ClassLabel, int]:
    """Water-fill per-class totals toward equality; never below existing counts."""
    labels = [lb for lb in ClassLabel if counts.get(lb, 0) > 0]
    quotas = {lb: counts[lb] for lb in labels}
    extra = target - sum(quotas.values())
    while extra > 0:
        lb = min(labels, key=lambda l: (quotas[l], l.value))
        quotas[lb] += 1
        extra -= 1
    return quotas


def _apply_random_op(
    op: AugOp,
    g: TableGraph,
    record: TableRecord,
    rng: np.random.Generator,
    cfg: AugmentConfig,
) -> TableGraph:
    fmin, fmax = cfg.removal_fraction_min, cfg.removal_fraction_max
    if op is AugOp.NODE_REMOVAL:
        return remove_random_nodes(g, rng, fmin, fmax)
    if op is AugOp.EDGE_REMOVAL:
        return remove_random_edges(g, rng, fmin, fmax)
    if op is AugOp.COLUMN_SWAP:
        spans = detect_columns(record)
        usable = [k for k in range(len(spans)) if column_members(record, spans, k)]
        if len(usable) < 2:
            return g.copy()
        pairs = list(combinations(usable, 2))
        i, j = pairs[int(rng.integers(len(pairs)))]
        return swap_columns(g, record, spans, i, j)
    if op is AugOp.ROW_SWAP:
        rows = detect_rows(record)
        if len(rows) < 2:
            return g.copy()
        pairs = list(combinations(range(len(rows)), 2))
        i, j = pairs[int(rng.integers(len(pairs)))]
        return swap_rows(g, record, rows, i, j)
    raise ValueError(f"unknown op {op}")


def augment_to_size(
    train: Sequence[tuple[TableGraph, TableRecord]],
    target: int,
    cfg: AugmentConfig,
) -> list[TableGraph]:
    """Grow a train set to `target` graphs with per-class round-robin augmentation.

    Originals are retained; new graphs cycle over each class's sources in
    order, each applying one op drawn uniformly from cfg.ops_enabled. Classes
    with fewer members receive proportionally more generated graphs.
    Deterministic for a fixed cfg.seed.
    """
    if target < len(train):
        raise ValueError(f"target {target} is below the train size {len(train)}")
    for g, rec in train:
        if g.label is None:
            raise ValueError(f"graph {g.record_id!r} is unlabeled")
        if g.record_id != rec.id:
            raise ValueError(f"graph/record mismatch: {g.record_id!r} vs {rec.id!r}")

    result = [g for g, _ in train]
    if target == len(train):
        return result

    by_class: dict[ClassLabel, list[tuple[TableGraph, TableRecord]]] = {}
    for pair in train:
        by_class.setdefault(pair[0].label, []).append(pair)
    counts = {lb: len(pairs) for lb, pairs in by_class.items()}
    quotas = _rebalance_quotas(counts, target)

    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    ops = cfg.ops_enabled
    for label in sorted(by_class, key=lambda l: l.value):
        pairs = by_class[label]
        for k in range(quotas[label] - len(pairs)):
            g, rec = pairs[k % len(pairs)]
            op = ops[int(rng.integers(len(ops)))]
            result.append(_apply_random_op(op, g, rec, rng, cfg))
    return result
