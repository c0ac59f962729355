"""TableRecord -> TableGraph conversion.

Node i carries 6 geometric features (normalized center, size, top-left
corner) concatenated with the text embedding of word i; edges come from the
visibility scan. Node order preserves the record's word order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .dataset import ClassLabel, TableRecord, WordBox
from .embeddings import Embedder
from .visibility import visibility_edges

N_GEOM_FEATURES = 6


class GeomFeatures(NamedTuple):
    cx: float
    cy: float
    w: float
    h: float
    rx1: float
    ry1: float


@dataclass(frozen=True)
class TableGraph:
    """One table as a graph: features (n x d), undirected edges, class label."""

    record_id: str
    label: ClassLabel | None
    features: np.ndarray
    edges: tuple[tuple[int, int], ...]

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]

    def copy(self) -> "TableGraph":
        return TableGraph(
            record_id=self.record_id,
            label=self.label,
            features=self.features.copy(),
            edges=self.edges,
        )

    def validate(self) -> None:
        if self.features.ndim != 2 or self.n == 0:
            raise ValueError("features must be a non-empty 2-D matrix")
        if not np.all(np.isfinite(self.features)):
            raise ValueError("features must be finite")
        seen = set()
        for i, j in self.edges:
            if i == j:
                raise ValueError(f"self-loop at node {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={self.n}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)


def geom_features(word: WordBox, table_bbox: tuple[float, float, float, float]) -> GeomFeatures:
    """Normalized center, relative size and top-left corner of a word box."""
    tbx1, tby1, tbx2, tby2 = table_bbox
    tw = tbx2 - tbx1
    th = tby2 - tby1
    if tw <= 0 or th <= 0:
        raise ValueError(f"table bbox has non-positive extent: {table_bbox}")
    return GeomFeatures(
        cx=((word.x1 + word.x2) / 2.0 - tbx1) / tw,
        cy=((word.y1 + word.y2) / 2.0 - tby1) / th,
        w=(word.x2 - word.x1) / tw,
        h=(word.y2 - word.y1) / th,
        rx1=(word.x1 - tbx1) / tw,
        ry1=(word.y1 - tby1) / th,
    )


def build_graph(record: TableRecord, embedder: Embedder) -> TableGraph:
    """Build the visibility graph with geometry + embedding node features.

    Unlabeled records are allowed (graph.label is None); they can be used for
    prediction but are rejected by training and evaluation.
    """
    if not record.words:
        raise ValueError(f"record {record.id!r} has no words; cannot build a graph")
    dim = N_GEOM_FEATURES + embedder.embed_dim
    features = np.empty((len(record.words), dim), dtype=np.float64)
    for i, word in enumerate(record.words):
        features[i, :N_GEOM_FEATURES] = geom_features(word, record.table_bbox)
        vec = np.asarray(embedder.embed(word.text), dtype=np.float64)
        if vec.shape != (embedder.embed_dim,):
            raise ValueError(
                f"embedder returned shape {vec.shape}, expected ({embedder.embed_dim},)"
            )
        if not np.all(np.isfinite(vec)):
            raise ValueError(f"embedder returned non-finite values for {word.text!r}")
        features[i, N_GEOM_FEATURES:] = vec
    edges = tuple(visibility_edges(record.words))
    return TableGraph(record_id=record.id, label=record.label, features=features, edges=edges)


def save_graphs(graphs: Sequence[TableGraph], path: str | Path) -> None:
    """Write graphs as JSON (features row-major, edges as index pairs)."""
    payload = {
        "feature_dim": graphs[0].feature_dim if graphs else 0,
        "graphs": [
            {
                "record_id": g.record_id,
                "label": g.label.display_name if g.label is not None else None,
                "n": g.n,
                "features": [list(row) for row in g.features],
                "edges": [list(e) for e in g.edges],
            }
            for g in graphs
        ],
    }
    Path(path).write_text(json.dumps(payload, ensure_ascii=False), encoding="utf-8")


def load_graphs(path: str | Path) -> list[TableGraph]:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    graphs = []
    for item in raw["graphs"]:
        label = ClassLabel.from_name(item["label"]) if item["label"] is not None else None
        g = TableGraph(
            record_id=item["record_id"],
            label=label,
            features=np.array(item["features"], dtype=np.float64).reshape(item["n"], -1),
            edges=tuple((int(i), int(j)) for i, j in item["edges"]),
        )
        g.validate()
        graphs.append(g)
    return graphs
