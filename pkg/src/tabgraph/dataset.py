"""Table records: on-disk format, validation, class counts and the train/test split.

A record file is a UTF-8 JSON array of objects::

    { "id": str, "doc_id": str, "page": int,
      "table_bbox": [x1, y1, x2, y2],
      "label": "Observation" | "Input" | "Example" | "Other" | null,
      "words": [ { "text": str, "bbox": [x1, y1, x2, y2] } ] }

Coordinates are PDF points with the origin at the page's top-left corner and
y growing downward. A manifest file wraps the same records together with the
split parameters.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import IntEnum
from math import isfinite
from pathlib import Path

import numpy as np

# Word boxes may stick out of the table box by this much per edge (pt).
CONTAINMENT_SLACK = 2.0


class ClassLabel(IntEnum):
    OBSERVATION = 0
    INPUT = 1
    EXAMPLE = 2
    OTHER = 3

    @property
    def display_name(self) -> str:
        return self.name.capitalize()

    @classmethod
    def from_name(cls, name: str) -> "ClassLabel":
        try:
            return cls[name.upper()]
        except KeyError:
            raise ValueError(f"unknown class label {name!r}") from None


class RecordParseError(ValueError):
    """Record file is not valid JSON."""

    def __init__(self, message: str, byte_offset: int):
        super().__init__(f"{message} (byte offset {byte_offset})")
        self.byte_offset = byte_offset


class RecordValidationError(ValueError):
    """Record file parsed but violates the schema or an invariant."""

    def __init__(self, message: str, record_id: str | None = None, field: str | None = None):
        parts = [message]
        if record_id is not None:
            parts.append(f"record id: {record_id!r}")
        if field is not None:
            parts.append(f"field: {field}")
        super().__init__("; ".join(parts))
        self.record_id = record_id
        self.field = field


@dataclass(frozen=True)
class WordBox:
    """One extracted word with its axis-aligned page-coordinate box."""

    text: str
    x1: float
    y1: float
    x2: float
    y2: float

    @property
    def center(self) -> tuple[float, float]:
        return ((self.x1 + self.x2) / 2.0, (self.y1 + self.y2) / 2.0)


@dataclass(frozen=True)
class TableRecord:
    """A labeled table: its word boxes in extractor reading order."""

    id: str
    doc_id: str
    page: int
    table_bbox: tuple[float, float, float, float]
    words: tuple[WordBox, ...]
    label: ClassLabel | None


@dataclass
class DatasetManifest:
    records: list[TableRecord]
    split_seed: int = 0
    train_fraction: float = 0.2


def _require_finite_bbox(bbox, record_id: str, field: str) -> tuple[float, float, float, float]:
    if not isinstance(bbox, (list, tuple)) or len(bbox) != 4:
        raise RecordValidationError("bbox must be a 4-element array", record_id, field)
    vals = []
    for v in bbox:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not isfinite(float(v)):
            raise RecordValidationError("bbox values must be finite numbers", record_id, field)
        vals.append(float(v))
    x1, y1, x2, y2 = vals
    if not (x1 < x2 and y1 < y2):
        raise RecordValidationError(
            f"degenerate bbox [{x1}, {y1}, {x2}, {y2}] (need x1 < x2 and y1 < y2)",
            record_id,
            field,
        )
    return x1, y1, x2, y2


def _parse_word(raw, idx: int, record_id: str, table_bbox) -> WordBox:
    field = f"words[{idx}]"
    if not isinstance(raw, dict):
        raise RecordValidationError("word must be an object", record_id, field)
    text = raw.get("text")
    if not isinstance(text, str) or not text.strip():
        raise RecordValidationError("word text must be a non-empty string", record_id, f"{field}.text")
    x1, y1, x2, y2 = _require_finite_bbox(raw.get("bbox"), record_id, f"{field}.bbox")
    tbx1, tby1, tbx2, tby2 = table_bbox
    s = CONTAINMENT_SLACK
    if x1 < tbx1 - s or y1 < tby1 - s or x2 > tbx2 + s or y2 > tby2 + s:
        raise RecordValidationError(
            "word box lies outside the table bbox (beyond the 2pt slack)",
            record_id,
            f"{field}.bbox",
        )
    return WordBox(text=text, x1=x1, y1=y1, x2=x2, y2=y2)


def _parse_record(raw, position: int) -> TableRecord:
    if not isinstance(raw, dict):
        raise RecordValidationError(f"records[{position}] must be an object")
    record_id = raw.get("id")
    if not isinstance(record_id, str) or not record_id:
        raise RecordValidationError(f"records[{position}] needs a non-empty string id", field="id")
    doc_id = raw.get("doc_id")
    if not isinstance(doc_id, str):
        raise RecordValidationError("doc_id must be a string", record_id, "doc_id")
    page = raw.get("page")
    if isinstance(page, bool) or not isinstance(page, int) or page < 0:
        raise RecordValidationError("page must be a non-negative integer", record_id, "page")
    table_bbox = _require_finite_bbox(raw.get("table_bbox"), record_id, "table_bbox")

    label_raw = raw.get("label")
    if label_raw is None:
        label = None
    elif isinstance(label_raw, str):
        try:
            label = ClassLabel.from_name(label_raw)
        except ValueError:
            raise RecordValidationError(f"unknown label {label_raw!r}", record_id, "label") from None
    else:
        raise RecordValidationError("label must be a string or null", record_id, "label")

    words_raw = raw.get("words")
    if not isinstance(words_raw, list):
        raise RecordValidationError("words must be an array", record_id, "words")
    words = tuple(_parse_word(w, i, record_id, table_bbox) for i, w in enumerate(words_raw))
    return TableRecord(
        id=record_id, doc_id=doc_id, page=page, table_bbox=table_bbox, words=words, label=label
    )


def parse_record_file(data: bytes) -> list[TableRecord]:
    """Parse and validate a record file; unlabeled records are kept with label None."""
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise RecordParseError("record file is not valid UTF-8", e.start) from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        offset = len(text[: e.pos].encode("utf-8"))
        raise RecordParseError(f"malformed JSON: {e.msg}", offset) from None
    if not isinstance(raw, list):
        raise RecordValidationError("top-level value must be a JSON array of records")
    records = [_parse_record(item, i) for i, item in enumerate(raw)]
    seen: set[str] = set()
    for rec in records:
        if rec.id in seen:
            raise RecordValidationError("duplicate record id", rec.id, "id")
        seen.add(rec.id)
    return records


def serialize_records(records: list[TableRecord]) -> bytes:
    """Inverse of parse_record_file (up to JSON float formatting, which round-trips)."""
    out = []
    for rec in records:
        out.append(
            {
                "id": rec.id,
                "doc_id": rec.doc_id,
                "page": rec.page,
                "table_bbox": list(rec.table_bbox),
                "label": rec.label.display_name if rec.label is not None else None,
                "words": [
                    {"text": w.text, "bbox": [w.x1, w.y1, w.x2, w.y2]} for w in rec.words
                ],
            }
        )
    return json.dumps(out, ensure_ascii=False, indent=1).encode("utf-8")


def load_record_file(path: str | Path) -> list[TableRecord]:
    return parse_record_file(Path(path).read_bytes())


def class_distribution(records: list[TableRecord]) -> dict[ClassLabel, int]:
    """Counts over labeled records; unlabeled records are excluded."""
    counts = {label: 0 for label in ClassLabel}
    for rec in records:
        if rec.label is not None:
            counts[rec.label] += 1
    return counts


def stratified_split(
    records: list[TableRecord], train_fraction: float, seed: int
) -> tuple[list[TableRecord], list[TableRecord]]:
    """Per-class split: each class contributes max(1, round(f * n_c)) train records.

    Sampling is uniform within each class under the seed; round() is Python's
    (half-to-even). Output lists preserve the input record order.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    for rec in records:
        if rec.label is None:
            raise ValueError(f"record {rec.id!r} is unlabeled; split requires labeled records")

    by_class: dict[ClassLabel, list[int]] = {label: [] for label in ClassLabel}
    for i, rec in enumerate(records):
        by_class[rec.label].append(i)

    rng = np.random.Generator(np.random.PCG64(seed))
    train_idx: set[int] = set()
    for label in ClassLabel:
        members = by_class[label]
        if not members:
            continue
        n_train = max(1, round(train_fraction * len(members)))
        order = rng.permutation(len(members))
        train_idx.update(members[j] for j in order[:n_train])

    train = [rec for i, rec in enumerate(records) if i in train_idx]
    test = [rec for i, rec in enumerate(records) if i not in train_idx]
    return train, test


def save_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    payload = {
        "records": json.loads(serialize_records(manifest.records).decode("utf-8")),
        "split_seed": manifest.split_seed,
        "train_fraction": manifest.train_fraction,
    }
    Path(path).write_text(json.dumps(payload, ensure_ascii=False, indent=1), encoding="utf-8")


def load_manifest(path: str | Path) -> DatasetManifest:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(raw, dict) or "records" not in raw:
        raise RecordValidationError("manifest must be an object with a 'records' array")
    records = parse_record_file(json.dumps(raw["records"]).encode("utf-8"))
    split_seed = raw.get("split_seed", 0)
    train_fraction = raw.get("train_fraction", 0.2)
    if isinstance(split_seed, bool) or not isinstance(split_seed, int) or split_seed < 0:
        raise RecordValidationError("split_seed must be a non-negative integer", field="split_seed")
    if not isinstance(train_fraction, (int, float)) or not 0.0 < float(train_fraction) < 1.0:
        raise RecordValidationError("train_fraction must be in (0, 1)", field="train_fraction")
    return DatasetManifest(
        records=records, split_seed=split_seed, train_fraction=float(train_fraction)
    )
