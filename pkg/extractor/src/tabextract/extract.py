"""Table-region word extraction into the record-file schema.

Annotations name a document, a page and a table box (top-left-origin points,
the same frame the records use). A word belongs to a region when its box
center lies inside it; words keep the page's reading order. Regions that
catch no words are skipped with a warning. The emitted table box is the
annotation box grown just enough to cover every selected word, so records
always satisfy the record file's containment rule.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

from .pdfread import PdfDocument, PdfError, Word, page_words

log = logging.getLogger("tabextract")

LABELS = ("Observation", "Input", "Example", "Other")


class AnnotationError(ValueError):
    """The annotation file is malformed."""


class ExtractError(Exception):
    """A region cannot be extracted; the message names the table id."""


@dataclass(frozen=True)
class TableRegionAnnotation:
    doc: str
    page: int
    table_bbox: tuple[float, float, float, float]
    table_id: str
    label: str | None = None

    def __post_init__(self):
        x1, y1, x2, y2 = self.table_bbox
        if not (x1 < x2 and y1 < y2):
            raise AnnotationError(
                f"table {self.table_id!r}: degenerate bbox {list(self.table_bbox)}"
            )
        if self.page < 0:
            raise AnnotationError(f"table {self.table_id!r}: negative page index")
        if not self.table_id:
            raise AnnotationError("annotation without a table id")
        if self.label is not None and self.label not in LABELS:
            raise AnnotationError(f"table {self.table_id!r}: unknown label {self.label!r}")


def load_annotations(path: str | Path) -> list[TableRegionAnnotation]:
    """Read a JSON array of {doc, page, table_bbox, id, label} objects."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise AnnotationError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(raw, list):
        raise AnnotationError(f"{path}: expected a JSON array of annotations")
    out = []
    for i, item in enumerate(raw):
        if not isinstance(item, dict):
            raise AnnotationError(f"{path}: annotation #{i} is not an object")
        try:
            out.append(
                TableRegionAnnotation(
                    doc=str(item["doc"]),
                    page=int(item["page"]),
                    table_bbox=tuple(float(v) for v in item["table_bbox"]),
                    table_id=str(item["id"]),
                    label=item.get("label"),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, AnnotationError):
                raise
            raise AnnotationError(f"{path}: annotation #{i}: {exc}") from exc
    return out


def _center_inside(word: Word, bbox: tuple[float, float, float, float]) -> bool:
    cx = (word.x1 + word.x2) / 2.0
    cy = (word.y1 + word.y2) / 2.0
    x1, y1, x2, y2 = bbox
    return x1 <= cx <= x2 and y1 <= cy <= y2


def extract_wordboxes(
    pdf_path: str | Path, annotations: list[TableRegionAnnotation]
) -> list[dict]:
    """Records (dataset schema dicts) for every annotated region of one PDF.

    Raises `PdfError` if the document is unreadable and `ExtractError` if an
    annotation points outside the document; zero-word regions are skipped
    with a warning instead.
    """
    doc = PdfDocument(pdf_path)
    pages = doc.pages()
    doc_id = Path(pdf_path).stem
    words_cache: dict[int, list[Word]] = {}
    records = []
    for ann in annotations:
        if ann.page >= len(pages):
            raise ExtractError(
                f"table {ann.table_id!r}: page {ann.page} out of range "
                f"({doc_id} has {len(pages)} pages)"
            )
        page = pages[ann.page]
        width = page.media_box[2] - page.media_box[0]
        height = page.media_box[3] - page.media_box[1]
        bx1, by1, bx2, by2 = ann.table_bbox
        if bx1 < 0 or by1 < 0 or bx2 > width or by2 > height:
            raise ExtractError(
                f"table {ann.table_id!r}: bbox {list(ann.table_bbox)} exceeds the "
                f"{width:g}x{height:g} pt page"
            )
        if ann.page not in words_cache:
            words_cache[ann.page] = page_words(doc, page)
        selected = [w for w in words_cache[ann.page] if _center_inside(w, ann.table_bbox)]
        if not selected:
            log.warning("table %r: no words inside region, skipped", ann.table_id)
            continue
        # grow the box to cover boxes whose center is inside but whose edges
        # poke out, so the record passes the dataset containment check
        x1 = min(bx1, min(w.x1 for w in selected))
        y1 = min(by1, min(w.y1 for w in selected))
        x2 = max(bx2, max(w.x2 for w in selected))
        y2 = max(by2, max(w.y2 for w in selected))
        records.append(
            {
                "id": ann.table_id,
                "doc_id": doc_id,
                "page": ann.page,
                "table_bbox": [x1, y1, x2, y2],
                "words": [
                    {"text": w.text, "bbox": [w.x1, w.y1, w.x2, w.y2]} for w in selected
                ],
                "label": ann.label,
            }
        )
    return records


def extract_batch(
    annotations: list[TableRegionAnnotation],
) -> tuple[list[dict], list[str]]:
    """Extract every annotated document; per-document failures do not stop
    the batch. Returns (records, error messages)."""
    by_doc: dict[str, list[TableRegionAnnotation]] = {}
    for ann in annotations:
        by_doc.setdefault(ann.doc, []).append(ann)
    records: list[dict] = []
    errors: list[str] = []
    for doc_path, group in by_doc.items():
        try:
            records.extend(extract_wordboxes(doc_path, group))
        except (PdfError, ExtractError, OSError) as exc:
            log.error("%s: %s", doc_path, exc)
            errors.append(f"{doc_path}: {exc}")
    return records, errors


def write_records(records: list[dict], path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(records, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
