"""PDF table-region word extraction and vector export."""

from .extract import (
    AnnotationError,
    ExtractError,
    TableRegionAnnotation,
    extract_batch,
    extract_wordboxes,
    load_annotations,
    write_records,
)
from .pdfread import PdfDocument, PdfError, Word, page_words
from .vectors import HashedVocabulary, export_vectors, tokens_from_records, vocabulary

__all__ = [
    "AnnotationError",
    "ExtractError",
    "HashedVocabulary",
    "PdfDocument",
    "PdfError",
    "TableRegionAnnotation",
    "Word",
    "export_vectors",
    "extract_batch",
    "extract_wordboxes",
    "load_annotations",
    "page_words",
    "tokens_from_records",
    "vocabulary",
    "write_records",
]
