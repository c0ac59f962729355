"""Word-vector export in the graph builder's vector-file format.

The file starts with a `<vocab_size> <dim>` header followed by one
`token v1 ... vdim` line per token. Tokens are lowercased and deduplicated
before writing (first occurrence wins), matching what the consuming loader
enforces.

Two stand-in vocabularies ship here: "web" (300-d) and "sci" (200-d). They
hash each token to a stable pseudo-vector, so exports are deterministic and
need no model download; swap in a real vocabulary by passing any object with
a `dim` attribute and a `get(token) -> sequence | None` method.
"""

from __future__ import annotations

import hashlib
import logging
from pathlib import Path

import numpy as np

log = logging.getLogger("tabextract")

VOCABULARY_DIMS = {"web": 300, "sci": 200}


class HashedVocabulary:
    """Deterministic token -> vector map: blake2b of the token seeds a PCG64
    draw of `dim` uniforms in [-1, 1)."""

    def __init__(self, dim: int, seed: int = 0):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = dim
        self._key = int(seed).to_bytes(8, "little", signed=True)

    def get(self, token: str) -> np.ndarray:
        digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8, key=self._key)
        rng = np.random.Generator(np.random.PCG64(int.from_bytes(digest.digest(), "little")))
        return rng.uniform(-1.0, 1.0, size=self.dim)


def vocabulary(kind: str, seed: int = 0) -> HashedVocabulary:
    if kind not in VOCABULARY_DIMS:
        raise ValueError(f"unknown vocabulary {kind!r} (choose from {sorted(VOCABULARY_DIMS)})")
    return HashedVocabulary(VOCABULARY_DIMS[kind], seed=seed)


def export_vectors(vocab, tokens, out_path: str | Path) -> int:
    """Write vectors for `tokens` (lowercased, deduplicated, first occurrence
    order); returns the number of lines written. Tokens that are empty or
    contain whitespace are skipped with a warning, as are tokens the
    vocabulary has no vector for."""
    seen: set[str] = set()
    lines: list[str] = []
    for token in tokens:
        if not token or any(ch.isspace() for ch in token):
            log.warning("skipping unusable token %r", token)
            continue
        low = token.lower()
        if low in seen:
            continue
        vec = vocab.get(low)
        if vec is None:
            log.warning("vocabulary has no vector for %r, skipped", low)
            continue
        values = [float(v) for v in vec]
        if len(values) != vocab.dim:
            raise ValueError(
                f"vocabulary returned {len(values)} values for {low!r}, expected {vocab.dim}"
            )
        seen.add(low)
        lines.append(low + " " + " ".join(repr(v) for v in values))
    out = Path(out_path)
    out.write_text(f"{len(lines)} {vocab.dim}\n" + "".join(line + "\n" for line in lines),
                   encoding="utf-8")
    return len(lines)


def tokens_from_records(path: str | Path) -> list[str]:
    """All word texts from a record file, in file order (duplicates kept)."""
    import json

    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(raw, list):
        raise ValueError(f"{path}: expected a JSON array of records")
    tokens = []
    for record in raw:
        for word in record.get("words", []):
            tokens.append(str(word.get("text", "")))
    return tokens
