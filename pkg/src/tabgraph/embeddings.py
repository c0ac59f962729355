"""Text embedders for word nodes.

VectorTable wraps a static-vector file (one pretrained vector per token);
HashEmbedder is a deterministic stand-in used when no pretrained vectors are
around (tests, smoke runs). Both are safe to share across threads for
read-only lookups.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import numpy as np


class Embedder(Protocol):
    embed_dim: int

    def embed(self, text: str) -> np.ndarray: ...


@dataclass(frozen=True)
class HashEmbedder:
    """Deterministic pseudo-embedding: components uniform in [-1, 1].

    The vector depends only on (text, seed, embed_dim) — derived through
    hashlib, so it is stable across processes and platforms.
    """

    embed_dim: int = 16
    seed: int = 0

    def __post_init__(self):
        if self.embed_dim <= 0:
            raise ValueError("embed_dim must be positive")

    def embed(self, text: str) -> np.ndarray:
        digest = hashlib.blake2b(
            text.encode("utf-8"), digest_size=8, key=self.seed.to_bytes(8, "little")
        ).digest()
        rng = np.random.Generator(np.random.PCG64(int.from_bytes(digest, "little")))
        return rng.uniform(-1.0, 1.0, self.embed_dim)


@dataclass
class VectorTable:
    """Case-insensitive token -> vector lookup with a configurable OOV policy."""

    vectors: dict[str, np.ndarray]
    embed_dim: int
    oov_policy: str = "zero"  # "zero" | "hash"
    _oov_hash: HashEmbedder = field(init=False, repr=False)

    def __post_init__(self):
        if self.oov_policy not in ("zero", "hash"):
            raise ValueError(f"unknown OOV policy {self.oov_policy!r}")
        for token, vec in self.vectors.items():
            if vec.shape != (self.embed_dim,):
                raise ValueError(f"vector for {token!r} has wrong length {vec.shape}")
        self._oov_hash = HashEmbedder(embed_dim=self.embed_dim)

    def __len__(self) -> int:
        return len(self.vectors)

    def embed(self, text: str) -> np.ndarray:
        vec = self.vectors.get(text.lower())
        if vec is not None:
            return vec
        if self.oov_policy == "hash":
            return self._oov_hash.embed(text.lower())
        return np.zeros(self.embed_dim)


class VectorFileError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"{message} (line {line})")
        self.line = line


def load_vector_table(path: str | Path, oov_policy: str = "zero") -> VectorTable:
    """Load a vector file: header `<vocab_size> <embed_dim>`, then `<token> v1 ... vd` lines."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].strip():
        raise VectorFileError(f"empty vector file: {path}")
    header = lines[0].split()
    if len(header) != 2:
        raise VectorFileError("header must be '<vocab_size> <embed_dim>'", line=1)
    try:
        vocab_size, embed_dim = int(header[0]), int(header[1])
    except ValueError:
        raise VectorFileError("header must hold two integers", line=1) from None
    if vocab_size < 0 or embed_dim <= 0:
        raise VectorFileError("header values out of range", line=1)

    vectors: dict[str, np.ndarray] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if not parts:
            raise VectorFileError("blank line inside vector file", line=lineno)
        token = parts[0].lower()
        if len(parts) - 1 != embed_dim:
            raise VectorFileError(
                f"expected {embed_dim} values for token {token!r}, got {len(parts) - 1}",
                line=lineno,
            )
        if token in vectors:
            raise VectorFileError(f"duplicate token {token!r}", line=lineno)
        try:
            vec = np.array([float(v) for v in parts[1:]], dtype=np.float64)
        except ValueError:
            raise VectorFileError(f"non-numeric value for token {token!r}", line=lineno) from None
        if not np.all(np.isfinite(vec)):
            raise VectorFileError(f"non-finite value for token {token!r}", line=lineno)
        vectors[token] = vec

    if len(vectors) != vocab_size:
        raise VectorFileError(
            f"header declares {vocab_size} tokens but file holds {len(vectors)}"
        )
    return VectorTable(vectors=vectors, embed_dim=embed_dim, oov_policy=oov_policy)
