"""Graph convolutional classifier: two message-passing layers, mean readout,
linear head, cross-entropy loss and exact analytic gradients.

Message passing uses the symmetrically normalized adjacency with self-loops,
A_hat = D^(-1/2) (A + I) D^(-1/2); a layer computes act(A_hat @ H @ W + b).
Everything runs in 64-bit floats and is bitwise deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .dataset import ClassLabel
from .graphs import TableGraph

N_CLASSES = 4


@dataclass
class ModelParams:
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    W3: np.ndarray
    b3: np.ndarray

    @property
    def d(self) -> int:
        return self.W1.shape[0]

    @property
    def h(self) -> int:
        return self.W1.shape[1]

    def arrays(self) -> dict[str, np.ndarray]:
        return {"W1": self.W1, "b1": self.b1, "W2": self.W2, "b2": self.b2,
                "W3": self.W3, "b3": self.b3}

    def copy(self) -> "ModelParams":
        return ModelParams(**{k: v.copy() for k, v in self.arrays().items()})

    def validate(self) -> None:
        d, h = self.d, self.h
        expected = {"W1": (d, h), "b1": (h,), "W2": (h, h), "b2": (h,),
                    "W3": (h, N_CLASSES), "b3": (N_CLASSES,)}
        for name, arr in self.arrays().items():
            if arr.shape != expected[name]:
                raise ValueError(f"{name} has shape {arr.shape}, expected {expected[name]}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} holds non-finite values")


def init_params(d: int, h: int, rng: np.random.Generator) -> ModelParams:
    """Glorot-uniform weight matrices, zero biases."""

    def glorot(fan_in: int, fan_out: int) -> np.ndarray:
        a = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-a, a, (fan_in, fan_out))

    return ModelParams(
        W1=glorot(d, h), b1=np.zeros(h),
        W2=glorot(h, h), b2=np.zeros(h),
        W3=glorot(h, N_CLASSES), b3=np.zeros(N_CLASSES),
    )


@dataclass(frozen=True)
class NormAdjacency:
    """Sparse symmetric A_hat as (row, col, value) triples in canonical order."""

    n: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray

    def matmul(self, H: np.ndarray) -> np.ndarray:
        out = np.zeros((self.n, H.shape[1]), dtype=np.float64)
        np.add.at(out, self.rows, self.vals[:, None] * H[self.cols])
        return out

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.n, self.n), dtype=np.float64)
        dense[self.rows, self.cols] = self.vals
        return dense


def normalize_adjacency(edges: Sequence[tuple[int, int]], n: int) -> NormAdjacency:
    """A_hat = D^(-1/2) (A + I) D^(-1/2); isolated nodes keep a unit self-loop."""
    if n < 1:
        raise ValueError("graph must have at least one node")
    deg = np.ones(n, dtype=np.float64)  # self-loop counts toward the degree
    for i, j in edges:
        if i == j:
            raise ValueError(f"self-loop at node {i}")
        deg[i] += 1.0
        deg[j] += 1.0
    inv_sqrt = 1.0 / np.sqrt(deg)

    triples = [(i, i, inv_sqrt[i] * inv_sqrt[i]) for i in range(n)]
    for i, j in edges:
        v = inv_sqrt[i] * inv_sqrt[j]
        triples.append((i, j, v))
        triples.append((j, i, v))
    triples.sort(key=lambda t: (t[0], t[1]))
    rows = np.array([t[0] for t in triples], dtype=np.intp)
    cols = np.array([t[1] for t in triples], dtype=np.intp)
    vals = np.array([t[2] for t in triples], dtype=np.float64)
    return NormAdjacency(n=n, rows=rows, cols=cols, vals=vals)


def gcn_layer(
    H: np.ndarray,
    adj: NormAdjacency,
    W: np.ndarray,
    b: np.ndarray,
    activation: str = "relu",
) -> np.ndarray:
    """act(A_hat @ H @ W + b); activation is 'relu' or 'none'."""
    if H.shape[0] != adj.n or H.shape[1] != W.shape[0] or W.shape[1] != b.shape[0]:
        raise ValueError(
            f"shape mismatch: H {H.shape}, A {adj.n}x{adj.n}, W {W.shape}, b {b.shape}"
        )
    z = adj.matmul(H) @ W + b
    if activation == "relu":
        return np.maximum(z, 0.0)
    if activation == "none":
        return z
    raise ValueError(f"unknown activation {activation!r}")


def mean_readout(H: np.ndarray) -> np.ndarray:
    """Column-wise mean over nodes."""
    if H.shape[0] == 0:
        raise ValueError("cannot read out an empty node matrix")
    return np.sum(H, axis=0) / H.shape[0]


@dataclass(frozen=True)
class ForwardTrace:
    adj: NormAdjacency
    x: np.ndarray
    ax: np.ndarray
    z1: np.ndarray
    h1: np.ndarray
    ah1: np.ndarray
    z2: np.ndarray
    h2: np.ndarray
    readout: np.ndarray
    logits: np.ndarray


def forward(g: TableGraph, p: ModelParams) -> tuple[np.ndarray, ForwardTrace]:
    """Logits for the four classes plus the cached intermediates for backprop."""
    x = g.features
    if x.shape[1] != p.d:
        raise ValueError(f"graph feature dim {x.shape[1]} does not match params d={p.d}")
    adj = normalize_adjacency(g.edges, g.n)
    ax = adj.matmul(x)
    z1 = ax @ p.W1 + p.b1
    h1 = np.maximum(z1, 0.0)
    ah1 = adj.matmul(h1)
    z2 = ah1 @ p.W2 + p.b2
    h2 = np.maximum(z2, 0.0)
    readout = mean_readout(h2)
    logits = readout @ p.W3 + p.b3
    return logits, ForwardTrace(
        adj=adj, x=x, ax=ax, z1=z1, h1=h1, ah1=ah1, z2=z2, h2=h2, readout=readout, logits=logits
    )


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - np.max(logits)
    e = np.exp(shifted)
    return e / np.sum(e)


def loss_and_grad(
    g: TableGraph, p: ModelParams, label: ClassLabel | int
) -> tuple[float, ModelParams]:
    """Cross-entropy loss and exact analytic gradients for every parameter."""
    y = int(label)
    if not 0 <= y < N_CLASSES:
        raise ValueError(f"label {y} out of range")
    logits, t = forward(g, p)

    shifted = logits - np.max(logits)
    logsumexp = np.log(np.sum(np.exp(shifted)))
    loss = float(logsumexp - shifted[y])

    n = g.n
    dlogits = np.exp(shifted - logsumexp)
    dlogits[y] -= 1.0

    dW3 = np.outer(t.readout, dlogits)
    db3 = dlogits.copy()
    dreadout = p.W3 @ dlogits

    dh2 = np.tile(dreadout / n, (n, 1))
    dz2 = dh2 * (t.z2 > 0.0)
    dW2 = t.ah1.T @ dz2
    db2 = np.sum(dz2, axis=0)
    dah1 = dz2 @ p.W2.T
    dh1 = t.adj.matmul(dah1)  # A_hat is symmetric
    dz1 = dh1 * (t.z1 > 0.0)
    dW1 = t.ax.T @ dz1
    db1 = np.sum(dz1, axis=0)

    return loss, ModelParams(W1=dW1, b1=db1, W2=dW2, b2=db2, W3=dW3, b3=db3)


def predict(g: TableGraph, p: ModelParams) -> ClassLabel:
    """Argmax class; ties resolve to the lowest class index."""
    logits, _ = forward(g, p)
    return ClassLabel(int(np.argmax(logits)))


def predict_proba(g: TableGraph, p: ModelParams) -> np.ndarray:
    logits, _ = forward(g, p)
    return softmax(logits)


def save_checkpoint(p: ModelParams, path: str | Path) -> None:
    """JSON checkpoint: dims plus row-major flattened weight arrays."""
    p.validate()
    payload = {"d": p.d, "h": p.h}
    payload.update({k: v.ravel().tolist() for k, v in p.arrays().items()})
    Path(path).write_text(json.dumps(payload), encoding="utf-8")


def load_checkpoint(path: str | Path) -> ModelParams:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    d, h = int(raw["d"]), int(raw["h"])
    shapes = {"W1": (d, h), "b1": (h,), "W2": (h, h), "b2": (h,),
              "W3": (h, N_CLASSES), "b3": (N_CLASSES,)}
    arrays = {}
    for name, shape in shapes.items():
        arr = np.array(raw[name], dtype=np.float64).reshape(shape)
        arrays[name] = arr
    params = ModelParams(**arrays)
    params.validate()
    return params
