"""Independent reference implementations used to check the fast paths.

These stay deliberately naive: the visibility oracle tests every pair against
every potential blocker (O(n^3)), gradients come from central finite
differences, and metrics are computed with exact rational arithmetic.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from tabgraph.dataset import WordBox
from tabgraph.gnn import ModelParams, loss_and_grad


def _corridor_clear(boxes, u: int, v: int, axis: int) -> bool:
    """No third box's interior intersects the open band between u and v.

    axis 0: u and v are separated along x (band spans their y overlap);
    axis 1: separated along y.
    """
    ub, vb = boxes[u], boxes[v]
    if axis == 0:
        lo = min(ub[2], vb[2])
        hi = max(ub[0], vb[0])
        band_lo = max(ub[1], vb[1])
        band_hi = min(ub[3], vb[3])
    else:
        lo = min(ub[3], vb[3])
        hi = max(ub[1], vb[1])
        band_lo = max(ub[0], vb[0])
        band_hi = min(ub[2], vb[2])
    for w, wb in enumerate(boxes):
        if w in (u, v):
            continue
        if axis == 0:
            x_hit = max(lo, wb[0]) < min(hi, wb[2])
            y_hit = max(band_lo, wb[1]) < min(band_hi, wb[3])
        else:
            x_hit = max(band_lo, wb[0]) < min(band_hi, wb[2])
            y_hit = max(lo, wb[1]) < min(hi, wb[3])
        if x_hit and y_hit:
            return False
    return True


def visibility_oracle(words: list[WordBox]) -> list[tuple[int, int]]:
    """Brute-force visibility edges: every pair checked against every blocker."""
    boxes = [(w.x1, w.y1, w.x2, w.y2) for w in words]
    n = len(boxes)
    edges = set()
    for u in range(n):
        ux1, uy1, ux2, uy2 = boxes[u]
        # direction -> (candidate predicate, gap, axis)
        directions = {
            "right": (lambda b: b[0] >= ux2, lambda b: b[0] - ux2, 0),
            "left": (lambda b: b[2] <= ux1, lambda b: ux1 - b[2], 0),
            "down": (lambda b: b[1] >= uy2, lambda b: b[1] - uy2, 1),
            "up": (lambda b: b[3] <= uy1, lambda b: uy1 - b[3], 1),
        }
        for pred, gap_of, axis in directions.values():
            best = None
            best_gap = None
            for v in range(n):
                if v == u:
                    continue
                vb = boxes[v]
                if axis == 0:
                    overlap = min(uy2, vb[3]) - max(uy1, vb[1])
                else:
                    overlap = min(ux2, vb[2]) - max(ux1, vb[0])
                if overlap <= 0 or not pred(vb):
                    continue
                gap = gap_of(vb)
                if best is None or gap < best_gap:
                    best, best_gap = v, gap
            if best is not None and _corridor_clear(boxes, u, best, axis):
                edges.add((min(u, best), max(u, best)))
    return sorted(edges)


def finite_diff_grads(g, params: ModelParams, label, eps: float = 1e-5) -> ModelParams:
    """Central-difference gradient of the loss w.r.t. every parameter entry."""
    grads = {}
    for name, arr in params.arrays().items():
        grad = np.zeros_like(arr)
        flat = arr.ravel()
        gflat = grad.ravel()
        for k in range(flat.size):
            orig = flat[k]
            flat[k] = orig + eps
            loss_plus, _ = loss_and_grad(g, params, label)
            flat[k] = orig - eps
            loss_minus, _ = loss_and_grad(g, params, label)
            flat[k] = orig
            gflat[k] = (loss_plus - loss_minus) / (2.0 * eps)
        grads[name] = grad
    return ModelParams(**grads)


def max_relative_error(analytic: ModelParams, numeric: ModelParams) -> float:
    worst = 0.0
    num = numeric.arrays()
    for name, a in analytic.arrays().items():
        f = num[name]
        rel = np.abs(a - f) / np.maximum(np.abs(a) + np.abs(f), 1e-6)
        worst = max(worst, float(rel.max()))
    return worst


def fraction_metrics(cm) -> dict:
    """Exact per-class and macro P/R/F1 from integer counts."""
    cm = [[int(v) for v in row] for row in cm]
    n = len(cm)
    out = {"precision": [], "recall": [], "f1": []}
    for c in range(n):
        tp = cm[c][c]
        fp = sum(cm[r][c] for r in range(n)) - tp
        fn = sum(cm[c][r] for r in range(n)) - tp
        p = Fraction(tp, tp + fp) if tp + fp > 0 else Fraction(0)
        r = Fraction(tp, tp + fn) if tp + fn > 0 else Fraction(0)
        f1 = 2 * p * r / (p + r) if p + r > 0 else Fraction(0)
        out["precision"].append(p)
        out["recall"].append(r)
        out["f1"].append(f1)
    for key in ("precision", "recall", "f1"):
        out[f"macro_{key}"] = sum(out[key], Fraction(0)) / n
    return out


def dense_gcn_layer(H, a_dense, W, b, relu: bool) -> np.ndarray:
    z = a_dense @ H @ W + b
    return np.maximum(z, 0.0) if relu else z


def mlp_forward(x, params: ModelParams) -> np.ndarray:
    """Plain 3-layer MLP on one feature vector (single-node graph equivalence)."""
    h1 = np.maximum(x @ params.W1 + params.b1, 0.0)
    h2 = np.maximum(h1 @ params.W2 + params.b2, 0.0)
    return h2 @ params.W3 + params.b3
