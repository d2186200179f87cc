"""Sublevel-set lifting: label maps <-> nested binary stacks.

A label map takes values in {1, ..., L}; its lifting is the stack of L-1
masks u_g(x) = [label(x) <= g]. Stacks are stored as float arrays of
shape (L-1, height, width) and are valid when the channels are
pointwise nondecreasing: 0 <= u_1 <= ... <= u_{L-1} <= 1.
"""

from __future__ import annotations

import numpy as np


def _check_labels(labels, num_classes: int) -> np.ndarray:
    lab = np.asarray(labels)
    if lab.ndim != 2:
        raise ValueError("label map must be 2-D")
    if not np.issubdtype(lab.dtype, np.integer):
        if not np.all(lab == np.round(lab)):
            raise ValueError("label map must hold integers")
        lab = lab.astype(int)
    if num_classes < 2:
        raise ValueError("need at least 2 classes")
    if lab.min() < 1 or lab.max() > num_classes:
        raise ValueError(f"labels must lie in 1..{num_classes}")
    return lab


def label_to_sublevel(labels, num_classes: int) -> np.ndarray:
    """Stack of indicator masks [label <= g] for g = 1, ..., L-1."""
    lab = _check_labels(labels, num_classes)
    gammas = np.arange(1, num_classes)
    return (lab[None, :, :] <= gammas[:, None, None]).astype(float)


def sublevel_to_label(stack) -> np.ndarray:
    """Recover labels as L - sum_g [u_g >= 0.5]."""
    s = np.asarray(stack, dtype=float)
    if s.ndim != 3:
        raise ValueError("stack must have shape (channels, height, width)")
    num_classes = s.shape[0] + 1
    return num_classes - (s >= 0.5).sum(axis=0)


def _isotonic_ascending(y: np.ndarray) -> np.ndarray:
    """L2 isotonic regression along axis 0 (pool-adjacent-violators fit).

    Uses the minimax representation of the pooled solution,
    out_i = max_{j<=i} min_{k>=i} mean(y[j..k]), which equals the PAV
    output exactly and vectorizes over pixels; channel counts are small,
    so the cubic channel loop is cheap.
    """
    c = y.shape[0]
    csum = np.zeros((c + 1,) + y.shape[1:])
    np.cumsum(y, axis=0, out=csum[1:])

    def seg_mean(j, k):
        return (csum[k + 1] - csum[j]) / (k + 1 - j)

    out = np.empty_like(y)
    for i in range(c):
        best = None
        for j in range(i + 1):
            cur = seg_mean(j, i)
            for k in range(i + 1, c):
                cur = np.minimum(cur, seg_mean(j, k))
            best = cur if best is None else np.maximum(best, cur)
        out[i] = best
    return out


def project_nested(raw) -> np.ndarray:
    """Euclidean projection onto {0 <= u_1 <= ... <= u_{L-1} <= 1}.

    Per pixel: isotonic regression along the channel axis followed by a
    clamp to [0, 1]. The clamp after the chain fit is exact because the
    box is symmetric under the ordering.
    """
    y = np.asarray(raw, dtype=float)
    if y.ndim != 3:
        raise ValueError("expected shape (channels, height, width)")
    if y.shape[0] == 1:
        return np.clip(y, 0.0, 1.0)
    return np.clip(_isotonic_ascending(y), 0.0, 1.0)
