"""Cross-entropy loss with the softmax folded in for numerical stability."""

from __future__ import annotations

import numpy as np

from ..errors import DataError


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def cross_entropy(logits: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean negative log softmax probability of the true class.

    Returns (loss, dlogits) where dlogits seeds the network backward pass.
    """
    labels = np.asarray(labels)
    batch, n = logits.shape
    if labels.min(initial=0) < 0 or labels.max(initial=-1) >= n:
        raise DataError(f"labels must lie in [0, {n}), got range [{labels.min()}, {labels.max()}]")
    z = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(z).sum(axis=1))
    loss = float(np.mean(log_norm - z[np.arange(batch), labels]))
    probs = softmax(logits)
    probs[np.arange(batch), labels] -= 1.0
    return loss, (probs / batch).astype(logits.dtype)
