"""Softmax, cross-entropy and mean-squared-error with their gradients."""

import numpy as np

PROB_FLOOR = 1e-12


def softmax(logits: np.ndarray) -> np.ndarray:
    z = np.asarray(logits, dtype=float)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def one_hot(labels, num_classes: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    out = np.zeros((labels.shape[0], num_classes))
    out[np.arange(labels.shape[0]), labels] = 1.0
    return out


def _check_shapes(a, b):
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")


def cross_entropy(probs: np.ndarray, targets: np.ndarray) -> float:
    """Batch-mean cross-entropy; probabilities are clamped to [1e-12, 1]."""
    probs = np.atleast_2d(np.asarray(probs, dtype=float))
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    _check_shapes(probs, targets)
    logp = np.log(np.clip(probs, PROB_FLOOR, 1.0))
    return float(-(targets * logp).sum() / probs.shape[0])


def cross_entropy_grad_logits(probs: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """d(cross_entropy(softmax(z)))/dz for the batch mean."""
    _check_shapes(probs, targets)
    return (probs - targets) / probs.shape[0]


def mse(pred: np.ndarray, target: np.ndarray) -> float:
    pred = np.asarray(pred, dtype=float)
    target = np.asarray(target, dtype=float)
    _check_shapes(pred, target)
    return float(np.mean((pred - target) ** 2))


def mse_grad(pred: np.ndarray, target: np.ndarray) -> np.ndarray:
    _check_shapes(pred, target)
    return 2.0 * (pred - target) / pred.size
