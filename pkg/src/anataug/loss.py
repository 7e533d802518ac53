"""Weighted cross-entropy over soft per-pixel targets.

The loss is -(1/N) sum_pixels sum_classes w_c * t_c * log(max(p_c, eps)),
with class weights inversely proportional to training pixel frequencies and
normalized to mean 1. Accepts numpy arrays (returns float) or torch tensors
(returns a differentiable 0-dim tensor); class axis is last.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from anataug.core import NUM_CLASSES, DatasetSplit

LOG_EPS = 1e-7

_CLASS_NAMES = ("background", "interior liver", "liver boundary",
                "metastasis", "hemangioma", "cyst")


@dataclass(frozen=True)
class ClassWeights:
    """Per-class positive loss weights, normalized to mean 1."""

    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64)
        if w.ndim != 1:
            raise ValueError("weights must be a 1D vector")
        if not (w > 0).all():
            raise ValueError("all class weights must be strictly positive")
        if abs(w.mean() - 1.0) > 1e-6:
            raise ValueError(f"weights must have mean 1, got {w.mean()!r}")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @classmethod
    def from_counts(cls, counts: np.ndarray, class_names=None) -> "ClassWeights":
        """Inverse-frequency weights from per-class pixel counts, mean 1."""
        counts = np.asarray(counts, dtype=np.float64)
        names = class_names or [str(i) for i in range(len(counts))]
        missing = np.flatnonzero(counts == 0)
        if missing.size:
            raise ValueError(
                "cannot weight classes with zero training pixels: "
                + ", ".join(names[i] for i in missing)
            )
        inv = 1.0 / (counts / counts.sum())
        return cls(inv / inv.mean())


def class_weights(train_set: DatasetSplit, num_classes: int = NUM_CLASSES) -> ClassWeights:
    """Inverse-frequency class weights over the labeled training pixels."""
    counts = np.zeros(num_classes, dtype=np.int64)
    for pack in train_set.train:
        counts += np.bincount(pack.labeled.labels.labels.ravel(), minlength=num_classes)
    names = _CLASS_NAMES if num_classes == NUM_CLASSES else None
    return ClassWeights.from_counts(counts, names)


def _weight_vector(weights) -> np.ndarray:
    w = weights.w if isinstance(weights, ClassWeights) else np.asarray(weights, dtype=np.float64)
    if not (w > 0).all():
        raise ValueError("all class weights must be strictly positive")
    return w


def weighted_soft_ce(pred, target, weights, eps: float = LOG_EPS):
    """Mean weighted soft cross-entropy over all pixels.

    ``pred`` holds per-pixel class probabilities and ``target`` the soft
    targets, both shaped (..., num_classes). Probabilities are clamped below
    by ``eps`` before the log.
    """
    w = _weight_vector(weights)
    if isinstance(pred, torch.Tensor):
        if pred.shape != target.shape:
            raise ValueError(f"pred shape {tuple(pred.shape)} != target shape {tuple(target.shape)}")
        wt = torch.as_tensor(w, dtype=pred.dtype, device=pred.device)
        n_pixels = pred.numel() // pred.shape[-1]
        terms = wt * target * torch.log(pred.clamp_min(eps))
        return -terms.sum() / n_pixels
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ValueError(f"pred shape {pred.shape} != target shape {target.shape}")
    n_pixels = pred.size // pred.shape[-1]
    terms = w * target * np.log(np.maximum(pred, eps))
    return float(-terms.sum() / n_pixels)


def softmax(logits: np.ndarray, axis: int = -1) -> np.ndarray:
    z = logits - logits.max(axis=axis, keepdims=True)
    ez = np.exp(z)
    return ez / ez.sum(axis=axis, keepdims=True)


def loss_gradient(pred_logits: np.ndarray, target: np.ndarray, weights,
                  eps: float = LOG_EPS) -> np.ndarray:
    """Analytic gradient of the mean weighted soft CE w.r.t. the logits.

    For p = softmax(z): dL/dz_k = (p_k * sum_c a_c - a_k) / N with
    a_c = w_c * t_c * 1{p_c > eps} (the clamp kills the log term below eps).
    """
    w = _weight_vector(weights)
    z = np.asarray(pred_logits, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    if z.shape != t.shape:
        raise ValueError(f"logits shape {z.shape} != target shape {t.shape}")
    p = softmax(z)
    a = w * t * (p > eps)
    n_pixels = z.size // z.shape[-1]
    return (p * a.sum(axis=-1, keepdims=True) - a) / n_pixels
