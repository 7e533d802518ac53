"""Evaluation measures: Success, Dice1, Dice2, and majority-class accuracy.

Success and the Dice measures run over lesion-containing ground-truth images
(the reading consistent with the dice2 = dice1 * success identity); accuracy
runs over every image including healthy ones. A flag reproduces the
all-images denominator instead.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from anataug.core import LESION_CLASSES, AnnotatedSlice, LabelMap, image_level_class


@dataclass(frozen=True)
class ImageResult:
    volume_id: str
    z_index: int
    gt_class: str
    pred_class: str
    dice: float
    overlap: bool
    gt_has_lesion: bool


@dataclass(frozen=True)
class EvaluationReport:
    """Aggregate metrics over a test set, one table row per report."""

    dice1: float | None  # absent when no image overlaps
    dice2: float
    success: float
    acc: float
    n_images: int
    n_lesion_images: int
    per_image: tuple[ImageResult, ...]

    def metric_dict(self) -> dict:
        return {
            "dice1": self.dice1,
            "dice2": self.dice2,
            "success": self.success,
            "acc": self.acc,
        }


def binary_lesion_mask(labels: LabelMap) -> np.ndarray:
    """True exactly where the pixel class is a lesion class."""
    return np.isin(labels.labels, LESION_CLASSES)


def dice(a: np.ndarray, b: np.ndarray) -> float:
    """2|a&b| / (|a|+|b|); 1.0 when both masks are empty."""
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    if a.shape != b.shape:
        raise ValueError(f"mask shapes differ: {a.shape} vs {b.shape}")
    total = int(a.sum()) + int(b.sum())
    if total == 0:
        return 1.0
    return 2.0 * int((a & b).sum()) / total


def evaluate(
    preds: list[LabelMap],
    gts: list[AnnotatedSlice],
    lesion_only: bool = True,
) -> EvaluationReport:
    """Score post-processed predictions against annotated ground truth.

    Per lesion image: the overlap flag is a non-empty intersection of the
    binary lesion masks; success is the overlapping fraction, dice1 averages
    Dice over overlapping images, dice2 averages over all lesion images with
    0 for non-overlap. Accuracy compares majority-class labels over all
    images. ``lesion_only=False`` divides success/dice2 by every test image
    instead (both-empty Dice counts 1.0 there).
    """
    if len(preds) != len(gts):
        raise ValueError(f"got {len(preds)} predictions for {len(gts)} images")
    if not gts:
        raise ValueError("empty test set")

    results = []
    for pred, gt in zip(preds, gts):
        if pred.shape != gt.labels.shape:
            raise ValueError("prediction and ground truth dims differ")
        gmask = binary_lesion_mask(gt.labels)
        pmask = binary_lesion_mask(pred)
        overlap = bool((gmask & pmask).any())
        results.append(
            ImageResult(
                volume_id=gt.slice.volume_id,
                z_index=gt.slice.z_index,
                gt_class=gt.image_class,
                pred_class=image_level_class(pred),
                dice=dice(gmask, pmask),
                overlap=overlap,
                gt_has_lesion=bool(gmask.any()),
            )
        )

    if lesion_only:
        pool = [r for r in results if r.gt_has_lesion]
    else:
        pool = results
    overlapping = [r for r in pool if r.overlap]
    n_pool = len(pool)

    success = len(overlapping) / n_pool if n_pool else 0.0
    dice1 = float(np.mean([r.dice for r in overlapping])) if overlapping else None
    if n_pool:
        if lesion_only:
            dice2 = sum(r.dice if r.overlap else 0.0 for r in pool) / n_pool
        else:
            dice2 = sum(r.dice for r in pool) / n_pool
    else:
        dice2 = 0.0
    acc = sum(r.pred_class == r.gt_class for r in results) / len(results)

    return EvaluationReport(
        dice1=dice1,
        dice2=float(dice2),
        success=float(success),
        acc=float(acc),
        n_images=len(results),
        n_lesion_images=sum(r.gt_has_lesion for r in results),
        per_image=tuple(results),
    )


def write_per_image_csv(path, report: EvaluationReport) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["volume_id", "z_index", "gt_class", "pred_class", "dice", "overlap"])
        for r in report.per_image:
            writer.writerow(
                [r.volume_id, r.z_index, r.gt_class, r.pred_class, repr(r.dice), int(r.overlap)]
            )
