"""Post-processing of predicted label maps.

Lesion candidates smaller than 1 cm2 (100 mm2, strict) are dropped, and a
binary liver mask from the dedicated liver network erases liver/lesion
predictions outside the liver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from anataug.core import BACKGROUND, LESION_CLASSES, LIVER, LabelMap, PixelSpacing

MIN_LESION_AREA_MM2 = 100.0

# 8-connectivity for lesion components.
_STRUCT8 = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class PostprocPolicy:
    """Which post-processing steps run where (test predictions vs pseudo-labels)."""

    refine_test: bool = True
    filter_test: bool = True
    refine_pseudo: bool = True
    filter_pseudo: bool = True
    small_component_to: int = LIVER


def area_filter(labels: LabelMap, spacing: PixelSpacing, relabel_to: int = LIVER) -> LabelMap:
    """Drop lesion components with physical area strictly below 1 cm2.

    Components are 8-connected per lesion class; survivors are untouched.
    Removed pixels become interior liver by default (candidates live inside
    the liver).
    """
    lab = labels.labels.copy()
    px_area = spacing.pixel_area_mm2()
    for cls in LESION_CLASSES:
        mask = lab == cls
        if not mask.any():
            continue
        comp, n = ndimage.label(mask, structure=_STRUCT8)
        sizes = np.bincount(comp.ravel(), minlength=n + 1)
        small = np.flatnonzero(sizes * px_area < MIN_LESION_AREA_MM2)
        small = small[small > 0]  # component 0 is background of the labeling
        if small.size:
            lab[np.isin(comp, small)] = relabel_to
    return LabelMap(lab)


def liver_refine(labels: LabelMap, liver_mask: np.ndarray) -> LabelMap:
    """Erase liver/boundary/lesion predictions outside the liver mask."""
    mask = np.asarray(liver_mask, dtype=bool)
    if mask.shape != labels.shape:
        raise ValueError(f"mask shape {mask.shape} != labels shape {labels.shape}")
    lab = labels.labels.copy()
    lab[(lab != BACKGROUND) & ~mask] = BACKGROUND
    return LabelMap(lab)


def apply_test_postproc(
    labels: LabelMap,
    spacing: PixelSpacing,
    liver_mask: np.ndarray | None,
    policy: PostprocPolicy,
) -> LabelMap:
    """Post-process a test-time prediction per the policy flags."""
    if policy.refine_test and liver_mask is not None:
        labels = liver_refine(labels, liver_mask)
    if policy.filter_test:
        labels = area_filter(labels, spacing, policy.small_component_to)
    return labels


def apply_pseudo_postproc(
    labels: LabelMap,
    spacing: PixelSpacing,
    liver_mask: np.ndarray | None,
    policy: PostprocPolicy,
) -> LabelMap:
    """Post-process a generated pseudo-label map per the policy flags."""
    if policy.refine_pseudo and liver_mask is not None:
        labels = liver_refine(labels, liver_mask)
    if policy.filter_pseudo:
        labels = area_filter(labels, spacing, policy.small_component_to)
    return labels
