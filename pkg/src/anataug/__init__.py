"""Anatomical data augmentation for liver-lesion CT segmentation.

Semi-supervised training pipeline that pseudo-labels CT slices adjacent to
annotated slices and retrains a 6-class pixel-wise segmentation network with
uncertainty-weighted soft targets, evaluated on synthetic phantom volumes.
"""

from anataug.core import (
    BACKGROUND,
    BOUNDARY,
    CYST,
    HEALTHY,
    HEMANGIOMA,
    LESION_CLASSES,
    LIVER,
    METASTASIS,
    NUM_CLASSES,
    AnnotatedSlice,
    CTSlice,
    DatasetSplit,
    LabelMap,
    PixelSpacing,
    SlicePack,
    SoftLabelMap,
    boundary_band,
    hard_to_soft,
    image_level_class,
)

__version__ = "0.1.0"

__all__ = [
    "BACKGROUND",
    "LIVER",
    "BOUNDARY",
    "METASTASIS",
    "HEMANGIOMA",
    "CYST",
    "HEALTHY",
    "NUM_CLASSES",
    "LESION_CLASSES",
    "PixelSpacing",
    "CTSlice",
    "LabelMap",
    "SoftLabelMap",
    "AnnotatedSlice",
    "SlicePack",
    "DatasetSplit",
    "hard_to_soft",
    "image_level_class",
    "boundary_band",
    "__version__",
]
