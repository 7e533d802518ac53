"""Domain types for CT slices, label maps, and hard/soft label conversions.

All types are immutable after construction (frozen dataclasses over
read-only numpy arrays); every operation here is a pure function.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

# Pixel-wise class taxonomy.
BACKGROUND = 0
LIVER = 1          # interior liver
BOUNDARY = 2       # liver boundary band
METASTASIS = 3
HEMANGIOMA = 4
CYST = 5
NUM_CLASSES = 6
LESION_CLASSES = (METASTASIS, HEMANGIOMA, CYST)

# Image-level classes (per-slice, from the majority lesion class).
HEALTHY = "healthy"
IMAGE_CLASSES = ("metastasis", "hemangioma", "cyst", HEALTHY)
LESION_TO_IMAGE_CLASS = {METASTASIS: "metastasis", HEMANGIOMA: "hemangioma", CYST: "cyst"}

HU_MIN = -1024.0
HU_MAX = 3071.0

# Valid metadata ranges for generated phantom data.
PIXEL_SPACING_RANGE = (0.71, 1.17)
SLICE_THICKNESS_RANGE = (1.25, 5.0)


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PixelSpacing:
    """Physical pixel size: in-plane mm/pixel and slice thickness in mm."""

    sx: float
    sy: float
    slice_thickness: float

    def __post_init__(self):
        if not (self.sx > 0 and self.sy > 0 and self.slice_thickness > 0):
            raise ValueError(f"spacing must be strictly positive, got {self}")

    def pixel_area_mm2(self) -> float:
        return self.sx * self.sy


@dataclass(frozen=True)
class CTSlice:
    """2D attenuation image (HU) with physical spacing and volume provenance."""

    pixels: np.ndarray
    spacing: PixelSpacing
    volume_id: str
    z_index: int

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float32)
        h, w = px.shape
        if h % 16 or w % 16:
            raise ValueError(f"slice dims must be divisible by 16, got {h}x{w}")
        if px.min() < HU_MIN or px.max() > HU_MAX:
            raise ValueError(
                f"HU values outside [{HU_MIN}, {HU_MAX}]: "
                f"range [{px.min():.1f}, {px.max():.1f}]"
            )
        object.__setattr__(self, "pixels", _freeze(px))

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape


@dataclass(frozen=True)
class LabelMap:
    """Per-pixel hard class assignment over the 6-class taxonomy."""

    labels: np.ndarray

    def __post_init__(self):
        lab = np.asarray(self.labels)
        if lab.ndim != 2:
            raise ValueError(f"labels must be 2D, got shape {lab.shape}")
        if lab.size and (lab.min() < 0 or lab.max() >= NUM_CLASSES):
            raise ValueError("labels contain values outside the 6-class range")
        object.__setattr__(self, "labels", _freeze(lab.astype(np.uint8)))

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape


@dataclass(frozen=True)
class SoftLabelMap:
    """Per-pixel target distribution over the 6 classes.

    Ground-truth maps are one-hot (max entry 1.0); pseudo-label maps carry
    their uncertainty as a max entry of ``gamma``.
    """

    targets: np.ndarray
    origin: str  # "ground_truth" | "pseudo_label"
    gamma: float

    def __post_init__(self):
        t = np.asarray(self.targets, dtype=np.float32)
        if t.ndim != 3 or t.shape[2] != NUM_CLASSES:
            raise ValueError(f"targets must be HxWx{NUM_CLASSES}, got {t.shape}")
        if self.origin not in ("ground_truth", "pseudo_label"):
            raise ValueError(f"unknown origin {self.origin!r}")
        if t.size and (t.min() < 0.0 or t.max() > 1.0):
            raise ValueError("target entries must lie in [0, 1]")
        object.__setattr__(self, "targets", _freeze(t))

    @property
    def shape(self) -> tuple[int, int]:
        return self.targets.shape[:2]

    def argmax_labels(self) -> LabelMap:
        return LabelMap(np.argmax(self.targets, axis=2).astype(np.uint8))


@dataclass(frozen=True)
class AnnotatedSlice:
    """A CT slice with its ground-truth label map and image-level class."""

    slice: CTSlice
    labels: LabelMap
    image_class: str

    def __post_init__(self):
        if self.slice.shape != self.labels.shape:
            raise ValueError("slice and labels must share dims")
        derived = image_level_class(self.labels)
        if derived != self.image_class:
            raise ValueError(
                f"image_class {self.image_class!r} inconsistent with labels ({derived!r})"
            )


@dataclass(frozen=True)
class SlicePack:
    """A labeled center slice with its two unlabeled z-neighbors."""

    labeled: AnnotatedSlice
    adjacent: tuple[CTSlice, ...]

    def __post_init__(self):
        center = self.labeled.slice
        object.__setattr__(self, "adjacent", tuple(self.adjacent))
        for adj in self.adjacent:
            if adj.volume_id != center.volume_id or adj.spacing != center.spacing:
                raise ValueError("adjacent slices must share volume_id and spacing")
            if abs(adj.z_index - center.z_index) < 1:
                raise ValueError("adjacent slice must differ from the center in z")


@dataclass(frozen=True)
class DatasetSplit:
    """Train slice packs and test slices with patient-level separation."""

    train: tuple[SlicePack, ...] = field(default_factory=tuple)
    test: tuple[AnnotatedSlice, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "train", tuple(self.train))
        object.__setattr__(self, "test", tuple(self.test))
        train_vols = {p.labeled.slice.volume_id for p in self.train}
        test_vols = {a.slice.volume_id for a in self.test}
        shared = train_vols & test_vols
        if shared:
            raise ValueError(f"volumes appear in both train and test: {sorted(shared)}")

    @property
    def train_volume_ids(self) -> set[str]:
        return {p.labeled.slice.volume_id for p in self.train}

    @property
    def test_volume_ids(self) -> set[str]:
        return {a.slice.volume_id for a in self.test}


def hard_to_soft(labels: LabelMap, gamma: float, fill_mode: str = "zero") -> SoftLabelMap:
    """Encode a hard label map as per-pixel soft targets with max entry ``gamma``.

    ``zero`` fill leaves the remaining classes at 0; ``uniform`` fill spreads
    the remaining (1 - gamma) mass evenly over the other 5 classes.
    gamma = 1.0 yields the exact one-hot encoding in both modes.
    """
    if not (0.5 < gamma <= 1.0):
        raise ValueError(f"gamma must lie in (0.5, 1.0], got {gamma}")
    if fill_mode not in ("zero", "uniform"):
        raise ValueError(f"unknown fill_mode {fill_mode!r}")
    lab = labels.labels
    one_hot = (lab[:, :, None] == np.arange(NUM_CLASSES, dtype=np.uint8)).astype(np.float32)
    if fill_mode == "zero":
        targets = one_hot * np.float32(gamma)
    else:
        off = np.float32((1.0 - gamma) / (NUM_CLASSES - 1))
        targets = one_hot * np.float32(gamma) + (1.0 - one_hot) * off
    origin = "ground_truth" if gamma == 1.0 else "pseudo_label"
    return SoftLabelMap(targets=targets, origin=origin, gamma=float(gamma))


def image_level_class(labels: LabelMap) -> str:
    """Majority lesion class of a label map; healthy when no lesion pixels.

    Ties break to the lowest class code so repeated runs stay reproducible.
    """
    counts = np.bincount(labels.labels.ravel(), minlength=NUM_CLASSES)
    lesion_counts = counts[list(LESION_CLASSES)]
    if lesion_counts.sum() == 0:
        return HEALTHY
    winner = LESION_CLASSES[int(np.argmax(lesion_counts))]
    return LESION_TO_IMAGE_CLASS[winner]


def boundary_band(liver_mask: np.ndarray, width: int = 2) -> np.ndarray:
    """Liver pixels within ``width`` 8-neighborhood steps of a non-liver pixel.

    Only pixels inside the array count as non-liver; the image border itself
    does not induce a band.
    """
    if width < 1:
        raise ValueError(f"width must be >= 1, got {width}")
    mask = np.asarray(liver_mask, dtype=bool)
    if not mask.any():
        return np.zeros_like(mask)
    outside = ~mask
    reach = ndimage.binary_dilation(
        outside, structure=np.ones((3, 3), dtype=bool), iterations=width
    )
    return mask & reach
