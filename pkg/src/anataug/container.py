"""Binary container and manifest persistence for slices and datasets.

Container layout: magic ``ADSL1``, one dtype code byte (``h`` = int16 HU,
``B`` = uint8 labels), height and width as little-endian uint32, spacing as
three little-endian float64 (sx, sy, slice_thickness), then row-major pixel
data. Round-trips are bit-exact.
"""

from __future__ import annotations

import json
import os
import struct
from pathlib import Path

import numpy as np

from anataug.core import (
    AnnotatedSlice,
    CTSlice,
    DatasetSplit,
    LabelMap,
    PixelSpacing,
    SlicePack,
    image_level_class,
)

MAGIC = b"ADSL1"
_HEADER = struct.Struct("<5sc II ddd")

_KIND_HU = b"h"
_KIND_LABELS = b"B"


def save_hu(path, pixels: np.ndarray, spacing: PixelSpacing) -> None:
    _save(path, np.asarray(pixels), spacing, _KIND_HU)


def save_labels(path, labels: np.ndarray, spacing: PixelSpacing) -> None:
    _save(path, np.asarray(labels), spacing, _KIND_LABELS)


def _save(path, arr: np.ndarray, spacing: PixelSpacing, kind: bytes) -> None:
    if arr.ndim != 2:
        raise ValueError(f"container stores 2D arrays, got shape {arr.shape}")
    dtype = np.dtype("<i2") if kind == _KIND_HU else np.dtype("u1")
    payload = np.ascontiguousarray(np.round(arr) if kind == _KIND_HU else arr, dtype=dtype)
    h, w = arr.shape
    header = _HEADER.pack(MAGIC, kind, h, w, spacing.sx, spacing.sy, spacing.slice_thickness)
    _atomic_write(path, header + payload.tobytes())


def load(path) -> tuple[np.ndarray, PixelSpacing, str]:
    """Read a container file; returns (array, spacing, kind) with kind 'hu'|'labels'."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated container header")
    magic, kind, h, w, sx, sy, st = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if kind not in (_KIND_HU, _KIND_LABELS):
        raise ValueError(f"{path}: unknown dtype code {kind!r}")
    dtype = np.dtype("<i2") if kind == _KIND_HU else np.dtype("u1")
    expected = _HEADER.size + h * w * dtype.itemsize
    if len(raw) != expected:
        raise ValueError(f"{path}: payload size mismatch ({len(raw)} != {expected})")
    arr = np.frombuffer(raw, dtype=dtype, offset=_HEADER.size).reshape(h, w)
    return arr.copy(), PixelSpacing(sx, sy, st), "hu" if kind == _KIND_HU else "labels"


def _atomic_write(path, data: bytes) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


# --- dataset directories ---------------------------------------------------
#
# One record per slice in manifest.jsonl (sorted keys, one JSON object per
# line) referencing the container files by relative name.


def _slice_basename(volume_id: str, z: int) -> str:
    return f"{volume_id}_z{z:03d}"


def _record(role, ct: CTSlice, label_file=None, image_class=None, center_z=None) -> dict:
    sp = ct.spacing
    return {
        "volume_id": ct.volume_id,
        "z_index": int(ct.z_index),
        "role": role,
        "image_class": image_class,
        "spacing": [sp.sx, sp.sy, sp.slice_thickness],
        "hu_file": _slice_basename(ct.volume_id, ct.z_index) + ".hu.bin",
        "label_file": label_file,
        "center_z": center_z,
    }


def save_dataset(directory, split: DatasetSplit) -> None:
    """Persist a dataset split: container files plus manifest.jsonl.

    Output is byte-deterministic for a given split (no timestamps, fixed
    ordering), so identical seeds reproduce identical directories.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    records = []

    def _write_annotated(role: str, ann: AnnotatedSlice):
        ct = ann.slice
        base = _slice_basename(ct.volume_id, ct.z_index)
        save_hu(directory / (base + ".hu.bin"), ct.pixels, ct.spacing)
        save_labels(directory / (base + ".lbl.bin"), ann.labels.labels, ct.spacing)
        records.append(_record(role, ct, base + ".lbl.bin", ann.image_class))

    for pack in split.train:
        _write_annotated("labeled", pack.labeled)
        for adj in pack.adjacent:
            base = _slice_basename(adj.volume_id, adj.z_index)
            save_hu(directory / (base + ".hu.bin"), adj.pixels, adj.spacing)
            records.append(_record("adjacent", adj, center_z=pack.labeled.slice.z_index))
    for ann in split.test:
        _write_annotated("test", ann)

    records.sort(key=lambda r: (r["volume_id"], r["z_index"], r["role"]))
    write_manifest(directory / "manifest.jsonl", records)


def write_manifest(path, records: list[dict]) -> None:
    lines = [json.dumps(r, sort_keys=True, separators=(",", ":")) for r in records]
    _atomic_write(path, ("\n".join(lines) + "\n").encode())


def read_manifest(path) -> list[dict]:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def load_dataset(directory) -> DatasetSplit:
    directory = Path(directory)
    records = read_manifest(directory / "manifest.jsonl")

    def _ct(rec) -> CTSlice:
        arr, spacing, kind = load(directory / rec["hu_file"])
        if kind != "hu":
            raise ValueError(f"{rec['hu_file']}: expected HU container")
        return CTSlice(arr.astype(np.float32), spacing, rec["volume_id"], rec["z_index"])

    def _annotated(rec) -> AnnotatedSlice:
        ct = _ct(rec)
        lab, _, kind = load(directory / rec["label_file"])
        if kind != "labels":
            raise ValueError(f"{rec['label_file']}: expected label container")
        labels = LabelMap(lab)
        return AnnotatedSlice(ct, labels, image_level_class(labels))

    labeled = {}
    adjacents: dict[tuple[str, int], list[CTSlice]] = {}
    test = []
    for rec in records:
        if rec["role"] == "labeled":
            labeled[(rec["volume_id"], rec["z_index"])] = _annotated(rec)
        elif rec["role"] == "adjacent":
            adjacents.setdefault((rec["volume_id"], rec["center_z"]), []).append(_ct(rec))
        elif rec["role"] == "test":
            test.append(_annotated(rec))
        else:
            raise ValueError(f"unknown manifest role {rec['role']!r}")

    packs = []
    for key in sorted(labeled):
        adj = sorted(adjacents.get(key, []), key=lambda s: s.z_index)
        packs.append(SlicePack(labeled[key], tuple(adj)))
    return DatasetSplit(train=tuple(packs), test=tuple(test))
