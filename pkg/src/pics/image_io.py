"""Loading and persistence: grayscale images, stacks, masks, annotations,
and the built-in hyperparameter preset catalogue.

Supported image formats are grayscale PGM (P2/P5) and PNG (8/16-bit).
Intensities are normalized to [0, 1] by the format's max value on load.
"""

from __future__ import annotations

import io as _io
import json
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image, UnidentifiedImageError

from .energy import Hyperparameters, LossBreakdown
from .errors import (
    CorruptFile,
    DimensionMismatch,
    MalformedDocument,
    SchemaVersionMismatch,
    UnsupportedFormat,
)
from .raster import GrayImage, Mask
from .spline import KnotVector
from .volume import ImageStack

ANNOTATION_SCHEMA = "pics-annotation/1"
TOOL_VERSION = "pics 0.1.0"


# ---------------------------------------------------------------- images

def _parse_pgm(data: bytes) -> np.ndarray:
    try:
        magic = data[:2]
        if magic not in (b"P2", b"P5"):
            raise UnsupportedFormat("not a PGM file")
        # header tokens: magic, width, height, maxval (comments start with #)
        tokens = []
        pos = 2
        while len(tokens) < 3:
            while pos < len(data) and data[pos : pos + 1].isspace():
                pos += 1
            if pos < len(data) and data[pos : pos + 1] == b"#":
                while pos < len(data) and data[pos : pos + 1] != b"\n":
                    pos += 1
                continue
            start = pos
            while pos < len(data) and not data[pos : pos + 1].isspace():
                pos += 1
            if start == pos:
                raise CorruptFile("truncated PGM header")
            tokens.append(int(data[start:pos]))
        width, height, maxval = tokens
        if maxval <= 0 or maxval > 65535:
            raise CorruptFile(f"bad PGM maxval {maxval}")
        if magic == b"P2":
            values = np.array(data[pos:].split(), dtype=int)
            if values.size != width * height:
                raise CorruptFile("PGM pixel count mismatch")
        else:
            pos += 1  # single whitespace after maxval
            dtype = ">u2" if maxval > 255 else "u1"
            raw = data[pos:]
            expected = width * height * (2 if maxval > 255 else 1)
            if len(raw) < expected:
                raise CorruptFile("truncated PGM pixel data")
            values = np.frombuffer(raw[:expected], dtype=dtype).astype(int)
        return values.reshape(height, width) / float(maxval)
    except (ValueError, IndexError) as exc:
        raise CorruptFile(f"malformed PGM: {exc}") from exc


def _parse_png(data: bytes) -> np.ndarray:
    try:
        img = Image.open(_io.BytesIO(data))
        img.load()
    except UnidentifiedImageError as exc:
        raise UnsupportedFormat(str(exc)) from exc
    except (OSError, SyntaxError) as exc:
        raise CorruptFile(str(exc)) from exc
    if img.mode == "L":
        return np.asarray(img, dtype=float) / 255.0
    if img.mode in ("I", "I;16", "I;16B"):
        return np.asarray(img, dtype=float) / 65535.0
    raise UnsupportedFormat(f"unsupported PNG mode {img.mode}; grayscale only")


def load_gray_bytes(data: bytes, name: str = "<bytes>") -> GrayImage:
    if data[:2] in (b"P2", b"P5"):
        return GrayImage(_parse_pgm(data))
    if data[:8] == b"\x89PNG\r\n\x1a\n":
        return GrayImage(_parse_png(data))
    raise UnsupportedFormat(f"{name}: expected grayscale PGM or PNG")


def load_gray(path) -> GrayImage:
    path = Path(path)
    return load_gray_bytes(path.read_bytes(), name=str(path))


def load_stack(source) -> ImageStack:
    """Stack from a directory (lexicographic order) or an explicit file list."""
    if isinstance(source, (str, Path)) and Path(source).is_dir():
        paths = sorted(p for p in Path(source).iterdir()
                       if p.suffix.lower() in (".pgm", ".png"))
    else:
        paths = [Path(p) for p in source]
    if not paths:
        raise CorruptFile("no slice files found")
    return ImageStack(tuple(load_gray(p) for p in paths))


def save_gray(image: GrayImage, path) -> None:
    path = Path(path)
    values = np.round(image.pixels * 255.0).astype(np.uint8)
    if path.suffix.lower() == ".pgm":
        header = f"P5\n{image.width} {image.height}\n255\n".encode()
        path.write_bytes(header + values.tobytes())
    elif path.suffix.lower() == ".png":
        Image.fromarray(values, mode="L").save(path)
    else:
        raise UnsupportedFormat(f"cannot write {path.suffix}")


def save_mask(mask: Mask, path) -> None:
    """Binary PGM/PNG, 0 for outside and the format max for inside."""
    values = np.where(mask.inside, 255, 0).astype(np.uint8)
    path = Path(path)
    if path.suffix.lower() == ".pgm":
        header = f"P5\n{mask.width} {mask.height}\n255\n".encode()
        path.write_bytes(header + values.tobytes())
    elif path.suffix.lower() == ".png":
        Image.fromarray(values, mode="L").save(path)
    else:
        raise UnsupportedFormat(f"cannot write {path.suffix}")


def load_mask(path) -> Mask:
    img = load_gray(path)
    return Mask(img.pixels >= 0.5)


# ----------------------------------------------------------- annotations

@dataclass(frozen=True)
class AnnotationRecord:
    """The exportable product of a segmentation session."""

    image_id: str
    image_size: tuple[int, int]       # (width, height)
    knots: KnotVector
    hyper: Hyperparameters
    final_loss: Optional[LossBreakdown] = None
    iou: Optional[float] = None
    tool_version: str = TOOL_VERSION


def export_annotation(record: AnnotationRecord) -> str:
    doc = {
        "schema": ANNOTATION_SCHEMA,
        "image_id": record.image_id,
        "image_size": list(record.image_size),
        "knots": [[float(u), float(v)] for u, v in record.knots.points],
        "pinned": [bool(p) for p in record.knots.pinned],
        "hyperparameters": asdict(record.hyper),
        "final_loss": asdict(record.final_loss) if record.final_loss else None,
        "iou": record.iou,
        "tool_version": record.tool_version,
    }
    return json.dumps(doc, indent=2)


def import_annotation(document: str) -> AnnotationRecord:
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "schema" not in doc:
        raise MalformedDocument("missing schema field")
    if doc["schema"] != ANNOTATION_SCHEMA:
        raise SchemaVersionMismatch(f"unsupported schema {doc['schema']!r}")
    try:
        knots = KnotVector(np.array(doc["knots"], dtype=float),
                           np.array(doc["pinned"], dtype=bool))
        hyper = Hyperparameters(**doc["hyperparameters"])
        loss = doc.get("final_loss")
        breakdown = LossBreakdown(**loss) if loss else None
        return AnnotationRecord(
            image_id=doc["image_id"],
            image_size=(int(doc["image_size"][0]), int(doc["image_size"][1])),
            knots=knots,
            hyper=hyper,
            final_loss=breakdown,
            iou=doc.get("iou"),
            tool_version=doc.get("tool_version", "unknown"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedDocument(f"missing or invalid field: {exc}") from exc


# --------------------------------------------------------------- presets

@dataclass(frozen=True)
class PresetCatalogue:
    entries: dict

    def names(self) -> list[str]:
        return sorted(self.entries)

    def get(self, name: str) -> Hyperparameters:
        if name not in self.entries:
            raise KeyError(f"unknown preset {name!r}; known: {', '.join(self.names())}")
        return self.entries[name]


def builtin_presets() -> PresetCatalogue:
    """Named weight sets for the reference cases.

    Weights assume intensities normalized to [0, 1] (the loader's convention).
    """
    base = Hyperparameters()
    acdc = base.with_weights(alpha=1e-1, beta=1e-2, mu=1e4, gamma=1e-5, sigma=1e7)
    entries = {
        "hydrocephalus": base.with_weights(alpha=5e-1, beta=5e-2, mu=1e3, gamma=0.0, sigma=0.0),
        "distorted-disk": base.with_weights(alpha=5e-1, beta=1e-2, mu=1e4, gamma=0.0, sigma=0.0),
        "distorted-disk-shape": base.with_weights(alpha=5e-1, beta=1e-2, mu=1e4, gamma=0.0, sigma=1e8),
        "lv-ed": base.with_weights(alpha=5e-1, beta=1e-3, mu=1e4, gamma=0.0, sigma=0.0),
        "lv-ed-shape": base.with_weights(alpha=5e-1, beta=1e-3, mu=1e4, gamma=0.0, sigma=1e8),
        "acdc-normal": acdc,
        "acdc-indistinct": replace(acdc, sigma=acdc.sigma * 10),
        "acdc-thin-myocardium": replace(acdc, gamma=acdc.gamma * 100),
    }
    return PresetCatalogue(entries)
