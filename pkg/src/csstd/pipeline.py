"""Features, metrics, synthetic phantoms, and file formats.

File formats spoken here:

* FF1 feature files: ASCII header ``FF1 <width> <height> <channels>``
  followed by channels x height x width little-endian float32, row-major
  per channel. Parse failures raise distinct errors for a malformed
  header, a wrong-size payload, and non-finite values.
* PGM (P5, 8-bit, maxval 255) for images and label maps. Images read
  scaled to [0, 1]; label/mask maps read and written with raw values.
* PPM (P6) overlays: the image in gray with the boundaries of the
  thresholded stack channels drawn in distinct colors.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import ndimage

MEANS_BINARY = (0.25, 0.75)
MEANS_THREE = (0.2, 0.5, 0.9)
NOISE_STD = 0.02

PHANTOM_KINDS = ("disks", "star", "cross", "nested_disks", "bars")

#: boundary colors for overlay channels, cycled (channel 1 green, 2 blue)
_OVERLAY_COLORS = ((0, 220, 0), (40, 80, 255), (255, 60, 60), (255, 200, 0))


# ---------------------------------------------------------------------------
# features and metrics

def region_variance_feature(v, mu_a: float, mu_b: float) -> np.ndarray:
    """Difference of squared-distance features: -(v-mu_a)^2 + (v-mu_b)^2.

    Positive where the intensity is closer to ``mu_a``.
    """
    v = np.asarray(v, dtype=float)
    return -((v - mu_a) ** 2) + (v - mu_b) ** 2


def _check_binary_pair(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    for m in (a, b):
        if not np.isin(np.unique(m), (0, 1)).all():
            raise ValueError("masks must be binary")
    return a.astype(bool), b.astype(bool)


def dice(pred, gt) -> float:
    """Overlap score 2*TP / (2*TP + FN + FP) as a percentage.

    Defined as 100 when both masks are empty.
    """
    p, g = _check_binary_pair(pred, gt)
    tp = int(np.sum(p & g))
    fn = int(np.sum(~p & g))
    fp = int(np.sum(p & ~g))
    if tp == 0 and fn == 0 and fp == 0:
        return 100.0
    return 200.0 * tp / (2 * tp + fn + fp)


def smooth_dice_loss(v, u_true) -> float:
    """1 - 2<v,u> / (|v|^2 + |u|^2), in [0, 1]; 0 iff exact binary match."""
    v = np.asarray(v, dtype=float)
    u = np.asarray(u_true, dtype=float)
    if v.shape != u.shape:
        raise ValueError(f"shape mismatch: {v.shape} vs {u.shape}")
    denom = float(np.sum(v * v) + np.sum(u * u))
    if denom == 0.0:
        raise ValueError("smooth dice loss undefined for two all-zero inputs")
    return 1.0 - 2.0 * float(np.sum(v * u)) / denom


# ---------------------------------------------------------------------------
# phantom rasterizers

def _grid(size: int):
    return np.mgrid[:size, :size].astype(float)


def _disk_mask(size: int, cy: float, cx: float, r: float) -> np.ndarray:
    yy, xx = _grid(size)
    return (yy - cy) ** 2 + (xx - cx) ** 2 <= r * r


def _rect_mask(size: int, y0: int, y1: int, x0: int, x1: int) -> np.ndarray:
    m = np.zeros((size, size), bool)
    m[y0:y1, x0:x1] = True
    return m


def _polygon_mask(size: int, verts) -> np.ndarray:
    """Even-odd rasterization of a polygon given as (y, x) vertices."""
    yy, xx = _grid(size)
    inside = np.zeros((size, size), bool)
    n = len(verts)
    for i in range(n):
        y1, x1 = verts[i]
        y2, x2 = verts[(i + 1) % n]
        if y1 == y2:
            continue
        crosses = (y1 <= yy) != (y2 <= yy)
        x_at = x1 + (yy - y1) * (x2 - x1) / (y2 - y1)
        inside ^= crosses & (xx < x_at)
    return inside


def _star_mask(size: int, cy: float, cx: float, r_out: float, r_in: float,
               points: int = 5) -> np.ndarray:
    verts = []
    for i in range(2 * points):
        radius = r_out if i % 2 == 0 else r_in
        ang = -math.pi / 2 + i * math.pi / points
        verts.append((cy + radius * math.sin(ang), cx + radius * math.cos(ang)))
    return _polygon_mask(size, verts)


def _cross_mask(size: int, cy: int, cx: int, arm: int, width: int) -> np.ndarray:
    half = width // 2
    m = _rect_mask(size, cy - half, cy + half, cx - arm, cx + arm)
    m |= _rect_mask(size, cy - arm, cy + arm, cx - half, cx + half)
    return m


def _labels_to_image(labels: np.ndarray, means, rng: np.random.Generator) -> np.ndarray:
    image = np.asarray(means, dtype=float)[labels - 1]
    return image + rng.normal(0.0, NOISE_STD, size=labels.shape)


def generate_phantom(kind: str, size: int, rng_seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Synthetic test scene: returns (image, label map).

    Binary kinds label objects 1 and background 2 with intensities near
    ``MEANS_BINARY``; ``nested_disks`` uses labels 1 (inner), 2 (ring),
    3 (background) with intensities near ``MEANS_THREE``. Generation is
    bitwise reproducible for a fixed seed.
    """
    size = int(size)
    if size < 64:
        raise ValueError("phantom size must be >= 64")
    rng = np.random.default_rng(rng_seed)
    s = size / 256.0
    c = size / 2.0
    if kind == "disks":
        obj = _disk_mask(size, 0.30 * size, 0.28 * size, 30 * s)
        obj |= _disk_mask(size, 0.68 * size, 0.70 * size, 24 * s)
        obj |= _disk_mask(size, 0.72 * size, 0.26 * size, 17 * s)
    elif kind == "star":
        obj = _star_mask(size, c, c, 0.094 * size, 0.042 * size)
    elif kind == "cross":
        obj = _cross_mask(size, int(c), int(c), int(56 * s), int(18 * s))
    elif kind == "bars":
        obj = _rect_mask(size, int(0.2 * size), int(0.8 * size), int(0.22 * size), int(0.34 * size))
        obj |= _rect_mask(size, int(0.2 * size), int(0.8 * size), int(0.62 * size), int(0.74 * size))
    elif kind == "nested_disks":
        inner = _disk_mask(size, c, c, 0.12 * size)
        outer = _disk_mask(size, c, c, 0.26 * size)
        labels = np.full((size, size), 3, dtype=int)
        labels[outer] = 2
        labels[inner] = 1
        return _labels_to_image(labels, MEANS_THREE, rng), labels
    else:
        raise ValueError(f"unknown phantom kind {kind!r}")
    labels = np.where(obj, 1, 2)
    return _labels_to_image(labels, MEANS_BINARY, rng), labels


def geometry_scene(size: int, rng_seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Multi-object binary scene: a disk plus two concave shapes.

    Used by the side-by-side demo; the star and cross components fail a
    convexity check while the disk passes, so the scene separates plain
    thresholding from the shape-projected solver.
    """
    size = int(size)
    if size < 128:
        raise ValueError("scene size must be >= 128")
    rng = np.random.default_rng(rng_seed)
    s = size / 256.0
    obj = _disk_mask(size, 0.26 * size, 0.25 * size, 34 * s)
    obj |= _star_mask(size, 0.30 * size, 0.72 * size, 36 * s, 16 * s)
    obj |= _cross_mask(size, int(0.72 * size), int(0.40 * size), int(50 * s), int(16 * s))
    labels = np.where(obj, 1, 2)
    return _labels_to_image(labels, MEANS_BINARY, rng), labels


# ---------------------------------------------------------------------------
# FF1 feature files

class FeatureFileError(ValueError):
    """Base class for FF1 parse failures."""


class FeatureHeaderError(FeatureFileError):
    """Header line is missing, malformed, or has bad dimensions."""


class FeaturePayloadError(FeatureFileError):
    """Payload byte count does not match the header dimensions."""


class FeatureValueError(FeatureFileError):
    """Payload decodes but contains non-finite values."""


def write_feature_file(path, fields) -> None:
    """Write a channel stack; accepts a (C, H, W) array or list of fields."""
    arr = np.asarray(fields, dtype=float)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3:
        raise ValueError("expected a field or a stack of fields")
    if not np.isfinite(arr).all():
        raise FeatureValueError("refusing to write non-finite values")
    ch, h, w = arr.shape
    with open(path, "wb") as fh:
        fh.write(f"FF1 {w} {h} {ch}\n".encode("ascii"))
        fh.write(arr.astype("<f4").tobytes())


def read_feature_file(path) -> list[np.ndarray]:
    """Read an FF1 stack as a list of float64 fields."""
    with open(path, "rb") as fh:
        blob = fh.read()
    newline = blob.find(b"\n")
    if newline < 0:
        raise FeatureHeaderError("missing header line")
    tokens = blob[:newline].split()
    if len(tokens) != 4 or tokens[0] != b"FF1":
        raise FeatureHeaderError(f"malformed header {blob[:newline]!r}")
    try:
        w, h, ch = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise FeatureHeaderError(f"non-integer header dimensions {blob[:newline]!r}") from exc
    if w < 1 or h < 1 or ch < 1:
        raise FeatureHeaderError("header dimensions must be positive")
    payload = blob[newline + 1 :]
    expected = 4 * w * h * ch
    if len(payload) != expected:
        raise FeaturePayloadError(
            f"payload holds {len(payload)} bytes, header implies {expected}"
        )
    arr = np.frombuffer(payload, dtype="<f4").reshape(ch, h, w).astype(float)
    if not np.isfinite(arr).all():
        raise FeatureValueError("payload contains non-finite values")
    return [arr[i] for i in range(ch)]


# ---------------------------------------------------------------------------
# PGM / PPM

class PgmError(ValueError):
    """Unsupported or malformed PGM/PPM content."""


def _read_pnm(path, magic: bytes) -> tuple[np.ndarray, int, int]:
    with open(path, "rb") as fh:
        blob = fh.read()
    # tokenize the header, honoring '#' comments
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(blob) and blob[pos : pos + 1].isspace():
            pos += 1
        if pos < len(blob) and blob[pos : pos + 1] == b"#":
            end = blob.find(b"\n", pos)
            pos = len(blob) if end < 0 else end + 1
            continue
        start = pos
        while pos < len(blob) and not blob[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise PgmError("truncated header")
        tokens.append(blob[start:pos])
    pos += 1  # single whitespace after maxval
    if tokens[0] != magic:
        raise PgmError(f"unsupported magic number {tokens[0]!r}")
    try:
        w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    except ValueError as exc:
        raise PgmError("non-integer header fields") from exc
    if maxval != 255:
        raise PgmError(f"only maxval 255 supported, got {maxval}")
    depth = 3 if magic == b"P6" else 1
    data = blob[pos : pos + w * h * depth]
    if len(data) != w * h * depth:
        raise PgmError("truncated pixel data")
    arr = np.frombuffer(data, dtype=np.uint8)
    arr = arr.reshape(h, w) if depth == 1 else arr.reshape(h, w, 3)
    return arr, w, h


def read_image_pgm(path) -> np.ndarray:
    """Read an 8-bit grayscale image, scaled to [0, 1]."""
    arr, _, _ = _read_pnm(path, b"P5")
    return arr.astype(float) / 255.0


def read_mask_pgm(path) -> np.ndarray:
    """Read a label/mask map with raw integer values."""
    arr, _, _ = _read_pnm(path, b"P5")
    return arr.astype(int)


def write_mask_pgm(path, values) -> None:
    """Write raw integer values (0..255) as an 8-bit PGM."""
    v = np.asarray(values)
    if v.ndim != 2:
        raise ValueError("mask must be 2-D")
    if v.min() < 0 or v.max() > 255:
        raise ValueError("mask values must lie in 0..255")
    h, w = v.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(v.astype(np.uint8).tobytes())


def _boundary(mask: np.ndarray) -> np.ndarray:
    inner = ndimage.binary_erosion(mask, border_value=0)
    return mask & ~inner


def write_overlay(path, image, stack) -> None:
    """Write the image as a PPM with channel boundaries drawn in color.

    Channels are thresholded at 0.5; the boundary of channel g is drawn
    in the g-th overlay color (first green, second blue).
    """
    img = np.clip(np.asarray(image, dtype=float), 0.0, 1.0)
    if img.ndim != 2:
        raise ValueError("image must be 2-D")
    s = np.asarray(stack, dtype=float)
    if s.ndim == 2:
        s = s[None]
    gray = np.round(img * 255.0).astype(np.uint8)
    rgb = np.repeat(gray[:, :, None], 3, axis=2)
    for g in range(s.shape[0]):
        edge = _boundary(s[g] >= 0.5)
        rgb[edge] = _OVERLAY_COLORS[g % len(_OVERLAY_COLORS)]
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(rgb.tobytes())
