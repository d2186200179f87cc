"""Dense 2-D scalar fields, stencil kernels, and convolution.

A field is a plain float64 numpy array of shape ``(height, width)``.
Soft masks are fields with values in [0, 1]. Everything here is a pure
function; inputs are never mutated, so concurrent calls are safe.

Two boundary policies are supported for convolution:

* ``ZERO_BACKGROUND`` -- pixels outside the domain read 0.
* ``MIRROR`` -- indices reflect symmetrically about the border
  (half-sample reflection, so the edge row repeats). The folded
  convolution operator of a symmetric kernel under this policy is a
  symmetric matrix, which the regularizer's gradient identity relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

ZERO_BACKGROUND = "zero"
MIRROR = "mirror"

_SCIPY_MODES = {ZERO_BACKGROUND: "constant", MIRROR: "reflect"}


@dataclass(frozen=True)
class Kernel:
    """Odd-sized nonnegative stencil with unit mass.

    ``weights`` has shape (2*radius+1, 2*radius+1). For separable kernels
    ``sep`` holds the normalized 1-D factor, used to run the convolution
    as two axis passes; otherwise it is None and the stencil is applied
    directly.
    """

    radius: int
    weights: np.ndarray
    sep: np.ndarray | None = None

    @property
    def window(self) -> int:
        return 2 * self.radius + 1


def ball_kernel(r: int) -> Kernel:
    """Uniform kernel over the discrete ball of radius ``r``.

    Weight 1/|B_r| on every integer offset (i, j) with i^2 + j^2 <= r^2,
    zero elsewhere.
    """
    r = int(r)
    if r < 0:
        raise ValueError("ball radius must be >= 0")
    yy, xx = np.mgrid[-r : r + 1, -r : r + 1]
    inside = (yy * yy + xx * xx) <= r * r
    weights = inside / inside.sum()
    return Kernel(radius=r, weights=weights)


def gaussian_kernel(sigma: float) -> Kernel:
    """Discretized Gaussian, half-width ceil(3*sigma), renormalized.

    Mass lost to the truncation is below 0.3% before renormalization.
    The kernel is stored with its 1-D factor so convolution runs as two
    separable passes.
    """
    sigma = float(sigma)
    if not sigma > 0:
        raise ValueError("sigma must be > 0")
    half = math.ceil(3.0 * sigma)
    x = np.arange(-half, half + 1, dtype=float)
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    weights = np.outer(g, g)
    weights /= weights.sum()
    return Kernel(radius=half, weights=weights, sep=g / g.sum())


def convolve(f, k: Kernel, boundary: str) -> np.ndarray:
    """Convolve a field with a kernel under the given boundary policy.

    output(x) = sum_offsets k(offset) * f~(x - offset), with f~ the
    extension of ``f`` per the policy.
    """
    f = np.asarray(f, dtype=float)
    if f.ndim != 2:
        raise ValueError("convolve expects a 2-D field")
    if boundary not in _SCIPY_MODES:
        raise ValueError(f"unknown boundary policy {boundary!r}")
    if k.window > 2 * min(f.shape) + 1:
        raise ValueError(
            f"kernel window {k.window} exceeds limit for field of shape {f.shape}"
        )
    mode = _SCIPY_MODES[boundary]
    if k.sep is not None:
        out = ndimage.convolve1d(f, k.sep, axis=0, mode=mode, cval=0.0)
        return ndimage.convolve1d(out, k.sep, axis=1, mode=mode, cval=0.0)
    return ndimage.convolve(f, k.weights, mode=mode, cval=0.0)


def ball_convolve_zero(f, r: int) -> np.ndarray:
    """Fast exact ``convolve(f, ball_kernel(r), ZERO_BACKGROUND)``.

    The ball stencil is a stack of horizontal runs, so the convolution
    decomposes into 2r+1 running-sum box filters. This is still a direct
    spatial evaluation (no FFT); it only reassociates the summation.
    """
    f = np.asarray(f, dtype=float)
    r = int(r)
    if r < 0:
        raise ValueError("ball radius must be >= 0")
    if 2 * r + 1 > 2 * min(f.shape) + 1:
        raise ValueError(f"ball radius {r} oversized for field of shape {f.shape}")
    h, w = f.shape
    pad = np.zeros((h + 2 * r, w + 2 * r + 1))
    pad[r : r + h, r + 1 : r + 1 + w] = f
    csum = np.cumsum(pad, axis=1)
    out = np.zeros_like(f)
    xs = np.arange(w) + r + 1
    count = 0
    for dy in range(-r, r + 1):
        run = math.isqrt(r * r - dy * dy)
        count += 2 * run + 1
        rows = csum[r + dy : r + dy + h]
        out += rows[:, xs + run] - rows[:, xs - run - 1]
    return out / count


def gradient_magnitude(v) -> np.ndarray:
    """Euclidean norm of the image gradient.

    Central differences in the interior, one-sided at the borders.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 2 or min(v.shape) < 2:
        raise ValueError("gradient_magnitude needs a field of size >= 2x2")
    gy, gx = np.gradient(v)
    return np.hypot(gx, gy)
