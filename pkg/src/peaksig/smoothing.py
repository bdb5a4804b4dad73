"""Gaussian kernel smoothing of sampled series.

Kernels are truncated Gaussian densities sampled on the grid and
renormalized so that the discrete convolution has unit action on
constants. Interior samples receive the exact discrete convolution;
near the edges the kernel is renormalized over the in-range part and
the output is flagged with the affected half-width.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .series import SampledSeries

__all__ = ["Kernel", "make_gaussian_kernel", "convolve", "DEFAULT_KERNEL_TRUNCATION"]

# Half-support of the smoothing kernel in units of its bandwidth.
DEFAULT_KERNEL_TRUNCATION = 4.0

_SQRT_2PI = np.sqrt(2.0 * np.pi)


@dataclass(frozen=True, eq=False)
class Kernel:
    """Discrete smoothing kernel.

    ``weights`` has odd length ``2 * half_width + 1`` and satisfies
    ``weights.sum() * spacing == 1`` to within 1e-12, so convolution
    mimics the continuous integral against a unit-mass kernel.
    ``aliased`` is set when the bandwidth does not resolve the grid
    (bandwidth at or below the sample spacing).
    """

    weights: np.ndarray
    spacing: float
    half_width: int
    aliased: bool = False

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", weights)
        if weights.size != 2 * self.half_width + 1:
            raise ValueError("kernel weights must have length 2 * half_width + 1")
        if abs(weights.sum() * self.spacing - 1.0) > 1e-12:
            raise ValueError("kernel weights must integrate to 1 on the grid")


def make_gaussian_kernel(
    gamma: float,
    truncation: float = DEFAULT_KERNEL_TRUNCATION,
    spacing: float = 1.0,
) -> Kernel:
    """Build a truncated Gaussian kernel with bandwidth ``gamma``.

    Parameters
    ----------
    gamma : float
        Kernel standard deviation in time units. Must be positive.
    truncation : float
        Half-support in units of ``gamma``; weights vanish beyond
        ``truncation * gamma``.
    spacing : float
        Grid spacing the kernel will be applied on.

    Returns
    -------
    Kernel
        Renormalized discrete kernel. ``aliased`` is True when
        ``gamma <= spacing``; such kernels are usable but undersample
        the Gaussian shape.
    """
    if not (np.isfinite(gamma) and gamma > 0):
        raise ValueError("kernel bandwidth must be positive")
    if not (np.isfinite(truncation) and truncation > 0):
        raise ValueError("kernel truncation must be positive")
    if not (np.isfinite(spacing) and spacing > 0):
        raise ValueError("kernel spacing must be positive")
    # Small epsilon so an exact multiple of the spacing lands inside.
    half_width = int(np.floor(truncation * gamma / spacing + 1e-9))
    offsets = spacing * np.arange(-half_width, half_width + 1)
    weights = np.exp(-0.5 * (offsets / gamma) ** 2) / (gamma * _SQRT_2PI)
    weights /= weights.sum() * spacing
    return Kernel(
        weights=weights,
        spacing=spacing,
        half_width=half_width,
        aliased=bool(gamma <= spacing),
    )


def convolve(series: SampledSeries, kernel: Kernel) -> SampledSeries:
    """Smooth ``series`` with ``kernel``, preserving length.

    Interior points get the exact discrete convolution
    ``sum_k w_k y[i-k] * spacing``. Within ``kernel.half_width`` of
    either end the kernel is renormalized over its in-range portion,
    so constants are reproduced everywhere. The output ``boundary``
    field records the half-width so maxima searches can skip the zone.
    """
    if abs(kernel.spacing - series.spacing) > 1e-12 * kernel.spacing:
        raise ValueError("kernel and series spacing differ")
    n = len(series)
    if n < kernel.weights.size:
        raise ValueError("series shorter than kernel support")
    numer = np.convolve(series.values, kernel.weights, mode="same")
    denom = np.convolve(np.ones(n), kernel.weights, mode="same")
    return SampledSeries(
        values=numer / denom,
        spacing=series.spacing,
        origin=series.origin,
        boundary=kernel.half_width,
    )
