"""End-to-end detection: smooth, list maxima, test their heights.

The pipeline is fixed: subtract the series mean (optional), convolve
with a Gaussian kernel, list local maxima outside the boundary zone,
convert heights to p-values under the null height distribution, and
apply one multiple testing procedure. Spectral moments are resolved
once, before any decision, from one of three sources: the known noise
model, an estimator run on the smoothed data, or explicit values.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import mtp
from .maxima import LocalMaximum, find_local_maxima
from .model import NoiseSpec
from .moments_est import (
    ESTIMATORS,
    default_acf_lag_window,
    estimate_moments_acf,
)
from .nulldist import (
    GaussianModelParams,
    InvalidMomentsError,
    SpectralMoments,
    assign_pvalues,
    gaussian_model_moments,
)
from .series import SampledSeries
from .smoothing import DEFAULT_KERNEL_TRUNCATION, convolve, make_gaussian_kernel

__all__ = ["DetectorConfig", "DetectionResult", "detect"]

_METHODS = {"bonferroni": mtp.bonferroni, "bh": mtp.bh}


@dataclass(frozen=True)
class DetectorConfig:
    """Detection settings.

    ``moments_source`` selects where the null moments come from:

    - a ``NoiseSpec``: closed-form moments of that noise smoothed at
      ``gamma`` (use when the noise model is known);
    - an estimator name (``"mad"``, ``"var"``, ``"acf"``,
      ``"crossing"``): estimated from the smoothed series;
    - an explicit ``SpectralMoments``.
    """

    gamma: float
    alpha: float = 0.05
    method: str = "bh"
    moments_source: SpectralMoments | NoiseSpec | str = "mad"
    kernel_truncation: float = DEFAULT_KERNEL_TRUNCATION
    subtract_mean: bool = True

    def __post_init__(self):
        if not (np.isfinite(self.gamma) and self.gamma > 0):
            raise ValueError("gamma must be positive")
        if not (np.isfinite(self.alpha) and 0 < self.alpha < 1):
            raise ValueError("alpha must lie strictly between 0 and 1")
        if self.method not in _METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        src = self.moments_source
        if isinstance(src, str) and src not in ESTIMATORS:
            raise ValueError(f"unknown moment estimator {src!r}")
        elif not isinstance(src, (str, SpectralMoments, NoiseSpec)):
            raise ValueError(
                "moments_source must be a SpectralMoments, NoiseSpec, "
                "or estimator name"
            )


@dataclass(frozen=True, eq=False)
class DetectionResult:
    maxima: tuple[LocalMaximum, ...]
    decision: mtp.MtpDecision
    moments_used: SpectralMoments
    boundary_excluded: int
    config: DetectorConfig
    warnings: tuple[str, ...] = ()


def _resolve_moments(
    config: DetectorConfig, smoothed: SampledSeries
) -> SpectralMoments:
    src = config.moments_source
    if isinstance(src, SpectralMoments):
        return src
    if isinstance(src, NoiseSpec):
        return gaussian_model_moments(
            GaussianModelParams(sigma=src.sigma, nu=src.nu, gamma=config.gamma)
        )
    # Estimate from the interior (boundary-unaffected) part of the data.
    b = smoothed.boundary
    interior = smoothed.crop(b, len(smoothed) - b) if b > 0 else smoothed
    if src == "acf":
        estimate = estimate_moments_acf(
            interior, default_acf_lag_window(config.gamma, smoothed.spacing)
        )
    else:
        estimate = ESTIMATORS[src](interior)
    if estimate.degenerate:
        raise InvalidMomentsError(
            f"moment estimation ({src}) degenerate: {estimate.diagnostics}"
        )
    return estimate.moments


def detect(series: SampledSeries, config: DetectorConfig) -> DetectionResult:
    """Run the detection pipeline on a raw series."""
    kernel = make_gaussian_kernel(
        config.gamma, config.kernel_truncation, series.spacing
    )
    if len(series) < kernel.weights.size + 2:
        raise ValueError("series too short for the requested kernel")
    warnings: tuple[str, ...] = ()
    if kernel.aliased:
        warnings = (
            "smoothing bandwidth is at or below the grid spacing; "
            "the sampled kernel aliases and height p-values lose accuracy",
        )
    values = series.values
    if config.subtract_mean:
        values = values - values.mean()
    prepared = SampledSeries(values, series.spacing, series.origin)
    smoothed = convolve(prepared, kernel)
    maxima = find_local_maxima(smoothed)
    moments = _resolve_moments(config, smoothed)
    maxima = assign_pvalues(maxima, moments)
    decision = _METHODS[config.method](
        [mx.p_value for mx in maxima], config.alpha, moments=moments
    )
    rejected = set(decision.rejected_indices)
    maxima = tuple(
        replace(mx, rejected=(i in rejected)) for i, mx in enumerate(maxima)
    )
    return DetectionResult(
        maxima=maxima,
        decision=decision,
        moments_used=moments,
        boundary_excluded=smoothed.boundary,
        config=config,
        warnings=warnings,
    )
