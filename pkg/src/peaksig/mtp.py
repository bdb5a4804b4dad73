"""Multiple testing procedures over candidate-maximum p-values.

The number of tests is the observed number of local maxima, which is
itself random; both procedures take that count from the input vector.
Bonferroni rejects ``p < alpha / m``; Benjamini-Hochberg applies the
usual step-up rule. When no candidates exist (``m = 0``) the p-value
threshold is defined as +infinity and nothing is rejected (vacuously).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .nulldist import SpectralMoments, expected_num_maxima, peak_height_right_cdf_inverse

__all__ = [
    "MtpDecision",
    "bonferroni",
    "bh",
    "bonferroni_deterministic_threshold",
    "bonferroni_approx_threshold",
    "asymptotic_bh_threshold",
]


@dataclass(frozen=True)
class MtpDecision:
    """Outcome of a multiple testing procedure.

    ``p_threshold`` is the decision boundary in p-space: Bonferroni
    rejects ``p < p_threshold`` (strict), BH rejects ``p <=
    p_threshold`` where the threshold is ``k alpha / m`` for the
    step-up index ``k`` (0.0 when nothing is rejected, +inf when
    ``m = 0``). ``height_threshold`` is the same boundary mapped to
    height space when spectral moments were supplied (+inf when
    nothing can be rejected), else None.
    """

    method: str
    alpha: float
    num_tests: int
    p_threshold: float
    height_threshold: float | None
    rejected_indices: tuple[int, ...]


def _check_alpha(alpha: float) -> None:
    if not (np.isfinite(alpha) and 0.0 < alpha < 1.0):
        raise ValueError("alpha must lie strictly between 0 and 1")


def _check_pvalues(p_values) -> np.ndarray:
    p = np.asarray(p_values, dtype=float)
    if p.ndim != 1:
        raise ValueError("p-values must form a one-dimensional sequence")
    if p.size and (not np.all(np.isfinite(p)) or np.any(p <= 0.0) or np.any(p > 1.0)):
        raise ValueError("p-values must lie in (0, 1]")
    return p


def _height_threshold(
    moments: SpectralMoments | None, p_threshold: float
) -> float | None:
    if moments is None:
        return None
    if not (0.0 < p_threshold < 1.0):
        # Nothing rejectable in height space: m = 0 or an empty step-up set.
        return math.inf
    return peak_height_right_cdf_inverse(moments, p_threshold)


def bonferroni(
    p_values, alpha: float, moments: SpectralMoments | None = None
) -> MtpDecision:
    """Bonferroni at level ``alpha`` over the observed candidates."""
    _check_alpha(alpha)
    p = _check_pvalues(p_values)
    m = p.size
    if m == 0:
        threshold = math.inf
        rejected: tuple[int, ...] = ()
    else:
        threshold = alpha / m
        rejected = tuple(int(i) for i in np.flatnonzero(p < threshold))
    return MtpDecision(
        method="bonferroni",
        alpha=alpha,
        num_tests=m,
        p_threshold=threshold,
        height_threshold=_height_threshold(moments, threshold),
        rejected_indices=rejected,
    )


def bh(p_values, alpha: float, moments: SpectralMoments | None = None) -> MtpDecision:
    """Benjamini-Hochberg step-up at level ``alpha``.

    ``k = max{i : p_(i) <= i alpha / m}``; the ``k`` smallest p-values
    are rejected. The sort is stable, and a tie cannot straddle the
    boundary: if ``p_(k+1) == p_(k)`` then ``k+1`` would satisfy the
    step-up condition too, so tied boundary values are always rejected
    together.
    """
    _check_alpha(alpha)
    p = _check_pvalues(p_values)
    m = p.size
    if m == 0:
        return MtpDecision(
            method="bh",
            alpha=alpha,
            num_tests=0,
            p_threshold=math.inf,
            height_threshold=_height_threshold(moments, math.inf),
            rejected_indices=(),
        )
    order = np.argsort(p, kind="stable")
    passed = np.flatnonzero(p[order] <= alpha * np.arange(1, m + 1) / m)
    if passed.size == 0:
        k = 0
        threshold = 0.0
        rejected: tuple[int, ...] = ()
    else:
        k = int(passed[-1]) + 1
        threshold = alpha * k / m
        rejected = tuple(int(i) for i in order[:k])
    return MtpDecision(
        method="bh",
        alpha=alpha,
        num_tests=m,
        p_threshold=threshold,
        height_threshold=_height_threshold(moments, threshold),
        rejected_indices=rejected,
    )


def bonferroni_deterministic_threshold(
    m: SpectralMoments, length: float, alpha: float
) -> float:
    """Height threshold ``F^{-1}(alpha / E[#maxima on length])``.

    Uses the expected candidate count instead of the observed one, so
    the threshold is a deterministic function of the model.
    """
    _check_alpha(alpha)
    expected = expected_num_maxima(m, length)
    p = alpha / expected
    if p >= 1.0:
        raise ValueError(
            "expected number of maxima is below alpha; no finite threshold"
        )
    return peak_height_right_cdf_inverse(m, p)


def bonferroni_approx_threshold(
    m: SpectralMoments, length: float, alpha: float
) -> float:
    """Closed-form large-threshold approximation

        sigma * sqrt(2 log((L / alpha) sqrt(lambda2 / (2 pi sigma2))))

    valid when the logarithm's argument exceeds 1. Overshoots the exact
    deterministic threshold by a few percent at moderate lengths.
    """
    _check_alpha(alpha)
    m.validate()
    if not (np.isfinite(length) and length > 0):
        raise ValueError("length must be positive")
    arg = (length / alpha) * math.sqrt(m.lambda2 / (2.0 * math.pi * m.sigma2))
    if arg <= 1.0:
        raise ValueError(
            "approximation domain error: (L/alpha) sqrt(lambda2/(2 pi sigma2)) "
            "must exceed 1"
        )
    return math.sqrt(m.sigma2) * math.sqrt(2.0 * math.log(arg))


def asymptotic_bh_threshold(
    m: SpectralMoments, signal_density: float, alpha: float
) -> float:
    """Limiting BH height threshold for sparse signal.

    ``signal_density`` is the expected number of true peaks per unit
    length. The rejection fraction converges so that the threshold
    solves

        F(u) = alpha * A1 / (A1 + E[#null maxima per unit length] (1 - alpha)).
    """
    _check_alpha(alpha)
    m.validate()
    if not (np.isfinite(signal_density) and signal_density > 0):
        raise ValueError("signal density must be positive")
    null_rate = math.sqrt(m.lambda4 / m.lambda2) / (2.0 * math.pi)
    target = alpha * signal_density / (signal_density + null_rate * (1.0 - alpha))
    return peak_height_right_cdf_inverse(m, target)
