"""Local maxima of sampled series."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .series import SampledSeries

__all__ = ["LocalMaximum", "find_local_maxima", "local_max_indices"]


@dataclass(frozen=True)
class LocalMaximum:
    """One candidate peak: grid index, time, height, and (once computed)
    its p-value and rejection status."""

    index: int
    time: float
    height: float
    p_value: float | None = None
    rejected: bool | None = None


def local_max_indices(values: np.ndarray) -> np.ndarray:
    """Indices of strict local maxima of a 1-D array, ascending.

    A sample qualifies when it exceeds both neighbors. A plateau of
    equal values strictly above both flanks yields the single index
    ``(first + last) // 2``. Endpoints never qualify.
    """
    v = np.asarray(values, dtype=float)
    n = v.size
    if n < 3:
        raise ValueError("need at least 3 samples to search for maxima")
    d = np.diff(v)
    if np.all(d != 0.0):
        core = (d[:-1] > 0.0) & (d[1:] < 0.0)
        return np.flatnonzero(core) + 1
    # Plateau path: run-length encode, keep runs strictly above both flanks.
    change = np.flatnonzero(d != 0.0)
    starts = np.concatenate(([0], change + 1))
    ends = np.concatenate((change, [n - 1]))
    interior = (starts > 0) & (ends < n - 1)
    keep = np.zeros(starts.size, dtype=bool)
    idx = np.flatnonzero(interior)
    keep[idx] = (v[starts[idx]] > v[starts[idx] - 1]) & (v[ends[idx]] > v[ends[idx] + 1])
    return (starts[keep] + ends[keep]) // 2


def find_local_maxima(
    series: SampledSeries, excluded_boundary: int | None = None
) -> list[LocalMaximum]:
    """List the local maxima of ``series`` in ascending index order.

    Parameters
    ----------
    series : SampledSeries
    excluded_boundary : int, optional
        Number of samples at each end to exclude from eligibility.
        Defaults to ``series.boundary`` (the smoothing-affected zone).
    """
    if excluded_boundary is None:
        excluded_boundary = series.boundary
    if excluded_boundary < 0:
        raise ValueError("excluded_boundary must be >= 0")
    idx = local_max_indices(series.values)
    n = len(series)
    lo, hi = excluded_boundary, n - 1 - excluded_boundary
    idx = idx[(idx >= lo) & (idx <= hi)]
    return [
        LocalMaximum(
            index=int(i),
            time=series.origin + series.spacing * int(i),
            height=float(series.values[i]),
        )
        for i in idx
    ]
