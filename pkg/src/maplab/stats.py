"""Small statistical helpers used by the experiment harness and its tests."""

from __future__ import annotations

import math

import numpy as np


def ecdf_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Two-sample Kolmogorov-Smirnov statistic (sup distance of empirical CDFs)."""
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    grid = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, grid, side="right") / a.size
    cdf_b = np.searchsorted(b, grid, side="right") / b.size
    return float(np.abs(cdf_a - cdf_b).max())


def ks_critical(n1: int, n2: int, alpha: float) -> float:
    """Asymptotic two-sample critical value at significance ``alpha``.

    With heavily tied integer samples this is conservative, which only makes
    the equality tests harder to pass.
    """
    c = math.sqrt(-0.5 * math.log(alpha / 2.0))
    return c * math.sqrt((n1 + n2) / (n1 * n2))


def ks_two_sample(a, b, alpha: float = 1e-3) -> tuple[float, float, bool]:
    """(statistic, critical value, same-distribution verdict at ``alpha``)."""
    stat = ecdf_distance(np.asarray(a), np.asarray(b))
    crit = ks_critical(len(a), len(b), alpha)
    return stat, crit, stat <= crit


def mean_and_se(x) -> tuple[float, float]:
    x = np.asarray(x, dtype=np.float64)
    mean = float(x.mean())
    se = float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
    return mean, se
