"""Empirical-distribution utilities: ECDF, exact KS statistic, Wald interval."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = ["EmpiricalCdf", "ecdf", "ks_statistic", "binomial_interval"]


@dataclass(frozen=True)
class EmpiricalCdf:
    sorted_samples: np.ndarray
    n: int

    def __call__(self, t: float) -> float:
        """Right-continuous ECDF value #{samples <= t} / n."""
        return float(np.searchsorted(self.sorted_samples, t, side="right")) / self.n


def ecdf(samples: Sequence[float]) -> EmpiricalCdf:
    arr = np.sort(np.asarray(samples, dtype=np.float64))
    if arr.size == 0:
        raise ValueError("ecdf needs at least one sample")
    return EmpiricalCdf(sorted_samples=arr, n=int(arr.size))


def ks_statistic(e: EmpiricalCdf, cdf: Callable[[float], float]) -> float:
    """Exact sup-distance between the ECDF and a continuous reference CDF.

    D_n = max_i max( i/n − F(x_(i)),  F(x_(i)) − (i−1)/n )
    over the ascending order statistics x_(i).
    """
    n = e.n
    ref = np.fromiter((cdf(float(x)) for x in e.sorted_samples), dtype=np.float64, count=n)
    i = np.arange(1, n + 1, dtype=np.float64)
    d_plus = np.max(i / n - ref)
    d_minus = np.max(ref - (i - 1.0) / n)
    return float(max(d_plus, d_minus))


def binomial_interval(k: int, n: int, z: float) -> tuple[float, float]:
    """Wald interval k/n ± z·√(p̂(1−p̂)/n), clipped to [0, 1]."""
    if not 0 <= k <= n or n < 1:
        raise ValueError(f"need 0 <= k <= n with n >= 1, got k={k!r}, n={n!r}")
    if not z > 0:
        raise ValueError(f"z must be positive, got {z!r}")
    p = k / n
    half = z * np.sqrt(p * (1.0 - p) / n)
    return (max(0.0, p - half), min(1.0, p + half))
