"""Small shared numerics helpers."""

from __future__ import annotations

import numpy as np

__all__ = ["sinc", "spawn_rng", "fwhm_of_profile"]


def sinc(x):
    """Unnormalized sinc: sin(x)/x, with sinc(0) = 1.

    numpy's np.sinc is the normalized variant sin(pi x)/(pi x); all formulas in
    this package use the unnormalized convention.
    """
    return np.sinc(np.asarray(x) / np.pi)


def spawn_rng(seed: int, *key: int) -> np.random.Generator:
    """Deterministic child generator for stream (seed, *key).

    Streams derived from the same seed but different keys are statistically
    independent and do not depend on the order in which they are created, so
    results are reproducible regardless of evaluation scheduling.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def fwhm_of_profile(x: np.ndarray, y: np.ndarray) -> float:
    """Full width at half maximum of a sampled single-peaked profile.

    Uses linear interpolation of the half-maximum crossings on either side of
    the peak. Raises ValueError if the profile never falls below half maximum
    on both sides.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape or x.size < 3:
        raise ValueError("profile must be 1-d arrays of equal length >= 3")
    ipk = int(np.argmax(y))
    half = y[ipk] / 2.0

    def cross(idx_range) -> float:
        prev = None
        for i in idx_range:
            if y[i] <= half:
                j = prev if prev is not None else i
                # interpolate between i (below) and its peak-side neighbor (above)
                k = i + (1 if idx_range.step < 0 else -1)
                if k < 0 or k >= y.size or y[k] == y[i]:
                    return x[i]
                t = (half - y[i]) / (y[k] - y[i])
                return x[i] + t * (x[k] - x[i])
            prev = i
        raise ValueError("profile does not fall to half maximum on one side")

    left = cross(range(ipk, -1, -1))
    right = cross(range(ipk, y.size))
    return abs(right - left)
