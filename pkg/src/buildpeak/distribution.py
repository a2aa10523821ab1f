"""Statistics over Monte Carlo peak samples."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .emission_core import EmissionTrajectory, ValidationError
from .monte_carlo import as_samples, ramp

PERCENTILES = (2.5, 16.0, 50.0, 84.0, 97.5)


def percentile_key(p: float) -> str:
    return f"p{p:g}"


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, Histogram):
            return NotImplemented
        return np.array_equal(self.edges, other.edges) and np.array_equal(
            self.counts, other.counts
        )


@dataclass(frozen=True)
class PeakDistribution:
    n: int
    mean_value: float
    sd_value: float
    mean_year: float
    sd_year: float
    value_percentiles: dict[str, float]
    year_percentiles: dict[str, float]
    value_histogram: Histogram
    year_histogram: Histogram


def _mean_sd(x: np.ndarray) -> tuple[float, float]:
    # shift by the first element so identical samples give an exact mean and 0 SD
    ref = x[0]
    dev = x - ref
    mean = ref + dev.mean()
    if x.size < 2:
        return float(mean), 0.0
    resid = dev - dev.mean()
    return float(mean), float(math.sqrt(float(resid @ resid) / (x.size - 1)))


def nearest_rank(sorted_x: np.ndarray, p: float) -> float:
    """Nearest-rank percentile: the ceil(p/100 * n)-th smallest value."""
    n = sorted_x.size
    rank = math.ceil(Fraction(str(p)) * n / 100)
    return float(sorted_x[min(max(rank, 1), n) - 1])


def histogram(x: np.ndarray, bins: int = 100) -> Histogram:
    counts, edges = np.histogram(x, bins=bins)
    return Histogram(edges, counts)


def summarize(samples, bins: int = 100) -> PeakDistribution:
    """Mean, SD (n - 1 denominator), nearest-rank percentiles and histograms."""
    s = as_samples(samples)
    if len(s) == 0:
        raise ValidationError("cannot summarize an empty sample")
    values = np.asarray(s.peak_value, dtype=float)
    years = np.asarray(s.peak_year, dtype=float)
    mv, sv = _mean_sd(values)
    my, sy = _mean_sd(years)
    vs, ys = np.sort(values), np.sort(years)
    return PeakDistribution(
        n=len(s),
        mean_value=mv,
        sd_value=sv,
        mean_year=my,
        sd_year=sy,
        value_percentiles={percentile_key(p): nearest_rank(vs, p) for p in PERCENTILES},
        year_percentiles={percentile_key(p): nearest_rank(ys, p) for p in PERCENTILES},
        value_histogram=histogram(values, bins),
        year_histogram=histogram(years, bins),
    )


def prob_peak_by_year(samples, year: int) -> float:
    """Fraction of draws that have peaked in or before ``year``."""
    s = as_samples(samples)
    if len(s) == 0:
        raise ValidationError("no samples")
    return float(np.count_nonzero(s.peak_year <= year)) / len(s)


def prob_peak_in_interval(samples, value_interval, year_bound: int | None = None) -> float:
    """Fraction of draws whose peak value lies in the closed interval.

    With ``year_bound`` the peak must also occur no later than that year.
    """
    lo, hi = value_interval
    if lo > hi:
        raise ValidationError(f"interval lower bound {lo} exceeds upper bound {hi}")
    s = as_samples(samples)
    if len(s) == 0:
        raise ValidationError("no samples")
    hit = (s.peak_value >= lo) & (s.peak_value <= hi)
    if year_bound is not None:
        hit &= s.peak_year <= year_bound
    return float(np.count_nonzero(hit)) / len(s)


def gaussian_one_sided_mass(k: float) -> float:
    """Probability mass of a normal between its mean and k SDs to one side."""
    return 0.5 * math.erf(k / math.sqrt(2.0))


@dataclass(frozen=True)
class Band:
    k: int
    lower: EmissionTrajectory
    mass: float


def uncertainty_bands(
    static: EmissionTrajectory,
    sigma_c: float,
    k_levels=(1, 2, 3),
    base: int = 2020,
    end: int = 2060,
) -> list[Band]:
    """Lower bands ``static * (1 - k * sigma_c * ramp)`` for each k, floored at 0.

    Each band carries the Gaussian mass between the mean and -k SD
    (34.1%, 47.7% and 49.9% for k = 1, 2, 3).
    """
    if not sigma_c >= 0:
        raise ValidationError(f"sigma_c must be >= 0, got {sigma_c!r}")
    w = ramp(static.years, base, end)
    out = []
    for k in k_levels:
        lower = np.maximum(static.values * (1.0 - k * sigma_c * w), 0.0)
        out.append(Band(k, EmissionTrajectory(static.start_year, lower, static.unit), gaussian_one_sided_mass(k)))
    return out
