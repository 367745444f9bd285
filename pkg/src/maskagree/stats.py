"""Distribution summaries and the two-sample Kolmogorov-Smirnov test."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

QUANTILE_LEVELS = (0.25, 0.50, 0.75, 0.95)
DEFAULT_BINS = 40
HISTOGRAM_RANGE = (-1.0, 1.0)
KDE_POINTS = 512

QUANTILE_RULE = "linear interpolation between order statistics at zero-based position (n-1)*q"
BANDWIDTH_RULE = "scott: h = sample_std(ddof=1) * n**(-1/5)"
KDE_KERNEL = "gaussian"
KS_PVALUE_RULE = (
    "asymptotic Kolmogorov series Q(lambda), "
    "lambda = (sqrt(ne) + 0.12 + 0.11/sqrt(ne)) * D, ne = n1*n2/(n1+n2)"
)

_KS_EPS = 1e-12
_KS_MAX_TERMS = 100


@dataclass(frozen=True)
class DistributionSummary:
    n: int
    mean: float
    quantiles: dict
    histogram: list = field(default_factory=list)  # (left, right, density)
    kde: list = field(default_factory=list)  # (x, density)
    bandwidth: float | None = None


@dataclass(frozen=True)
class KsResult:
    d_statistic: float
    p_value: float
    n1: int
    n2: int


def check_sample(sample, name="sample") -> np.ndarray:
    arr = np.asarray(sample, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def quantile(sample, q: float) -> float:
    """Linear interpolation between order statistics at position ``(n-1)*q``."""
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"quantile level must lie in [0, 1], got {q}")
    xs = np.sort(check_sample(sample))
    pos = (xs.size - 1) * q
    lo = int(math.floor(pos))
    hi = min(lo + 1, xs.size - 1)
    frac = pos - lo
    if frac == 0.0:
        return float(xs[lo])
    return float(xs[lo] + (xs[hi] - xs[lo]) * frac)


def histogram(sample, bins: int = DEFAULT_BINS, value_range=HISTOGRAM_RANGE) -> list[tuple]:
    """Density-normalised histogram on a fixed range.

    Values outside ``value_range`` are clipped into the edge bins, so the
    bar areas always sum to one.
    """
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    lo, hi = map(float, value_range)
    if not hi > lo:
        raise ValueError(f"empty histogram range {value_range}")
    xs = np.clip(check_sample(sample), lo, hi)
    counts, edges = np.histogram(xs, bins=bins, range=(lo, hi))
    widths = np.diff(edges)
    dens = counts / (xs.size * widths)
    return [(float(edges[i]), float(edges[i + 1]), float(dens[i])) for i in range(bins)]


def scott_bandwidth(sample) -> float:
    xs = check_sample(sample)
    if xs.size < 2:
        raise ValueError("bandwidth needs at least two observations")
    return float(np.std(xs, ddof=1) * xs.size ** (-0.2))


def gaussian_kde(sample, grid, bandwidth: float) -> np.ndarray:
    """Gaussian kernel density of ``sample`` evaluated at ``grid``."""
    xs = check_sample(sample)
    grid = np.asarray(grid, dtype=np.float64)
    if not bandwidth > 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    out = np.empty_like(grid)
    norm = 1.0 / (xs.size * bandwidth * math.sqrt(2.0 * math.pi))
    # chunked to bound the (grid x sample) temporary
    step = max(1, 2_000_000 // xs.size)
    for start in range(0, grid.size, step):
        z = (grid[start : start + step, None] - xs[None, :]) / bandwidth
        out[start : start + step] = np.exp(-0.5 * z * z).sum(axis=1) * norm
    return out


def kde_curve(sample, points: int = KDE_POINTS) -> tuple[list[tuple], float | None]:
    """KDE on ``points`` evenly spaced values over ``[min - 3h, max + 3h]``.

    Returns an empty curve (and ``None`` bandwidth) when it is undefined:
    fewer than two observations, or zero spread.
    """
    xs = check_sample(sample)
    if xs.size < 2:
        return [], None
    h = scott_bandwidth(xs)
    if not h > 0:
        return [], None
    grid = np.linspace(xs.min() - 3 * h, xs.max() + 3 * h, points)
    dens = gaussian_kde(xs, grid, h)
    return [(float(x), float(y)) for x, y in zip(grid, dens)], h


def summarize(sample, bins: int = DEFAULT_BINS, kde_points: int = KDE_POINTS) -> DistributionSummary:
    xs = check_sample(sample)
    kde, h = kde_curve(xs, kde_points)
    return DistributionSummary(
        n=int(xs.size),
        mean=float(np.mean(xs)),
        quantiles={q: quantile(xs, q) for q in QUANTILE_LEVELS},
        histogram=histogram(xs, bins),
        kde=kde,
        bandwidth=h,
    )


def ks_statistic(a, b) -> float:
    """Largest absolute gap between the two empirical CDFs."""
    xa = np.sort(check_sample(a, "a"))
    xb = np.sort(check_sample(b, "b"))
    grid = np.concatenate([xa, xb])
    cdf_a = np.searchsorted(xa, grid, side="right") / xa.size
    cdf_b = np.searchsorted(xb, grid, side="right") / xb.size
    return float(np.max(np.abs(cdf_a - cdf_b)))


def kolmogorov_q(lam: float) -> float:
    """Kolmogorov survival series ``2 * sum (-1)^(k-1) exp(-2 k^2 lam^2)``.

    Summation stops once a term drops below 1e-12 (absolute, or relative
    to the running sum). If that does not happen within 100 terms the
    series is treated as not converged, which only occurs for tiny
    ``lam``, and 1 is returned.
    """
    if lam <= 0.0:
        return 1.0
    a2 = -2.0 * lam * lam
    total = 0.0
    sign = 1.0
    for k in range(1, _KS_MAX_TERMS + 1):
        term = 2.0 * sign * math.exp(a2 * k * k)
        total += term
        if abs(term) <= _KS_EPS or abs(term) <= _KS_EPS * abs(total):
            return min(1.0, max(0.0, total))
        sign = -sign
    return 1.0


def ks_pvalue(d: float, n1: int, n2: int) -> float:
    ne = n1 * n2 / (n1 + n2)
    sq = math.sqrt(ne)
    return kolmogorov_q((sq + 0.12 + 0.11 / sq) * d)


def ks_test(a, b) -> KsResult:
    xa = check_sample(a, "a")
    xb = check_sample(b, "b")
    d = ks_statistic(xa, xb)
    return KsResult(d_statistic=d, p_value=ks_pvalue(d, xa.size, xb.size), n1=int(xa.size), n2=int(xb.size))
