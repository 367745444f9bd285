"""Cohen's kappa between binary masks and per-lesion all-pairs averages."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Optional

import numpy as np

from .conditioning import ConditioningSpec, apply, as_spec
from .masks import LesionGroup, MaskDimensionError, as_mask, resolve_threads


@dataclass(frozen=True)
class ConfusionCounts:
    a: int  # both foreground
    b: int  # first only
    c: int  # second only
    d: int  # both background

    @property
    def total(self) -> int:
        return self.a + self.b + self.c + self.d


@dataclass(frozen=True)
class AgreementRecord:
    lesion_id: str
    conditioning: str
    mean_kappa: float
    n_pairs: int


def confusion_counts(m1, m2) -> ConfusionCounts:
    x = as_mask(m1).cells
    y = as_mask(m2).cells
    if x.shape != y.shape:
        raise MaskDimensionError(f"cannot compare masks of shape {x.shape} and {y.shape}")
    n = x.size
    fx = int(np.count_nonzero(x))
    fy = int(np.count_nonzero(y))
    a = int(np.count_nonzero(x & y))
    b = fx - a
    c = fy - a
    return ConfusionCounts(a, b, c, n - a - b - c)


def kappa_from_counts(counts: ConfusionCounts) -> float:
    """Chance-corrected agreement ``(p_o - p_e) / (1 - p_e)``.

    Both terms are scaled by ``N**2`` so that only one (correctly rounded)
    division of exact integers happens; the result is therefore exactly
    symmetric in the two annotators and under swapping labels. When
    ``p_e == 1`` both masks are the same constant and the score is 1.
    """
    a, b, c, d = counts.a, counts.b, counts.c, counts.d
    n = a + b + c + d
    if n <= 0:
        raise ValueError("kappa needs at least one pixel")
    expected = (a + b) * (a + c) + (c + d) * (b + d)
    denom = n * n - expected
    if denom == 0:
        return 1.0
    return (n * (a + d) - expected) / denom


def cohen_kappa(m1, m2) -> float:
    return kappa_from_counts(confusion_counts(m1, m2))


def pairwise_kappas(masks) -> list[float]:
    """Kappa for every unordered pair, in ``itertools.combinations`` order."""
    return [cohen_kappa(x, y) for x, y in combinations(masks, 2)]


def lesion_mean_kappa(group: LesionGroup, spec) -> Optional[AgreementRecord]:
    """Mean kappa over all mask pairs of one lesion after conditioning.

    Returns ``None`` for groups with fewer than two masks.
    """
    spec = as_spec(spec)
    if len(group.masks) < 2:
        return None
    conditioned = [apply(spec, m) for m in group.masks]
    kappas = pairwise_kappas(conditioned)
    return AgreementRecord(
        lesion_id=group.lesion_id,
        conditioning=spec.name,
        mean_kappa=float(np.mean(kappas)),
        n_pairs=len(kappas),
    )


def dataset_agreements(
    groups: Iterable[LesionGroup], spec, threads: Optional[int] = 1
) -> list[AgreementRecord]:
    """One record per group with two or more masks, sorted by lesion id."""
    spec = as_spec(spec)
    eligible = sorted((g for g in groups if len(g.masks) >= 2), key=lambda g: g.lesion_id)
    workers = resolve_threads(threads)
    if workers > 1 and len(eligible) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda g: lesion_mean_kappa(g, spec), eligible))
    else:
        records = [lesion_mean_kappa(g, spec) for g in eligible]
    return records


def multi_agreements(
    groups: Iterable[LesionGroup],
    specs: Iterable[ConditioningSpec],
    threads: Optional[int] = 1,
) -> dict[str, list[AgreementRecord]]:
    """Records for several conditionings, sharing one worker pool.

    Work is split per lesion; each worker conditions that lesion's masks
    under every spec. The output order is fixed by lesion id.
    """
    specs = [as_spec(s) for s in specs]
    eligible = sorted((g for g in groups if len(g.masks) >= 2), key=lambda g: g.lesion_id)

    def one(group):
        return [lesion_mean_kappa(group, s) for s in specs]

    workers = resolve_threads(threads)
    if workers > 1 and len(eligible) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one, eligible))
    else:
        rows = [one(g) for g in eligible]
    return {s.name: [row[i] for row in rows] for i, s in enumerate(specs)}
