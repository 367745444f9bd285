"""scikit-learn style wrappers around conditioning and agreement analysis."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .agreement import multi_agreements
from .conditioning import ALL_KINDS, ConditioningSpec, apply, parse_kind
from .masks import BinaryMask, LesionGroup, as_mask, summarize_dataset
from .morphology import DEFAULT_SE_SIDE, check_se_side
from .report import build_report
from .stats import DEFAULT_BINS


def check_mask_stack(X):
    """Validate a batch of masks.

    Accepts a 3-D array ``(n_masks, height, width)`` or a sequence of 2-D
    masks (which may differ in size). Returns ``(masks, as_array)``.
    """
    if isinstance(X, np.ndarray):
        if X.ndim == 2:
            raise ValueError("expected a batch of masks; wrap a single mask in a list")
        if X.ndim != 3:
            raise ValueError(f"expected a 3-D array of masks, got {X.ndim}-D")
        return [BinaryMask(x) for x in X], True
    masks = [as_mask(m) for m in X]
    if not masks:
        raise ValueError("empty batch of masks")
    return masks, False


def check_groups(X) -> list[LesionGroup]:
    """Validate lesion groups.

    Items may be :class:`LesionGroup` objects or plain sequences of masks,
    which get ids ``lesion_00000``, ``lesion_00001``, ... by position.
    """
    groups = []
    for i, item in enumerate(X):
        if isinstance(item, LesionGroup):
            groups.append(item)
        else:
            groups.append(LesionGroup(f"lesion_{i:05d}", tuple(item)))
    ids = [g.lesion_id for g in groups]
    if len(set(ids)) != len(ids):
        raise ValueError("lesion ids must be unique")
    return groups


def check_conditionings(conditionings) -> list[str]:
    if conditionings is None:
        return list(ALL_KINDS)
    if isinstance(conditionings, str):
        conditionings = [conditionings]
    names = []
    for c in conditionings:
        name = parse_kind(c).value
        if name not in names:
            names.append(name)
    if not names:
        raise ValueError("at least one conditioning is required")
    return names


class MaskConditioner(TransformerMixin, BaseEstimator):
    """Apply one conditioning to every mask of a batch.

    Stateless: ``fit`` only validates parameters. ``transform`` returns a
    boolean array when given one, otherwise a list of masks.
    """

    def __init__(self, kind="original", se_side=DEFAULT_SE_SIDE):
        self.kind = kind
        self.se_side = se_side

    def _spec(self) -> ConditioningSpec:
        return ConditioningSpec(parse_kind(self.kind), check_se_side(self.se_side))

    def fit(self, X=None, y=None):
        self.spec_ = self._spec()
        return self

    def transform(self, X):
        spec = self._spec()
        masks, as_array = check_mask_stack(X)
        out = [apply(spec, m) for m in masks]
        if as_array:
            return np.stack([m.cells for m in out])
        return out


class AgreementAnalyzer(BaseEstimator):
    """Per-lesion mean pairwise kappa under several conditionings.

    ``fit`` takes a list of lesion groups and stores the analysis on the
    estimator:

    records_ : dict
        conditioning name -> list of ``AgreementRecord`` sorted by lesion id.
    report_ : AnalysisReport
        distribution summaries and pairwise K-S results.
    lesion_ids_ : list of str
        lesions with at least two masks, in row order of ``transform``.
    """

    def __init__(self, conditionings=None, se_side=DEFAULT_SE_SIDE, bins=DEFAULT_BINS,
                 threads=1, jitter_seed=0):
        self.conditionings = conditionings
        self.se_side = se_side
        self.bins = bins
        self.threads = threads
        self.jitter_seed = jitter_seed

    def _specs(self):
        side = check_se_side(self.se_side)
        return [ConditioningSpec(parse_kind(c), side) for c in check_conditionings(self.conditionings)]

    def fit(self, X, y=None):
        groups = check_groups(X)
        specs = self._specs()
        records = multi_agreements(groups, specs, threads=self.threads)
        if not next(iter(records.values())):
            raise ValueError("no lesion has two or more masks")
        self.records_ = records
        self.lesion_ids_ = [r.lesion_id for r in next(iter(records.values()))]
        self.dataset_summary_ = summarize_dataset(groups)
        self.report_ = build_report(
            records,
            bins=self.bins,
            se_side=check_se_side(self.se_side),
            dataset=self.dataset_summary_,
            jitter_seed=self.jitter_seed,
        )
        return self

    @property
    def summaries_(self):
        check_is_fitted(self, "report_")
        return self.report_.summaries

    @property
    def ks_(self):
        check_is_fitted(self, "report_")
        return self.report_.ks_matrix

    def transform(self, X):
        """Mean-kappa matrix ``(n_lesions, n_conditionings)``.

        Rows follow lesion id order over groups with two or more masks;
        columns follow ``conditionings``.
        """
        groups = check_groups(X)
        specs = self._specs()
        records = multi_agreements(groups, specs, threads=self.threads)
        cols = [[r.mean_kappa for r in records[s.name]] for s in specs]
        return np.asarray(cols, dtype=np.float64).T.reshape(-1, len(specs))

    def fit_transform(self, X, y=None):
        self.fit(X)
        return np.column_stack(
            [[r.mean_kappa for r in self.records_[name]] for name in self.records_]
        )
