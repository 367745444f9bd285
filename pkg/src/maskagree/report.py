"""Analysis report: assembly, CSV/JSON serialisation and SVG plots."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterable, Mapping, Optional
from xml.sax.saxutils import escape, quoteattr

import numpy as np

from . import __version__
from . import stats
from .agreement import AgreementRecord
from .conditioning import ALL_KINDS
from .masks import DatasetSummary
from .stats import DistributionSummary, KsResult

PER_LESION_HEADER = ("lesion_id", "conditioning", "mean_kappa", "n_pairs")
PERCENTILES_HEADER = ("conditioning", "p25", "p50", "p75", "p95", "mean", "n")
KS_HEADER = ("conditioning_a", "conditioning_b", "d", "p_value")

JITTER_RNG = "numpy.random.default_rng (PCG64)"


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def _fmt_p(x: float) -> str:
    # p-values span hundreds of orders of magnitude; keep 6 mantissa decimals
    return f"{x:.6e}"


def _kind_order(name: str) -> tuple:
    return (ALL_KINDS.index(name) if name in ALL_KINDS else len(ALL_KINDS), name)


@dataclass
class AnalysisReport:
    per_lesion: list  # AgreementRecord, kept sorted by (lesion_id, conditioning)
    summaries: dict  # conditioning -> DistributionSummary
    ks_matrix: dict  # (conditioning_a, conditioning_b), a < b -> KsResult
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.per_lesion = sorted(self.per_lesion, key=lambda r: (r.lesion_id, r.conditioning))
        self.validate()

    @property
    def conditionings(self) -> list[str]:
        """Conditioning names in canonical treatment order."""
        return sorted(self.summaries, key=_kind_order)

    def samples(self, conditioning: str) -> list[float]:
        """Mean kappas of ``conditioning`` ordered by lesion id."""
        rows = sorted(
            (r for r in self.per_lesion if r.conditioning == conditioning),
            key=lambda r: r.lesion_id,
        )
        return [r.mean_kappa for r in rows]

    def validate(self) -> None:
        in_table = {r.conditioning for r in self.per_lesion}
        if in_table != set(self.summaries):
            raise ValueError(
                f"conditionings differ between per-lesion table {sorted(in_table)} "
                f"and summaries {sorted(self.summaries)}"
            )
        expected = {tuple(sorted(p)) for p in combinations(self.summaries, 2)}
        if set(self.ks_matrix) != expected:
            raise ValueError("ks_matrix must cover every unordered conditioning pair exactly once")


def build_report(
    records: Mapping[str, Iterable[AgreementRecord]],
    bins: int = stats.DEFAULT_BINS,
    se_side: Optional[int] = None,
    dataset: Optional[DatasetSummary] = None,
    jitter_seed: int = 0,
    extra: Optional[dict] = None,
) -> AnalysisReport:
    """Summarise every conditioning and run K-S on every pair of them."""
    per_lesion = []
    samples = {}
    for name, recs in records.items():
        recs = sorted(recs, key=lambda r: r.lesion_id)
        if not recs:
            raise ValueError(f"no agreement records for conditioning {name!r}")
        per_lesion.extend(recs)
        samples[name] = [r.mean_kappa for r in recs]
    if not samples:
        raise ValueError("no conditionings to report")

    summaries = {name: stats.summarize(xs, bins=bins) for name, xs in samples.items()}
    ks = {}
    for a, b in combinations(sorted(samples), 2):
        ks[(a, b)] = stats.ks_test(samples[a], samples[b])

    metadata = {
        "tool": "maskagree",
        "version": __version__,
        "parameters": {
            "se_side": se_side,
            "se_shape": "square",
            "bins": bins,
            "histogram_range": list(stats.HISTOGRAM_RANGE),
            "quantile_rule": stats.QUANTILE_RULE,
            "bandwidth_rule": stats.BANDWIDTH_RULE,
            "kde_kernel": stats.KDE_KERNEL,
            "kde_points": stats.KDE_POINTS,
            "ks_pvalue_rule": stats.KS_PVALUE_RULE,
            "jitter_rng": JITTER_RNG,
            "jitter_seed": jitter_seed,
            "conditionings": sorted(samples, key=_kind_order),
        },
        "dataset": None
        if dataset is None
        else {"counts": dict(dataset.counts), "total": dataset.total},
    }
    if extra:
        metadata.update(extra)
    return AnalysisReport(per_lesion=per_lesion, summaries=summaries, ks_matrix=ks, metadata=metadata)


# ----------------------------------------------------------------------- CSV


def per_lesion_rows(report: AnalysisReport) -> list[tuple]:
    rows = sorted(report.per_lesion, key=lambda r: (r.lesion_id, r.conditioning))
    return [(r.lesion_id, r.conditioning, _fmt(r.mean_kappa), str(r.n_pairs)) for r in rows]


def percentile_rows(report: AnalysisReport) -> list[tuple]:
    rows = []
    for name in sorted(report.summaries):
        s = report.summaries[name]
        qs = [_fmt(s.quantiles[q]) for q in stats.QUANTILE_LEVELS]
        rows.append((name, *qs, _fmt(s.mean), str(s.n)))
    return rows


def ks_rows(report: AnalysisReport) -> list[tuple]:
    return [
        (a, b, _fmt(r.d_statistic), _fmt_p(r.p_value))
        for (a, b), r in sorted(report.ks_matrix.items())
    ]


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def write_csv(report: AnalysisReport, out_dir) -> list[Path]:
    """Write ``per_lesion.csv``, ``percentiles.csv`` and ``ks.csv``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = [
        ("per_lesion.csv", PER_LESION_HEADER, per_lesion_rows(report)),
        ("percentiles.csv", PERCENTILES_HEADER, percentile_rows(report)),
        ("ks.csv", KS_HEADER, ks_rows(report)),
    ]
    paths = []
    for name, header, rows in files:
        path = out / name
        path.write_text(_csv_text(header, rows), encoding="utf-8")
        paths.append(path)
    return paths


# ---------------------------------------------------------------------- JSON


def _summary_to_dict(s: DistributionSummary) -> dict:
    return {
        "n": s.n,
        "mean": s.mean,
        "quantiles": {repr(q): v for q, v in s.quantiles.items()},
        "histogram": [list(b) for b in s.histogram],
        "kde": [list(p) for p in s.kde],
        "bandwidth": s.bandwidth,
    }


def _summary_from_dict(d: dict) -> DistributionSummary:
    return DistributionSummary(
        n=d["n"],
        mean=d["mean"],
        quantiles={float(q): v for q, v in d["quantiles"].items()},
        histogram=[tuple(b) for b in d["histogram"]],
        kde=[tuple(p) for p in d["kde"]],
        bandwidth=d["bandwidth"],
    )


def report_to_dict(report: AnalysisReport) -> dict:
    return {
        "metadata": report.metadata,
        "per_lesion": [
            {
                "lesion_id": r.lesion_id,
                "conditioning": r.conditioning,
                "mean_kappa": r.mean_kappa,
                "n_pairs": r.n_pairs,
            }
            for r in sorted(report.per_lesion, key=lambda r: (r.lesion_id, r.conditioning))
        ],
        "summaries": {k: _summary_to_dict(v) for k, v in report.summaries.items()},
        "ks": [
            {
                "conditioning_a": a,
                "conditioning_b": b,
                "d": r.d_statistic,
                "p_value": r.p_value,
                "n1": r.n1,
                "n2": r.n2,
            }
            for (a, b), r in sorted(report.ks_matrix.items())
        ],
    }


def report_from_dict(d: dict) -> AnalysisReport:
    per_lesion = [
        AgreementRecord(r["lesion_id"], r["conditioning"], r["mean_kappa"], r["n_pairs"])
        for r in d["per_lesion"]
    ]
    summaries = {k: _summary_from_dict(v) for k, v in d["summaries"].items()}
    ks = {
        (r["conditioning_a"], r["conditioning_b"]): KsResult(r["d"], r["p_value"], r["n1"], r["n2"])
        for r in d["ks"]
    }
    return AnalysisReport(per_lesion=per_lesion, summaries=summaries, ks_matrix=ks, metadata=d["metadata"])


def dumps_json(report: AnalysisReport) -> str:
    return json.dumps(report_to_dict(report), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(report: AnalysisReport, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_json(report), encoding="utf-8")
    return path


def read_json(path) -> AnalysisReport:
    return report_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


# ----------------------------------------------------------------------- SVG

PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)

# plot area of both figures, in SVG user units
SVG_WIDTH = 960
SVG_HEIGHT = 540
MARGIN_LEFT = 70
MARGIN_RIGHT = 190
MARGIN_TOP = 30
MARGIN_BOTTOM = 60
PLOT_W = SVG_WIDTH - MARGIN_LEFT - MARGIN_RIGHT
PLOT_H = SVG_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
KAPPA_TICKS = (-1.0, -0.5, 0.0, 0.5, 1.0)


def _n(x: float) -> str:
    return f"{x:.2f}"


def _header(title: str) -> list[str]:
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" '
        f'viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}" font-family="sans-serif" font-size="12">',
        f"<title>{escape(title)}</title>",
        f'<rect x="0" y="0" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" fill="white"/>',
    ]


def _legend(names: list[str]) -> list[str]:
    x = SVG_WIDTH - MARGIN_RIGHT + 20
    out = ['<g class="legend">']
    for i, name in enumerate(names):
        y = MARGIN_TOP + 10 + 20 * i
        color = PALETTE[i % len(PALETTE)]
        out.append(f'<rect x="{x}" y="{y - 9}" width="12" height="12" fill="{color}" fill-opacity="0.6"/>')
        out.append(f'<text x="{x + 18}" y="{y + 1}">{escape(name)}</text>')
    out.append("</g>")
    return out


def kappa_to_x(k: float) -> float:
    return MARGIN_LEFT + (k + 1.0) / 2.0 * PLOT_W


def kappa_to_y(k: float) -> float:
    return MARGIN_TOP + (1.0 - (k + 1.0) / 2.0) * PLOT_H


def y_to_kappa(y: float) -> float:
    return 1.0 - 2.0 * (y - MARGIN_TOP) / PLOT_H


def _require_samples(report: AnalysisReport) -> list[str]:
    names = report.conditionings
    if not names or any(report.summaries[n].n == 0 for n in names):
        raise ValueError("cannot plot a report without samples")
    return names


def render_distributions(report: AnalysisReport) -> str:
    """Overlaid histograms and KDE lines, one colour per conditioning."""
    names = _require_samples(report)
    ymax = 0.0
    for name in names:
        s = report.summaries[name]
        ymax = max([ymax] + [d for _, _, d in s.histogram])
        ymax = max([ymax] + [y for x, y in s.kde if -1.0 <= x <= 1.0])
    ymax = ymax * 1.05 if ymax > 0 else 1.0

    def py(d):
        return MARGIN_TOP + PLOT_H - d / ymax * PLOT_H

    out = _header("Distribution of mean pairwise Cohen's kappa")
    bottom = MARGIN_TOP + PLOT_H
    out.append('<g class="axes" stroke="black" fill="none">')
    out.append(f'<line x1="{MARGIN_LEFT}" y1="{bottom}" x2="{MARGIN_LEFT + PLOT_W}" y2="{bottom}"/>')
    out.append(f'<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP}" x2="{MARGIN_LEFT}" y2="{bottom}"/>')
    out.append("</g>")
    out.append('<g class="ticks" text-anchor="middle">')
    for t in KAPPA_TICKS:
        x = _n(kappa_to_x(t))
        out.append(f'<line x1="{x}" y1="{bottom}" x2="{x}" y2="{bottom + 5}" stroke="black"/>')
        out.append(f'<text x="{x}" y="{bottom + 20}">{t:g}</text>')
    for i in range(5):
        d = ymax * i / 4
        y = _n(py(d))
        out.append(f'<line x1="{MARGIN_LEFT - 5}" y1="{y}" x2="{MARGIN_LEFT}" y2="{y}" stroke="black"/>')
        out.append(f'<text x="{MARGIN_LEFT - 8}" y="{y}" text-anchor="end" dy="4">{d:.2f}</text>')
    out.append("</g>")
    out.append(
        f'<text class="xlabel" x="{_n(MARGIN_LEFT + PLOT_W / 2)}" y="{SVG_HEIGHT - 15}" '
        f'text-anchor="middle">Cohen\'s kappa (mean over annotator pairs)</text>'
    )
    out.append(
        f'<text class="ylabel" x="18" y="{_n(MARGIN_TOP + PLOT_H / 2)}" text-anchor="middle" '
        f'transform="rotate(-90 18 {_n(MARGIN_TOP + PLOT_H / 2)})">density</text>'
    )

    for i, name in enumerate(names):
        s = report.summaries[name]
        color = PALETTE[i % len(PALETTE)]
        out.append(f'<g class="histogram" data-conditioning={quoteattr(name)} fill="{color}" fill-opacity="0.25">')
        for left, right, dens in s.histogram:
            if dens <= 0:
                continue
            x0, x1 = kappa_to_x(left), kappa_to_x(right)
            y = py(dens)
            out.append(
                f'<rect x="{_n(x0)}" y="{_n(y)}" width="{_n(x1 - x0)}" height="{_n(bottom - y)}"/>'
            )
        out.append("</g>")
    for i, name in enumerate(names):
        s = report.summaries[name]
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(
            f"{_n(kappa_to_x(x))},{_n(py(y))}" for x, y in s.kde if -1.0 <= x <= 1.0
        )
        out.append(
            f'<polyline class="kde" data-conditioning={quoteattr(name)} points="{pts}" '
            f'fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
    out.extend(_legend(names))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_strips(report: AnalysisReport, jitter_seed: int = 0) -> str:
    """Jittered samples, violin outlines and mean markers, one column each."""
    names = _require_samples(report)
    rng = np.random.default_rng(jitter_seed)
    col_w = PLOT_W / len(names)
    bottom = MARGIN_TOP + PLOT_H

    out = _header("Mean pairwise Cohen's kappa per conditioning")
    out.append('<g class="axes" stroke="black" fill="none">')
    out.append(f'<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP}" x2="{MARGIN_LEFT}" y2="{bottom}"/>')
    out.append(f'<line x1="{MARGIN_LEFT}" y1="{bottom}" x2="{MARGIN_LEFT + PLOT_W}" y2="{bottom}"/>')
    out.append("</g>")
    out.append('<g class="ticks">')
    for t in KAPPA_TICKS:
        y = _n(kappa_to_y(t))
        out.append(f'<line x1="{MARGIN_LEFT - 5}" y1="{y}" x2="{MARGIN_LEFT}" y2="{y}" stroke="black"/>')
        out.append(f'<text x="{MARGIN_LEFT - 8}" y="{y}" text-anchor="end" dy="4">{t:g}</text>')
    out.append("</g>")
    out.append(
        f'<text class="ylabel" x="18" y="{_n(MARGIN_TOP + PLOT_H / 2)}" text-anchor="middle" '
        f'transform="rotate(-90 18 {_n(MARGIN_TOP + PLOT_H / 2)})">Cohen\'s kappa</text>'
    )

    for i, name in enumerate(names):
        s = report.summaries[name]
        xs = report.samples(name)
        color = PALETTE[i % len(PALETTE)]
        cx = MARGIN_LEFT + (i + 0.5) * col_w
        out.append(f'<g class="strip" data-conditioning={quoteattr(name)}>')
        out.append(
            f'<text class="label" x="{_n(cx)}" y="{bottom + 20}" text-anchor="middle">{escape(name)}</text>'
        )

        curve = [(x, y) for x, y in s.kde if -1.0 <= x <= 1.0]
        if curve:
            peak = max(y for _, y in curve) or 1.0
            half = 0.4 * col_w
            right = [f"{_n(cx + y / peak * half)},{_n(kappa_to_y(x))}" for x, y in curve]
            left = [f"{_n(cx - y / peak * half)},{_n(kappa_to_y(x))}" for x, y in reversed(curve)]
            out.append(
                f'<polygon class="violin" points="{" ".join(right + left)}" '
                f'fill="{color}" fill-opacity="0.3" stroke="{color}"/>'
            )
        else:
            out.append(f'<polygon class="violin" points="" fill="{color}" fill-opacity="0.3"/>')

        jitter = rng.uniform(-1.0, 1.0, size=len(xs)) * 0.15 * col_w
        for k, j in zip(xs, jitter):
            out.append(f'<circle class="dot" cx="{_n(cx + j)}" cy="{_n(kappa_to_y(k))}" r="1.5" fill="black"/>')
        out.append(
            f'<circle class="mean" cx="{_n(cx)}" cy="{_n(kappa_to_y(s.mean))}" r="5" fill="red"/>'
        )
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def plot_distributions(report: AnalysisReport, path) -> Path:
    text = render_distributions(report)
    path = Path(path)
    path.write_text(text, encoding="utf-8")
    return path


def plot_strips(report: AnalysisReport, path, jitter_seed: int = 0) -> Path:
    text = render_strips(report, jitter_seed)
    path = Path(path)
    path.write_text(text, encoding="utf-8")
    return path


# ------------------------------------------------------------------- ranking


def rank_lesions(report: AnalysisReport, conditioning: str, direction: str = "ascending") -> list[tuple[str, float]]:
    """Lesions ordered by mean kappa, ties broken by lesion id."""
    if conditioning not in report.summaries:
        raise KeyError(f"unknown conditioning {conditioning!r}; report has {report.conditionings}")
    if direction not in ("ascending", "descending"):
        raise ValueError(f"direction must be 'ascending' or 'descending', got {direction!r}")
    rows = [(r.lesion_id, r.mean_kappa) for r in report.per_lesion if r.conditioning == conditioning]
    rows.sort(key=lambda t: (t[1], t[0]))
    if direction == "descending":
        rows.reverse()
    return rows


DEFAULT_BANDS = (-1.0, 0.0, 0.2, 0.4, 0.6, 0.8, 1.0)


def exemplars_by_band(report: AnalysisReport, conditioning: str, edges=DEFAULT_BANDS, per_band: int = 1) -> dict:
    """Pick up to ``per_band`` lesions per kappa band, nearest the band's middle.

    Bands are half-open ``[lo, hi)`` except the last, which is closed.
    Keys are ``(lo, hi)`` tuples.
    """
    ranked = rank_lesions(report, conditioning)
    bands = {}
    for i, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
        last = i == len(edges) - 2
        inside = [(lid, k) for lid, k in ranked if lo <= k < hi or (last and k == hi)]
        mid = (lo + hi) / 2
        inside.sort(key=lambda t: (abs(t[1] - mid), t[0]))
        bands[(lo, hi)] = [lid for lid, _ in inside[:per_band]]
    return bands
