"""Command line front end: ``maskagree {analyze,condition,kappa,summary}``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import __version__, report
from .agreement import cohen_kappa, lesion_mean_kappa
from .conditioning import ALL_KINDS, ConditioningSpec, apply
from .masks import (
    DatasetError,
    MaskError,
    RejectedGroup,
    discover_mask_files,
    iter_groups,
    read_mask,
    summary_from_counts,
    write_mask,
)
from .morphology import DEFAULT_SE_SIDE, check_se_side
from .stats import DEFAULT_BINS

logger = logging.getLogger("maskagree")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_PARTIAL = 3

FORMATS = ("csv", "json", "svg")


@dataclass
class RunConfig:
    input: Path
    output_dir: Path
    conditionings: list = field(default_factory=lambda: list(ALL_KINDS))
    se_side: int = DEFAULT_SE_SIDE
    bins: int = DEFAULT_BINS
    formats: list = field(default_factory=lambda: list(FORMATS))
    jitter_seed: int = 0
    threads: Optional[int] = 1

    def __post_init__(self):
        if not self.conditionings:
            raise ValueError("at least one conditioning is required")
        check_se_side(self.se_side)
        if self.bins < 1:
            raise ValueError("bins must be >= 1")
        unknown = set(self.formats) - set(FORMATS)
        if unknown:
            raise ValueError(f"unknown formats: {sorted(unknown)}")


def _err(msg: str) -> None:
    print(f"maskagree: {msg}", file=sys.stderr)


def cmd_analyze(config: RunConfig) -> int:
    specs = [ConditioningSpec(c, config.se_side) for c in config.conditionings]

    def evaluate(loaded):
        # runs on worker threads; masks are dropped as soon as kappas are known
        if isinstance(loaded, RejectedGroup):
            return loaded, 0, None
        if len(loaded.masks) < 2:
            return loaded.lesion_id, len(loaded.masks), None
        return loaded.lesion_id, len(loaded.masks), [lesion_mean_kappa(loaded, s) for s in specs]

    rejected = []
    mask_counts = []
    records = {s.name: [] for s in specs}
    try:
        for key, n_masks, recs in iter_groups(config.input, threads=config.threads, func=evaluate):
            if isinstance(key, RejectedGroup):
                rejected.append(key)
                _err(str(key))
                continue
            mask_counts.append(n_masks)
            if recs is not None:
                for spec, rec in zip(specs, recs):
                    records[spec.name].append(rec)
    except MaskError as exc:
        _err(str(exc))
        return EXIT_ERROR

    n_eligible = len(records[specs[0].name])
    if not n_eligible:
        _err(f"{config.input}: no lesion with two or more masks")
        return EXIT_ERROR

    rep = report.build_report(
        records,
        bins=config.bins,
        se_side=config.se_side,
        dataset=summary_from_counts(mask_counts),
        jitter_seed=config.jitter_seed,
        extra={"rejected_lesions": sorted(r.lesion_id for r in rejected),
               "lesions_analyzed": n_eligible},
    )

    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    if "csv" in config.formats:
        report.write_csv(rep, out)
    if "json" in config.formats:
        report.write_json(rep, out / "report.json")
    if "svg" in config.formats:
        report.plot_distributions(rep, out / "distributions.svg")
        report.plot_strips(rep, out / "strips.svg", jitter_seed=config.jitter_seed)

    print(f"analyzed {n_eligible} lesions under {len(specs)} conditionings -> {out}")
    return EXIT_PARTIAL if rejected else EXIT_OK


def _condition_inputs(src: Path) -> list[Path]:
    if src.is_file() and src.suffix.lower() == ".png":
        return [src]
    if src.is_file() or (src / "manifest.csv").is_file():
        return [p for paths in discover_mask_files(src).values() for p in paths]
    if src.is_dir():
        return sorted(p for p in src.iterdir() if p.is_file() and p.suffix.lower() == ".png")
    raise DatasetError(f"{src}: no such file or directory")


def cmd_condition(input, kind: str, se_side: int, out) -> int:
    spec = ConditioningSpec(kind, se_side)
    try:
        paths = _condition_inputs(Path(input))
    except MaskError as exc:
        _err(str(exc))
        return EXIT_ERROR
    if not paths:
        _err(f"{input}: no PNG masks found")
        return EXIT_ERROR
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    status = EXIT_OK
    for path in paths:
        try:
            mask = read_mask(path)
        except MaskError as exc:
            _err(str(exc))
            status = EXIT_PARTIAL
            continue
        write_mask(apply(spec, mask), out / f"{path.stem}_{spec.name}.png")
    return status


def cmd_kappa(path_a, path_b) -> int:
    try:
        k = cohen_kappa(read_mask(path_a), read_mask(path_b))
    except MaskError as exc:
        _err(str(exc))
        return EXIT_ERROR
    print(f"{k:.6f}")
    return EXIT_OK


def cmd_summary(input) -> int:
    try:
        if not discover_mask_files(input):
            summary = summary_from_counts([])
        else:
            counts = []
            for item in iter_groups(input):
                if isinstance(item, RejectedGroup):
                    _err(str(item))
                else:
                    counts.append(len(item.masks))
            summary = summary_from_counts(counts)
    except MaskError as exc:
        _err(str(exc))
        return EXIT_ERROR
    print("annotations\tlesions")
    for bucket, n in summary.as_rows():
        print(f"{bucket}\t{n}")
    print(f"total\t{summary.total}")
    return EXIT_OK


def _csv_list(choices):
    def parse(text):
        items = [t.strip() for t in text.split(",") if t.strip()]
        bad = [t for t in items if t not in choices]
        if bad:
            raise argparse.ArgumentTypeError(
                f"invalid choice(s) {', '.join(bad)}; choose from {', '.join(choices)}"
            )
        if not items:
            raise argparse.ArgumentTypeError("empty list")
        return list(dict.fromkeys(items))
    return parse


def _se_side(text):
    try:
        return check_se_side(int(text))
    except (TypeError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _threads(text):
    if text == "auto":
        return None
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("threads must be a positive integer or 'auto'") from None
    if n < 1:
        raise argparse.ArgumentTypeError("threads must be a positive integer or 'auto'")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maskagree",
        description="Inter-annotator agreement of binary segmentation masks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="kappa distributions under each conditioning")
    p.add_argument("--input", required=True, type=Path, help="mask directory or manifest CSV")
    p.add_argument("--out", required=True, type=Path, help="output directory")
    p.add_argument("--conditionings", type=_csv_list(ALL_KINDS), default=list(ALL_KINDS),
                   help="comma-separated subset of: " + ",".join(ALL_KINDS))
    p.add_argument("--se-side", type=_se_side, default=DEFAULT_SE_SIDE)
    p.add_argument("--bins", type=int, default=DEFAULT_BINS)
    p.add_argument("--formats", type=_csv_list(FORMATS), default=list(FORMATS))
    p.add_argument("--jitter-seed", type=int, default=0)
    p.add_argument("--threads", type=_threads, default=1, help="worker count or 'auto'")

    p = sub.add_parser("condition", help="write conditioned copies of masks")
    p.add_argument("--input", required=True, type=Path, help="PNG file, directory or manifest")
    p.add_argument("--kind", required=True, choices=ALL_KINDS)
    p.add_argument("--se-side", type=_se_side, default=DEFAULT_SE_SIDE)
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("kappa", help="Cohen's kappa between two mask files")
    p.add_argument("path_a", type=Path)
    p.add_argument("path_b", type=Path)

    p = sub.add_parser("summary", help="lesion counts per number of annotations")
    p.add_argument("--input", required=True, type=Path)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "analyze":
        if args.bins < 1:
            parser.error("--bins must be >= 1")
        config = RunConfig(
            input=args.input,
            output_dir=args.out,
            conditionings=args.conditionings,
            se_side=args.se_side,
            bins=args.bins,
            formats=args.formats,
            jitter_seed=args.jitter_seed,
            threads=args.threads,
        )
        return cmd_analyze(config)
    if args.command == "condition":
        return cmd_condition(args.input, args.kind, args.se_side, args.out)
    if args.command == "kappa":
        return cmd_kappa(args.path_a, args.path_b)
    if args.command == "summary":
        return cmd_summary(args.input)
    parser.error(f"unknown command {args.command}")
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
