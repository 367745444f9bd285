"""Binary mask data model, PNG I/O and dataset ingestion."""

from __future__ import annotations

import csv
import io
import logging
import os
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np
from PIL import Image, UnidentifiedImageError

logger = logging.getLogger(__name__)

PathLike = Union[str, os.PathLike]

SEGMENTATION_MARKER = "_segmentation"
MANIFEST_NAME = "manifest.csv"
MANIFEST_HEADER = ("lesion_id", "mask_path")

#: pixels with luminance strictly above this value are foreground
FOREGROUND_THRESHOLD = 127


class MaskError(ValueError):
    """Base class for mask and dataset errors."""


class MaskDecodeError(MaskError):
    pass


class MaskDimensionError(MaskError):
    pass


class DatasetError(MaskError):
    pass


class BinaryMask:
    """Immutable 2-D boolean grid, ``True`` marking lesion pixels.

    The grid is stored as a read-only ``numpy`` array of shape
    ``(height, width)``. ``np.asarray(mask)`` returns that array without
    copying.
    """

    __slots__ = ("_cells",)

    def __init__(self, cells):
        arr = np.array(cells, dtype=bool, copy=True)
        if arr.ndim != 2:
            raise MaskDimensionError(f"mask must be 2-D, got {arr.ndim}-D")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise MaskDimensionError(f"mask must be at least 1x1, got {arr.shape}")
        arr.setflags(write=False)
        self._cells = arr

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> "BinaryMask":
        # trusted fast path: arr is a fresh 2-D bool array owned by the caller
        obj = cls.__new__(cls)
        arr.setflags(write=False)
        obj._cells = arr
        return obj

    @property
    def cells(self) -> np.ndarray:
        return self._cells

    @property
    def height(self) -> int:
        return self._cells.shape[0]

    @property
    def width(self) -> int:
        return self._cells.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self._cells.shape

    def count(self) -> int:
        """Number of foreground pixels."""
        return int(np.count_nonzero(self._cells))

    def is_empty(self) -> bool:
        return not self._cells.any()

    def __array__(self, dtype=None, copy=None):
        if dtype is None or np.dtype(dtype) == np.bool_:
            return self._cells.copy() if copy else self._cells
        return self._cells.astype(dtype)

    def __invert__(self) -> "BinaryMask":
        return BinaryMask._wrap(~self._cells)

    def __eq__(self, other):
        if not isinstance(other, BinaryMask):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self._cells, other._cells))

    def __hash__(self):
        return hash((self.shape, np.packbits(self._cells).tobytes()))

    def __le__(self, other: "BinaryMask") -> bool:
        """Subset test: every foreground pixel of ``self`` is foreground in ``other``."""
        if self.shape != other.shape:
            raise MaskDimensionError(f"shape mismatch {self.shape} vs {other.shape}")
        return not np.any(self._cells & ~other._cells)

    def __repr__(self):
        return f"BinaryMask(height={self.height}, width={self.width}, foreground={self.count()})"


def as_mask(mask) -> BinaryMask:
    """Return ``mask`` as a :class:`BinaryMask`, converting array-likes."""
    if isinstance(mask, BinaryMask):
        return mask
    return BinaryMask(mask)


@dataclass(frozen=True)
class LesionGroup:
    lesion_id: str
    masks: tuple[BinaryMask, ...]
    paths: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if not self.lesion_id:
            raise DatasetError("lesion_id must be non-empty")
        masks = tuple(as_mask(m) for m in self.masks)
        if not masks:
            raise DatasetError(f"lesion {self.lesion_id!r} has no masks")
        shapes = {m.shape for m in masks}
        if len(shapes) > 1:
            raise MaskDimensionError(
                f"lesion {self.lesion_id!r}: masks differ in dimensions {sorted(shapes)}"
            )
        object.__setattr__(self, "masks", masks)
        object.__setattr__(self, "paths", tuple(str(p) for p in self.paths))

    def __len__(self):
        return len(self.masks)

    @property
    def shape(self) -> tuple[int, int]:
        return self.masks[0].shape


@dataclass(frozen=True)
class DatasetSummary:
    """Lesion counts bucketed by number of annotations (1, 2, 3, 4+)."""

    counts: dict
    total: int

    BUCKETS = ("1", "2", "3", "4+")

    def as_rows(self) -> list[tuple[str, int]]:
        return [(b, self.counts[b]) for b in self.BUCKETS]


@dataclass(frozen=True)
class RejectedGroup:
    lesion_id: str
    paths: tuple[str, ...]
    reason: str

    def __str__(self):
        return f"rejected lesion {self.lesion_id!r}: {self.reason} [{', '.join(self.paths)}]"


# --------------------------------------------------------------------- PNG I/O


def decode_mask(data: bytes, path: Optional[PathLike] = None) -> BinaryMask:
    """Decode PNG bytes into a mask, foreground where luminance > 127.

    Grayscale, RGB(A) and paletted images are converted to 8-bit luminance
    first; 16-bit grayscale is rescaled to the 0-255 range.
    """
    where = str(path) if path is not None else "<bytes>"
    try:
        with Image.open(io.BytesIO(data)) as img:
            if img.format != "PNG":
                raise MaskDecodeError(f"{where}: not a PNG image (format {img.format})")
            img.load()
            if img.width == 0 or img.height == 0:
                raise MaskDimensionError(f"{where}: zero-dimension image {img.size}")
            if img.mode in ("I", "I;16", "I;16B", "I;16L"):
                arr = np.asarray(img, dtype=np.float64) / 257.0
            else:
                arr = np.asarray(img.convert("L"))
    except MaskError:
        raise
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise MaskDecodeError(f"{where}: cannot decode PNG ({exc})") from exc
    if arr.ndim != 2 or 0 in arr.shape:
        raise MaskDimensionError(f"{where}: unusable image shape {arr.shape}")
    return BinaryMask._wrap(np.asarray(arr > FOREGROUND_THRESHOLD))


def encode_mask(mask) -> bytes:
    """Encode a mask as an 8-bit grayscale PNG (foreground 255, background 0)."""
    cells = as_mask(mask).cells
    img = Image.fromarray(np.where(cells, 255, 0).astype(np.uint8), mode="L")
    buf = io.BytesIO()
    img.save(buf, format="PNG", optimize=False, compress_level=6)
    return buf.getvalue()


def read_mask(path: PathLike) -> BinaryMask:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise MaskDecodeError(f"{path}: cannot read file ({exc})") from exc
    return decode_mask(data, path)


def write_mask(mask, path: PathLike) -> None:
    Path(path).write_bytes(encode_mask(mask))


# ------------------------------------------------------------------- ingestion


def _read_manifest(path: Path) -> dict[str, list[Path]]:
    base = path.parent
    entries: dict[str, list[Path]] = defaultdict(list)
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != MANIFEST_HEADER:
            raise DatasetError(f"{path}: manifest header must be 'lesion_id,mask_path', got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise DatasetError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
            lesion_id, mask_path = row[0].strip(), row[1].strip()
            if not lesion_id or not mask_path:
                raise DatasetError(f"{path}:{lineno}: empty lesion_id or mask_path")
            entries[lesion_id].append(base / mask_path)
    return entries


def _scan_directory(path: Path) -> dict[str, list[Path]]:
    entries: dict[str, list[Path]] = defaultdict(list)
    for child in path.iterdir():
        if not child.is_file() or child.suffix.lower() != ".png":
            continue
        idx = child.name.find(SEGMENTATION_MARKER)
        if idx <= 0:
            continue
        entries[child.name[:idx]].append(child)
    return entries


def discover_mask_files(source: PathLike) -> dict[str, list[Path]]:
    """Map lesion ids to their mask paths without decoding anything.

    ``source`` is a manifest CSV, or a directory. A directory holding a
    ``manifest.csv`` is read through the manifest; otherwise files named
    ``<lesion_id>_segmentation*.png`` are grouped by the text before
    ``_segmentation``.
    """
    src = Path(source)
    if src.is_file():
        entries = _read_manifest(src)
    elif src.is_dir():
        manifest = src / MANIFEST_NAME
        entries = _read_manifest(manifest) if manifest.is_file() else _scan_directory(src)
    else:
        raise DatasetError(f"{src}: no such file or directory")
    return {lid: sorted(paths, key=str) for lid, paths in sorted(entries.items())}


def load_group(lesion_id: str, paths: Sequence[PathLike]) -> Union[LesionGroup, RejectedGroup]:
    """Decode one lesion's masks; a size mismatch yields a :class:`RejectedGroup`."""
    masks = [read_mask(p) for p in paths]
    if len({m.shape for m in masks}) > 1:
        dims = ", ".join(f"{p}={m.width}x{m.height}" for p, m in zip(paths, masks))
        return RejectedGroup(lesion_id, tuple(map(str, paths)), f"dimension mismatch ({dims})")
    return LesionGroup(lesion_id, tuple(masks), tuple(paths))


def _report_rejection(rejected: RejectedGroup, on_reject) -> None:
    if on_reject is None:
        logger.warning("%s", rejected)
    else:
        on_reject(rejected)


def ingest_dataset(
    source: PathLike,
    on_reject: Optional[Callable[[RejectedGroup], None]] = None,
    threads: Optional[int] = 1,
) -> list[LesionGroup]:
    """Read every mask under ``source`` and group them per lesion.

    Groups are sorted by lesion id, masks within a group by path. A group
    whose masks differ in size is dropped and reported through
    ``on_reject`` (default: logged as a warning). Decoding may run on
    ``threads`` workers; the result does not depend on scheduling.

    Raises
    ------
    DatasetError
        If the source holds no mask files at all.
    MaskDecodeError
        If any mask file is unreadable.
    """
    groups = []
    for item in iter_groups(source, threads=threads):
        if isinstance(item, RejectedGroup):
            _report_rejection(item, on_reject)
        else:
            groups.append(item)
    return groups


def iter_groups(source: PathLike, threads: Optional[int] = 1, func=None):
    """Yield one decoded group (or rejection) per lesion, in lesion id order.

    Only about ``threads`` groups are held in memory at a time. With
    ``func`` given, yields ``func(group_or_rejection)`` instead, computed
    on the worker threads.
    """
    entries = discover_mask_files(source)
    if not entries:
        raise DatasetError(f"{source}: no mask files found")

    def work(item):
        loaded = load_group(*item)
        return loaded if func is None else func(loaded)

    workers = resolve_threads(threads)
    if workers <= 1 or len(entries) == 1:
        for item in entries.items():
            yield work(item)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # bounded look-ahead keeps memory proportional to the worker count
        items = iter(entries.items())
        pending = []
        for item in items:
            pending.append(pool.submit(work, item))
            if len(pending) >= 2 * workers:
                yield pending.pop(0).result()
        for fut in pending:
            yield fut.result()


def summarize_dataset(groups: Iterable[LesionGroup]) -> DatasetSummary:
    counts = dict.fromkeys(DatasetSummary.BUCKETS, 0)
    total = 0
    for group in groups:
        n = len(group.masks)
        counts["4+" if n >= 4 else str(n)] += 1
        total += 1
    return DatasetSummary(counts=counts, total=total)


def summary_from_counts(annotation_counts: Sequence[int]) -> DatasetSummary:
    """Bucket raw per-lesion annotation counts without loading masks."""
    counts = dict.fromkeys(DatasetSummary.BUCKETS, 0)
    for n in annotation_counts:
        if n < 1:
            raise ValueError(f"annotation count must be >= 1, got {n}")
        counts["4+" if n >= 4 else str(n)] += 1
    return DatasetSummary(counts=counts, total=len(annotation_counts))


def resolve_threads(threads: Optional[int]) -> int:
    if threads is None or threads == 0:
        return os.cpu_count() or 1
    if threads < 0:
        raise ValueError(f"threads must be >= 0 or None, got {threads}")
    return int(threads)
