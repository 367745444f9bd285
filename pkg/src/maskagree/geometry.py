"""Convex hull and bounding box of a mask's foreground.

Pixels are modelled by their centers ``(row, col)``. The hull is the
convex polygon of the foreground centers and its rasterization keeps
every pixel whose center lies inside or on that polygon. All tests run
in exact integer arithmetic.
"""

from __future__ import annotations

from typing import NamedTuple, Optional

import numpy as np

from .masks import BinaryMask, as_mask


class PixelPoint(NamedTuple):
    row: int
    col: int


class Box(NamedTuple):
    """Inclusive pixel extents."""

    row_min: int
    row_max: int
    col_min: int
    col_max: int

    @property
    def height(self) -> int:
        return self.row_max - self.row_min + 1

    @property
    def width(self) -> int:
        return self.col_max - self.col_min + 1


def _cross(o, a, b) -> int:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def monotone_chain(points) -> list[PixelPoint]:
    """Convex hull vertices in counter-clockwise order (row, col axes).

    Collinear points on hull edges are dropped. Degenerate inputs return
    one vertex (single point) or two (all points on a line).
    """
    pts = sorted(set((int(r), int(c)) for r, c in points))
    if len(pts) <= 2:
        return [PixelPoint(*p) for p in pts]

    lower: list[tuple[int, int]] = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[tuple[int, int]] = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    return [PixelPoint(*p) for p in hull]


def _row_extremes(cells: np.ndarray) -> np.ndarray:
    # leftmost and rightmost foreground pixel of every non-empty row;
    # interior pixels of a row can never be hull vertices
    rows = np.flatnonzero(cells.any(axis=1))
    sub = cells[rows]
    width = cells.shape[1]
    left = np.argmax(sub, axis=1)
    right = width - 1 - np.argmax(sub[:, ::-1], axis=1)
    return np.concatenate(
        [np.stack([rows, left], axis=1), np.stack([rows, right], axis=1)]
    )


def hull_vertices(mask) -> list[PixelPoint]:
    """Hull vertices of the foreground pixel centers; empty for an empty mask."""
    cells = as_mask(mask).cells
    if not cells.any():
        return []
    return monotone_chain(_row_extremes(cells).tolist())


def _ceil_div(num: np.ndarray, den: int) -> np.ndarray:
    return -((-num) // den)


def rasterize_polygon(vertices, shape) -> np.ndarray:
    """Fill a convex polygon given by integer vertices onto a grid.

    A pixel is set iff its center lies inside or on the polygon. Each
    edge contributes, for every row it spans, the exact column where it
    crosses that row; the row span is ``[ceil(min), floor(max)]`` of
    those crossings.
    """
    height, width = shape
    out = np.zeros(shape, dtype=bool)
    if not vertices:
        return out
    verts = [(int(r), int(c)) for r, c in vertices]
    r_lo = min(r for r, _ in verts)
    r_hi = max(r for r, _ in verts)
    nrows = r_hi - r_lo + 1
    big = np.iinfo(np.int64).max
    lo = np.full(nrows, big, dtype=np.int64)
    hi = np.full(nrows, -big, dtype=np.int64)

    n = len(verts)
    edges = [(verts[i], verts[(i + 1) % n]) for i in range(n)] if n > 1 else [(verts[0], verts[0])]
    for (r0, c0), (r1, c1) in edges:
        if r0 == r1:
            i = r0 - r_lo
            lo[i] = min(lo[i], c0, c1)
            hi[i] = max(hi[i], c0, c1)
            continue
        if r0 > r1:
            r0, c0, r1, c1 = r1, c1, r0, c0
        rows = np.arange(r0, r1 + 1, dtype=np.int64)
        dr = r1 - r0
        # column at row r is c0 + (r - r0) * (c1 - c0) / dr
        num = c0 * dr + (rows - r0) * (c1 - c0)
        sl = slice(r0 - r_lo, r1 - r_lo + 1)
        lo[sl] = np.minimum(lo[sl], _ceil_div(num, dr))
        hi[sl] = np.maximum(hi[sl], num // dr)

    lo = np.clip(lo, 0, width)
    hi = np.clip(hi, -1, width - 1)
    cols = np.arange(width)
    band = (cols[None, :] >= lo[:, None]) & (cols[None, :] <= hi[:, None])
    out[r_lo : r_hi + 1] = band
    return out


def convex_hull_mask(mask) -> BinaryMask:
    """Filled convex hull of the foreground; an empty mask is returned unchanged."""
    m = as_mask(mask)
    verts = hull_vertices(m)
    if not verts:
        return m
    return BinaryMask._wrap(rasterize_polygon(verts, m.shape))


def bounding_box(mask) -> Optional[Box]:
    cells = as_mask(mask).cells
    rows = np.flatnonzero(cells.any(axis=1))
    if rows.size == 0:
        return None
    cols = np.flatnonzero(cells.any(axis=0))
    return Box(int(rows[0]), int(rows[-1]), int(cols[0]), int(cols[-1]))


def bounding_box_mask(mask) -> BinaryMask:
    """Solid axis-aligned rectangle covering the foreground."""
    m = as_mask(mask)
    box = bounding_box(m)
    if box is None:
        return m
    out = np.zeros(m.shape, dtype=bool)
    out[box.row_min : box.row_max + 1, box.col_min : box.col_max + 1] = True
    return BinaryMask._wrap(out)
