"""Binary erosion, dilation, opening and closing with a flat square element.

The mask is treated as a window onto an unbounded background plane:
pixels outside the image are background, and every operator is the
plane operator cropped back to the image. For erosion, dilation and
opening that is the same as zero padding. Closing dilates into a margin
of ``radius`` pixels before eroding, which keeps it extensive for
lesions touching the frame.

The square footprint is separable, so each pass runs along rows and
then along columns over window sums.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .masks import BinaryMask, as_mask

DEFAULT_SE_SIDE = 5


@dataclass(frozen=True)
class StructuringElement:
    """Flat square footprint of odd ``side``, origin at its center."""

    side: int = DEFAULT_SE_SIDE

    def __post_init__(self):
        check_se_side(self.side)

    @property
    def radius(self) -> int:
        return self.side // 2

    def footprint(self) -> np.ndarray:
        return np.ones((self.side, self.side), dtype=bool)


def square(side: int = DEFAULT_SE_SIDE) -> StructuringElement:
    return StructuringElement(side)


def check_se_side(side) -> int:
    if isinstance(side, bool) or not isinstance(side, (int, np.integer)):
        raise TypeError(f"structuring element side must be an int, got {type(side).__name__}")
    if side < 1 or side % 2 == 0:
        raise ValueError(f"structuring element side must be odd and >= 1, got {side}")
    return int(side)


def _as_se(se) -> StructuringElement:
    if isinstance(se, StructuringElement):
        return se
    return StructuringElement(check_se_side(se))


def _window_counts(cells: np.ndarray, radius: int, axis: int) -> np.ndarray:
    # number of foreground pixels in the centered window along `axis`,
    # zero padding outside the image
    pad = [(0, 0), (0, 0)]
    pad[axis] = (radius + 1, radius)
    csum = np.cumsum(np.pad(cells, pad), axis=axis, dtype=np.int32)
    n = cells.shape[axis]
    if axis == 0:
        return csum[2 * radius + 1 :] - csum[:n]
    return csum[:, 2 * radius + 1 :] - csum[:, :n]


def _erode_cells(cells: np.ndarray, radius: int) -> np.ndarray:
    if radius == 0:
        return cells.copy()
    side = 2 * radius + 1
    rows = _window_counts(cells, radius, axis=1) == side
    return _window_counts(rows, radius, axis=0) == side


def _dilate_cells(cells: np.ndarray, radius: int) -> np.ndarray:
    if radius == 0:
        return cells.copy()
    rows = _window_counts(cells, radius, axis=1) > 0
    return _window_counts(rows, radius, axis=0) > 0


def erode(mask, se=DEFAULT_SE_SIDE) -> BinaryMask:
    """Keep pixels whose whole footprint lies on in-image foreground."""
    se = _as_se(se)
    return BinaryMask._wrap(_erode_cells(as_mask(mask).cells, se.radius))


def dilate(mask, se=DEFAULT_SE_SIDE) -> BinaryMask:
    """Mark pixels whose footprint touches any foreground pixel."""
    se = _as_se(se)
    return BinaryMask._wrap(_dilate_cells(as_mask(mask).cells, se.radius))


def opening(mask, se=DEFAULT_SE_SIDE) -> BinaryMask:
    """Erosion then dilation; removes foreground details smaller than ``se``."""
    r = _as_se(se).radius
    return BinaryMask._wrap(_dilate_cells(_erode_cells(as_mask(mask).cells, r), r))


def closing(mask, se=DEFAULT_SE_SIDE) -> BinaryMask:
    """Dilation then erosion; fills background holes and gaps smaller than ``se``."""
    r = _as_se(se).radius
    cells = as_mask(mask).cells
    if r == 0:
        return BinaryMask._wrap(cells.copy())
    padded = np.pad(cells, r)
    closed = _erode_cells(_dilate_cells(padded, r), r)
    return BinaryMask._wrap(np.ascontiguousarray(closed[r:-r, r:-r]))
