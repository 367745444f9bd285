"""Ground-truth conditionings applied before measuring agreement."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from . import geometry, morphology
from .masks import BinaryMask, as_mask
from .morphology import DEFAULT_SE_SIDE, check_se_side


class Kind(str, Enum):
    ORIGINAL = "original"
    OPENING = "opening"
    CLOSING = "closing"
    CONVEX_HULL = "convex_hull"
    OPENING_CONVEX_HULL = "opening_convex_hull"
    CLOSING_CONVEX_HULL = "closing_convex_hull"
    BOUNDING_BOX = "bounding_box"

    def __str__(self):
        return self.value


ALL_KINDS: tuple[str, ...] = tuple(k.value for k in Kind)
MORPHOLOGICAL_KINDS = frozenset(
    {Kind.OPENING, Kind.CLOSING, Kind.OPENING_CONVEX_HULL, Kind.CLOSING_CONVEX_HULL}
)


def parse_kind(kind) -> Kind:
    try:
        return Kind(str(kind))
    except ValueError:
        raise ValueError(
            f"unknown conditioning {kind!r}; expected one of {', '.join(ALL_KINDS)}"
        ) from None


@dataclass(frozen=True)
class ConditioningSpec:
    kind: Kind = Kind.ORIGINAL
    se_side: int = DEFAULT_SE_SIDE

    def __post_init__(self):
        object.__setattr__(self, "kind", parse_kind(self.kind))
        object.__setattr__(self, "se_side", check_se_side(self.se_side))

    @property
    def name(self) -> str:
        return self.kind.value


def as_spec(spec, se_side: int = DEFAULT_SE_SIDE) -> ConditioningSpec:
    if isinstance(spec, ConditioningSpec):
        return spec
    return ConditioningSpec(parse_kind(spec), se_side)


def apply(spec, mask) -> BinaryMask:
    """Condition one mask. Composite kinds run the morphology first, then the hull.

    ``spec`` may be a :class:`ConditioningSpec` or a kind name (default
    element side).
    """
    spec = as_spec(spec)
    m = as_mask(mask)
    kind, side = spec.kind, spec.se_side
    if kind is Kind.ORIGINAL:
        return m
    if kind is Kind.OPENING:
        return morphology.opening(m, side)
    if kind is Kind.CLOSING:
        return morphology.closing(m, side)
    if kind is Kind.CONVEX_HULL:
        return geometry.convex_hull_mask(m)
    if kind is Kind.OPENING_CONVEX_HULL:
        return geometry.convex_hull_mask(morphology.opening(m, side))
    if kind is Kind.CLOSING_CONVEX_HULL:
        return geometry.convex_hull_mask(morphology.closing(m, side))
    if kind is Kind.BOUNDING_BOX:
        return geometry.bounding_box_mask(m)
    raise AssertionError(kind)
