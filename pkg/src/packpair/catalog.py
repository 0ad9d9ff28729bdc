"""Parametric shoe and box models plus the four-pair test catalog.

Lengths, masses and box sizes are the published catalog values; shoe widths,
heights and keypoint placement ratios are estimates, since only lengths and
masses were reported.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional


class Softness(enum.Enum):
    RIGID = "rigid"
    SOFT = "soft"
    ELASTIC = "elastic"


@dataclass(frozen=True)
class ShoeModel:
    name: str
    length: float  # mm, heel to toe
    width: float  # mm, inside to outside
    height: float  # mm, sole to topline
    mass: float  # g
    softness: Softness = Softness.SOFT
    has_bottom: bool = True
    # side->top toppling is structurally hard (wide, stable side support)
    hard_side_topple: bool = False
    com_height: Optional[float] = None

    def __post_init__(self):
        for name in ("length", "width", "height", "mass"):
            if not getattr(self, name) > 0:
                raise ValueError(f"ShoeModel.{name} must be positive")
        if self.com_height is not None and not 0 < self.com_height < self.height:
            raise ValueError("com_height must lie inside the shoe height")

    @property
    def effective_com_height(self) -> float:
        return self.height / 2 if self.com_height is None else self.com_height

    # body-frame keypoints; origin at the toe/heel midpoint on the sole plane,
    # X heel->toe, Z out of the sole into the upper, inside on +Y
    def body_keypoints(self) -> dict[str, tuple[float, float, float]]:
        half = self.length / 2
        return {
            "toe": (half, 0.0, 0.0),
            "heel": (-half, 0.0, 0.0),
            "topline": (-0.2 * self.length, 0.0, self.height),
            "outside": (0.0, -self.width / 2, 0.35 * self.height),
            "inside": (0.0, self.width / 2, 0.35 * self.height),
        }


@dataclass(frozen=True)
class BoxModel:
    length: float
    width: float
    wall_height: float
    name: str = "custom"

    def __post_init__(self):
        if not (self.length > 0 and self.width > 0 and self.wall_height > 0):
            raise ValueError("box dimensions must be positive")
        if self.width > self.length:
            raise ValueError("box length is the longer planar side")


SHOES = (
    ShoeModel("sports", 281.0, 100.0, 115.0, 245.0, Softness.SOFT),
    ShoeModel("high-heel", 255.0, 80.0, 130.0, 255.0, Softness.RIGID,
              has_bottom=False, hard_side_topple=True),
    ShoeModel("leather", 290.0, 105.0, 110.0, 398.0, Softness.RIGID, has_bottom=False),
    ShoeModel("sandal", 266.5, 100.0, 90.0, 235.0, Softness.ELASTIC),
)

BOXES = (
    BoxModel(300.0, 220.0, 110.0, "sports"),
    BoxModel(300.0, 180.0, 90.0, "high-heel"),
    BoxModel(330.0, 205.0, 115.0, "leather"),
    BoxModel(315.0, 190.0, 110.0, "sandal"),
)

NAMES = tuple(s.name for s in SHOES)


def shoe(name: str) -> ShoeModel:
    return SHOES[NAMES.index(name)]


def box(name: str) -> BoxModel:
    return BOXES[NAMES.index(name)]
