"""Axis-aligned bounding boxes in 0-based pixel coordinates."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParameterError


@dataclass(frozen=True)
class Box:
    """Axis-aligned box: top-left corner (x, y), size (w, h), all in pixels."""

    x: float
    y: float
    w: float
    h: float

    @property
    def center(self) -> tuple[float, float]:
        return (self.x + self.w / 2.0, self.y + self.h / 2.0)

    @property
    def area(self) -> float:
        return self.w * self.h

    @staticmethod
    def from_center(cx: float, cy: float, w: float, h: float) -> "Box":
        return Box(cx - w / 2.0, cy - h / 2.0, w, h)

    def recentered(self, cx: float, cy: float) -> "Box":
        """Same size, moved so its center sits at (cx, cy)."""
        return Box.from_center(cx, cy, self.w, self.h)

    def validate(self) -> "Box":
        """Raise ParameterError unless the box has positive size."""
        if not (self.w > 0 and self.h > 0):
            raise ParameterError(f"box must have positive size, got {self}")
        return self

    def intersects_frame(self, frame_w: int, frame_h: int) -> bool:
        """True when at least one pixel of the box lies inside the frame."""
        return (
            self.x < frame_w
            and self.y < frame_h
            and self.x + self.w > 0
            and self.y + self.h > 0
        )

    def clamped(self, frame_w: int, frame_h: int) -> "Box":
        """Translate (never resize) so at least one pixel stays in frame."""
        x = min(max(self.x, -(self.w - 1)), frame_w - 1)
        y = min(max(self.y, -(self.h - 1)), frame_h - 1)
        return Box(x, y, self.w, self.h)
