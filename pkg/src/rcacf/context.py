"""Background-patch pool generation and nearest-patch selection.

Four candidate patches sit one scaled target-size away from the target in the
cardinal directions. The selection step keeps only the candidate whose center
lies closest to the predicted target position; that single patch is what the
refinement filter regresses to zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .dsp import extract_patch, forward_spectrum, preprocess_patch
from .errors import ParameterError
from .geometry import Box


class PatchTag(Enum):
    UP = "up"
    DOWN = "down"
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class ContextPatch:
    box: Box
    center: tuple[float, float]
    spectrum: np.ndarray
    tag: PatchTag


def patch_distance(patch_center: tuple[float, float], predicted_center: tuple[float, float]) -> float:
    """Euclidean distance between two points, in pixels."""
    return math.hypot(patch_center[0] - predicted_center[0], patch_center[1] - predicted_center[1])


def generate_context_patches(
    frame: np.ndarray,
    target: Box,
    offset_factor: float,
    padding: float,
    window: np.ndarray,
) -> list[ContextPatch]:
    """Extract the four cardinal background patches around the target.

    Patch centers are displaced from the target center by the target size
    scaled with offset_factor, in the fixed order Up, Down, Left, Right. Each
    patch has the target's box size and goes through the same padding,
    preprocessing, and transform as the target patch, so its spectrum matches
    the tracker's patch dimensions.
    """
    target.validate()
    if offset_factor <= 0:
        raise ParameterError(f"offset_factor must be > 0, got {offset_factor}")
    cx, cy = target.center
    w, h = target.w, target.h
    displacements = [
        (0.0, -h * offset_factor, PatchTag.UP),
        (0.0, +h * offset_factor, PatchTag.DOWN),
        (-w * offset_factor, 0.0, PatchTag.LEFT),
        (+w * offset_factor, 0.0, PatchTag.RIGHT),
    ]
    patches = []
    for dx, dy, tag in displacements:
        box = Box.from_center(cx + dx, cy + dy, w, h)
        patch = extract_patch(frame, box, padding)
        spectrum = forward_spectrum(preprocess_patch(patch, window))
        patches.append(ContextPatch(box, (cx + dx, cy + dy), spectrum, tag))
    return patches


def select_nearest_patch(
    patches: Sequence[ContextPatch], predicted_center: tuple[float, float]
) -> ContextPatch:
    """Patch whose center is nearest the predicted target center.

    Ties resolve to the earliest candidate in list order (Up before Down
    before Left before Right for generated pools).
    """
    if not patches:
        raise ParameterError("cannot select from an empty patch list")
    return min(patches, key=lambda p: patch_distance(p.center, predicted_center))
