"""Per-frame tracking pipeline.

Each tracked frame runs two localization stages. The coarse stage correlates
the running filter with the patch at the previous box and moves the center to
the response peak. The refinement stage learns a throwaway filter at the
coarse position (restoration denominator, context regularization against the
background pool, first-frame anchor term) and correlates it with the same
patch; its peak gives the final center. The refined filter is then blended
into the running model.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .context import PatchTag, generate_context_patches, patch_distance, select_nearest_patch
from .dsp import extract_patch, forward_spectrum, gaussian_label, hann_window, preprocess_patch
from .errors import DimensionError, ParameterError
from .filters import (
    CfModel,
    FilterConfig,
    add_anchor_term,
    learn_filter,
    response,
    response_from,
    update_model,
)
from .geometry import Box


@dataclass(frozen=True)
class SelectionEvent:
    """Record of one background-patch selection, kept for inspection."""

    frame_index: int
    predicted_center: tuple[float, float]
    tag: PatchTag
    distance: float


@dataclass
class TrackerState:
    model: CfModel
    current_box: Box
    patch_size: tuple[int, int]
    frame_size: tuple[int, int]
    frame_index: int
    last_selection: SelectionEvent | None = None


@dataclass
class TrackResult:
    """Boxes for one sequence run; the first box is the initialization box."""

    sequence_id: str
    boxes: list[Box]
    variant: str
    selections: list[SelectionEvent] = field(default_factory=list)


def _patch_spectrum(frame: np.ndarray, box: Box, cfg: FilterConfig, window: np.ndarray) -> np.ndarray:
    patch = extract_patch(frame, box, cfg.padding)
    return forward_spectrum(preprocess_patch(patch, window))


def _learn_with_anchor(
    p0: np.ndarray,
    model_y: np.ndarray,
    anchor: np.ndarray,
    cfg: FilterConfig,
    context: tuple[np.ndarray, ...] = (),
) -> tuple[np.ndarray, np.ndarray]:
    numerator, denominator = learn_filter(p0, model_y, cfg, context)
    return add_anchor_term(numerator, denominator, anchor, model_y, cfg.anchor_weight)


def init_tracker(frame: np.ndarray, box: Box, cfg: FilterConfig) -> TrackerState:
    """Learn the initial filter from the ground-truth box on the first frame.

    No context patches take part here; context regularization starts on the
    second frame once a prediction exists. The first-frame target spectrum is
    retained as the anchor for every later relearning step.
    """
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim != 2 or frame.size == 0:
        raise DimensionError(f"expected a non-empty 2D frame, got shape {frame.shape}")
    box.validate()
    fh, fw = frame.shape
    if not box.intersects_frame(fw, fh):
        raise ParameterError(f"initial box {box} lies outside the {fw}x{fh} frame")

    patch = extract_patch(frame, box, cfg.padding)
    ph, pw = patch.shape
    window = hann_window(pw, ph)
    p0 = forward_spectrum(preprocess_patch(patch, window))

    sigma = cfg.sigma_factor * float(np.sqrt(pw * ph))
    label = gaussian_label(pw, ph, sigma)
    # The model keeps the label spectrum with its peak rolled to the origin so
    # response peaks read directly as displacements.
    y = forward_spectrum(np.roll(label, (-(ph // 2), -(pw // 2)), axis=(0, 1)))

    numerator, denominator = _learn_with_anchor(p0, y, p0, cfg)
    model = CfModel(numerator, denominator, y, p0, window, cfg)
    return TrackerState(model, box, (pw, ph), (fw, fh), frame_index=1)


def track_frame(state: TrackerState, frame: np.ndarray) -> tuple[Box, TrackerState]:
    """Advance the tracker by one frame; returns the new box and state."""
    frame = np.asarray(frame, dtype=np.float64)
    model = state.model
    cfg = model.cfg
    fh, fw = frame.shape if frame.ndim == 2 else (0, 0)
    if (fw, fh) != state.frame_size:
        raise DimensionError(
            f"frame is {fw}x{fh} but the sequence was initialized at "
            f"{state.frame_size[0]}x{state.frame_size[1]}"
        )
    box = state.current_box
    cx, cy = box.center

    # Coarse localization with the running filter at the previous position.
    z = _patch_spectrum(frame, box, cfg, model.window)
    dx, dy = response(model, z).peak_offset()
    pred_cx, pred_cy = cx + dx, cy + dy

    # Background pool around the previous box, selection by distance to the
    # coarse prediction.
    selection = None
    context_specs: tuple[np.ndarray, ...] = ()
    if cfg.context_mode != "none":
        patches = generate_context_patches(frame, box, cfg.offset_factor, cfg.padding, model.window)
        if cfg.context_mode == "selected":
            chosen = select_nearest_patch(patches, (pred_cx, pred_cy))
            selection = SelectionEvent(
                state.frame_index + 1,
                (pred_cx, pred_cy),
                chosen.tag,
                patch_distance(chosen.center, (pred_cx, pred_cy)),
            )
            context_specs = (chosen.spectrum,)
        else:
            context_specs = tuple(p.spectrum for p in patches)

    # Refinement filter learned at the coarse position, applied to the same
    # patch; the anchor and context terms are what can move its peak off the
    # origin.
    refine_box = box.recentered(pred_cx, pred_cy)
    zr = _patch_spectrum(frame, refine_box, cfg, model.window)
    numerator, denominator = _learn_with_anchor(zr, model.label_spec, model.anchor_spec, cfg, context_specs)
    rdx, rdy = response_from(numerator, denominator, zr).peak_offset()

    new_box = box.recentered(pred_cx + rdx, pred_cy + rdy).clamped(fw, fh)
    new_model = update_model(model, numerator, denominator, cfg.learning_rate)
    new_state = TrackerState(
        new_model,
        new_box,
        state.patch_size,
        state.frame_size,
        state.frame_index + 1,
        last_selection=selection,
    )
    return new_box, new_state


def run_sequence(
    frames: Iterable[np.ndarray],
    init_box: Box,
    cfg: FilterConfig,
    sequence_id: str = "sequence",
    variant: str | None = None,
) -> TrackResult:
    """Initialize on the first frame and track through the rest.

    Deterministic: the same frames and config always produce the same boxes.
    """
    iterator = iter(frames)
    try:
        first = next(iterator)
    except StopIteration:
        raise ParameterError("frame source is empty") from None
    state = init_tracker(first, init_box, cfg)
    boxes = [init_box]
    selections: list[SelectionEvent] = []
    for frame in iterator:
        new_box, state = track_frame(state, frame)
        boxes.append(new_box)
        if state.last_selection is not None:
            selections.append(state.last_selection)
    return TrackResult(
        sequence_id=sequence_id,
        boxes=boxes,
        variant=variant if variant is not None else cfg.fingerprint(),
        selections=selections,
    )
