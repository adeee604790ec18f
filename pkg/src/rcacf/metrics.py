"""OTB-protocol evaluation: error/overlap series, curves, AUCs, rollups.

Conventions are pinned once here: precision thresholds run 0..50 px in 1 px
steps with the headline read at 20 px; success thresholds are the 21 points
k/20 for k=0..20, membership is strict overlap > t, and the AUC is the plain
mean of the 21 curve values. Overall curves average per-sequence curves (no
frame pooling).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ConsistencyError, ParameterError
from .geometry import Box
from .sequences import ATTRIBUTE_CODES, SequenceMeta
from .tracker import TrackResult

PRECISION_THRESHOLDS = tuple(float(t) for t in range(51))
SUCCESS_THRESHOLDS = tuple(k / 20.0 for k in range(21))
PRECISION_HEADLINE_PX = 20


@dataclass(frozen=True)
class Curve:
    thresholds: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.thresholds) != len(self.values):
            raise ParameterError("thresholds and values must have equal length")
        if any(b <= a for a, b in zip(self.thresholds, self.thresholds[1:])):
            raise ParameterError("thresholds must be strictly increasing")
        if any(not 0.0 <= v <= 1.0 for v in self.values):
            raise ParameterError("curve values must lie in [0, 1]")

    def value_at(self, threshold: float) -> float:
        return self.values[self.thresholds.index(threshold)]


def center_error(a: Box, b: Box) -> float:
    """Euclidean distance between box centers, in pixels."""
    a.validate()
    b.validate()
    (ax, ay), (bx, by) = a.center, b.center
    return float(np.hypot(ax - bx, ay - by))


def overlap(a: Box, b: Box) -> float:
    """Intersection-over-union of two boxes, in [0, 1]."""
    a.validate()
    b.validate()
    ax2, ay2 = a.x + a.w, a.y + a.h
    bx2, by2 = b.x + b.w, b.y + b.h
    iw = min(ax2, bx2) - max(a.x, b.x)
    ih = min(ay2, by2) - max(a.y, b.y)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    # areas from the same corner arithmetic as the intersection, so identical
    # boxes come out at exactly 1 and rounding never pushes the ratio past 1
    area_a = (ax2 - a.x) * (ay2 - a.y)
    area_b = (bx2 - b.x) * (by2 - b.y)
    return float(min(1.0, inter / (area_a + area_b - inter)))


def precision_curve(errors: Sequence[float]) -> Curve:
    """Fraction of frames with center error <= t for t = 0..50 px."""
    if len(errors) == 0:
        raise ParameterError("cannot build a precision curve from no errors")
    err = np.asarray(errors, dtype=np.float64)
    values = tuple(float(np.mean(err <= t)) for t in PRECISION_THRESHOLDS)
    return Curve(PRECISION_THRESHOLDS, values)


def success_curve(overlaps: Sequence[float]) -> tuple[Curve, float]:
    """Fraction of frames with overlap strictly above t, plus the mean AUC."""
    if len(overlaps) == 0:
        raise ParameterError("cannot build a success curve from no overlaps")
    ov = np.asarray(overlaps, dtype=np.float64)
    values = tuple(float(np.mean(ov > t)) for t in SUCCESS_THRESHOLDS)
    curve = Curve(SUCCESS_THRESHOLDS, values)
    return curve, float(np.mean(values))


def mean_curve(curves: Sequence[Curve]) -> Curve:
    """Pointwise arithmetic mean of curves sharing one threshold grid."""
    if not curves:
        raise ParameterError("cannot average zero curves")
    grids = {c.thresholds for c in curves}
    if len(grids) != 1:
        raise ConsistencyError("curves use different threshold grids")
    stacked = np.array([c.values for c in curves])
    return Curve(curves[0].thresholds, tuple(float(v) for v in stacked.mean(axis=0)))


@dataclass(frozen=True)
class SequenceEval:
    """Per-sequence scores and curves for one tracking result."""

    name: str
    errors: tuple[float, ...]
    overlaps: tuple[float, ...]
    precision: Curve
    success: Curve
    precision_20: float
    success_auc: float
    success_rate_50: float


def evaluate_result(result: TrackResult, meta: SequenceMeta) -> SequenceEval:
    """Score one result against its ground truth, frame by frame."""
    if result.sequence_id != meta.name:
        raise ConsistencyError(
            f"result is for {result.sequence_id!r} but ground truth is {meta.name!r}"
        )
    n = min(len(result.boxes), len(meta.ground_truth))
    if n == 0:
        raise ParameterError("nothing to evaluate: empty boxes or ground truth")
    errors = tuple(center_error(result.boxes[i], meta.ground_truth[i]) for i in range(n))
    overlaps = tuple(overlap(result.boxes[i], meta.ground_truth[i]) for i in range(n))
    prec = precision_curve(errors)
    succ, auc = success_curve(overlaps)
    return SequenceEval(
        name=meta.name,
        errors=errors,
        overlaps=overlaps,
        precision=prec,
        success=succ,
        precision_20=prec.value_at(float(PRECISION_HEADLINE_PX)),
        success_auc=auc,
        success_rate_50=succ.value_at(0.5),
    )


@dataclass(frozen=True)
class EvalReport:
    """Per-sequence rows plus overall and per-attribute aggregates."""

    per_sequence: tuple[SequenceEval, ...]
    overall_precision: Curve
    overall_success: Curve
    overall_precision_20: float
    overall_success_auc: float
    per_attribute: dict[str, dict[str, Curve]]


def attribute_rollup(
    rows: Sequence[SequenceEval], metas: Sequence[SequenceMeta]
) -> dict[str, dict[str, Curve]]:
    """Mean curves per attribute code over the sequences carrying it.

    Attributes with no member sequences are omitted.
    """
    by_name = {m.name: m for m in metas}
    rollup: dict[str, dict[str, Curve]] = {}
    for code in ATTRIBUTE_CODES:
        members = []
        for row in rows:
            meta = by_name.get(row.name)
            if meta is None:
                raise ConsistencyError(f"no sequence metadata for {row.name!r}")
            if code in meta.attributes:
                members.append(row)
        if members:
            rollup[code] = {
                "precision": mean_curve([r.precision for r in members]),
                "success": mean_curve([r.success for r in members]),
            }
    return rollup


def build_report(rows: Sequence[SequenceEval], metas: Sequence[SequenceMeta]) -> EvalReport:
    """Aggregate per-sequence rows into one report (per-sequence averaging)."""
    if not rows:
        raise ParameterError("cannot build a report from zero sequences")
    overall_precision = mean_curve([r.precision for r in rows])
    overall_success = mean_curve([r.success for r in rows])
    return EvalReport(
        per_sequence=tuple(sorted(rows, key=lambda r: r.name)),
        overall_precision=overall_precision,
        overall_success=overall_success,
        overall_precision_20=overall_precision.value_at(float(PRECISION_HEADLINE_PX)),
        overall_success_auc=float(np.mean(overall_success.values)),
        per_attribute=attribute_rollup(rows, metas),
    )


@dataclass(frozen=True)
class ComparisonTable:
    """Sequences-by-variants score grid with a trailing mean row."""

    sequences: tuple[str, ...]
    variants: tuple[str, ...]
    cells: dict[str, dict[str, float]]
    means: dict[str, float]

    def to_text(self) -> str:
        width = max(
            [len("Sequence")] + [len(s) for s in self.sequences + ("Mean",)]
        )
        cols = [max(len(v), 8) for v in self.variants]
        header = "Sequence".ljust(width) + "".join(
            f"  {v.rjust(c)}" for v, c in zip(self.variants, cols)
        )
        rows = [header]
        for seq in self.sequences:
            cells = "".join(
                f"  {self.cells[v][seq]:>{c}.2f}" for v, c in zip(self.variants, cols)
            )
            rows.append(seq.ljust(width) + cells)
        mean_cells = "".join(
            f"  {self.means[v]:>{c}.2f}" for v, c in zip(self.variants, cols)
        )
        rows.append("Mean".ljust(width) + mean_cells)
        return "\n".join(rows)

    def to_csv(self) -> str:
        lines = ["sequence," + ",".join(self.variants)]
        for seq in self.sequences:
            lines.append(seq + "," + ",".join(repr(self.cells[v][seq]) for v in self.variants))
        lines.append("mean," + ",".join(repr(self.means[v]) for v in self.variants))
        return "\n".join(lines) + "\n"


def comparison_table(rows: Mapping[str, Mapping[str, float]]) -> ComparisonTable:
    """Build a canonical score grid from variant -> {sequence -> score}.

    Sequence and variant orderings are normalized by sorting, so permuted
    inputs yield identical tables. All variants must cover the same sequences.
    """
    if not rows:
        raise ParameterError("comparison table needs at least one variant")
    variants = tuple(sorted(rows))
    seq_sets = {v: frozenset(rows[v]) for v in variants}
    reference = seq_sets[variants[0]]
    for v, s in seq_sets.items():
        if s != reference:
            raise ConsistencyError(
                f"variant {v!r} covers sequences {sorted(s)} but {variants[0]!r} covers {sorted(reference)}"
            )
    if not reference:
        raise ParameterError("comparison table needs at least one sequence")
    sequences = tuple(sorted(reference))
    cells = {v: {s: float(rows[v][s]) for s in sequences} for v in variants}
    means = {v: float(np.mean([cells[v][s] for s in sequences])) for v in variants}
    return ComparisonTable(sequences, variants, cells, means)
