"""Sequence loading, synthetic sequence generation, and result persistence.

OTB layout on disk: <seq>/img/ holds numerically ordered image files and
<seq>/groundtruth_rect.txt holds one "x,y,w,h" line per annotated frame in the
1-based corner convention; coordinates are converted to 0-based at load so all
internal math stays 0-based. Attribute codes come from a sidecar file because
raw OTB folders do not embed them uniformly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Union

import numpy as np
from PIL import Image

from .errors import LoadError, ParameterError, ParseError, SynthSpecError
from .geometry import Box
from .tracker import TrackResult

ATTRIBUTE_CODES = ("IV", "SV", "OCC", "DEF", "MB", "FM", "IPR", "OPR", "OV", "BC", "LR")

IMAGE_SUFFIXES = (".jpg", ".jpeg", ".png", ".bmp")

# ITU-R 601 luma weights used to collapse color frames to intensity.
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


@dataclass
class SequenceMeta:
    name: str
    frame_paths: list[Path]
    ground_truth: list[Box]
    attributes: frozenset[str] = frozenset()

    def __len__(self) -> int:
        return len(self.frame_paths)


def load_frame(path: Path | str) -> np.ndarray:
    """Decode one image file to a grayscale float matrix in [0, 1]."""
    try:
        with Image.open(path) as img:
            if img.mode in ("L", "I;16", "I"):
                arr = np.asarray(img.convert("L"), dtype=np.float64)
                return arr / 255.0
            rgb = np.asarray(img.convert("RGB"), dtype=np.float64)
    except (OSError, Image.UnidentifiedImageError) as exc:
        raise LoadError(f"cannot decode frame {path}: {exc}") from exc
    r, g, b = LUMA_WEIGHTS
    return (rgb[:, :, 0] * r + rgb[:, :, 1] * g + rgb[:, :, 2] * b) / 255.0


def iter_frames(meta: SequenceMeta) -> Iterator[np.ndarray]:
    for path in meta.frame_paths:
        yield load_frame(path)


def _numeric_key(path: Path) -> tuple[int, str]:
    digits = re.sub(r"\D", "", path.stem)
    return (int(digits) if digits else -1, path.name)


def parse_ground_truth_line(line: str, line_no: int) -> Box:
    """Parse one "x,y,w,h" line; commas, tabs, and spaces all separate."""
    parts = [p for p in re.split(r"[,\s]+", line.strip()) if p]
    if len(parts) != 4:
        raise ParseError(f"expected 4 fields, got {len(parts)}: {line.strip()!r}", line_no)
    try:
        x, y, w, h = (float(p) for p in parts)
    except ValueError:
        raise ParseError(f"non-numeric field in {line.strip()!r}", line_no) from None
    if w <= 0 or h <= 0:
        raise ParseError(f"non-positive box size {w}x{h}", line_no)
    # 1-based corner convention on disk, 0-based internally.
    return Box(x - 1.0, y - 1.0, w, h)


def load_sequence(
    directory: Path | str, attributes: dict[str, frozenset[str]] | None = None
) -> SequenceMeta:
    """Load an OTB-layout sequence directory."""
    directory = Path(directory)
    img_dir = directory / "img"
    if not img_dir.is_dir():
        raise LoadError(f"missing image directory {img_dir}")
    frame_paths = sorted(
        (p for p in img_dir.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES),
        key=_numeric_key,
    )
    if not frame_paths:
        raise LoadError(f"no image frames found under {img_dir}")
    gt_path = directory / "groundtruth_rect.txt"
    if not gt_path.is_file():
        raise LoadError(f"missing ground-truth file {gt_path}")
    boxes = []
    for line_no, line in enumerate(gt_path.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        boxes.append(parse_ground_truth_line(line, line_no))
    if not boxes:
        raise LoadError(f"ground-truth file {gt_path} holds no boxes")
    if len(boxes) > len(frame_paths):
        raise LoadError(
            f"{gt_path} holds {len(boxes)} boxes but only {len(frame_paths)} frames exist"
        )
    name = directory.name
    attr = (attributes or {}).get(name, frozenset())
    return SequenceMeta(name=name, frame_paths=frame_paths, ground_truth=boxes, attributes=attr)


def load_attributes(path: Path | str) -> dict[str, frozenset[str]]:
    """Parse a sidecar mapping file with lines "<sequence>: IV,SV,...".

    Unknown attribute codes are rejected so typos do not silently create
    empty rollup groups.
    """
    mapping: dict[str, frozenset[str]] = {}
    for line_no, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if ":" not in stripped:
            raise ParseError(f"expected '<name>: CODES', got {stripped!r}", line_no)
        name, _, codes = stripped.partition(":")
        seen = frozenset(c.strip().upper() for c in codes.split(",") if c.strip())
        unknown = seen - set(ATTRIBUTE_CODES)
        if unknown:
            raise ParseError(f"unknown attribute codes {sorted(unknown)}", line_no)
        mapping[name.strip()] = seen
    return mapping


# ---------------------------------------------------------------------------
# Synthetic sequences
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Static:
    pass


@dataclass(frozen=True)
class Linear:
    vx: float
    vy: float


@dataclass(frozen=True)
class Sinusoidal:
    amplitude: float
    period: float

    def __post_init__(self):
        if self.period <= 0:
            raise ParameterError(f"period must be > 0, got {self.period}")


Motion = Union[Static, Linear, Sinusoidal]


@dataclass(frozen=True)
class Distractor:
    """Pixel-identical copy of the target following its own offset path.

    Its top-left corner at frame k sits at target(k) + offset + velocity * k.
    """

    offset: tuple[float, float]
    velocity: tuple[float, float] = (0.0, 0.0)


BACKGROUND_STYLES = ("blocks", "flat")


@dataclass(frozen=True)
class SynthSpec:
    """Description of a deterministic ground-truthed synthetic sequence."""

    size: tuple[int, int]
    frames: int
    target_size: tuple[int, int]
    motion: Motion = Static()
    start: tuple[float, float] | None = None
    texture_seed: int = 0
    noise_sigma: float = 0.0
    distractor: Distractor | None = None
    illumination_ramp: float | None = None
    background: str = "blocks"
    name: str = ""

    def __post_init__(self):
        if self.frames < 1:
            raise SynthSpecError(f"need at least 1 frame, got {self.frames}")
        if self.size[0] < 2 or self.size[1] < 2:
            raise SynthSpecError(f"frame size {self.size} is too small")
        if self.target_size[0] < 1 or self.target_size[1] < 1:
            raise SynthSpecError(f"target size {self.target_size} is degenerate")
        if self.noise_sigma < 0:
            raise SynthSpecError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if self.background not in BACKGROUND_STYLES:
            raise SynthSpecError(f"background must be one of {BACKGROUND_STYLES}")

    def start_xy(self) -> tuple[float, float]:
        if self.start is not None:
            return self.start
        return (
            (self.size[0] - self.target_size[0]) / 2.0,
            (self.size[1] - self.target_size[1]) / 2.0,
        )

    def box_at(self, k: int) -> Box:
        x0, y0 = self.start_xy()
        w, h = self.target_size
        if isinstance(self.motion, Static):
            return Box(x0, y0, w, h)
        if isinstance(self.motion, Linear):
            return Box(x0 + self.motion.vx * k, y0 + self.motion.vy * k, w, h)
        amp, period = self.motion.amplitude, self.motion.period
        return Box(x0 + amp * np.sin(2.0 * np.pi * k / period), y0, w, h)

    def label(self) -> str:
        return self.name or f"synth-{self.texture_seed}"


def _paste(canvas: np.ndarray, tile: np.ndarray, x: float, y: float) -> None:
    """Composite tile onto canvas at a rounded position, clipping at edges."""
    fh, fw = canvas.shape
    th, tw = tile.shape
    ix = int(np.floor(x + 0.5))
    iy = int(np.floor(y + 0.5))
    x0, y0 = max(ix, 0), max(iy, 0)
    x1, y1 = min(ix + tw, fw), min(iy + th, fh)
    if x0 >= x1 or y0 >= y1:
        return
    canvas[y0:y1, x0:x1] = tile[y0 - iy : y1 - iy, x0 - ix : x1 - ix]


def _background(width: int, height: int, seed: int) -> np.ndarray:
    """Low-contrast blocky texture, distinct from the fine target texture."""
    rng = np.random.default_rng([seed, 0])
    cell = 4
    grid = rng.uniform(0.35, 0.65, size=(height // cell + 1, width // cell + 1))
    return np.kron(grid, np.ones((cell, cell)))[:height, :width]


def generate_synthetic(spec: SynthSpec) -> tuple[list[np.ndarray], SequenceMeta]:
    """Render the sequence described by spec.

    Frames are deterministic for a fixed texture_seed. Ground truth is the
    exact analytic box per frame; rendering quantizes positions to the pixel
    grid, so fractional motion shows up as tracked content only at integer
    displacements.
    """
    width, height = spec.size
    boxes = [spec.box_at(k) for k in range(spec.frames)]
    for k, b in enumerate(boxes):
        if not b.intersects_frame(width, height):
            raise SynthSpecError(f"motion leaves the {width}x{height} frame at frame {k}")

    rng_target = np.random.default_rng([spec.texture_seed, 1])
    tw, th = spec.target_size
    target_tile = rng_target.uniform(0.0, 1.0, size=(th, tw))
    if spec.background == "flat":
        background = np.full((height, width), 0.5)
    else:
        background = _background(width, height, spec.texture_seed)

    frames = []
    for k, box in enumerate(boxes):
        img = background.copy()
        if spec.distractor is not None:
            ox, oy = spec.distractor.offset
            vx, vy = spec.distractor.velocity
            _paste(img, target_tile, box.x + ox + vx * k, box.y + oy + vy * k)
        _paste(img, target_tile, box.x, box.y)
        if spec.illumination_ramp is not None:
            img = np.clip(img * (1.0 + spec.illumination_ramp * k), 0.0, 1.0)
        if spec.noise_sigma > 0:
            rng_k = np.random.default_rng([spec.texture_seed, 2, k])
            img = np.clip(img + rng_k.normal(0.0, spec.noise_sigma, size=img.shape), 0.0, 1.0)
        frames.append(img)

    meta = SequenceMeta(name=spec.label(), frame_paths=[], ground_truth=boxes)
    return frames, meta


def _format_number(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def render_sequence(spec: SynthSpec, out_dir: Path | str) -> Path:
    """Write the synthetic sequence in OTB layout so the loader can read it back."""
    frames, meta = generate_synthetic(spec)
    out_dir = Path(out_dir)
    img_dir = out_dir / "img"
    img_dir.mkdir(parents=True, exist_ok=True)
    for k, frame in enumerate(frames, start=1):
        data = np.rint(frame * 255.0).astype(np.uint8)
        Image.fromarray(data, mode="L").save(img_dir / f"{k:04d}.png")
    lines = []
    for box in meta.ground_truth:
        # Back to the on-disk 1-based corner convention.
        lines.append(
            ",".join(_format_number(v) for v in (box.x + 1.0, box.y + 1.0, box.w, box.h))
        )
    (out_dir / "groundtruth_rect.txt").write_text("\n".join(lines) + "\n")
    return out_dir


# ---------------------------------------------------------------------------
# Result persistence
# ---------------------------------------------------------------------------

_HEADER_RE = re.compile(r"^# seq=(\S+) variant=(\S+) frames=(\d+)$")


def save_result(result: TrackResult, path: Path | str) -> Path:
    """Write a tracking result: a header line, then one box line per frame."""
    if not result.boxes:
        raise ParameterError("refusing to save a result with no boxes")
    if re.search(r"\s", result.sequence_id) or re.search(r"\s", result.variant):
        raise ParameterError("sequence_id and variant must not contain whitespace")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# seq={result.sequence_id} variant={result.variant} frames={len(result.boxes)}"]
    for box in result.boxes:
        lines.append(",".join(_format_number(v) for v in (box.x, box.y, box.w, box.h)))
    path.write_text("\n".join(lines) + "\n")
    return path


def load_result(path: Path | str) -> TrackResult:
    """Read a tracking result file written by save_result."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise LoadError(f"cannot read result file {path}: {exc}") from exc
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise LoadError(f"result file {path} is empty")
    match = _HEADER_RE.match(lines[0])
    if match is None:
        raise LoadError(f"malformed header in {path}: {lines[0]!r}")
    sequence_id, variant, count = match.group(1), match.group(2), int(match.group(3))
    boxes = []
    for line_no, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 4:
            raise ParseError(f"expected 4 fields in {line!r}", line_no)
        try:
            x, y, w, h = (float(p) for p in parts)
        except ValueError:
            raise ParseError(f"non-numeric field in {line!r}", line_no) from None
        boxes.append(Box(x, y, w, h))
    if len(boxes) != count:
        raise LoadError(f"{path}: header declares {count} frames but {len(boxes)} lines follow")
    return TrackResult(sequence_id=sequence_id, boxes=boxes, variant=variant)
