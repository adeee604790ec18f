"""Correlation-filter learning and response computation.

The learned filter is kept in factored form as a complex numerator and a real
positive denominator per frequency bin:

    numerator   = y_hat * conj(p0_hat)            (accumulated data terms)
    denominator = |p0_hat|^2 + regularizers       (ridge / context / anchor)

The ratio numerator/denominator is the spectrum of the correlation template
already conjugated for detection, so the response to a test spectrum z_hat is
simply real(idft(z_hat * numerator/denominator)). Keeping numerator and
denominator separate lets the running update average both parts instead of
averaging ratios.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace
from typing import Sequence, Union

import numpy as np

from .dsp import inverse_spectrum
from .errors import DimensionError, ParameterError

CONTEXT_MODES = ("none", "all", "selected")

# 3x3 discrete Laplacian used by the constrained-least-squares restoration.
LAPLACIAN_3X3 = np.array([[0.0, -1.0, 0.0], [-1.0, 4.0, -1.0], [0.0, -1.0, 0.0]])


@dataclass(frozen=True)
class Wiener:
    """Restoration that replaces the ridge weight with a noise-to-signal constant.

    k=None defaults to lambda1, which makes the restored filter coincide with
    the plain ridge solution.
    """

    k: float | None = None

    def __post_init__(self):
        if self.k is not None and self.k < 0:
            raise ParameterError(f"Wiener constant must be >= 0, got {self.k}")


@dataclass(frozen=True)
class Cls:
    """Restoration that adds a Laplacian smoothness penalty gamma*|L_hat|^2."""

    gamma: float

    def __post_init__(self):
        if self.gamma < 0:
            raise ParameterError(f"CLS gamma must be >= 0, got {self.gamma}")


Restoration = Union[Wiener, Cls, None]


@dataclass(frozen=True)
class FilterConfig:
    """Tracker and filter parameters.

    context_mode selects how background patches enter the refinement stage:
    "none" disables them, "all" regularizes against all four cardinal patches,
    "selected" keeps only the patch nearest the coarse prediction.
    """

    lambda1: float = 1e-4
    lambda2: float = 20.0
    anchor_weight: float = 0.25
    restoration: Restoration = None
    learning_rate: float = 0.025
    sigma_factor: float = 0.1
    padding: float = 2.0
    context_mode: str = "selected"
    offset_factor: float = 1.0

    def __post_init__(self):
        if self.lambda1 <= 0:
            raise ParameterError(f"lambda1 must be > 0, got {self.lambda1}")
        if self.lambda2 < 0:
            raise ParameterError(f"lambda2 must be >= 0, got {self.lambda2}")
        if self.anchor_weight < 0:
            raise ParameterError(f"anchor_weight must be >= 0, got {self.anchor_weight}")
        if not 0.0 <= self.learning_rate <= 1.0:
            raise ParameterError(f"learning_rate must be in [0, 1], got {self.learning_rate}")
        if self.sigma_factor <= 0:
            raise ParameterError(f"sigma_factor must be > 0, got {self.sigma_factor}")
        if self.padding < 1:
            raise ParameterError(f"padding must be >= 1, got {self.padding}")
        if self.context_mode not in CONTEXT_MODES:
            raise ParameterError(f"context_mode must be one of {CONTEXT_MODES}")
        if self.offset_factor <= 0:
            raise ParameterError(f"offset_factor must be > 0, got {self.offset_factor}")

    def wiener_constant(self) -> float:
        """Effective Wiener constant: explicit k, or lambda1 when unset."""
        if not isinstance(self.restoration, Wiener):
            raise ParameterError("restoration is not Wiener")
        return self.lambda1 if self.restoration.k is None else self.restoration.k

    def fingerprint(self) -> str:
        """Deterministic, whitespace-free digest of every parameter."""
        if self.restoration is None:
            rest = "none"
        elif isinstance(self.restoration, Wiener):
            rest = f"wiener:{self.restoration.k!r}"
        else:
            rest = f"cls:{self.restoration.gamma!r}"
        canon = ";".join(
            [
                f"l1={self.lambda1!r}",
                f"l2={self.lambda2!r}",
                f"anchor={self.anchor_weight!r}",
                f"rest={rest}",
                f"eta={self.learning_rate!r}",
                f"sigma={self.sigma_factor!r}",
                f"pad={self.padding!r}",
                f"ctx={self.context_mode}",
                f"off={self.offset_factor!r}",
            ]
        )
        return hashlib.sha1(canon.encode()).hexdigest()[:10]


def preset(name: str) -> FilterConfig:
    """Named configuration presets.

    base:  plain ridge filter, no context, no anchor, no restoration.
    ca:    context regularization against all four background patches.
    rcacf: Wiener-restored filter, single selected background patch, anchor.
    """
    if name == "base":
        return FilterConfig(lambda2=0.0, anchor_weight=0.0, restoration=None, context_mode="none")
    if name == "ca":
        return FilterConfig(lambda2=20.0, anchor_weight=0.0, restoration=None, context_mode="all")
    if name == "rcacf":
        return FilterConfig(
            lambda2=20.0, anchor_weight=0.25, restoration=Wiener(), context_mode="selected"
        )
    raise ParameterError(f"unknown preset {name!r}; choose from base, ca, rcacf")


PRESET_NAMES = ("base", "ca", "rcacf")


@dataclass
class CfModel:
    """Learned filter state: factored filter, label spectrum, window, anchor."""

    numerator: np.ndarray
    denominator: np.ndarray
    label_spec: np.ndarray
    anchor_spec: np.ndarray
    window: np.ndarray
    cfg: FilterConfig

    def __post_init__(self):
        shapes = {
            self.numerator.shape,
            self.denominator.shape,
            self.label_spec.shape,
            self.anchor_spec.shape,
            self.window.shape,
        }
        if len(shapes) != 1:
            raise DimensionError(f"model arrays disagree on shape: {sorted(shapes)}")
        if not np.all(self.denominator > 0):
            raise ParameterError("denominator must be strictly positive at every bin")


@dataclass(frozen=True)
class ResponseMap:
    """Correlation response grid with its peak (x, y) and peak value."""

    data: np.ndarray
    peak_xy: tuple[int, int]
    peak_value: float

    @staticmethod
    def from_data(data: np.ndarray) -> "ResponseMap":
        # np.argmax scans row-major, which is exactly the tie-break contract.
        idx = int(np.argmax(data))
        py, px = divmod(idx, data.shape[1])
        return ResponseMap(data, (px, py), float(data[py, px]))

    def peak_offset(self) -> tuple[int, int]:
        """Peak position as a displacement from the origin, wrap-aware.

        Offsets beyond half the grid size wrap to negative displacements.
        """
        h, w = self.data.shape
        px, py = self.peak_xy
        dx = px - w if px > w / 2 else px
        dy = py - h if py > h / 2 else py
        return dx, dy


def _check_same_shape(*arrays: np.ndarray) -> None:
    shapes = {a.shape for a in arrays}
    if len(shapes) != 1:
        raise DimensionError(f"spectra disagree on shape: {sorted(shapes)}")


def learn_base_filter(
    p0: np.ndarray, y: np.ndarray, lambda1: float
) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form ridge filter in the frequency domain.

    Per bin: numerator = y * conj(p0), denominator = |p0|^2 + lambda1.
    """
    _check_same_shape(p0, y)
    if lambda1 <= 0:
        raise ParameterError(f"lambda1 must be > 0, got {lambda1}")
    numerator = y * np.conj(p0)
    denominator = (p0 * np.conj(p0)).real + lambda1
    return numerator, denominator


def context_penalty(context: Sequence[np.ndarray]) -> np.ndarray:
    """Sum of |p_hat|^2 across background-patch spectra."""
    total = None
    for spec in context:
        mag2 = (spec * np.conj(spec)).real
        total = mag2 if total is None else total + mag2
    if total is None:
        raise ParameterError("context list is empty")
    return total


def learn_ca_filter(
    p0: np.ndarray,
    context: Sequence[np.ndarray],
    y: np.ndarray,
    lambda1: float,
    lambda2: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Context-aware ridge filter: background spectra are regressed to zero.

    Per bin: numerator = y * conj(p0),
    denominator = |p0|^2 + lambda1 + lambda2 * sum_i |p_i|^2.
    """
    if lambda2 < 0:
        raise ParameterError(f"lambda2 must be >= 0, got {lambda2}")
    for spec in context:
        _check_same_shape(p0, spec)
    numerator, denominator = learn_base_filter(p0, y, lambda1)
    if len(context) > 0 and lambda2 > 0:
        denominator = denominator + lambda2 * context_penalty(context)
    return numerator, denominator


def laplacian_power_spectrum(h: int, w: int) -> np.ndarray:
    """|L_hat|^2 of the 3x3 Laplacian zero-padded to (h, w).

    The kernel coefficients sum to zero, so the DC bin is exactly 0.
    """
    if h < 3 or w < 3:
        raise DimensionError(f"patch {w}x{h} is smaller than the 3x3 kernel")
    pad = np.zeros((h, w))
    pad[:3, :3] = LAPLACIAN_3X3
    lap_hat = np.fft.fft2(pad)
    return (lap_hat * np.conj(lap_hat)).real


def apply_restoration(
    p0: np.ndarray, y: np.ndarray, cfg: FilterConfig
) -> tuple[np.ndarray, np.ndarray]:
    """Learn the filter with a restoration-reshaped denominator.

    Wiener(k): denominator = |p0|^2 + k (the noise-to-signal constant replaces
    lambda1). Cls(gamma): denominator = |p0|^2 + lambda1 + gamma*|L_hat|^2.
    """
    if cfg.restoration is None:
        raise ParameterError("apply_restoration requires a restoration variant")
    _check_same_shape(p0, y)
    if isinstance(cfg.restoration, Wiener):
        k = cfg.wiener_constant()
        numerator = y * np.conj(p0)
        denominator = (p0 * np.conj(p0)).real + k
        return numerator, denominator
    h, w = p0.shape
    numerator, denominator = learn_base_filter(p0, y, cfg.lambda1)
    denominator = denominator + cfg.restoration.gamma * laplacian_power_spectrum(h, w)
    return numerator, denominator


def add_anchor_term(
    numerator: np.ndarray,
    denominator: np.ndarray,
    anchor: np.ndarray,
    y: np.ndarray,
    weight: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Fold a fixed target patch into the regression with the given weight.

    The anchor is regressed toward y like extra training data: the numerator
    gains weight * y * conj(anchor), the denominator weight * |anchor|^2.
    """
    if weight < 0:
        raise ParameterError(f"anchor weight must be >= 0, got {weight}")
    _check_same_shape(numerator, denominator, anchor, y)
    new_num = numerator + weight * (y * np.conj(anchor))
    new_den = denominator + weight * (anchor * np.conj(anchor)).real
    return new_num, new_den


def learn_filter(
    p0: np.ndarray,
    y: np.ndarray,
    cfg: FilterConfig,
    context: Sequence[np.ndarray] = (),
) -> tuple[np.ndarray, np.ndarray]:
    """Full learning chain: restoration (or plain ridge), then context terms.

    Restoration reshapes the base denominator first; the context penalty is
    added on top, so lambda2=0 or an empty context reduces bit-for-bit to the
    restored (or base) filter.
    """
    if cfg.restoration is None:
        numerator, denominator = learn_base_filter(p0, y, cfg.lambda1)
    else:
        numerator, denominator = apply_restoration(p0, y, cfg)
    if len(context) > 0 and cfg.lambda2 > 0:
        denominator = denominator + cfg.lambda2 * context_penalty(context)
    return numerator, denominator


def response_from(numerator: np.ndarray, denominator: np.ndarray, z: np.ndarray) -> ResponseMap:
    """Correlation response of a factored filter to a test spectrum."""
    _check_same_shape(numerator, denominator, z)
    data = inverse_spectrum(z * (numerator / denominator))
    return ResponseMap.from_data(data)


def response(model: CfModel, z: np.ndarray) -> ResponseMap:
    """Correlation response of the model to test spectrum z.

    numerator/denominator is the conjugated template spectrum, so the product
    with z is a cross-correlation; its peak marks the predicted displacement.
    """
    return response_from(model.numerator, model.denominator, z)


def update_model(
    model: CfModel, new_numerator: np.ndarray, new_denominator: np.ndarray, eta: float
) -> CfModel:
    """Blend freshly learned filter parts into the model with rate eta.

    The anchor spectrum is never updated; it stays pinned to the first frame.
    """
    if not 0.0 <= eta <= 1.0:
        raise ParameterError(f"eta must be in [0, 1], got {eta}")
    _check_same_shape(model.numerator, new_numerator)
    _check_same_shape(model.denominator, new_denominator)
    return replace(
        model,
        numerator=(1.0 - eta) * model.numerator + eta * new_numerator,
        denominator=(1.0 - eta) * model.denominator + eta * new_denominator,
    )
