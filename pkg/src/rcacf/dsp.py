"""Deterministic 2D signal-processing primitives.

Spectra use the unnormalized forward DFT convention; the inverse carries the
1/(W*H) factor. Patches are addressed row-major: axis 0 is y (height), axis 1
is x (width). All functions are pure and thread-safe.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, NumericError, ParameterError
from .geometry import Box

# Flat patches produce a zero L2 norm; below this the division is skipped.
NORM_GUARD = 1e-12


def forward_spectrum(m: np.ndarray) -> np.ndarray:
    """Unnormalized forward 2D DFT of a real matrix."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.size == 0:
        raise DimensionError(f"expected a non-empty 2D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ParameterError("matrix contains non-finite values")
    return np.fft.fft2(m)


def inverse_spectrum(s: np.ndarray, imag_tol: float = 1e-6) -> np.ndarray:
    """Inverse 2D DFT (scaled by 1/(W*H)), returning the real part.

    The imaginary residue must stay below imag_tol relative to the largest
    output magnitude; otherwise the spectrum was not conjugate-symmetric and a
    NumericError is raised instead of silently dropping information.
    """
    s = np.asarray(s, dtype=np.complex128)
    if s.ndim != 2 or s.size == 0:
        raise DimensionError(f"expected a non-empty 2D spectrum, got shape {s.shape}")
    if not np.all(np.isfinite(s)):
        raise ParameterError("spectrum contains non-finite values")
    out = np.fft.ifft2(s)
    scale = float(np.max(np.abs(out)))
    residue = float(np.max(np.abs(out.imag)))
    if scale > 0 and residue > imag_tol * scale:
        raise NumericError(
            f"imaginary residue {residue:.3e} exceeds {imag_tol:.1e} of peak {scale:.3e}"
        )
    return np.ascontiguousarray(out.real)


def hann_window(w: int, h: int) -> np.ndarray:
    """Outer product of 1D Hann windows 0.5*(1 - cos(2*pi*i/(N-1))), shape (h, w)."""
    if w < 2 or h < 2:
        raise DimensionError(f"window needs w, h >= 2, got {w}x{h}")
    return np.outer(np.hanning(h), np.hanning(w))


def gaussian_label(w: int, h: int, sigma: float) -> np.ndarray:
    """Gaussian regression target of shape (h, w) peaking at 1 on the grid center.

    The center is (floor(w/2), floor(h/2)); the value at offset (dx, dy) is
    exp(-(dx^2 + dy^2) / (2*sigma^2)).
    """
    if sigma <= 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    if w < 1 or h < 1:
        raise DimensionError(f"label needs w, h >= 1, got {w}x{h}")
    dx = np.arange(w) - (w // 2)
    dy = np.arange(h) - (h // 2)
    d2 = dy[:, None] ** 2 + dx[None, :] ** 2
    return np.exp(-d2 / (2.0 * sigma * sigma))


def _round_half_up(v: float) -> int:
    return int(np.floor(v + 0.5))


def extract_patch(frame: np.ndarray, box: Box, padding: float) -> np.ndarray:
    """Crop of size round(w*padding) x round(h*padding) centered on the box center.

    Samples falling outside the frame replicate the nearest edge row/column.
    """
    box.validate()
    if padding < 1:
        raise ParameterError(f"padding must be >= 1, got {padding}")
    frame = np.asarray(frame)
    if frame.ndim != 2 or frame.size == 0:
        raise DimensionError(f"expected a non-empty 2D frame, got shape {frame.shape}")
    fh, fw = frame.shape
    pw = _round_half_up(box.w * padding)
    ph = _round_half_up(box.h * padding)
    cx, cy = box.center
    xs = int(np.floor(cx)) - pw // 2 + np.arange(pw)
    ys = int(np.floor(cy)) - ph // 2 + np.arange(ph)
    xs = np.clip(xs, 0, fw - 1)
    ys = np.clip(ys, 0, fh - 1)
    return frame[np.ix_(ys, xs)]


def preprocess_patch(p: np.ndarray, win: np.ndarray) -> np.ndarray:
    """Log-compress, zero-mean, L2-normalize, then apply the window.

    The division is skipped when the L2 norm is below NORM_GUARD, so flat
    patches come out as all zeros instead of NaNs.
    """
    p = np.asarray(p, dtype=np.float64)
    win = np.asarray(win, dtype=np.float64)
    if p.shape != win.shape:
        raise DimensionError(f"patch {p.shape} and window {win.shape} differ")
    q = np.log1p(p)
    q = q - q.mean()
    norm = float(np.linalg.norm(q))
    if norm >= NORM_GUARD:
        q = q / norm
    return q * win
