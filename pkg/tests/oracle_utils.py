"""Shared independent oracles used by the unit and acceptance tests.

Everything here is deliberately dumb: dense matrices built with plain Python
loops and solved with a generic linear solver, so no code path is shared with
the frequency-domain implementation under test.
"""

import numpy as np

from rcacf import gaussian_label


def circulant_matrix(p):
    """Dense circular-convolution matrix: C[d, n] = p[(d - n) mod shape]."""
    h, w = p.shape
    n = h * w
    vals = p.tolist()
    rows = []
    for dr in range(h):
        for dc in range(w):
            row = [0.0] * n
            for nr in range(h):
                for nc in range(w):
                    row[nr * w + nc] = vals[(dr - nr) % h][(dc - nc) % w]
            rows.append(row)
    return np.array(rows)


def origin_label(w, h, sigma=2.0):
    lab = gaussian_label(w, h, sigma)
    return np.roll(lab, (-(h // 2), -(w // 2)), axis=(0, 1))


def dense_ridge_solution(patch, y_spatial, lam1, context_patches=(), lam2=0.0):
    """Solve the (stacked) circulant ridge regression densely, return its DFT."""
    h, w = patch.shape
    n = h * w
    c0 = circulant_matrix(patch)
    lhs = c0.T @ c0 + lam1 * np.eye(n)
    for ctx in context_patches:
        c1 = circulant_matrix(ctx)
        lhs = lhs + lam2 * (c1.T @ c1)
    rhs = c0.T @ y_spatial.ravel()
    w_spatial = np.linalg.solve(lhs, rhs)
    return np.fft.fft2(w_spatial.reshape(h, w))


def rel_err(a, b):
    return np.max(np.abs(a - b)) / np.max(np.abs(b))
