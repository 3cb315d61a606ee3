"""Input validation helpers shared by the estimator API and the CLI."""

from __future__ import annotations

import numpy as np


def check_iq_array(X) -> np.ndarray:
    """Coerce captures to a complex (n_samples, n_x) array.

    Accepts complex 2-D input or real 3-D input shaped (n_samples, 2, n_x)
    with I and Q as channels.
    """
    X = np.asarray(X)
    if np.iscomplexobj(X):
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2:
            raise ValueError(f"complex input must be (n_samples, n_x), got shape {X.shape}")
        out = X.astype(np.complex64, copy=False)
    else:
        if X.ndim != 3 or X.shape[1] != 2:
            raise ValueError(
                f"real input must be (n_samples, 2, n_x) with I/Q channels, got shape {X.shape}"
            )
        out = (X[:, 0, :] + 1j * X[:, 1, :]).astype(np.complex64)
    if out.shape[1] < 2:
        raise ValueError(f"captures need at least 2 points, got n_x={out.shape[1]}")
    if not np.all(np.isfinite(out)):
        raise ValueError("captures contain non-finite values")
    return out


def check_labels(y, n_samples: int) -> np.ndarray:
    y = np.asarray(y)
    if y.ndim != 1 or len(y) != n_samples:
        raise ValueError(f"y must be 1-D with {n_samples} entries, got shape {y.shape}")
    return y


def check_weight_vector(w, n_x: int | None = None) -> np.ndarray:
    """Validate a class activation vector: 1-D, finite, inside [0, 1]."""
    w = np.asarray(w, dtype=float)
    if w.ndim != 1:
        raise ValueError(f"weight vector must be 1-D, got shape {w.shape}")
    if n_x is not None and w.size != n_x:
        raise ValueError(f"weight vector length {w.size}, expected {n_x}")
    if not np.all(np.isfinite(w)):
        raise ValueError("weight vector contains non-finite values")
    if w.size and (w.min() < 0 or w.max() > 1):
        raise ValueError("weights must lie in [0, 1]")
    return w
