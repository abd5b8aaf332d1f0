"""Score decoding and evaluation metrics."""

import warnings

import numpy as np

from .errors import ValidationError


def predict_score(distribution: np.ndarray) -> float:
    """Expected score of an 11-class distribution: sum_k k * p_k, in [0, 10]."""
    dist = np.asarray(distribution, dtype=np.float64).reshape(-1)
    if dist.size != 11 or abs(dist.sum() - 1.0) > 1e-6 or np.any(dist < 0):
        raise ValidationError("input is not a valid 11-class distribution")
    return float(np.arange(11) @ dist)


def pcc(predictions, references) -> float:
    """Pearson correlation coefficient. A constant vector on either side is
    defined as correlation 0, with a warning."""
    x = np.asarray(predictions, dtype=np.float64).reshape(-1)
    y = np.asarray(references, dtype=np.float64).reshape(-1)
    if x.size != y.size:
        raise ValidationError(f"length mismatch: {x.size} predictions vs {y.size} references")
    if x.size < 2:
        raise ValidationError("need at least 2 points for a correlation")
    xc = x - x.mean()
    yc = y - y.mean()
    nx = np.sqrt((xc**2).sum())
    ny = np.sqrt((yc**2).sum())
    if nx == 0.0 or ny == 0.0:
        warnings.warn("constant vector in pcc, returning 0", stacklevel=2)
        return 0.0
    return float(np.clip((xc @ yc) / (nx * ny), -1.0, 1.0))
