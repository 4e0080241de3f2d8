"""Input validation helpers used across the public API."""

from __future__ import annotations

import numpy as np

from .exceptions import DimensionMismatchError


def as_vector(x, name: str = "vector", length: int | None = None) -> np.ndarray:
    """Coerce to a 1-D float array, optionally checking its length."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise DimensionMismatchError(f"{name} must be 1-D, got shape {v.shape}")
    if length is not None and v.shape[0] != length:
        raise DimensionMismatchError(
            f"{name} must have length {length}, got {v.shape[0]}"
        )
    return v


def as_matrix(x, name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-D float array."""
    m = np.asarray(x, dtype=float)
    if m.ndim != 2:
        raise DimensionMismatchError(f"{name} must be 2-D, got shape {m.shape}")
    return m


def check_positive_int(value: int, name: str) -> int:
    if int(value) != value or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def check_nonnegative_int(value: int, name: str) -> int:
    if int(value) != value or value < 0:
        raise ValueError(f"{name} must be a non-negative integer, got {value!r}")
    return int(value)
