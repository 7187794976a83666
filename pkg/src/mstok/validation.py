"""Input validation helpers shared across the toolkit."""

from __future__ import annotations

import numpy as np

from .errors import DataError, ParameterError, ShapeError


def as_float_matrix(x, name: str, *, allow_empty: bool = True) -> np.ndarray:
    """Coerce ``x`` to a 2-D float64 array, rejecting anything else."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got {arr.ndim}-D")
    if not allow_empty and arr.size == 0:
        raise ShapeError(f"{name} must not be empty")
    return arr


def as_float_vector(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ShapeError(f"{name} must be 1-D, got {arr.ndim}-D")
    return arr


def as_int_vector(x, name: str) -> np.ndarray:
    arr = np.asarray(x)
    if arr.ndim != 1:
        raise ShapeError(f"{name} must be 1-D, got {arr.ndim}-D")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        rounded = np.rint(arr)
        if not np.array_equal(rounded, arr):
            raise DataError(f"{name} must contain integers")
        arr = rounded
    return arr.astype(np.int64, copy=False)


def check_positive(name: str, value) -> float:
    value = float(value)
    if not value > 0:
        raise ParameterError(f"{name} must be strictly positive, got {value}")
    return value


def check_finite(name: str, arr: np.ndarray) -> None:
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{name} contains non-finite values")


def check_same_width(name_a: str, a: np.ndarray, name_b: str, b: np.ndarray) -> None:
    if a.shape[-1] != b.shape[-1]:
        raise ShapeError(
            f"{name_a} has width {a.shape[-1]} but {name_b} has width {b.shape[-1]}"
        )


def integral_count(name: str, value: float, *, tol: float = 1e-9) -> int:
    """Round ``value`` to an integer, failing if it is not one."""
    count = round(value)
    if abs(value - count) > tol:
        raise ParameterError(f"{name} must be integral, got {value}")
    return int(count)
