"""Input validation helpers shared by the estimator and the functional API."""

from __future__ import annotations

import math

import numpy as np

from sosfact.exceptions import SymmetryError

TOL_SYM = 1e-12
TOL_INPUT = 1e-10


def check_two_body(h, *, dtype=float) -> np.ndarray:
    """Return ``h`` as a rank-4 array with all four axes of equal length.

    Only the shape is checked here; see :func:`sosfact.tensor.validate_symmetries`
    for the index relations.
    """
    arr = np.asarray(h)
    if arr.ndim != 4 or len(set(arr.shape)) != 1:
        raise ValueError(f"expected a hypercubic rank-4 tensor, got shape {arr.shape}")
    if arr.shape[0] < 1:
        raise ValueError("tensor must have at least one mode")
    if dtype is float:
        if np.iscomplexobj(arr):
            raise SymmetryError("two-body tensor must be real-valued")
        arr = arr.astype(np.float64, copy=False)
    return arr


def check_one_body(f, n_modes: int | None = None, *, tol: float = TOL_SYM) -> np.ndarray:
    """Return ``f`` as a square matrix, checking Hermiticity within ``tol``."""
    arr = np.asarray(f)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    if n_modes is not None and arr.shape[0] != n_modes:
        raise ValueError(
            f"one-body matrix has {arr.shape[0]} modes, expected {n_modes}"
        )
    if not np.iscomplexobj(arr):
        arr = arr.astype(np.float64, copy=False)
    defect = float(np.max(np.abs(arr - arr.conj().T), initial=0.0))
    if defect > tol:
        raise SymmetryError(f"one-body matrix is not Hermitian (defect {defect:.3e})")
    return arr


def check_grouped(M) -> tuple[np.ndarray, int]:
    """Return ``(M, n_modes)`` for an ``n_modes**2`` square grouped matrix."""
    arr = np.asarray(M)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"grouped matrix must be square, got shape {arr.shape}")
    n = math.isqrt(arr.shape[0])
    if n * n != arr.shape[0] or n < 1:
        raise ValueError(
            f"grouped matrix dimension {arr.shape[0]} is not a perfect square"
        )
    return arr, n


def check_tolerance(name: str, value: float) -> float:
    value = float(value)
    if not value >= 0.0:
        raise ValueError(f"{name} must be non-negative, got {value}")
    return value
