"""Input validation helpers shared by the functional and estimator APIs."""

from __future__ import annotations

import numpy as np

from .exceptions import ContractError, InputError


def as_matrix(a, name="array", *, allow_1d=False) -> np.ndarray:
    """Return ``a`` as a finite 2-D float64 array.

    One-dimensional input is promoted to a single column when ``allow_1d``
    is set (targets of a single-output regression).
    """
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim == 1 and allow_1d:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise InputError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InputError(f"{name} must be non-empty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} contains non-finite entries")
    return arr


def check_design_targets(phi, y):
    """Validate a design matrix and its targets; returns float64 copies.

    Targets may be 1-D (single output). Row counts must agree.
    """
    phi = as_matrix(phi, "design matrix")
    y = as_matrix(y, "targets", allow_1d=True)
    if phi.shape[0] != y.shape[0]:
        raise ContractError(
            f"design matrix has {phi.shape[0]} rows but targets have {y.shape[0]}"
        )
    return phi, y


def check_labels(labels, num_classes=None, name="labels") -> np.ndarray:
    arr = np.asarray(labels)
    if arr.ndim != 1:
        raise InputError(f"{name} must be 1-dimensional, got shape {arr.shape}")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.equal(np.mod(arr, 1), 0)):
            raise InputError(f"{name} must be integers")
    arr = arr.astype(np.int64)
    if arr.size and arr.min() < 0:
        raise InputError(f"{name} must be non-negative")
    if num_classes is not None and arr.size and arr.max() >= num_classes:
        raise InputError(f"{name} contain {arr.max()} but num_classes is {num_classes}")
    return arr


def check_positive(value, name, *, strict=True):
    if not np.isfinite(value) or (value <= 0 if strict else value < 0):
        kind = "positive" if strict else "non-negative"
        raise InputError(f"{name} must be {kind}, got {value!r}")
    return value


def check_probability(value, name="p"):
    if not (0.0 <= value <= 1.0):
        raise InputError(f"{name} must lie in [0, 1], got {value!r}")
    return float(value)
