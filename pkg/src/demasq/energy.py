"""Drumhead energy of an embedding and its Doppler-shifted observer form.

An embedding is treated as a struck drum membrane: the number of distinct
values it takes selects a vibration mode, and the mode's frequency ratio
(a ratio of J0 zeros) is the source frequency.  The observer frequency
Doppler-shifts that source frequency through a medium whose speed is set
by the embedding's variance, with the source velocity scaled by the
candidate label.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bessel import BesselZeroTable, build_table
from .errors import (
    DegenerateEmbeddingError,
    DomainError,
    ShapeError,
    SingularDenominatorError,
)

# Population variance below this floor means the embedding is effectively
# constant and the Doppler medium speed collapses to zero.
VARIANCE_FLOOR = 1e-12

# Observer (receiver) speed; fixed by the detector design.
RECEIVER_SPEED = 0.8

CHATGPT_LABEL = 0
HUMAN_LABEL = 1


@dataclass(frozen=True)
class EnergyReport:
    """Per-embedding energies consumed by the loss and the classifier."""

    source_frequency: float
    observer_frequency_label0: float
    observer_frequency_label1: float
    variance: float
    unique_count: int
    medium_speed: float


def _as_embedding(e) -> np.ndarray:
    arr = np.asarray(e, dtype=np.float64)
    if arr.ndim != 1:
        raise ShapeError(f"embedding must be 1-D, got shape {arr.shape}")
    if arr.size == 0:
        raise ShapeError("embedding must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise DomainError("embedding contains non-finite values")
    return arr


def shift_embedding(e) -> np.ndarray:
    """Shift an embedding by its own extreme value.

    If any coordinate is negative the minimum is added to every element,
    otherwise the maximum is subtracted.  Either way the distinct-value
    count is preserved in exact arithmetic.
    """
    arr = _as_embedding(e)
    lo = arr.min()
    if lo < 0.0:
        return arr + lo
    return arr - arr.max()


def unique_count(e) -> int:
    """Distinct values in the shifted embedding, under exact float equality."""
    return int(np.unique(shift_embedding(e)).size)


def drumhead_frequency(n: int, table: BesselZeroTable) -> float:
    """Frequency of the n-th drumhead mode relative to the fundamental.

    Returns the ratio of the n-th positive J0 zero to the first; 1.0 for
    the fundamental, strictly increasing in n.
    """
    return table.ratio(n)


def source_frequency(e, table: BesselZeroTable | None = None) -> float:
    """Mode frequency selected by the embedding's distinct-value count.

    Always >= 1, with equality only for constant embeddings.
    """
    n = unique_count(e)
    if table is None or table.max_order < n:
        table = build_table(n)
    return drumhead_frequency(n, table)


def _variance(arr: np.ndarray) -> float:
    v = float(np.var(arr))
    if v <= VARIANCE_FLOOR:
        raise DegenerateEmbeddingError(
            f"embedding variance {v:.3e} is at or below the floor "
            f"{VARIANCE_FLOOR:.0e}")
    return v


def _check_label(label) -> float:
    if label not in (CHATGPT_LABEL, HUMAN_LABEL):
        raise DomainError(f"label must be 0 or 1, got {label!r}")
    return float(label)


def observer_frequency(e, label: int, table: BesselZeroTable | None = None,
                       include_fundamental: bool = True) -> float:
    """Doppler-shifted energy of an embedding under a candidate label.

    The medium speed is c = var(e) * (first J0 zero); the source recedes at
    v_s = label * var(e), the observer approaches at the fixed
    RECEIVER_SPEED, and the observed energy is

        E = (c + v_r) / (c - v_s) * source_frequency(e)

    With ``include_fundamental=False`` the first-zero factor is dropped
    (c = var(e)), which makes every label-1 denominator exactly zero and
    therefore raises SingularDenominatorError.
    """
    y = _check_label(label)
    arr = _as_embedding(e)
    var = _variance(arr)
    n = int(np.unique(shift_embedding(arr)).size)
    if table is None or table.max_order < n:
        table = build_table(n)
    f0 = drumhead_frequency(n, table)
    c = var * float(table.zeros[0]) if include_fundamental else var
    denom = c - y * var
    if denom <= 0.0:
        raise SingularDenominatorError(
            f"Doppler denominator c - v_s = {denom:.3e} is not positive "
            f"(var={var:.3e}, label={label})")
    return (c + RECEIVER_SPEED) / denom * f0


def energy_report(e, table: BesselZeroTable | None = None,
                  include_fundamental: bool = True) -> EnergyReport:
    """All energies of one embedding, computed from a single shift/count."""
    arr = _as_embedding(e)
    var = _variance(arr)
    n = int(np.unique(shift_embedding(arr)).size)
    if table is None or table.max_order < n:
        table = build_table(n)
    f0 = drumhead_frequency(n, table)
    c = var * float(table.zeros[0]) if include_fundamental else var
    energies = []
    for y in (0.0, 1.0):
        denom = c - y * var
        if denom <= 0.0:
            raise SingularDenominatorError(
                f"Doppler denominator c - v_s = {denom:.3e} is not positive "
                f"(var={var:.3e}, label={int(y)})")
        energies.append((c + RECEIVER_SPEED) / denom * f0)
    return EnergyReport(
        source_frequency=f0,
        observer_frequency_label0=energies[0],
        observer_frequency_label1=energies[1],
        variance=var,
        unique_count=n,
        medium_speed=c,
    )


# ---------------------------------------------------------------------------
# Batched forms.  Training evaluates energies for every sample and all of
# its feature-zeroed variants per epoch; doing that row-wise in Python is
# the difference between seconds and minutes.


def _as_batch(E) -> np.ndarray:
    mat = np.asarray(E, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[1] == 0:
        raise ShapeError(f"batch requires a (B, d) matrix, got shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise DomainError("embedding batch contains non-finite values")
    return mat


def batch_unique_counts(E) -> np.ndarray:
    """unique_count of each row of a (B, d) matrix, without a Python loop."""
    mat = _as_batch(E)
    lo = mat.min(axis=1, keepdims=True)
    hi = mat.max(axis=1, keepdims=True)
    shifted = np.where(lo < 0.0, mat + lo, mat - hi)
    s = np.sort(shifted, axis=1)
    return 1 + np.count_nonzero(s[:, 1:] != s[:, :-1], axis=1)


def batch_observer_frequency(E, labels, table: BesselZeroTable | None = None,
                             include_fundamental: bool = True,
                             degenerate: str = "raise") -> np.ndarray:
    """observer_frequency applied row-wise to a (B, d) matrix.

    ``labels`` may be a scalar or a length-B vector of 0/1.  With
    ``degenerate="nan"`` rows at or below the variance floor yield NaN
    instead of raising, so callers can drop perturbed variants that
    collapsed to a constant.  Singular denominators always raise.
    """
    if degenerate not in ("raise", "nan"):
        raise DomainError(f"degenerate must be 'raise' or 'nan', got {degenerate!r}")
    mat = _as_batch(E)
    labs = np.broadcast_to(np.asarray(labels, dtype=np.float64),
                           (mat.shape[0],)).copy()
    if not np.all(np.isin(labs, (0.0, 1.0))):
        raise DomainError("labels must be 0 or 1")

    var = np.var(mat, axis=1)
    deg = var <= VARIANCE_FLOOR
    if np.any(deg):
        if degenerate == "raise":
            i = int(np.argmax(deg))
            raise DegenerateEmbeddingError(
                f"row {i}: variance {var[i]:.3e} is at or below the floor "
                f"{VARIANCE_FLOOR:.0e}")
        var = np.where(deg, 1.0, var)  # placeholder; rows become NaN below

    counts = batch_unique_counts(mat)
    if table is None or table.max_order < counts.max():
        table = build_table(int(counts.max()))
    f0 = table.zeros[counts - 1] / table.zeros[0]
    c = var * float(table.zeros[0]) if include_fundamental else var
    denom = c - labs * var
    sing = (denom <= 0.0) & ~deg
    if np.any(sing):
        i = int(np.argmax(sing))
        raise SingularDenominatorError(
            f"row {i}: Doppler denominator {denom[i]:.3e} is not positive")
    out = (c + RECEIVER_SPEED) / denom * f0
    if np.any(deg):
        out[deg] = np.nan
    return out
