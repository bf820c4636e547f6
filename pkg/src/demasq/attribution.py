"""Integrated-gradients attribution and feature-zeroing perturbations.

Attribution follows the straight path from an all-zero baseline to the
input, integrating the model gradient with a midpoint Riemann rule.  The
top-scoring features are then zeroed one at a time and the resulting
variants' Doppler energies averaged; that average is the energy term the
detector feeds into its loss.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import network
from .bessel import BesselZeroTable
from .energy import batch_observer_frequency
from .errors import DegenerateEmbeddingError, DomainError, ShapeError


@dataclass(frozen=True)
class AttributionResult:
    """Per-feature attribution scores with the completeness diagnostic."""

    attributions: np.ndarray  # length input_dim
    completeness_gap: float   # |sum(attributions) - (F(x) - F(baseline))|
    steps: int


@dataclass(frozen=True)
class PerturbationSet:
    """Single-feature-zeroed variants of one embedding."""

    perturbed: np.ndarray        # (k, d); row j zeroes selected_indices[j]
    selected_indices: tuple[int, ...]

    @property
    def k(self) -> int:
        return len(self.selected_indices)


def _check_output_kind(output: str) -> bool:
    if output not in ("probability", "logit"):
        raise DomainError(
            f"output must be 'probability' or 'logit', got {output!r}")
    return output == "logit"


def _midpoints(steps: int) -> np.ndarray:
    if steps < 1:
        raise DomainError(f"steps must be >= 1, got {steps}")
    return (np.arange(1, steps + 1) - 0.5) / steps


def integrated_gradients(p: network.ModelParameters, x, steps: int = 64,
                         output: str = "probability") -> AttributionResult:
    """Path-integrated attribution of each input coordinate.

    attributions_i = x_i * mean over midpoint fractions a of dF/dx_i(a*x),
    with F the sigmoid probability by default (the raw logit behind the
    ``output`` flag for diagnostics).  The completeness gap measures how
    far the attributions are from summing to F(x) - F(0).
    """
    res = batch_integrated_gradients(p, np.asarray(x, dtype=np.float64)[None, :],
                                     steps, output)
    return AttributionResult(attributions=res[0][0],
                             completeness_gap=float(res[1][0]), steps=steps)


def batch_integrated_gradients(p: network.ModelParameters, X, steps: int = 64,
                               output: str = "probability"
                               ) -> tuple[np.ndarray, np.ndarray]:
    """integrated_gradients for every row of a (B, d) matrix.

    All B*steps path points traverse the network as one batch, which turns
    the path integral into a handful of large matrix products.  Returns
    (attributions (B, d), completeness_gaps (B,)).
    """
    use_logit = _check_output_kind(output)
    mat = np.asarray(X, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[1] != p.input_dim:
        raise ShapeError(
            f"batch shape {mat.shape} does not match model input dimension "
            f"{p.input_dim}")
    alphas = _midpoints(steps)
    mean_grad = _mean_path_gradient(p, mat, alphas, use_logit)
    attributions = mat * mean_grad

    probs, logits = network.batch_forward(p, mat)
    prob0, logit0 = network.batch_forward(p, np.zeros((1, mat.shape[1])))
    if use_logit:
        span = logits - logit0[0]
    else:
        span = probs - prob0[0]
    gaps = np.abs(attributions.sum(axis=1) - span)
    return attributions, gaps


def _mean_path_gradient(p: network.ModelParameters, X: np.ndarray,
                        alphas: np.ndarray, use_logit: bool) -> np.ndarray:
    """Mean over the path fractions of the model gradient at alpha * x.

    The first layer is linear in its input, so (alpha*x) @ W is alpha times
    a per-sample product computed once; likewise the mean over the path
    commutes with the final backward product.  Both identities are exact
    and shrink the two widest matrix products by the step count.
    """
    B, d = X.shape
    steps = alphas.shape[0]
    last = len(p.weights) - 1
    base = X @ p.weights[0]
    z = ((alphas[None, :, None] * base[:, None, :]).reshape(B * steps, -1)
         + p.biases[0])
    pre_acts = [z]
    h = np.maximum(z, 0.0) if last > 0 else z
    for i in range(1, last + 1):
        z = h @ p.weights[i] + p.biases[i]
        pre_acts.append(z)
        if i < last:
            h = np.maximum(z, 0.0)
    if use_logit:
        delta = np.ones((B * steps, 1))
    else:
        probs = network._sigmoid(pre_acts[-1][:, 0])
        delta = (probs * (1.0 - probs))[:, None]
    for i in range(last, 0, -1):
        delta = (delta @ p.weights[i].T) * (pre_acts[i - 1] > 0.0)
    mean_delta = delta.reshape(B, steps, -1).mean(axis=1)
    return mean_delta @ p.weights[0].T


def top_k(a: AttributionResult, k: int) -> list[int]:
    """Indices of the k largest |attribution| values, descending.

    Ties are broken toward the lower index, so the result is deterministic
    for any input.
    """
    n = a.attributions.shape[0]
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    if k > n:
        raise DomainError(f"k = {k} exceeds feature count {n}")
    order = np.argsort(-np.abs(a.attributions), kind="stable")
    return [int(i) for i in order[:k]]


def perturb(x, indices) -> PerturbationSet:
    """One variant per index, each a copy of x with that coordinate zeroed."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ShapeError(f"embedding must be 1-D, got shape {arr.shape}")
    idx = [int(i) for i in indices]
    if len(set(idx)) != len(idx):
        raise DomainError("perturbation indices must be distinct")
    for i in idx:
        if not 0 <= i < arr.shape[0]:
            raise DomainError(
                f"index {i} out of range for embedding of length {arr.shape[0]}")
    variants = np.repeat(arr[None, :], len(idx), axis=0)
    variants[np.arange(len(idx)), idx] = 0.0
    variants.setflags(write=False)
    return PerturbationSet(perturbed=variants, selected_indices=tuple(idx))


def averaged_perturbed_energy(pset: PerturbationSet, original, label: int,
                              table: BesselZeroTable | None = None,
                              include_original: bool = True,
                              include_fundamental: bool = True) -> float:
    """Mean observer frequency over the original embedding and its variants.

    Variants whose variance collapses below the floor are skipped; if
    nothing at all survives, the sample is degenerate and the error says so.
    """
    arr = np.asarray(original, dtype=np.float64)
    rows = [arr[None, :]] if include_original else []
    if pset.k > 0:
        rows.append(pset.perturbed)
    if not rows:
        raise DegenerateEmbeddingError(
            "no embeddings to average: empty perturbation set and original "
            "excluded")
    stacked = np.vstack(rows)
    energies = batch_observer_frequency(stacked, label, table,
                                        include_fundamental=include_fundamental,
                                        degenerate="nan")
    valid = ~np.isnan(energies)
    if not np.any(valid):
        raise DegenerateEmbeddingError(
            "every member of the perturbation set is degenerate")
    return float(energies[valid].mean())
