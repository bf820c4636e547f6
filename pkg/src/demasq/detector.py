"""Training, classification and evaluation of the energy-based detector.

Label 0 marks machine-generated text, label 1 human-written text.  The
model body is trained with binary cross-entropy; the reported loss adds
the Doppler energy terms exactly as defined (averaged perturbed energy of
the true label minus the smaller original-label energy), which carry no
parameter gradient because the feature selection underneath them is
discrete.  Classification thresholds the sigmoid probability and presents
the energy signed by the predicted label: negative for machine-generated,
positive for human.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import network
from .attribution import batch_integrated_gradients
from .bessel import BesselZeroTable, build_table
from .energy import (
    CHATGPT_LABEL,
    HUMAN_LABEL,
    VARIANCE_FLOOR,
    EnergyReport,
    batch_observer_frequency,
    batch_unique_counts,
    energy_report,
)
from .errors import (
    ConfigurationError,
    DegenerateEmbeddingError,
    DomainError,
    ShapeError,
)


@dataclass(frozen=True)
class TrainingConfig:
    """Knobs for training and classification; defaults mirror the detector
    design (12 epochs of Adam at 1e-4, top-20 features, 64 IG steps)."""

    epochs: int = 12
    learning_rate: float = 1e-4
    batch_size: int = 64
    seed: int = 0
    k_features: int = 20
    ig_steps: int = 64
    medium_includes_fundamental: bool = True
    include_original_in_energy_mean: bool = True
    split_ratio: float = 0.8
    decision_threshold: float = 0.5

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigurationError(f"epochs must be >= 1, got {self.epochs}")
        if self.learning_rate <= 0:
            raise ConfigurationError(
                f"learning_rate must be positive, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ConfigurationError(
                f"batch_size must be >= 1, got {self.batch_size}")
        if self.k_features < 0:
            raise ConfigurationError(
                f"k_features must be >= 0, got {self.k_features}")
        if self.ig_steps < 1:
            raise ConfigurationError(
                f"ig_steps must be >= 1, got {self.ig_steps}")
        if not 0.0 < self.split_ratio < 1.0:
            raise ConfigurationError(
                f"split_ratio must be in (0,1), got {self.split_ratio}")
        if not 0.0 < self.decision_threshold < 1.0:
            raise ConfigurationError(
                f"decision_threshold must be in (0,1), got "
                f"{self.decision_threshold}")


@dataclass(frozen=True)
class ClassificationVerdict:
    """Outcome for one embedding."""

    predicted_label: int
    probability: float
    signed_energy: float
    agreement_count: int
    energy_report: EnergyReport


@dataclass(frozen=True)
class MetricsSummary:
    """Confusion counts with label 0 (machine-generated) as positive class."""

    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def tpr(self) -> float:
        d = self.tp + self.fn
        return self.tp / d if d else 0.0

    @property
    def tnr(self) -> float:
        d = self.tn + self.fp
        return self.tn / d if d else 0.0


@dataclass(frozen=True)
class EpochLog:
    epoch: int
    mean_loss: float
    mean_energy_label0: float
    mean_energy_label1: float

    def line(self) -> str:
        return (f"epoch={self.epoch} mean_loss={self.mean_loss!r} "
                f"mean_energy_label0={self.mean_energy_label0!r} "
                f"mean_energy_label1={self.mean_energy_label1!r}")


@dataclass(frozen=True)
class TrainResult:
    params: network.ModelParameters
    log: tuple[EpochLog, ...]
    skipped_degenerate: int


def _as_dataset(X, y) -> tuple[np.ndarray, np.ndarray]:
    mat = np.asarray(X, dtype=np.float64)
    labels = np.asarray(y)
    if mat.ndim != 2 or mat.shape[0] == 0:
        raise ShapeError(f"dataset must be a non-empty (N, d) matrix, "
                         f"got shape {mat.shape}")
    if labels.shape != (mat.shape[0],):
        raise ShapeError(f"labels shape {labels.shape} does not match "
                         f"{mat.shape[0]} samples")
    if not np.all(np.isin(labels, (CHATGPT_LABEL, HUMAN_LABEL))):
        raise DomainError("labels must be 0 or 1")
    if not np.all(np.isfinite(mat)):
        raise DomainError("dataset contains non-finite values")
    return mat, labels.astype(np.int64)


def _zero_one_at(X: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """(B, k, d) variants of each row of X with one index zeroed per variant."""
    B, k = idx.shape
    variants = np.repeat(X[:, None, :], k, axis=1)
    variants[np.arange(B)[:, None], np.arange(k)[None, :], idx] = 0.0
    return variants


def _batch_topk_indices(p: network.ModelParameters, X: np.ndarray,
                        cfg: TrainingConfig) -> np.ndarray:
    """Top-k feature indices per row by |IG attribution|, descending, ties
    toward the lower index."""
    if cfg.k_features == 0:
        return np.zeros((X.shape[0], 0), dtype=np.int64)
    attrs, _ = batch_integrated_gradients(p, X, cfg.ig_steps)
    order = np.argsort(-np.abs(attrs), axis=1, kind="stable")
    return order[:, :cfg.k_features]


def _mean_perturbed_energy(X: np.ndarray, labels: np.ndarray,
                           idx: np.ndarray, originals: np.ndarray,
                           cfg: TrainingConfig,
                           table: BesselZeroTable) -> np.ndarray:
    """Row-wise mean observer frequency over each sample's perturbation set.

    ``originals`` holds observer_frequency of the unperturbed rows at their
    labels; rows whose variants all collapse and whose original is excluded
    come back NaN for the caller to skip.
    """
    B, k = idx.shape
    if k > 0:
        variants = _zero_one_at(X, idx).reshape(B * k, X.shape[1])
        v_labels = np.repeat(labels.astype(np.float64), k)
        energies = batch_observer_frequency(
            variants, v_labels, table,
            include_fundamental=cfg.medium_includes_fundamental,
            degenerate="nan").reshape(B, k)
        valid = ~np.isnan(energies)
        sums = np.where(valid, energies, 0.0).sum(axis=1)
        counts = valid.sum(axis=1).astype(np.float64)
    else:
        sums = np.zeros(B)
        counts = np.zeros(B)
    if cfg.include_original_in_energy_mean:
        sums += originals
        counts += 1.0
    with np.errstate(invalid="ignore"):
        return np.where(counts > 0, sums / np.maximum(counts, 1.0), np.nan)


def _original_energies(X: np.ndarray, cfg: TrainingConfig,
                       table: BesselZeroTable) -> tuple[np.ndarray, np.ndarray]:
    """(E_f(0), E_f(1)) per row; NaN rows mark degenerate embeddings."""
    var = np.var(X, axis=1)
    ok = var > VARIANCE_FLOOR
    e0 = np.full(X.shape[0], np.nan)
    e1 = np.full(X.shape[0], np.nan)
    if np.any(ok):
        sub = X[ok]
        e0[ok] = batch_observer_frequency(
            sub, 0.0, table, cfg.medium_includes_fundamental)
        e1[ok] = batch_observer_frequency(
            sub, 1.0, table, cfg.medium_includes_fundamental)
    return e0, e1


def sample_loss(p: network.ModelParameters, x, y: int, cfg: TrainingConfig,
                table: BesselZeroTable | None = None):
    """Loss of one sample and the parameter gradients that train it.

    loss = BCE(logit, y) + mean perturbed energy at label y
           - min(E_f(0), E_f(1)) of the original embedding.

    The returned gradients are exactly those of the BCE term: the energy
    terms depend on the parameters only through the discrete top-k feature
    selection, which has no usable derivative.
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ShapeError(f"embedding must be 1-D, got shape {arr.shape}")
    if y not in (CHATGPT_LABEL, HUMAN_LABEL):
        raise DomainError(f"label must be 0 or 1, got {y!r}")
    if table is None:
        table = build_table(arr.shape[0])
    X = arr[None, :]
    labels = np.array([y], dtype=np.int64)
    e0, e1 = _original_energies(X, cfg, table)
    if np.isnan(e0[0]):
        raise DegenerateEmbeddingError(
            "sample variance is at or below the floor")
    idx = _batch_topk_indices(p, X, cfg)
    original = np.where(labels == 0, e0, e1)
    mean_energy = _mean_perturbed_energy(X, labels, idx, original, cfg, table)
    if np.isnan(mean_energy[0]):
        raise DegenerateEmbeddingError(
            "every perturbed variant is degenerate and the original is "
            "excluded from the mean")
    bce, w_grads, b_grads, _ = network.batch_loss_gradients(
        p, X, labels.astype(np.float64))
    loss = bce + float(mean_energy[0]) - float(min(e0[0], e1[0]))
    return loss, w_grads, b_grads


def train(X, y, cfg: TrainingConfig) -> TrainResult:
    """Seeded mini-batch training over the full combined loss.

    Each epoch shuffles the data, and for every batch: the top-k features
    are selected by integrated gradients at the current parameters, the
    per-sample energy terms are evaluated, BCE gradients are computed, and
    one Adam step is applied.  Samples that are degenerate (constant
    embedding) are dropped up front and counted.
    """
    mat, labels = _as_dataset(X, y)
    if len(np.unique(labels)) < 2:
        raise ConfigurationError("training data must contain both labels")
    if cfg.k_features > mat.shape[1]:
        raise ConfigurationError(
            f"k_features = {cfg.k_features} exceeds embedding dimension "
            f"{mat.shape[1]}")
    table = build_table(mat.shape[1])

    e0, e1 = _original_energies(mat, cfg, table)
    degenerate = np.isnan(e0)
    skipped = int(degenerate.sum())
    if skipped:
        mat, labels = mat[~degenerate], labels[~degenerate]
        e0, e1 = e0[~degenerate], e1[~degenerate]
        if len(np.unique(labels)) < 2:
            raise ConfigurationError(
                "training data must contain both labels after dropping "
                f"{skipped} degenerate samples")
    e_min = np.minimum(e0, e1)
    e_true = np.where(labels == 0, e0, e1)

    p = network.init(cfg.seed, mat.shape[1])
    state = network.init_optimizer(p, learning_rate=cfg.learning_rate)
    rng = np.random.default_rng(cfg.seed)
    n = mat.shape[0]
    logs = []
    for epoch in range(1, cfg.epochs + 1):
        perm = rng.permutation(n)
        loss_sum = 0.0
        loss_count = 0
        energy_sums = {0: 0.0, 1: 0.0}
        energy_counts = {0: 0, 1: 0}
        for start in range(0, n, cfg.batch_size):
            sel = perm[start:start + cfg.batch_size]
            bx, by = mat[sel], labels[sel]
            idx = _batch_topk_indices(p, bx, cfg)
            mean_energy = _mean_perturbed_energy(
                bx, by, idx, e_true[sel], cfg, table)
            valid = ~np.isnan(mean_energy)
            if not np.any(valid):
                continue
            bx, by, sel = bx[valid], by[valid], sel[valid]
            mean_energy = mean_energy[valid]
            bce, w_grads, b_grads, _ = network.batch_loss_gradients(
                p, bx, by.astype(np.float64))
            # per-batch mean of the full per-sample loss
            batch_losses = mean_energy - e_min[sel]
            loss_sum += bce * by.shape[0] + float(batch_losses.sum())
            loss_count += by.shape[0]
            for lab in (0, 1):
                m = by == lab
                energy_sums[lab] += float(mean_energy[m].sum())
                energy_counts[lab] += int(m.sum())
            p, state = network.adam_step(p, state, w_grads, b_grads)
        logs.append(EpochLog(
            epoch=epoch,
            mean_loss=loss_sum / loss_count if loss_count else float("nan"),
            mean_energy_label0=(energy_sums[0] / energy_counts[0]
                                if energy_counts[0] else float("nan")),
            mean_energy_label1=(energy_sums[1] / energy_counts[1]
                                if energy_counts[1] else float("nan")),
        ))
    return TrainResult(params=p, log=tuple(logs), skipped_degenerate=skipped)


def classify(p: network.ModelParameters, x, cfg: TrainingConfig,
             table: BesselZeroTable | None = None) -> ClassificationVerdict:
    """Verdict for one embedding.

    The label comes from thresholding the sigmoid probability; the energy
    of that label is reported with a sign that encodes it (negative for 0,
    positive for 1).  agreement_count says how many of the top-k
    feature-zeroed variants the model assigns the same label.
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ShapeError(f"embedding must be 1-D, got shape {arr.shape}")
    if table is None:
        table = build_table(arr.shape[0])
    verdicts = _batch_classify(p, arr[None, :], cfg, table)
    return verdicts[0]


def _batch_classify(p: network.ModelParameters, X: np.ndarray,
                    cfg: TrainingConfig,
                    table: BesselZeroTable) -> list[ClassificationVerdict]:
    if cfg.k_features > X.shape[1]:
        raise ConfigurationError(
            f"k_features = {cfg.k_features} exceeds embedding dimension "
            f"{X.shape[1]}")
    var = np.var(X, axis=1)
    if np.any(var <= VARIANCE_FLOOR):
        i = int(np.argmax(var <= VARIANCE_FLOOR))
        raise DegenerateEmbeddingError(
            f"sample {i}: variance {var[i]:.3e} is at or below the floor")
    probs, _ = network.batch_forward(p, X)
    preds = (probs >= cfg.decision_threshold).astype(np.int64)

    idx = _batch_topk_indices(p, X, cfg)
    B, k = idx.shape
    variants = _zero_one_at(X, idx).reshape(B * k, X.shape[1])
    v_probs, _ = network.batch_forward(p, variants)
    v_preds = (v_probs >= cfg.decision_threshold).astype(np.int64)
    agreement = (v_preds.reshape(B, k) == preds[:, None]).sum(axis=1)

    out = []
    for i in range(B):
        report = energy_report(
            X[i], table,
            include_fundamental=cfg.medium_includes_fundamental)
        e_pred = (report.observer_frequency_label0 if preds[i] == 0
                  else report.observer_frequency_label1)
        out.append(ClassificationVerdict(
            predicted_label=int(preds[i]),
            probability=float(probs[i]),
            signed_energy=float((2 * preds[i] - 1) * e_pred),
            agreement_count=int(agreement[i]),
            energy_report=report,
        ))
    return out


def evaluate(p: network.ModelParameters, X, y, cfg: TrainingConfig,
             table: BesselZeroTable | None = None,
             ids=None, domains=None):
    """Confusion metrics plus one verdict row per sample.

    Label 0 (machine-generated) is the positive class: TPR measures how
    much generated text is caught, TNR how much human text is passed.
    Returns (overall MetricsSummary, per-domain {tag: MetricsSummary},
    row list).  Rows are (id, true_label, predicted_label, probability,
    signed_energy, agreement_count).
    """
    mat, labels = _as_dataset(X, y)
    if table is None:
        table = build_table(mat.shape[1])
    if ids is None:
        ids = [str(i) for i in range(mat.shape[0])]
    if domains is None:
        domains = [""] * mat.shape[0]

    rows = []
    verdict_labels = np.empty(mat.shape[0], dtype=np.int64)
    for start in range(0, mat.shape[0], 256):
        chunk = slice(start, min(start + 256, mat.shape[0]))
        verdicts = _batch_classify(p, mat[chunk], cfg, table)
        for off, v in enumerate(verdicts):
            i = start + off
            verdict_labels[i] = v.predicted_label
            rows.append((ids[i], int(labels[i]), v.predicted_label,
                         v.probability, v.signed_energy, v.agreement_count))

    def summary(mask: np.ndarray) -> MetricsSummary:
        t, q = labels[mask], verdict_labels[mask]
        return MetricsSummary(
            tp=int(np.sum((t == 0) & (q == 0))),
            tn=int(np.sum((t == 1) & (q == 1))),
            fp=int(np.sum((t == 1) & (q == 0))),
            fn=int(np.sum((t == 0) & (q == 1))),
        )

    overall = summary(np.ones(mat.shape[0], dtype=bool))
    domain_arr = np.asarray(domains, dtype=object)
    per_domain = {}
    for tag in sorted({d for d in domains if d}):
        per_domain[tag] = summary(domain_arr == tag)
    return overall, per_domain, rows
