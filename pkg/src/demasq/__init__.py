"""Energy-based detector of machine-generated text embeddings.

The pipeline: an embedding's distinct-value count selects a drumhead
vibration mode whose frequency (a ratio of Bessel J0 zeros) is Doppler-
shifted by the embedding's variance into a label-dependent energy; a
feed-forward network trained with BCE plus that energy signal classifies
embeddings as machine-generated (label 0) or human-written (label 1),
with integrated-gradients perturbations providing an agreement score.
"""

from .attribution import (
    AttributionResult,
    PerturbationSet,
    averaged_perturbed_energy,
    integrated_gradients,
    perturb,
    top_k,
)
from .bessel import BesselZeroTable, build_table, eval_j0, eval_j1, zero_of_j0
from .dataio import (
    DatasetSplit,
    EmbeddingRecord,
    dump_jsonl,
    load_jsonl,
    stratified_split,
    to_arrays,
)
from .detector import (
    ClassificationVerdict,
    MetricsSummary,
    TrainingConfig,
    TrainResult,
    classify,
    evaluate,
    sample_loss,
    train,
)
from .energy import (
    EnergyReport,
    drumhead_frequency,
    energy_report,
    observer_frequency,
    shift_embedding,
    source_frequency,
    unique_count,
)
from .errors import (
    ConfigurationError,
    DegenerateEmbeddingError,
    DemasqError,
    DomainError,
    ParseError,
    PersistenceError,
    ShapeError,
    SingularDenominatorError,
    StaleTraceError,
    ValidationError,
)
from .network import (
    ModelParameters,
    OptimizerState,
    adam_step,
    backward_params,
    forward,
    init,
    init_optimizer,
    input_gradient,
    load,
    save,
)

__version__ = "1.0.0"

__all__ = [
    "AttributionResult", "BesselZeroTable", "ClassificationVerdict",
    "ConfigurationError", "DatasetSplit", "DegenerateEmbeddingError",
    "DemasqError", "DomainError", "EmbeddingRecord", "EnergyReport",
    "MetricsSummary", "ModelParameters", "OptimizerState", "ParseError",
    "PersistenceError", "PerturbationSet", "ShapeError",
    "SingularDenominatorError", "StaleTraceError", "TrainResult",
    "TrainingConfig", "ValidationError", "adam_step",
    "averaged_perturbed_energy", "backward_params", "build_table",
    "classify", "drumhead_frequency", "dump_jsonl", "energy_report",
    "eval_j0", "eval_j1", "evaluate", "forward", "init", "init_optimizer",
    "input_gradient", "integrated_gradients", "load", "load_jsonl",
    "observer_frequency", "perturb", "sample_loss", "save",
    "shift_embedding", "source_frequency", "stratified_split", "to_arrays",
    "top_k", "train", "unique_count", "zero_of_j0",
]
