"""Feed-forward energy-model body with exact gradients and Adam updates.

The architecture is fixed: six fully connected layers of widths 512, 256,
128, 64, 32 and 1 over a d-dimensional input, ReLU between hidden layers,
sigmoid on the final scalar.  Everything is plain numpy; gradients are
written out by hand so the package needs no autodiff framework.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import PersistenceError, ShapeError, StaleTraceError

HIDDEN_DIMS = (512, 256, 128, 64, 32, 1)

_MAGIC = b"DEMASQ-EBM"
_FORMAT_VERSION = 1


@dataclass(frozen=True)
class ModelParameters:
    """Weights and biases of the stack; immutable once created."""

    layer_dims: tuple[int, ...]
    weights: tuple[np.ndarray, ...]   # weights[i] has shape (dims[i], dims[i+1])
    biases: tuple[np.ndarray, ...]    # biases[i] has shape (dims[i+1],)
    seed: int

    @property
    def input_dim(self) -> int:
        return self.layer_dims[0]


@dataclass(frozen=True)
class OptimizerState:
    """Adam moments, one pair per parameter tensor (weights then biases)."""

    first_moments: tuple[np.ndarray, ...]
    second_moments: tuple[np.ndarray, ...]
    step_count: int = 0
    learning_rate: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps_adam: float = 1e-8


@dataclass(frozen=True)
class ForwardTrace:
    """Activations recorded by forward, keyed to the parameters that made
    them; backward_params refuses a trace from different parameters."""

    params: ModelParameters
    inputs: tuple[np.ndarray, ...]   # input to each layer (post-ReLU of prior)
    pre_acts: tuple[np.ndarray, ...]
    logit: float
    probability: float


def init(seed: int, input_dim: int,
         hidden_dims: tuple[int, ...] = HIDDEN_DIMS) -> ModelParameters:
    """He-uniform weights (limit sqrt(6/fan_in)), zero biases."""
    if input_dim < 1:
        raise ShapeError(f"input_dim must be >= 1, got {input_dim}")
    dims = (int(input_dim),) + tuple(int(h) for h in hidden_dims)
    rng = np.random.default_rng(seed)
    weights = []
    biases = []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        limit = np.sqrt(6.0 / fan_in)
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    for w, b in zip(weights, biases):
        w.setflags(write=False)
        b.setflags(write=False)
    return ModelParameters(layer_dims=dims, weights=tuple(weights),
                           biases=tuple(biases), seed=int(seed))


def _sigmoid(z):
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _check_input(p: ModelParameters, x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] != p.input_dim:
        raise ShapeError(
            f"input shape {arr.shape} does not match model input dimension "
            f"{p.input_dim}")
    return arr


def forward(p: ModelParameters, x) -> ForwardTrace:
    """Full forward pass; the trace carries probability, logit and every
    activation needed for an exact backward pass."""
    arr = _check_input(p, x)
    inputs = [arr]
    pre_acts = []
    h = arr
    last = len(p.weights) - 1
    for i, (w, b) in enumerate(zip(p.weights, p.biases)):
        z = h @ w + b
        pre_acts.append(z)
        if i < last:
            h = np.maximum(z, 0.0)
            inputs.append(h)
    logit = float(pre_acts[-1][0])
    prob = float(_sigmoid(np.array([logit]))[0])
    return ForwardTrace(params=p, inputs=tuple(inputs),
                        pre_acts=tuple(pre_acts), logit=logit,
                        probability=prob)


def backward_params(p: ModelParameters, trace: ForwardTrace,
                    upstream_gradient: float):
    """Gradients of (upstream_gradient * logit) w.r.t. every weight and bias.

    Returns (weight_grads, bias_grads) shaped like p.  ReLU contributes
    subgradient 0 at exactly 0.
    """
    if trace.params is not p:
        raise StaleTraceError(
            "trace was produced by different model parameters")
    n_layers = len(p.weights)
    w_grads: list[np.ndarray] = [None] * n_layers
    b_grads: list[np.ndarray] = [None] * n_layers
    delta = np.array([float(upstream_gradient)])
    for i in range(n_layers - 1, -1, -1):
        w_grads[i] = np.outer(trace.inputs[i], delta)
        b_grads[i] = delta.copy()
        if i > 0:
            delta = (p.weights[i] @ delta) * (trace.pre_acts[i - 1] > 0.0)
    return tuple(w_grads), tuple(b_grads)


def input_gradient(p: ModelParameters, x) -> np.ndarray:
    """Exact gradient of the probability output with respect to the input."""
    trace = forward(p, x)
    sig_prime = trace.probability * (1.0 - trace.probability)
    delta = np.array([sig_prime])
    for i in range(len(p.weights) - 1, 0, -1):
        delta = (p.weights[i] @ delta) * (trace.pre_acts[i - 1] > 0.0)
    return p.weights[0] @ delta


def batch_forward(p: ModelParameters, X) -> tuple[np.ndarray, np.ndarray]:
    """(probabilities, logits) for a (B, d) batch in one set of dgemms."""
    mat = np.asarray(X, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[1] != p.input_dim:
        raise ShapeError(
            f"batch shape {mat.shape} does not match model input dimension "
            f"{p.input_dim}")
    h = mat
    last = len(p.weights) - 1
    for i, (w, b) in enumerate(zip(p.weights, p.biases)):
        z = h @ w + b
        h = np.maximum(z, 0.0) if i < last else z
    logits = h[:, 0]
    return _sigmoid(logits), logits


def batch_input_gradient(p: ModelParameters, X) -> np.ndarray:
    """Row-wise gradient of the probability output for a (B, d) batch."""
    mat = np.asarray(X, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[1] != p.input_dim:
        raise ShapeError(
            f"batch shape {mat.shape} does not match model input dimension "
            f"{p.input_dim}")
    h = mat
    pre_acts = []
    last = len(p.weights) - 1
    for i, (w, b) in enumerate(zip(p.weights, p.biases)):
        z = h @ w + b
        pre_acts.append(z)
        if i < last:
            h = np.maximum(z, 0.0)
    logits = pre_acts[-1][:, 0]
    probs = _sigmoid(logits)
    delta = (probs * (1.0 - probs))[:, None]
    for i in range(len(p.weights) - 1, 0, -1):
        delta = (delta @ p.weights[i].T) * (pre_acts[i - 1] > 0.0)
    return delta @ p.weights[0].T


def batch_loss_gradients(p: ModelParameters, X, y):
    """Mean BCE over a batch plus its parameter gradients.

    BCE is evaluated in logit form, softplus(logit) - y*logit, which never
    overflows.  Returns (mean_loss, weight_grads, bias_grads, probabilities).
    """
    mat = np.asarray(X, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[1] != p.input_dim:
        raise ShapeError(
            f"batch shape {mat.shape} does not match model input dimension "
            f"{p.input_dim}")
    labels = np.asarray(y, dtype=np.float64)
    if labels.shape != (mat.shape[0],):
        raise ShapeError(
            f"labels shape {labels.shape} does not match batch of "
            f"{mat.shape[0]}")
    inputs = [mat]
    pre_acts = []
    h = mat
    last = len(p.weights) - 1
    for i, (w, b) in enumerate(zip(p.weights, p.biases)):
        z = h @ w + b
        pre_acts.append(z)
        if i < last:
            h = np.maximum(z, 0.0)
            inputs.append(h)
    logits = pre_acts[-1][:, 0]
    probs = _sigmoid(logits)
    # BCE in logit form: softplus(z) - y z, with the overflow-free softplus
    softplus = np.maximum(logits, 0.0) + np.log1p(np.exp(-np.abs(logits)))
    loss = float(np.mean(softplus - labels * logits))
    n = mat.shape[0]
    delta = ((probs - labels) / n)[:, None]  # d(mean BCE)/d(logit) per row
    w_grads: list[np.ndarray] = [None] * len(p.weights)
    b_grads: list[np.ndarray] = [None] * len(p.weights)
    for i in range(len(p.weights) - 1, -1, -1):
        w_grads[i] = inputs[i].T @ delta
        b_grads[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ p.weights[i].T) * (pre_acts[i - 1] > 0.0)
    return loss, tuple(w_grads), tuple(b_grads), probs


def init_optimizer(p: ModelParameters, learning_rate: float = 1e-4,
                   beta1: float = 0.9, beta2: float = 0.999,
                   eps_adam: float = 1e-8) -> OptimizerState:
    tensors = list(p.weights) + list(p.biases)
    zeros = tuple(np.zeros_like(t) for t in tensors)
    return OptimizerState(first_moments=zeros,
                          second_moments=tuple(np.zeros_like(t) for t in tensors),
                          step_count=0, learning_rate=float(learning_rate),
                          beta1=float(beta1), beta2=float(beta2),
                          eps_adam=float(eps_adam))


def adam_step(p: ModelParameters, state: OptimizerState,
              weight_grads, bias_grads) -> tuple[ModelParameters, OptimizerState]:
    """One bias-corrected Adam update; returns fresh parameter and state
    objects, leaving the inputs untouched."""
    grads = list(weight_grads) + list(bias_grads)
    tensors = list(p.weights) + list(p.biases)
    if len(grads) != len(tensors):
        raise ShapeError("gradient count does not match parameter count")
    for g, t in zip(grads, tensors):
        if np.shape(g) != t.shape:
            raise ShapeError(
                f"gradient shape {np.shape(g)} does not match parameter "
                f"shape {t.shape}")
    t_step = state.step_count + 1
    b1, b2 = state.beta1, state.beta2
    corr1 = 1.0 - b1 ** t_step
    corr2 = 1.0 - b2 ** t_step
    new_m, new_v, new_t = [], [], []
    for tensor, g, m, v in zip(tensors, grads, state.first_moments,
                               state.second_moments):
        g = np.asarray(g, dtype=np.float64)
        m1 = b1 * m + (1.0 - b1) * g
        v1 = b2 * v + (1.0 - b2) * g * g
        update = state.learning_rate * (m1 / corr1) / (
            np.sqrt(v1 / corr2) + state.eps_adam)
        new_m.append(m1)
        new_v.append(v1)
        new_t.append(tensor - update)
    k = len(p.weights)
    for t in new_t:
        t.setflags(write=False)
    new_params = ModelParameters(layer_dims=p.layer_dims,
                                 weights=tuple(new_t[:k]),
                                 biases=tuple(new_t[k:]), seed=p.seed)
    new_state = replace(state, first_moments=tuple(new_m),
                        second_moments=tuple(new_v), step_count=t_step)
    return new_params, new_state


# ---------------------------------------------------------------------------
# Persistence.  Versioned binary: magic, version, seed, Adam scalars and
# step count, layer count, dimension table, then each tensor as row-major
# little-endian float64, followed by a crc32 of everything before it.


def save(p: ModelParameters, state: OptimizerState, path) -> None:
    chunks = [
        _MAGIC,
        struct.pack("<I", _FORMAT_VERSION),
        struct.pack("<q", p.seed),
        struct.pack("<dddd", state.learning_rate, state.beta1, state.beta2,
                    state.eps_adam),
        struct.pack("<q", state.step_count),
        struct.pack("<I", len(p.layer_dims)),
        struct.pack(f"<{len(p.layer_dims)}I", *p.layer_dims),
    ]
    for tensor in (list(p.weights) + list(p.biases)
                   + list(state.first_moments) + list(state.second_moments)):
        chunks.append(np.ascontiguousarray(tensor, dtype="<f8").tobytes())
    body = b"".join(chunks)
    with open(path, "wb") as fh:
        fh.write(body)
        fh.write(struct.pack("<I", zlib.crc32(body) & 0xFFFFFFFF))


def load(path) -> tuple[ModelParameters, OptimizerState]:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < len(_MAGIC) + 8 or blob[:len(_MAGIC)] != _MAGIC:
        raise PersistenceError(f"{path}: not a model weight file (bad magic)")
    body, (crc,) = blob[:-4], struct.unpack("<I", blob[-4:])
    if zlib.crc32(body) & 0xFFFFFFFF != crc:
        raise PersistenceError(f"{path}: checksum mismatch, file is corrupt")
    off = len(_MAGIC)

    def take(fmt: str):
        nonlocal off
        size = struct.calcsize(fmt)
        if off + size > len(body):
            raise PersistenceError(f"{path}: truncated file")
        vals = struct.unpack_from(fmt, body, off)
        off += size
        return vals

    (version,) = take("<I")
    if version != _FORMAT_VERSION:
        raise PersistenceError(
            f"{path}: unsupported format version {version} "
            f"(expected {_FORMAT_VERSION})")
    (seed,) = take("<q")
    lr, b1, b2, eps = take("<dddd")
    (step_count,) = take("<q")
    (n_dims,) = take("<I")
    dims = take(f"<{n_dims}I")

    def take_tensor(shape) -> np.ndarray:
        nonlocal off
        count = int(np.prod(shape))
        size = count * 8
        if off + size > len(body):
            raise PersistenceError(f"{path}: truncated tensor payload")
        arr = np.frombuffer(body, dtype="<f8", count=count,
                            offset=off).reshape(shape).astype(np.float64)
        off += size
        return arr

    shapes = [(a, b) for a, b in zip(dims[:-1], dims[1:])]
    weights = [take_tensor(s) for s in shapes]
    biases = [take_tensor((s[1],)) for s in shapes]
    moments1 = ([take_tensor(s) for s in shapes]
                + [take_tensor((s[1],)) for s in shapes])
    moments2 = ([take_tensor(s) for s in shapes]
                + [take_tensor((s[1],)) for s in shapes])
    if off != len(body):
        raise PersistenceError(f"{path}: {len(body) - off} trailing bytes")
    for t in weights + biases:
        t.setflags(write=False)
    params = ModelParameters(layer_dims=tuple(int(d) for d in dims),
                             weights=tuple(weights), biases=tuple(biases),
                             seed=int(seed))
    state = OptimizerState(first_moments=tuple(moments1),
                           second_moments=tuple(moments2),
                           step_count=int(step_count), learning_rate=lr,
                           beta1=b1, beta2=b2, eps_adam=eps)
    return params, state
