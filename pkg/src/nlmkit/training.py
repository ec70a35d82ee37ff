"""Finite-difference gradients and a plain gradient-descent trainer.

No autodiff: gradients come from central differences over every scalar
parameter, which costs two loss evaluations per parameter and step.  That
is deliberate; it works identically for every architecture and stays
honest at the toy scales this kit targets (a few thousand parameters).
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass

import numpy as np

from .config import ModelConfig
from .errors import ConfigError, NonFiniteLossError, ShapeError
from .ffnn import activation_fn
from .losses import ar_loss
from .weights import AnyWeights, FfnnWeights

DEFAULT_STEP = 1e-5


def named_tensor_view(weights) -> dict[str, np.ndarray]:
    """Flat name -> array view of structured weights (or a plain dict)."""
    if hasattr(weights, "named_tensors"):
        return weights.named_tensors()
    if isinstance(weights, dict):
        return weights
    raise TypeError(f"cannot view {type(weights).__name__} as named tensors")


@dataclass
class TrainState:
    weights: object
    mu_lr: float
    step: int = 0

    def __post_init__(self):
        if self.mu_lr <= 0:
            raise ValueError(f"learning rate must be positive, got {self.mu_lr}")


def numerical_gradient(loss_fn, weights, h: float = DEFAULT_STEP) -> dict[str, np.ndarray]:
    """Central-difference gradient of a scalar loss over every parameter.

    The weights are perturbed in place and restored; any probe that yields
    a non-finite loss aborts with a diagnostic naming the parameter.
    """
    if h <= 0:
        raise ValueError(f"finite-difference step must be positive, got {h}")
    tensors = named_tensor_view(weights)
    grad: dict[str, np.ndarray] = {}
    for name, tensor in tensors.items():
        flat = tensor.reshape(-1)
        g = np.zeros(flat.shape[0])
        for i in range(flat.shape[0]):
            original = flat[i]
            flat[i] = original + h
            j_plus = loss_fn(weights)
            flat[i] = original - h
            j_minus = loss_fn(weights)
            flat[i] = original
            if not (math.isfinite(j_plus) and math.isfinite(j_minus)):
                raise NonFiniteLossError(
                    f"non-finite loss while probing parameter {name}[{i}]: "
                    f"J+={j_plus}, J-={j_minus}"
                )
            g[i] = (j_plus - j_minus) / (2.0 * h)
        grad[name] = g.reshape(tensor.shape)
    return grad


def gd_step(state: TrainState, gradient: dict[str, np.ndarray]) -> TrainState:
    """One gradient-descent update; pure, returns a fresh TrainState."""
    new_weights = copy.deepcopy(state.weights)
    tensors = named_tensor_view(new_weights)
    if gradient.keys() != tensors.keys():
        raise ShapeError(
            f"gradient names {sorted(gradient.keys())} do not match "
            f"weight names {sorted(tensors.keys())}"
        )
    for name, tensor in tensors.items():
        g = np.asarray(gradient[name])
        if g.shape != tensor.shape:
            raise ShapeError(f"gradient {name} has shape {g.shape}, expected {tensor.shape}")
        tensor -= state.mu_lr * g
    return TrainState(weights=new_weights, mu_lr=state.mu_lr, step=state.step + 1)


def _ffnn_batched_loss(corpus_ids: list[int], weights: FfnnWeights) -> float:
    """Mean next-token cross entropy over every full context window.

    All windows are evaluated as one batch of concatenated-embedding
    columns; this matches the per-window forward pass (verified in tests)
    but costs a handful of matrix products instead of thousands.
    """
    n = weights.context_width
    starts = range(len(corpus_ids) - n)
    windows = np.array([corpus_ids[s:s + n] for s in starts])          # B x n
    targets = np.array([corpus_ids[s + n] for s in starts])
    h = weights.embedding[:, windows.reshape(-1)]                      # d0 x (B*n)
    d0 = weights.embedding.shape[0]
    batch = windows.shape[0]
    # each column: the window's embeddings concatenated position-major
    h = h.T.reshape(batch, n * d0).T
    for layer in weights.layers:
        h = activation_fn(layer.activation)(layer.w @ h + layer.b[:, None])
    z = weights.output @ h                                             # |V| x B
    z_max = z.max(axis=0)
    log_norm = np.log(np.exp(z - z_max).sum(axis=0)) + z_max
    return float(np.mean(log_norm - z[targets, np.arange(batch)]))


def make_corpus_loss(cfg: ModelConfig, corpus_ids: list[int]):
    """Mean per-predicted-token training loss for one architecture.

    Feedforward models slide a fixed window over the corpus; sequence
    models split it into maximum-length chunks overlapping by one token so
    every transition is scored exactly once, under teacher forcing.
    """
    if cfg.arch == "bert":
        raise ConfigError("training targets next-token prediction; arch 'bert' is not autoregressive")
    if cfg.arch == "ffnn":
        n = cfg.max_len
        if len(corpus_ids) < n + 1:
            raise ShapeError(
                f"corpus of {len(corpus_ids)} tokens is too short for window {n}"
            )
        return lambda w: _ffnn_batched_loss(corpus_ids, w)

    from .inference import make_forward  # deferred: inference imports models

    if len(corpus_ids) < 2:
        raise ShapeError("corpus must contain at least two tokens")
    chunks = []
    stride = max(cfg.max_len - 1, 1)
    for start in range(0, len(corpus_ids) - 1, stride):
        chunk = corpus_ids[start:start + cfg.max_len]
        if len(chunk) >= 2:
            chunks.append(chunk)
    transitions = sum(len(c) - 1 for c in chunks)

    def loss(w):
        forward = make_forward(cfg, w)
        return sum(ar_loss(chunk, forward) for chunk in chunks) / transitions

    return loss


def train_toy(cfg: ModelConfig, weights: AnyWeights, corpus_ids: list[int],
              steps: int, mu_lr: float, log_fn=None,
              h: float = DEFAULT_STEP) -> tuple[AnyWeights, float]:
    """Gradient-descent memorization loop; returns (weights, final loss).

    Emits one log line per step as "step<TAB>loss<TAB>mu_lr", where the
    loss is evaluated after the update.
    """
    loss_fn = make_corpus_loss(cfg, corpus_ids)
    state = TrainState(weights=weights, mu_lr=mu_lr)
    loss = loss_fn(state.weights)
    for _ in range(steps):
        grad = numerical_gradient(loss_fn, state.weights, h)
        state = gd_step(state, grad)
        loss = loss_fn(state.weights)
        if log_fn is not None:
            log_fn(f"{state.step}\t{loss:.10f}\t{state.mu_lr}")
    return state.weights, float(loss)
