"""Fixed-window feedforward language model.

The context window is concatenated into a single vector, so the model
consumes exactly ``context_width`` tokens and emits one next-token
distribution.  Input and output embeddings are separate matrices (no
weight tying here).
"""

from __future__ import annotations

import numpy as np

from .embeddings import embed
from .errors import SequenceLengthError, ShapeError
from .kernels import sigmoid, softmax
from .vocab import TokenSequence
from .weights import FfnnWeights

_ACTIVATIONS = {
    "sigmoid": sigmoid,
    "tanh": np.tanh,
    "identity": lambda x: x,
}


def activation_fn(name: str):
    try:
        return _ACTIVATIONS[name]
    except KeyError:
        raise ValueError(f"unknown activation {name!r}") from None


def ffnn_hidden(seq: TokenSequence | list[int], w: FfnnWeights) -> np.ndarray:
    ids = seq.ids if isinstance(seq, TokenSequence) else list(seq)
    if len(ids) != w.context_width:
        raise SequenceLengthError(
            f"context must contain exactly {w.context_width} tokens, got {len(ids)}"
        )
    h = embed(ids, w.embedding).T.reshape(-1)  # position-major concatenation
    for layer in w.layers:
        if layer.w.shape[1] != h.shape[0]:
            raise ShapeError(f"layer weight {layer.w.shape} cannot consume input of {h.shape[0]}")
        h = activation_fn(layer.activation)(layer.w @ h + layer.b)
    return h


def ffnn_forward(seq: TokenSequence | list[int], w: FfnnWeights) -> np.ndarray:
    """Distribution over the vocabulary for the token after the window."""
    return softmax(w.output @ ffnn_hidden(seq, w))


def ffnn_predict(seq: TokenSequence | list[int], w: FfnnWeights) -> int:
    """Argmax next-token id; ties break toward the lowest id."""
    return int(np.argmax(ffnn_forward(seq, w)))


def ffnn_generate(prompt: list[int], w: FfnnWeights, steps: int) -> list[int]:
    """Greedy continuation by sliding the fixed window over the output."""
    n = w.context_width
    if len(prompt) < n:
        raise SequenceLengthError(
            f"prompt must contain at least {n} tokens to fill the window, got {len(prompt)}"
        )
    ids = list(prompt)
    for _ in range(steps):
        ids.append(ffnn_predict(ids[-n:], w))
    return ids
