"""One-hot vectors, embedding lookup, positional sums, and tied output logits.

Embedding matrices store one token per column (shape d_e x |V|), so a
sequence embeds to a d_e x len matrix whose columns follow the token order.
"""

from __future__ import annotations

import numpy as np

from .errors import OutOfVocabularyError, SequenceLengthError, ShapeError
from .kernels import as_matrix, as_vector
from .vocab import TokenSequence


def one_hot(token_id: int, size: int) -> np.ndarray:
    if not (0 <= token_id < size):
        raise OutOfVocabularyError(f"id {token_id} out of range for size {size}")
    v = np.zeros(size)
    v[token_id] = 1.0
    return v


def embed(seq: TokenSequence | list[int], e: np.ndarray) -> np.ndarray:
    """Select one embedding column per token id.

    Repeated ids produce identical columns; the result has shape
    (d_e, len(seq)).
    """
    ids = seq.ids if isinstance(seq, TokenSequence) else seq
    e = as_matrix(e)
    for i in ids:
        if not (0 <= i < e.shape[1]):
            raise OutOfVocabularyError(f"id {i} out of range for embedding table of {e.shape[1]}")
    return e[:, ids].copy()


def add_positions(x: np.ndarray, positions: np.ndarray,
                  segments: np.ndarray | None = None) -> np.ndarray:
    """Columnwise sum of embeddings with the positional (and segment) prefix.

    The positional table covers the model maximum length; only its first
    len(x) columns are used, so shorter sequences get a truncated prefix.
    """
    x = as_matrix(x)
    positions = as_matrix(positions)
    if x.shape[0] != positions.shape[0]:
        raise ShapeError(f"embedding dim {x.shape[0]} != positional dim {positions.shape[0]}")
    if x.shape[1] > positions.shape[1]:
        raise SequenceLengthError(
            f"sequence length {x.shape[1]} exceeds maximum {positions.shape[1]}"
        )
    out = x + positions[:, : x.shape[1]]
    if segments is not None:
        segments = as_matrix(segments)
        if segments.shape != out.shape:
            raise ShapeError(f"segment matrix {segments.shape} != sequence shape {out.shape}")
        out = out + segments
    return out


def tied_logits(h: np.ndarray, e: np.ndarray, out_bias: np.ndarray | None = None) -> np.ndarray:
    """Vocabulary scores from a hidden vector via the transposed embedding table.

    Component j is the dot product of embedding column j with h, plus the
    optional output bias.
    """
    h = as_vector(h)
    e = as_matrix(e)
    if h.shape[0] != e.shape[0]:
        raise ShapeError(f"hidden dim {h.shape[0]} != embedding dim {e.shape[0]}")
    z = e.T @ h
    if out_bias is not None:
        out_bias = as_vector(out_bias)
        if out_bias.shape[0] != e.shape[1]:
            raise ShapeError(
                f"output bias dim {out_bias.shape[0]} != vocabulary size {e.shape[1]}"
            )
        z = z + out_bias
    return z


def tied_logits_columns(h: np.ndarray, e: np.ndarray,
                        out_bias: np.ndarray | None = None) -> np.ndarray:
    """tied_logits applied to every column of h; returns |V| x len."""
    h = as_matrix(h)
    e = as_matrix(e)
    if h.shape[0] != e.shape[0]:
        raise ShapeError(f"hidden dim {h.shape[0]} != embedding dim {e.shape[0]}")
    z = e.T @ h
    if out_bias is not None:
        z = z + as_vector(out_bias)[:, None]
    return z
