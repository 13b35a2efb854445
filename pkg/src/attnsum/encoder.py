"""Transformer-encoder forward pass (inference only).

Exposes the last-layer hidden states and the full per-layer, per-head
attention matrices. Float32 throughout; re-entrant, no shared scratch state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import TokenSequence
from .errors import DimensionMismatch, IdOutOfRange, SequenceTooLong
from .weights import WeightStore

_GELU_C = np.float32(0.7978845608028654)  # sqrt(2/pi)
_GELU_A = np.float32(0.044715)
_HALF = np.float32(0.5)
_ONE = np.float32(1.0)


@dataclass(frozen=True)
class EncoderOutput:
    """hidden: n x hidden_size (last layer); attentions[layer][head]: n x n."""
    hidden: np.ndarray
    attentions: list[list[np.ndarray]]


def layer_norm(x: np.ndarray, gain: np.ndarray, bias: np.ndarray,
               eps: float) -> np.ndarray:
    mean = x.mean(axis=-1, keepdims=True)
    centered = x - mean
    var = (centered * centered).mean(axis=-1, keepdims=True)
    return centered / np.sqrt(var + np.float32(eps)) * gain + bias


def gelu(x: np.ndarray) -> np.ndarray:
    # tanh approximation, matches the public pretrained weights
    return _HALF * x * (_ONE + np.tanh(_GELU_C * (x + _GELU_A * x * x * x)))


def _row_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def embed(seq: TokenSequence, w: WeightStore) -> np.ndarray:
    """Sum token, position and segment embeddings, then layer-normalize."""
    config = w.config
    n = seq.length
    if n > config.max_positions:
        raise SequenceTooLong(f"{n} tokens > max_positions {config.max_positions}")
    ids = np.asarray(seq.ids, dtype=np.int64)
    if ids.size and (ids.min() < 0 or ids.max() >= config.vocab_size):
        raise IdOutOfRange(f"token id outside [0, {config.vocab_size})")
    segments = np.asarray(seq.segment_ids, dtype=np.int64)
    x = (w["embeddings.token"][ids]
         + w["embeddings.position"][:n]
         + w["embeddings.segment"][segments])
    return layer_norm(x, w["embeddings.layernorm.gain"],
                      w["embeddings.layernorm.bias"], config.layer_norm_epsilon)


def attention_head(q: np.ndarray, k: np.ndarray, v: np.ndarray
                   ) -> tuple[np.ndarray, np.ndarray]:
    """Scaled dot-product attention for one head.

    Returns (context, weights) where weights is the n x n row-stochastic
    matrix softmax(q k^T / sqrt(d_k)) and context = weights @ v.
    """
    if q.ndim != 2 or k.ndim != 2 or v.ndim != 2:
        raise DimensionMismatch("q, k, v must be 2-d matrices")
    if q.shape != k.shape or k.shape[0] != v.shape[0]:
        raise DimensionMismatch(
            f"incompatible shapes q{q.shape} k{k.shape} v{v.shape}")
    scale = np.float32(1.0 / np.sqrt(q.shape[1]))
    weights = _row_softmax((q @ k.T) * scale)
    return weights @ v, weights


def encoder_forward(seq: TokenSequence, w: WeightStore) -> EncoderOutput:
    """Run the full encoder stack on one token sequence.

    Each layer applies multi-head self-attention with a residual connection
    and layer norm, then a GELU feed-forward block with another residual and
    layer norm (post-norm arrangement). Deterministic for fixed inputs.
    """
    config = w.config
    d_k = config.head_dim
    x = embed(seq, w)
    attentions: list[list[np.ndarray]] = []

    for i in range(config.num_layers):
        p = f"layer.{i}"
        q = x @ w[f"{p}.attn.q.weight"].T + w[f"{p}.attn.q.bias"]
        k = x @ w[f"{p}.attn.k.weight"].T + w[f"{p}.attn.k.bias"]
        v = x @ w[f"{p}.attn.v.weight"].T + w[f"{p}.attn.v.bias"]

        heads = []
        layer_weights = []
        for h in range(config.num_heads):
            cols = slice(h * d_k, (h + 1) * d_k)
            context, weights = attention_head(q[:, cols], k[:, cols], v[:, cols])
            heads.append(context)
            layer_weights.append(weights)
        attentions.append(layer_weights)

        attn_out = np.concatenate(heads, axis=1) @ w[f"{p}.attn.out.weight"].T \
            + w[f"{p}.attn.out.bias"]
        x = layer_norm(x + attn_out, w[f"{p}.attn_layernorm.gain"],
                       w[f"{p}.attn_layernorm.bias"], config.layer_norm_epsilon)

        ffn = gelu(x @ w[f"{p}.ffn.in.weight"].T + w[f"{p}.ffn.in.bias"])
        ffn = ffn @ w[f"{p}.ffn.out.weight"].T + w[f"{p}.ffn.out.bias"]
        x = layer_norm(x + ffn, w[f"{p}.ffn_layernorm.gain"],
                       w[f"{p}.ffn_layernorm.bias"], config.layer_norm_epsilon)

    return EncoderOutput(hidden=x, attentions=attentions)
