"""Encoder configuration and the binary weight-file format.

File layout (all integers little-endian):

    magic "ATNSUMW1" (8 bytes)
    u32 version (= 1)
    u64 manifest byte length
    UTF-8 JSON manifest: {"config": {...}, "tensors": [{"name", "shape", "offset"}]}
    raw float32 blob; manifest offsets are element offsets from blob start
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from math import prod
from pathlib import Path

import numpy as np

from .errors import (
    BadMagic,
    MissingTensor,
    ShapeMismatch,
    TruncatedBlob,
    VersionMismatch,
    WeightFormatError,
)

MAGIC = b"ATNSUMW1"
VERSION = 1
_HEADER = struct.Struct("<8sIQ")

SEGMENT_TYPES = 2  # single-sentence input uses segment 0 only


@dataclass(frozen=True)
class EncoderConfig:
    num_layers: int
    num_heads: int
    hidden_size: int
    intermediate_size: int
    vocab_size: int
    max_positions: int
    layer_norm_epsilon: float = 1e-12

    def __post_init__(self):
        for name in ("num_layers", "num_heads", "hidden_size",
                     "intermediate_size", "vocab_size", "max_positions"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.hidden_size % self.num_heads != 0:
            raise ValueError("hidden_size must be divisible by num_heads")
        if self.layer_norm_epsilon <= 0:
            raise ValueError("layer_norm_epsilon must be positive")

    @property
    def head_dim(self) -> int:
        return self.hidden_size // self.num_heads

    def to_dict(self) -> dict:
        return {
            "num_layers": self.num_layers,
            "num_heads": self.num_heads,
            "hidden_size": self.hidden_size,
            "intermediate_size": self.intermediate_size,
            "vocab_size": self.vocab_size,
            "max_positions": self.max_positions,
            "layer_norm_epsilon": self.layer_norm_epsilon,
        }


def required_tensor_shapes(config: EncoderConfig) -> dict[str, tuple[int, ...]]:
    """Every tensor name the engine needs, with its exact shape.

    Projection weights are stored output-dim-major so the engine computes
    x @ W.T + b.
    """
    h = config.hidden_size
    inter = config.intermediate_size
    shapes: dict[str, tuple[int, ...]] = {
        "embeddings.token": (config.vocab_size, h),
        "embeddings.position": (config.max_positions, h),
        "embeddings.segment": (SEGMENT_TYPES, h),
        "embeddings.layernorm.gain": (h,),
        "embeddings.layernorm.bias": (h,),
    }
    for i in range(config.num_layers):
        p = f"layer.{i}"
        for proj in ("q", "k", "v", "out"):
            shapes[f"{p}.attn.{proj}.weight"] = (h, h)
            shapes[f"{p}.attn.{proj}.bias"] = (h,)
        shapes[f"{p}.attn_layernorm.gain"] = (h,)
        shapes[f"{p}.attn_layernorm.bias"] = (h,)
        shapes[f"{p}.ffn.in.weight"] = (inter, h)
        shapes[f"{p}.ffn.in.bias"] = (inter,)
        shapes[f"{p}.ffn.out.weight"] = (h, inter)
        shapes[f"{p}.ffn.out.bias"] = (h,)
        shapes[f"{p}.ffn_layernorm.gain"] = (h,)
        shapes[f"{p}.ffn_layernorm.bias"] = (h,)
    return shapes


class WeightStore:
    """Immutable named float32 tensors plus the configuration they realize.

    Validates on construction that every tensor required by the config is
    present with exactly the expected shape. Safe to share across threads.
    """

    def __init__(self, config: EncoderConfig, tensors: dict[str, np.ndarray]):
        self.config = config
        checked: dict[str, np.ndarray] = {}
        required = required_tensor_shapes(config)
        for name, shape in required.items():
            if name not in tensors:
                raise MissingTensor(name)
            arr = tensors[name]
            if tuple(arr.shape) != shape:
                raise ShapeMismatch(name, shape, tuple(arr.shape))
            checked[name] = np.ascontiguousarray(arr, dtype=np.float32)
            checked[name].flags.writeable = False
        # extra tensors are tolerated but not served
        self._tensors = checked

    def __getitem__(self, name: str) -> np.ndarray:
        return self._tensors[name]

    def __contains__(self, name: str) -> bool:
        return name in self._tensors

    def names(self) -> list[str]:
        return list(self._tensors)


def load_weights(path: str | Path) -> WeightStore:
    """Read a weight file and validate it against its own manifest."""
    store, _ = _read_file(path)
    return store


def read_manifest(path: str | Path) -> tuple[EncoderConfig, list[dict]]:
    """Parse header and manifest only; used by file inspection."""
    _, manifest = _read_file(path)
    config = EncoderConfig(**manifest["config"])
    return config, manifest["tensors"]


def _read_file(path: str | Path) -> tuple[WeightStore, dict]:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size or data[:8] != MAGIC:
        raise BadMagic(f"{path}: not a weight file")
    _, version, manifest_len = _HEADER.unpack_from(data)
    if version != VERSION:
        raise VersionMismatch(f"{path}: version {version}, expected {VERSION}")
    blob_start = _HEADER.size + manifest_len
    if blob_start > len(data):
        raise TruncatedBlob(f"{path}: manifest extends past end of file")
    try:
        manifest = json.loads(data[_HEADER.size:blob_start].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise WeightFormatError(f"{path}: manifest is not valid JSON") from exc

    try:
        config = EncoderConfig(**manifest["config"])
        entries = manifest["tensors"]
    except (KeyError, TypeError, ValueError) as exc:
        raise WeightFormatError(f"{path}: malformed manifest: {exc}") from exc

    blob_bytes = len(data) - blob_start
    if blob_bytes % 4 != 0:
        raise TruncatedBlob(f"{path}: blob length {blob_bytes} is not a multiple of 4")
    blob = np.frombuffer(data, dtype="<f4", offset=blob_start)

    required = required_tensor_shapes(config)
    tensors: dict[str, np.ndarray] = {}
    for entry in entries:
        name = entry["name"]
        shape = tuple(int(d) for d in entry["shape"])
        offset = int(entry["offset"])
        if name in required and shape != required[name]:
            raise ShapeMismatch(name, required[name], shape)
        count = prod(shape)
        if offset < 0 or offset + count > blob.size:
            raise TruncatedBlob(
                f"{path}: tensor {name!r} needs elements [{offset}, {offset + count}) "
                f"but blob has {blob.size}"
            )
        tensors[name] = blob[offset:offset + count].reshape(shape)
    return WeightStore(config, tensors), manifest


def save_weights(config: EncoderConfig, tensors: dict[str, np.ndarray],
                 path: str | Path) -> None:
    """Write tensors in the binary format with gap-free increasing offsets."""
    entries = []
    offset = 0
    blobs = []
    for name, arr in tensors.items():
        arr = np.ascontiguousarray(arr, dtype=np.float32)
        entries.append({"name": name, "shape": list(arr.shape), "offset": offset})
        offset += arr.size
        blobs.append(arr)
    manifest = json.dumps({"config": config.to_dict(), "tensors": entries},
                          sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, len(manifest)))
        fh.write(manifest)
        for arr in blobs:
            fh.write(arr.astype("<f4", copy=False).tobytes())
