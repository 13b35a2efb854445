#!/usr/bin/env python3
"""One-shot converter: pretrained BERT-style checkpoint directory -> engine
weight file.

Usage:
    export_weights.py CHECKPOINT_DIR OUT_PREFIX [--no-verify]
    export_weights.py --make-fixture DIR [--layers N] [--hidden N]

Reads the public model-hub layout (config.json + model.safetensors or
pytorch_model.bin + vocab.txt) and writes OUT_PREFIX.atnsumw plus
OUT_PREFIX.vocab.txt. Only encoder-body parameters are exported; pooler and
classification heads are skipped. Exit code 0 on success, 1 on any failure.
"""

from __future__ import annotations

import argparse
import json
import shutil
import struct
import sys
from math import prod
from pathlib import Path

import numpy as np

MAGIC = b"ATNSUMW1"
VERSION = 1
_HEADER = struct.Struct("<8sIQ")

SUPPORTED_ACTIVATIONS = {"gelu", "gelu_new", "gelu_python", "gelu_pytorch_tanh"}


class ExportError(Exception):
    pass


class MissingParameter(ExportError):
    def __init__(self, name: str):
        super().__init__(f"checkpoint lacks parameter {name!r}")
        self.name = name


class UnexpectedShape(ExportError):
    def __init__(self, name: str, expected, actual):
        super().__init__(f"{name!r}: expected shape {expected}, got {actual}")
        self.name = name


class Mismatch(ExportError):
    def __init__(self, name: str, index: int):
        super().__init__(f"tensor {name!r} differs at flat index {index}")
        self.name = name
        self.index = index


class VersionMismatch(ExportError):
    pass


# --- checkpoint reading -----------------------------------------------------

def read_config(checkpoint_dir: Path) -> dict:
    config_path = checkpoint_dir / "config.json"
    if not config_path.is_file():
        raise ExportError(f"no config.json in {checkpoint_dir}")
    try:
        raw = json.loads(config_path.read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise ExportError(f"{config_path} is not valid JSON: {exc}") from exc
    act = raw.get("hidden_act", "gelu")
    if act not in SUPPORTED_ACTIVATIONS:
        raise ExportError(f"unsupported hidden activation {act!r}")
    try:
        return {
            "num_layers": int(raw["num_hidden_layers"]),
            "num_heads": int(raw["num_attention_heads"]),
            "hidden_size": int(raw["hidden_size"]),
            "intermediate_size": int(raw["intermediate_size"]),
            "vocab_size": int(raw["vocab_size"]),
            "max_positions": int(raw["max_position_embeddings"]),
            "layer_norm_epsilon": float(raw.get("layer_norm_eps", 1e-12)),
        }
    except KeyError as exc:
        raise ExportError(f"config.json missing key {exc.args[0]!r}") from exc


def read_parameters(checkpoint_dir: Path) -> dict[str, np.ndarray]:
    """Load the parameter archive and strip any leading model prefix."""
    st_path = checkpoint_dir / "model.safetensors"
    bin_path = checkpoint_dir / "pytorch_model.bin"
    if st_path.is_file():
        from safetensors.numpy import load_file
        raw = load_file(str(st_path))
        state = {k: np.asarray(v) for k, v in raw.items()}
    elif bin_path.is_file():
        import torch
        loaded = torch.load(bin_path, map_location="cpu", weights_only=True)
        state = {k: v.numpy() if hasattr(v, "numpy") else np.asarray(v)
                 for k, v in loaded.items()}
    else:
        raise ExportError(f"no parameter archive in {checkpoint_dir} "
                          "(expected model.safetensors or pytorch_model.bin)")
    return {k.removeprefix("bert."): v for k, v in state.items()}


# --- name mapping -----------------------------------------------------------

def build_name_map(num_layers: int) -> list[tuple[str, str]]:
    """Ordered (source name -> artifact name) pairs covering the encoder body."""
    pairs = [
        ("embeddings.word_embeddings.weight", "embeddings.token"),
        ("embeddings.position_embeddings.weight", "embeddings.position"),
        ("embeddings.token_type_embeddings.weight", "embeddings.segment"),
        ("embeddings.LayerNorm.weight", "embeddings.layernorm.gain"),
        ("embeddings.LayerNorm.bias", "embeddings.layernorm.bias"),
    ]
    for i in range(num_layers):
        src = f"encoder.layer.{i}"
        dst = f"layer.{i}"
        for hub, ours in (("query", "q"), ("key", "k"), ("value", "v")):
            pairs.append((f"{src}.attention.self.{hub}.weight", f"{dst}.attn.{ours}.weight"))
            pairs.append((f"{src}.attention.self.{hub}.bias", f"{dst}.attn.{ours}.bias"))
        pairs.append((f"{src}.attention.output.dense.weight", f"{dst}.attn.out.weight"))
        pairs.append((f"{src}.attention.output.dense.bias", f"{dst}.attn.out.bias"))
        pairs.append((f"{src}.attention.output.LayerNorm.weight", f"{dst}.attn_layernorm.gain"))
        pairs.append((f"{src}.attention.output.LayerNorm.bias", f"{dst}.attn_layernorm.bias"))
        pairs.append((f"{src}.intermediate.dense.weight", f"{dst}.ffn.in.weight"))
        pairs.append((f"{src}.intermediate.dense.bias", f"{dst}.ffn.in.bias"))
        pairs.append((f"{src}.output.dense.weight", f"{dst}.ffn.out.weight"))
        pairs.append((f"{src}.output.dense.bias", f"{dst}.ffn.out.bias"))
        pairs.append((f"{src}.output.LayerNorm.weight", f"{dst}.ffn_layernorm.gain"))
        pairs.append((f"{src}.output.LayerNorm.bias", f"{dst}.ffn_layernorm.bias"))
    return pairs


def expected_shapes(config: dict) -> dict[str, tuple[int, ...]]:
    h = config["hidden_size"]
    inter = config["intermediate_size"]
    shapes = {
        "embeddings.token": (config["vocab_size"], h),
        "embeddings.position": (config["max_positions"], h),
        "embeddings.segment": (2, h),
        "embeddings.layernorm.gain": (h,),
        "embeddings.layernorm.bias": (h,),
    }
    for i in range(config["num_layers"]):
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


def collect_tensors(config: dict, state: dict[str, np.ndarray]
                    ) -> list[tuple[str, np.ndarray]]:
    """Gather encoder tensors in manifest order, checking names and shapes.

    Torch linear layers store weights output-dim-major and compute
    x @ W.T + b, which is exactly the engine's convention, so the layout
    conversion is a dtype cast only. Head ordering is the source's
    contiguous column split and is preserved untouched.
    """
    shapes = expected_shapes(config)
    tensors = []
    for source_name, artifact_name in build_name_map(config["num_layers"]):
        if source_name not in state:
            raise MissingParameter(source_name)
        arr = np.ascontiguousarray(state[source_name], dtype=np.float32)
        want = shapes[artifact_name]
        if tuple(arr.shape) != want:
            raise UnexpectedShape(source_name, want, tuple(arr.shape))
        tensors.append((artifact_name, arr))
    return tensors


# --- file writing and verification -------------------------------------------

def write_weight_file(config: dict, tensors: list[tuple[str, np.ndarray]],
                      path: Path) -> list[dict]:
    entries = []
    offset = 0
    for name, arr in tensors:
        entries.append({"name": name, "shape": list(arr.shape), "offset": offset})
        offset += arr.size
    manifest = json.dumps({"config": config, "tensors": entries},
                          sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, len(manifest)))
        fh.write(manifest)
        for _, arr in tensors:
            fh.write(arr.astype("<f4", copy=False).tobytes())
    return entries


def read_weight_file(path: Path) -> tuple[dict, list[dict], np.ndarray]:
    data = Path(path).read_bytes()
    if data[:8] != MAGIC:
        raise ExportError(f"{path}: bad magic")
    _, version, manifest_len = _HEADER.unpack_from(data)
    if version != VERSION:
        raise VersionMismatch(f"{path}: version {version}, expected {VERSION}")
    manifest = json.loads(data[_HEADER.size:_HEADER.size + manifest_len])
    blob = np.frombuffer(data, dtype="<f4", offset=_HEADER.size + manifest_len)
    return manifest["config"], manifest["tensors"], blob


def export(checkpoint_dir: Path, out_path: Path) -> dict:
    """Convert a checkpoint directory; returns a summary of what was written."""
    config = read_config(checkpoint_dir)
    state = read_parameters(checkpoint_dir)
    tensors = collect_tensors(config, state)
    entries = write_weight_file(config, tensors, out_path)
    return {
        "tensors": len(entries),
        "elements": sum(prod(e["shape"]) for e in entries),
        "layers": config["num_layers"],
        "hidden": config["hidden_size"],
    }


def verify(checkpoint_dir: Path, out_path: Path, tolerance: float = 1e-6) -> bool:
    """Re-read the written blob and compare every tensor to the source."""
    config = read_config(checkpoint_dir)
    state = read_parameters(checkpoint_dir)
    file_config, entries, blob = read_weight_file(out_path)
    if file_config != config:
        raise ExportError("config in file disagrees with checkpoint")

    source = dict(collect_tensors(config, state))
    by_name = {e["name"]: e for e in entries}
    for name, expected in source.items():
        entry = by_name.get(name)
        if entry is None:
            raise MissingParameter(name)
        count = prod(entry["shape"])
        stored = blob[entry["offset"]:entry["offset"] + count]
        flat = expected.reshape(-1)
        bad = np.flatnonzero(np.abs(stored - flat) > tolerance)
        if bad.size:
            raise Mismatch(name, int(bad[0]))

    for spot in (entries[0], entries[len(entries) // 2], entries[-1]):
        value = float(blob[spot["offset"]])
        print(f"  spot {spot['name']}[0] = {value:.9g}")
    return True


# --- tiny fixture checkpoint --------------------------------------------------

def make_fixture_checkpoint(directory: Path, num_layers: int = 2,
                            num_heads: int = 2, hidden_size: int = 8,
                            intermediate_size: int = 16, vocab_size: int = 30,
                            max_positions: int = 32, seed: int = 7,
                            archive: str = "bin") -> Path:
    """Write a miniature hub-layout checkpoint for round-trip testing."""
    directory.mkdir(parents=True, exist_ok=True)
    config = {
        "model_type": "bert",
        "num_hidden_layers": num_layers,
        "num_attention_heads": num_heads,
        "hidden_size": hidden_size,
        "intermediate_size": intermediate_size,
        "vocab_size": vocab_size,
        "max_position_embeddings": max_positions,
        "type_vocab_size": 2,
        "layer_norm_eps": 1e-12,
        "hidden_act": "gelu",
    }
    (directory / "config.json").write_text(json.dumps(config, indent=2), "utf-8")

    rng = np.random.default_rng(seed)
    fake = {"num_layers": num_layers, "num_heads": num_heads,
            "hidden_size": hidden_size, "intermediate_size": intermediate_size,
            "vocab_size": vocab_size, "max_positions": max_positions}
    state: dict[str, np.ndarray] = {}
    shapes = expected_shapes(fake)
    for source_name, artifact_name in build_name_map(num_layers):
        shape = shapes[artifact_name]
        if artifact_name.endswith("layernorm.gain"):
            arr = np.ones(shape) + 0.05 * rng.standard_normal(shape)
        elif artifact_name.endswith("bias") or artifact_name.endswith("gain"):
            arr = 0.02 * rng.standard_normal(shape)
        else:
            arr = 0.3 * rng.standard_normal(shape)
        state[source_name] = arr.astype(np.float32)
    # parameters the exporter must skip
    state["pooler.dense.weight"] = np.zeros((hidden_size, hidden_size), np.float32)
    state["pooler.dense.bias"] = np.zeros((hidden_size,), np.float32)

    if archive == "safetensors":
        from safetensors.numpy import save_file
        save_file(state, str(directory / "model.safetensors"))
    else:
        import torch
        torch.save({k: torch.from_numpy(v) for k, v in state.items()},
                   directory / "pytorch_model.bin")

    tokens = ["[PAD]", "[UNK]", "[CLS]", "[SEP]"]
    tokens += [f"tok{i}" for i in range(vocab_size - len(tokens))]
    (directory / "vocab.txt").write_text("\n".join(tokens) + "\n", "utf-8")
    return directory


# --- command line --------------------------------------------------------------

def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("checkpoint_dir", nargs="?", type=Path)
    parser.add_argument("out_prefix", nargs="?", type=Path)
    parser.add_argument("--no-verify", action="store_true",
                        help="skip the read-back comparison")
    parser.add_argument("--make-fixture", type=Path, metavar="DIR",
                        help="write a tiny test checkpoint and exit")
    parser.add_argument("--layers", type=int, default=2)
    parser.add_argument("--hidden", type=int, default=8)
    args = parser.parse_args(argv)

    if args.make_fixture:
        make_fixture_checkpoint(args.make_fixture, num_layers=args.layers,
                                hidden_size=args.hidden)
        print(f"fixture checkpoint written to {args.make_fixture}")
        return 0

    if not args.checkpoint_dir or not args.out_prefix:
        parser.error("CHECKPOINT_DIR and OUT_PREFIX are required")

    out_weights = Path(str(args.out_prefix) + ".atnsumw")
    out_vocab = Path(str(args.out_prefix) + ".vocab.txt")
    try:
        summary = export(args.checkpoint_dir, out_weights)
        vocab_src = args.checkpoint_dir / "vocab.txt"
        if not vocab_src.is_file():
            raise ExportError(f"no vocab.txt in {args.checkpoint_dir}")
        shutil.copyfile(vocab_src, out_vocab)
        print(f"wrote {out_weights} ({summary['tensors']} tensors, "
              f"{summary['elements']} elements, {summary['layers']} layers, "
              f"hidden {summary['hidden']})")
        print(f"wrote {out_vocab}")
        if not args.no_verify:
            verify(args.checkpoint_dir, out_weights)
            print("verify: pass")
    except (ExportError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
