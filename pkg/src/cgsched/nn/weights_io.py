"""Model weights and the NNCG1 portable weight-file format.

Layout: 5-byte magic "NNCG1", u32 little-endian header length, UTF-8 JSON
header, payload of contiguous little-endian float32 tensors (row-major, at
the offsets declared in the header), and a trailing u32 CRC32 of the payload.
"""

from __future__ import annotations

import json
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import (
    MissingTensorError,
    WeightChecksumError,
    WeightFormatError,
    WeightShapeError,
)
from .config import ModelConfig, count_parameters

MAGIC = b"NNCG1"
FORMAT_VERSION = 1


def _attn_specs(prefix: str, d: int) -> list[tuple[str, tuple[int, ...]]]:
    return [
        (f"{prefix}.Wq", (d, d)),
        (f"{prefix}.Wk", (d, d)),
        (f"{prefix}.Wv", (d, d)),
        (f"{prefix}.bq", (d,)),
        (f"{prefix}.bk", (d,)),
        (f"{prefix}.bv", (d,)),
        (f"{prefix}.Wo", (d, d)),
        (f"{prefix}.bo", (d,)),
    ]


def _ffn_specs(prefix: str, d: int) -> list[tuple[str, tuple[int, ...]]]:
    return [
        (f"{prefix}.W1", (d, d)),
        (f"{prefix}.b1", (d,)),
        (f"{prefix}.W2", (d, d)),
        (f"{prefix}.b2", (d,)),
    ]


def _ln_specs(prefix: str, d: int) -> list[tuple[str, tuple[int, ...]]]:
    return [(f"{prefix}.w", (d,)), (f"{prefix}.b", (d,))]


def canonical_tensor_specs(config: ModelConfig) -> list[tuple[str, tuple[int, ...]]]:
    """Every tensor name and shape, in serialization order."""
    d = config.d
    specs: list[tuple[str, tuple[int, ...]]] = [("embed.W", (config.input_dim, d))]
    for i in range(config.n_enc):
        specs += _attn_specs(f"enc.{i}.sa", d)
        specs += _ffn_specs(f"enc.{i}.ffn", d)
        specs += _ln_specs(f"enc.{i}.ln1", d)
        specs += _ln_specs(f"enc.{i}.ln2", d)
    for i in range(config.n_dec):
        specs += _attn_specs(f"dec.{i}.sa", d)
        specs += _attn_specs(f"dec.{i}.ca", d)
        specs += _ffn_specs(f"dec.{i}.ffn", d)
        specs += _ln_specs(f"dec.{i}.ln1", d)
        specs += _ln_specs(f"dec.{i}.ln2", d)
        specs += _ln_specs(f"dec.{i}.ln3", d)
    specs += [("ptr.v", (d,)), ("ptr.W1", (d, d)), ("ptr.W2", (d, d))]
    return specs


@dataclass
class ModelWeights:
    tensors: dict[str, np.ndarray]

    def __getitem__(self, name: str) -> np.ndarray:
        return self.tensors[name]

    def block(self, prefix: str) -> dict[str, np.ndarray]:
        """Sub-dict keyed by the suffix after `prefix.` (e.g. Wq, bq)."""
        cut = len(prefix) + 1
        return {name[cut:]: t for name, t in self.tensors.items() if name.startswith(prefix + ".")}

    def num_parameters(self) -> int:
        return sum(t.size for t in self.tensors.values())

    def validate(self, config: ModelConfig) -> None:
        expected = canonical_tensor_specs(config)
        for name, shape in expected:
            if name not in self.tensors:
                raise MissingTensorError(f"tensor {name!r} is missing")
            if tuple(self.tensors[name].shape) != shape:
                raise WeightShapeError(
                    f"tensor {name!r} has shape {tuple(self.tensors[name].shape)}, "
                    f"expected {shape}"
                )
        extra = set(self.tensors) - {name for name, _ in expected}
        if extra:
            raise WeightShapeError(f"unexpected tensors: {sorted(extra)}")


def zero_weights(config: ModelConfig) -> ModelWeights:
    return ModelWeights(
        {name: np.zeros(shape, dtype=np.float32) for name, shape in canonical_tensor_specs(config)}
    )


def init_random_weights(config: ModelConfig, seed: int) -> ModelWeights:
    """Glorot-scaled random tensors (matrices) and zero bias/norm-shift vectors.

    Layer-norm gains start at one so an untrained model still produces
    well-scaled activations.
    """
    rng = np.random.Generator(np.random.Philox(key=seed & ((1 << 64) - 1)))
    tensors: dict[str, np.ndarray] = {}
    for name, shape in canonical_tensor_specs(config):
        if len(shape) == 2:
            scale = np.sqrt(2.0 / (shape[0] + shape[1]))
            tensors[name] = rng.normal(0.0, scale, size=shape).astype(np.float32)
        elif name.endswith("ln1.w") or name.endswith("ln2.w") or name.endswith("ln3.w"):
            tensors[name] = np.ones(shape, dtype=np.float32)
        elif name == "ptr.v":
            tensors[name] = rng.normal(0.0, 1.0 / np.sqrt(shape[0]), size=shape).astype(
                np.float32
            )
        else:
            tensors[name] = np.zeros(shape, dtype=np.float32)
    return ModelWeights(tensors)


def save_weights(path: str | Path, config: ModelConfig, weights: ModelWeights) -> None:
    weights.validate(config)
    specs = canonical_tensor_specs(config)
    entries = []
    offset = 0
    chunks = []
    for name, shape in specs:
        data = np.ascontiguousarray(weights[name], dtype="<f4")
        entries.append({"name": name, "shape": list(shape), "offset": offset})
        chunks.append(data.tobytes())
        offset += data.nbytes
    payload = b"".join(chunks)
    header = {
        "format_version": FORMAT_VERSION,
        "config": {
            "d": config.d,
            "h": config.h,
            "n_enc": config.n_enc,
            "n_dec": config.n_dec,
            "input_dim": config.input_dim,
            "ln_epsilon": config.ln_epsilon,
        },
        "divisors": list(config.feature_divisors),
        "total_params": count_parameters(config),
        "tensors": entries,
    }
    header_bytes = json.dumps(header).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(header_bytes)))
        fh.write(header_bytes)
        fh.write(payload)
        fh.write(struct.pack("<I", zlib.crc32(payload) & 0xFFFFFFFF))


def read_header(path: str | Path) -> dict:
    with open(path, "rb") as fh:
        magic = fh.read(5)
        if magic != MAGIC:
            raise WeightFormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
        raw_len = fh.read(4)
        if len(raw_len) != 4:
            raise WeightFormatError("file truncated in header length")
        (header_len,) = struct.unpack("<I", raw_len)
        header_bytes = fh.read(header_len)
        if len(header_bytes) != header_len:
            raise WeightFormatError("file truncated in header")
    try:
        return json.loads(header_bytes.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise WeightFormatError(f"header is not valid JSON: {exc}") from exc


def load_weights(path: str | Path) -> tuple[ModelConfig, ModelWeights]:
    header = read_header(path)
    try:
        cfg = header["config"]
        config = ModelConfig(
            d=int(cfg["d"]),
            h=int(cfg["h"]),
            n_enc=int(cfg["n_enc"]),
            n_dec=int(cfg["n_dec"]),
            input_dim=int(cfg["input_dim"]),
            ln_epsilon=float(cfg["ln_epsilon"]),
            feature_divisors=tuple(float(x) for x in header["divisors"]),
        )
        declared_total = int(header["total_params"])
        entries = header["tensors"]
    except (KeyError, TypeError, ValueError) as exc:
        raise WeightFormatError(f"malformed header: {exc}") from exc

    declared_sizes = sum(int(np.prod(e["shape"])) for e in entries)
    if declared_sizes != declared_total or declared_total != count_parameters(config):
        raise WeightShapeError(
            f"declared total {declared_total} does not match tensor sizes "
            f"{declared_sizes} / config count {count_parameters(config)}"
        )

    with open(path, "rb") as fh:
        blob = fh.read()
    (header_len,) = struct.unpack("<I", blob[5:9])
    payload_start = 9 + header_len
    payload_len = declared_total * 4
    if len(blob) < payload_start + payload_len + 4:
        raise WeightChecksumError("file truncated: payload or CRC missing")
    payload = blob[payload_start : payload_start + payload_len]
    (crc_declared,) = struct.unpack(
        "<I", blob[payload_start + payload_len : payload_start + payload_len + 4]
    )
    if zlib.crc32(payload) & 0xFFFFFFFF != crc_declared:
        raise WeightChecksumError("payload CRC32 mismatch")

    tensors: dict[str, np.ndarray] = {}
    for entry in entries:
        name = entry["name"]
        shape = tuple(int(x) for x in entry["shape"])
        offset = int(entry["offset"])
        nbytes = int(np.prod(shape)) * 4
        if offset < 0 or offset + nbytes > payload_len:
            raise WeightShapeError(f"tensor {name!r} offset out of payload bounds")
        tensors[name] = (
            np.frombuffer(payload, dtype="<f4", count=int(np.prod(shape)), offset=offset)
            .reshape(shape)
            .copy()
        )
    weights = ModelWeights(tensors)
    weights.validate(config)
    return config, weights
