"""NNCG1 weight export and golden parity vectors.

The writer is an independent implementation of the NNCG1 container (magic,
u32-LE header length, JSON header, little-endian float32 payload, trailing
CRC32) so the inference engine's reader genuinely cross-checks the format.
"""

from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path

import numpy as np
import torch

from .data import Record
from .model import PointerTransformer, TrainConfig

MAGIC = b"NNCG1"
FORMAT_VERSION = 1


def _attn_tensors(prefix: str, block) -> list[tuple[str, torch.Tensor]]:
    return [
        (f"{prefix}.Wq", block.q.W),
        (f"{prefix}.Wk", block.k.W),
        (f"{prefix}.Wv", block.v.W),
        (f"{prefix}.bq", block.q.b),
        (f"{prefix}.bk", block.k.b),
        (f"{prefix}.bv", block.v.b),
        (f"{prefix}.Wo", block.out.W),
        (f"{prefix}.bo", block.out.b),
    ]


def named_tensors(model: PointerTransformer) -> list[tuple[str, torch.Tensor]]:
    """All tensors under their canonical container names, in file order."""
    out: list[tuple[str, torch.Tensor]] = [("embed.W", model.embed)]
    for i, layer in enumerate(model.encoder):
        out += _attn_tensors(f"enc.{i}.sa", layer.sa)
        out += [
            (f"enc.{i}.ffn.W1", layer.ffn.lin1.W),
            (f"enc.{i}.ffn.b1", layer.ffn.lin1.b),
            (f"enc.{i}.ffn.W2", layer.ffn.lin2.W),
            (f"enc.{i}.ffn.b2", layer.ffn.lin2.b),
            (f"enc.{i}.ln1.w", layer.ln1.weight),
            (f"enc.{i}.ln1.b", layer.ln1.bias),
            (f"enc.{i}.ln2.w", layer.ln2.weight),
            (f"enc.{i}.ln2.b", layer.ln2.bias),
        ]
    for i, layer in enumerate(model.decoder):
        out += _attn_tensors(f"dec.{i}.sa", layer.sa)
        out += _attn_tensors(f"dec.{i}.ca", layer.ca)
        out += [
            (f"dec.{i}.ffn.W1", layer.ffn.lin1.W),
            (f"dec.{i}.ffn.b1", layer.ffn.lin1.b),
            (f"dec.{i}.ffn.W2", layer.ffn.lin2.W),
            (f"dec.{i}.ffn.b2", layer.ffn.lin2.b),
            (f"dec.{i}.ln1.w", layer.ln1.weight),
            (f"dec.{i}.ln1.b", layer.ln1.bias),
            (f"dec.{i}.ln2.w", layer.ln2.weight),
            (f"dec.{i}.ln2.b", layer.ln2.bias),
            (f"dec.{i}.ln3.w", layer.ln3.weight),
            (f"dec.{i}.ln3.b", layer.ln3.bias),
        ]
    out += [
        ("ptr.v", model.pointer.v),
        ("ptr.W1", model.pointer.W1),
        ("ptr.W2", model.pointer.W2),
    ]
    return out


def export_weights(model: PointerTransformer, config: TrainConfig, path) -> None:
    tensors = named_tensors(model)
    entries = []
    chunks = []
    offset = 0
    total = 0
    for name, tensor in tensors:
        data = np.ascontiguousarray(tensor.detach().cpu().numpy(), dtype="<f4")
        entries.append({"name": name, "shape": list(data.shape), "offset": offset})
        chunks.append(data.tobytes())
        offset += data.nbytes
        total += data.size
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
        "divisors": list(config.divisors),
        "total_params": total,
        "tensors": entries,
    }
    header_bytes = json.dumps(header).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(header_bytes)))
        fh.write(header_bytes)
        fh.write(payload)
        fh.write(struct.pack("<I", zlib.crc32(payload) & 0xFFFFFFFF))


def emit_golden(model: PointerTransformer, records: list[Record],
                config: TrainConfig, path) -> int:
    """Write parity vectors for each pricing input: the scaled feature matrix,
    encoder output, per-step pointer distributions, and greedy tokens."""
    if len(records) < 10:
        raise ValueError(f"need at least 10 pricing inputs, got {len(records)}")
    model.eval()
    cases = []
    for record in records:
        x = record.features(config.divisors)
        tokens, dists, z, _ = model.greedy_decode(torch.from_numpy(x))
        cases.append(
            {
                "instance": record.instance,
                "machine": record.machine,
                "iteration": record.iteration,
                "x": [[float(v) for v in row] for row in x],
                "z": [[float(v) for v in row] for row in z],
                "distributions": [[float(v) for v in d] for d in dists],
                "tokens": tokens,
            }
        )
    Path(path).write_text(json.dumps({"cases": cases}) + "\n", encoding="utf-8")
    return len(cases)
