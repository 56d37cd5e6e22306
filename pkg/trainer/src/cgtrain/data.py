"""Dataset loading, deterministic splitting, and batch assembly.

One JSONL record per (instance, machine, CG iteration): the machine dual,
per-job (processing time, weight, job dual), and the DP-labeled target token
sequence [start, job ids..., 0, end], or null when the DP priced out empty.
Records with null targets are kept; they teach the model to emit the end
token immediately.
"""

from __future__ import annotations

import json
import zlib
from dataclasses import dataclass

import numpy as np
import torch

VAL_FOLDS = 5  # hash mod 5 == 0 -> validation (the 80/20 split)


@dataclass
class Record:
    instance: str
    machine: int
    iteration: int
    sigma: float
    jobs: list[dict]
    target: list[int] | None

    @property
    def num_jobs(self) -> int:
        return len(self.jobs)

    def tokens(self) -> list[int]:
        """Full target sequence; a null target becomes [start, end]."""
        n = self.num_jobs
        if self.target is None:
            return [n + 1, n + 2]
        return list(self.target)

    def features(self, divisors) -> np.ndarray:
        """(n+3) x 5 scaled feature matrix, rows: machine, jobs 1..n, start, end."""
        n = self.num_jobs
        div_p, div_w, div_dual = divisors
        x = np.zeros((n + 3, 5), dtype=np.float32)
        x[0, 2] = self.sigma / div_dual
        for job in self.jobs:
            row = int(job["id"])
            x[row, 0] = job["p"] / div_p
            x[row, 1] = job["w"] / div_w
            x[row, 2] = job["pi"] / div_dual
        x[n + 1, 3] = 1.0
        x[n + 2, 4] = 1.0
        return x


def is_validation(record: Record) -> bool:
    key = f"{record.instance}|{record.machine}|{record.iteration}".encode()
    return zlib.crc32(key) % VAL_FOLDS == 0


@dataclass
class DatasetSplit:
    train: list[Record]
    validation: list[Record]


def parse_record(doc: dict) -> Record:
    return Record(
        instance=str(doc["instance"]),
        machine=int(doc["machine"]),
        iteration=int(doc["iteration"]),
        sigma=float(doc["sigma"]),
        jobs=list(doc["jobs"]),
        target=None if doc["target"] is None else [int(t) for t in doc["target"]],
    )


def load_dataset(path) -> DatasetSplit:
    train: list[Record] = []
    validation: list[Record] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = parse_record(json.loads(line))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"{path}: malformed record at line {lineno}: {exc}") from exc
            (validation if is_validation(record) else train).append(record)
    return DatasetSplit(train=train, validation=validation)


@dataclass
class Batch:
    x: torch.Tensor  # (B, R, 5) features, R = n+3 shared within the batch
    dec_tokens: torch.Tensor  # (B, T) teacher-forced decoder input, 0-padded
    targets: torch.Tensor  # (B, T) rows to predict, 0-padded
    scored: torch.Tensor  # (B, T) bool, False on padding
    pointer_mask: torch.Tensor  # (B, T, R) bool, True = row already used

    def __len__(self) -> int:
        return self.x.shape[0]


def make_batch(records: list[Record], divisors, dtype=torch.float32) -> Batch:
    """Records must share a job count (bucketed batching, no feature padding)."""
    sizes = {r.num_jobs for r in records}
    if len(sizes) != 1:
        raise ValueError(f"records in one batch must share n, got {sorted(sizes)}")
    n = sizes.pop()
    rows = n + 3
    seqs = [r.tokens() for r in records]
    longest = max(len(s) for s in seqs)
    batch = len(records)
    x = torch.stack(
        [torch.from_numpy(r.features(divisors)) for r in records]
    ).to(dtype)
    dec = torch.zeros((batch, longest - 1), dtype=torch.long)
    tgt = torch.zeros((batch, longest - 1), dtype=torch.long)
    scored = torch.zeros((batch, longest - 1), dtype=torch.bool)
    mask = torch.zeros((batch, longest - 1, rows), dtype=torch.bool)
    for b, seq in enumerate(seqs):
        length = len(seq) - 1
        dec[b, :length] = torch.tensor(seq[:-1])
        tgt[b, :length] = torch.tensor(seq[1:])
        scored[b, :length] = True
        used: list[int] = []
        for t in range(length):
            used.append(seq[t])
            mask[b, t, used] = True
    return Batch(x=x, dec_tokens=dec, targets=tgt, scored=scored, pointer_mask=mask)


def iter_batches(records: list[Record], batch_size: int, divisors,
                 rng: np.random.Generator | None = None):
    """Bucket by job count, then yield batches (shuffled when rng is given)."""
    buckets: dict[int, list[Record]] = {}
    for record in records:
        buckets.setdefault(record.num_jobs, []).append(record)
    order = sorted(buckets)
    if rng is not None:
        order = list(rng.permutation(order))
    for n in order:
        group = buckets[n]
        if rng is not None:
            group = [group[i] for i in rng.permutation(len(group))]
        for start in range(0, len(group), batch_size):
            yield make_batch(group[start : start + batch_size], divisors)
