"""Problem instances: data model, random generators, and JSON file I/O.

Machines are 0-indexed internally; job ids are 1..n to match the usual
scheduling convention (and the token layout used by the neural pricer,
where row j of the feature matrix is job j).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import InstanceParseError, MalformedNameError

DIST_UNIFORM = "uniform"
DIST_WEIBULL = "weibull"
DIST_CUSTOM = "custom"

INSTANCE_SUFFIX = ".inst.json"

_NAME_RE = re.compile(r"^(\d+)M(\d+)N_(\d+)_(\d+)$")

_MASK64 = (1 << 64) - 1


def _fnv1a64(text: str) -> int:
    """Stable 64-bit FNV-1a hash used to derive per-role PRNG keys."""
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * 0x100000001B3) & _MASK64
    return h


def role_rng(seed: int, role: str) -> np.random.Generator:
    """Counter-based Philox stream keyed by seed XOR hash(role).

    Separate roles ("weights", "proc", ...) draw from independent streams,
    so adding draws to one never perturbs another.
    """
    key = (int(seed) ^ _fnv1a64(role)) & _MASK64
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class Job:
    id: int
    weight: int
    proc_times: tuple[int, ...]

    def validate(self, num_machines: int) -> None:
        if self.weight < 1:
            raise InstanceParseError(f"job {self.id}: weight {self.weight} < 1")
        if len(self.proc_times) != num_machines:
            raise InstanceParseError(
                f"job {self.id}: {len(self.proc_times)} processing times "
                f"for {num_machines} machines"
            )
        for k, p in enumerate(self.proc_times):
            if p < 1:
                raise InstanceParseError(
                    f"job {self.id}: processing time {p} < 1 on machine {k}"
                )


@dataclass(frozen=True)
class Instance:
    name: str
    num_machines: int
    jobs: tuple[Job, ...]
    dist_label: str = DIST_CUSTOM
    seed: int = 0

    @property
    def num_jobs(self) -> int:
        return len(self.jobs)

    def job(self, job_id: int) -> Job:
        return self.jobs[job_id - 1]

    def weights_vector(self) -> np.ndarray:
        return np.array([j.weight for j in self.jobs], dtype=np.int64)

    def proc_matrix(self) -> np.ndarray:
        """(n, m) integer matrix of processing times."""
        return np.array([j.proc_times for j in self.jobs], dtype=np.int64)

    def validate(self) -> None:
        if self.num_machines < 1:
            raise InstanceParseError(f"machine count {self.num_machines} < 1")
        if self.num_jobs < 1:
            raise InstanceParseError("instance has no jobs")
        ids = [j.id for j in self.jobs]
        if ids != list(range(1, self.num_jobs + 1)):
            raise InstanceParseError(f"job ids must be exactly 1..{self.num_jobs}")
        for j in self.jobs:
            j.validate(self.num_machines)

    def renamed(self, name: str) -> "Instance":
        return replace(self, name=name)


def generate_uniform(m: int, n: int, seed: int) -> Instance:
    """Instance with weights ~ U{1..100} and processing times ~ U{1..30}."""
    if m < 1 or n < 1:
        raise ValueError("m and n must be >= 1")
    w_rng = role_rng(seed, "weights")
    p_rng = role_rng(seed, "proc")
    weights = w_rng.integers(1, 100, size=n, endpoint=True)
    procs = p_rng.integers(1, 30, size=(n, m), endpoint=True)
    jobs = tuple(
        Job(id=j + 1, weight=int(weights[j]), proc_times=tuple(int(p) for p in procs[j]))
        for j in range(n)
    )
    return Instance(
        name=f"{m}M{n}N_{seed}",
        num_machines=m,
        jobs=jobs,
        dist_label=DIST_UNIFORM,
        seed=seed,
    )


def _weibull_ints(rng: np.random.Generator, shape: float, scale: float, size) -> np.ndarray:
    # Round half up, then clamp to >= 1 so values stay valid durations/weights.
    x = rng.weibull(shape, size=size) * scale
    return np.maximum(1, np.floor(x + 0.5).astype(np.int64))


def generate_weibull(m: int, n: int, seed: int) -> Instance:
    """Instance with Weibull(k=1.5, lambda=50) weights and Weibull(k=2, lambda=15) times."""
    if m < 1 or n < 1:
        raise ValueError("m and n must be >= 1")
    w_rng = role_rng(seed, "weights")
    p_rng = role_rng(seed, "proc")
    weights = _weibull_ints(w_rng, 1.5, 50.0, n)
    procs = _weibull_ints(p_rng, 2.0, 15.0, (n, m))
    jobs = tuple(
        Job(id=j + 1, weight=int(weights[j]), proc_times=tuple(int(p) for p in procs[j]))
        for j in range(n)
    )
    return Instance(
        name=f"{m}M{n}N_{seed}",
        num_machines=m,
        jobs=jobs,
        dist_label=DIST_WEIBULL,
        seed=seed,
    )


def parse_instance_name(name: str) -> tuple[int, int, int, int]:
    """Split '<m>M<n>N_<seed>_<init>' into its four integer fields."""
    match = _NAME_RE.match(name)
    if match is None:
        raise MalformedNameError(
            f"instance name {name!r} does not match <m>M<n>N_<seed>_<init>"
        )
    m, n, seed, init = (int(g) for g in match.groups())
    if m < 1 or n < 1:
        raise MalformedNameError(f"instance name {name!r} has a non-positive size field")
    return m, n, seed, init


def write_instance(instance: Instance, path: str | Path) -> None:
    instance.validate()
    doc = {
        "name": instance.name,
        "machines": instance.num_machines,
        "seed": instance.seed,
        "dist": instance.dist_label,
        "jobs": [
            {"id": j.id, "w": j.weight, "p": list(j.proc_times)} for j in instance.jobs
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def read_instance(path: str | Path) -> Instance:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InstanceParseError(f"{path}: invalid JSON at line {exc.lineno}") from exc
    for key in ("name", "machines", "seed", "dist", "jobs"):
        if key not in doc:
            raise InstanceParseError(f"{path}: missing field {key!r}")
    try:
        jobs = tuple(
            Job(id=int(j["id"]), weight=int(j["w"]), proc_times=tuple(int(p) for p in j["p"]))
            for j in doc["jobs"]
        )
    except (KeyError, TypeError) as exc:
        raise InstanceParseError(f"{path}: malformed job entry ({exc})") from exc
    instance = Instance(
        name=str(doc["name"]),
        num_machines=int(doc["machines"]),
        jobs=jobs,
        dist_label=str(doc["dist"]),
        seed=int(doc["seed"]),
    )
    instance.validate()
    return instance
