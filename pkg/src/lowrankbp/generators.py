"""Synthetic instance generation: low-rank Gaussian sampling, uniform
support selection, and pluggable corruption strategies.

Everything is reproducible from a 64-bit seed.  Sampling uses numpy's PCG64
generator (counter-based family, ziggurat gaussians); supports are the first
``s`` entries of a seeded permutation of [d] (Fisher-Yates prefix).  Harnesses
derive per-trial substreams as ``seed ^ trial_index``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._validation import as_vector, check_nonnegative_int, check_positive_int
from .core import GaussianModel, IndexSet, Subspace, orthonormalize
from .exceptions import DimensionMismatchError

INSTANCE_FORMAT = "lowrankbp-instance"
INSTANCE_VERSION = 1


class Adversary:
    """Base corruption strategy; subclasses alter entries on the support."""

    kind = "identity"

    def corrupt(self, rng, clean_row, support: IndexSet, model: GaussianModel):
        raise NotImplementedError

    def params(self) -> dict:
        return {}

    def describe(self) -> dict:
        return {"kind": self.kind, **self.params()}


class ZeroOut(Adversary):
    """Erase the supported entries."""

    kind = "zero-out"

    def corrupt(self, rng, clean_row, support, model):
        row = np.array(clean_row, dtype=float)
        row[support.indices0()] = 0.0
        return row


class RandomSign(Adversary):
    """Shift each supported entry by the bound with an independent sign,
    so the corruption has sup-norm exactly ``bound``."""

    kind = "random-sign"

    def __init__(self, bound: float):
        if bound <= 0:
            raise ValueError("bound must be positive")
        self.bound = float(bound)

    def params(self):
        return {"bound": self.bound}

    def corrupt(self, rng, clean_row, support, model):
        row = np.array(clean_row, dtype=float)
        idx = support.indices0()
        signs = rng.integers(0, 2, size=idx.size) * 2.0 - 1.0
        row[idx] += self.bound * signs
        return row


class WorstCase1D(Adversary):
    """The sign-aligned bounded corruption that maximizes the error of
    one-dimensional recovery.  Requires a rank-1 model."""

    kind = "worst-case-1d"

    def __init__(self, bound: float):
        if bound <= 0:
            raise ValueError("bound must be positive")
        self.bound = float(bound)

    def params(self):
        return {"bound": self.bound}

    def corrupt(self, rng, clean_row, support, model):
        if model.rank != 1:
            raise ValueError("worst-case-1d corruption needs a rank-1 model")
        direction = model.factor[0]
        direction = direction / np.sum(np.abs(direction))
        return worst_case_1d_corrupt(direction, clean_row, support, self.bound)


class LargeSpike(Adversary):
    """Unbounded spikes of a fixed magnitude with independent signs."""

    kind = "large-spike"

    def __init__(self, magnitude: float):
        if magnitude <= 0:
            raise ValueError("magnitude must be positive")
        self.magnitude = float(magnitude)

    def params(self):
        return {"magnitude": self.magnitude}

    def corrupt(self, rng, clean_row, support, model):
        row = np.array(clean_row, dtype=float)
        idx = support.indices0()
        signs = rng.integers(0, 2, size=idx.size) * 2.0 - 1.0
        row[idx] += self.magnitude * signs
        return row


_ADVERSARIES = {
    "zero-out": ZeroOut,
    "random-sign": RandomSign,
    "worst-case-1d": WorstCase1D,
    "large-spike": LargeSpike,
}


def adversary_from_description(desc: dict) -> Adversary:
    kind = desc["kind"]
    params = {k: v for k, v in desc.items() if k != "kind"}
    return _ADVERSARIES[kind](**params)


def worst_case_1d_corrupt(direction, clean, support: IndexSet, bound: float):
    """Shift the supported entries of ``clean`` by bound * sign(direction_i).

    ``sign(0)`` is taken as +1; any fixed choice preserves the maximization.
    """
    u = as_vector(direction, "direction")
    x = as_vector(clean, "clean", u.shape[0])
    if support.universe != u.shape[0]:
        raise DimensionMismatchError(
            f"support universe {support.universe} != vector length {u.shape[0]}"
        )
    row = x.copy()
    idx = support.indices0()
    signs = np.where(u[idx] >= 0, 1.0, -1.0)
    row[idx] += bound * signs
    return row


@dataclass(frozen=True)
class ProblemInstance:
    """One synthetic dataset: clean rows, their supports, corrupted rows."""

    model: GaussianModel
    subspace: Subspace
    clean: np.ndarray
    supports: tuple
    corrupted: np.ndarray
    seed: int
    num_corruptions: int
    adversary: dict
    subspace_includes_mean: bool = False

    @property
    def num_points(self) -> int:
        return self.clean.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.clean.shape[1]


def sample_instance(
    model: GaussianModel,
    n: int,
    s: int,
    adversary: Adversary,
    seed: int,
    include_mean_in_subspace: bool = False,
) -> ProblemInstance:
    """Draw n clean points, pick uniform size-s supports, apply the adversary.

    Bit-identical output for identical arguments.
    """
    check_positive_int(n, "n")
    check_nonnegative_int(s, "s")
    d = model.ambient_dim
    if s > d:
        raise ValueError(f"need s <= d, got s={s}, d={d}")
    rng = np.random.default_rng(seed)
    gauss = rng.standard_normal((n, model.rank))
    clean = model.mean[None, :] + gauss @ model.factor

    supports = []
    for _ in range(n):
        prefix = rng.permutation(d)[:s]
        supports.append(IndexSet(tuple(sorted(int(j) + 1 for j in prefix)), d))

    corrupted = np.empty_like(clean)
    for i in range(n):
        if s == 0:
            corrupted[i] = clean[i]
        else:
            corrupted[i] = adversary.corrupt(rng, clean[i], supports[i], model)

    spanning = list(model.factor)
    if include_mean_in_subspace and np.linalg.norm(model.mean) > 1e-12:
        spanning.append(model.mean)
    subspace = orthonormalize(spanning)
    return ProblemInstance(
        model=model,
        subspace=subspace,
        clean=clean,
        supports=tuple(supports),
        corrupted=corrupted,
        seed=int(seed),
        num_corruptions=int(s),
        adversary=adversary.describe(),
        subspace_includes_mean=bool(include_mean_in_subspace),
    )


# ---------------------------------------------------------------------------
# serialization: JSON metadata + raw float64 sidecar for the big matrices


def save_instance(instance: ProblemInstance, json_path) -> None:
    """Write metadata JSON beside a row-major little-endian float64 binary
    holding factor, clean and corrupted (documented in docs/formats.md)."""
    json_path = Path(json_path)
    bin_path = json_path.with_suffix(".bin")
    arrays = [
        ("factor", instance.model.factor),
        ("clean", instance.clean),
        ("corrupted", instance.corrupted),
    ]
    layout = []
    offset = 0
    with open(bin_path, "wb") as fh:
        for name, arr in arrays:
            data = np.ascontiguousarray(arr, dtype="<f8")
            fh.write(data.tobytes())
            layout.append(
                {
                    "name": name,
                    "rows": int(arr.shape[0]),
                    "cols": int(arr.shape[1]),
                    "offset": offset,
                }
            )
            offset += data.nbytes
    meta = {
        "format": INSTANCE_FORMAT,
        "version": INSTANCE_VERSION,
        "d": instance.ambient_dim,
        "k": instance.model.rank,
        "n": instance.num_points,
        "s": instance.num_corruptions,
        "seed": instance.seed,
        "adversary": instance.adversary,
        "subspace_includes_mean": instance.subspace_includes_mean,
        "mean": instance.model.mean.tolist(),
        "supports": [list(sup.elements) for sup in instance.supports],
        "sidecar": bin_path.name,
        "arrays": layout,
    }
    json_path.write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")


def load_instance(json_path) -> ProblemInstance:
    json_path = Path(json_path)
    meta = json.loads(json_path.read_text(encoding="utf-8"))
    if meta.get("format") != INSTANCE_FORMAT:
        raise ValueError(f"not a {INSTANCE_FORMAT} file: {json_path}")
    bin_path = json_path.parent / meta["sidecar"]
    raw = bin_path.read_bytes()
    blocks = {}
    for entry in meta["arrays"]:
        count = entry["rows"] * entry["cols"]
        arr = np.frombuffer(
            raw, dtype="<f8", count=count, offset=entry["offset"]
        ).reshape(entry["rows"], entry["cols"])
        blocks[entry["name"]] = np.array(arr, dtype=float)
    model = GaussianModel(np.asarray(meta["mean"], dtype=float), blocks["factor"])
    d = meta["d"]
    supports = tuple(
        IndexSet(tuple(elems), d) for elems in meta["supports"]
    )
    spanning = list(model.factor)
    if meta["subspace_includes_mean"] and np.linalg.norm(model.mean) > 1e-12:
        spanning.append(model.mean)
    return ProblemInstance(
        model=model,
        subspace=orthonormalize(spanning),
        clean=blocks["clean"],
        supports=supports,
        corrupted=blocks["corrupted"],
        seed=int(meta["seed"]),
        num_corruptions=int(meta["s"]),
        adversary=meta["adversary"],
        subspace_includes_mean=bool(meta["subspace_includes_mean"]),
    )
