"""LIBSVM-format ingestion: parsing, fetching, caching, normalization and
reproducible permutations.

Feature indices are 1-based on disk and 0-based in memory.
"""

from __future__ import annotations

import bz2
import hashlib
import json
import logging
import math
import os
import shutil
import tempfile
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    ChecksumMismatch,
    DuplicateIndex,
    EmptyDataset,
    MalformedToken,
    NetworkError,
    NonFiniteValue,
    ParseError,
    UnknownDataset,
    UnmappedLabel,
)

logger = logging.getLogger(__name__)

NORMALIZE_MODES = ("none", "l2-unit", "l2-cap")

_MASK64 = (1 << 64) - 1


class SparseFeatures:
    """Sorted sparse feature vector with 0-based ``indices``."""

    __slots__ = ("indices", "values")

    def __init__(self, indices, values):
        self.indices = np.asarray(indices, dtype=np.intp)
        self.values = np.asarray(values, dtype=np.float64)
        if self.indices.shape != self.values.shape or self.indices.ndim != 1:
            raise ValueError("indices and values must be 1-d arrays of equal length")

    @classmethod
    def from_dict(cls, entries: Mapping[int, float]) -> "SparseFeatures":
        """Build from a ``{0-based index: value}`` mapping."""
        keys = sorted(entries)
        return cls(keys, [entries[k] for k in keys])

    def __len__(self):
        return len(self.indices)

    def __eq__(self, other):
        if not isinstance(other, SparseFeatures):
            return NotImplemented
        return np.array_equal(self.indices, other.indices) and np.array_equal(
            self.values, other.values
        )

    def __repr__(self):
        pairs = ", ".join(f"{i}: {v!r}" for i, v in zip(self.indices.tolist(), self.values.tolist()))
        return f"SparseFeatures({{{pairs}}})"

    def to_dict(self) -> dict[int, float]:
        return dict(zip(self.indices.tolist(), self.values.tolist()))

    def norm(self) -> float:
        # hypot rescales internally, so tiny or huge entries don't under/overflow
        return math.hypot(*self.values.tolist())

    def max_index(self) -> int:
        """Largest 0-based index, or -1 for an empty vector."""
        return int(self.indices[-1]) if len(self.indices) else -1


@dataclass(frozen=True, eq=False)
class Instance:
    features: SparseFeatures
    label: int

    def __post_init__(self):
        if self.label not in (-1, 1):
            raise ValueError(f"label must be -1 or +1, got {self.label!r}")

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return self.label == other.label and self.features == other.features


@dataclass(frozen=True, eq=False)
class Dataset:
    name: str
    instances: tuple
    dimension: int

    def __post_init__(self):
        object.__setattr__(self, "instances", tuple(self.instances))
        for inst in self.instances:
            if inst.features.max_index() >= self.dimension:
                raise ValueError("dimension smaller than a feature index")

    def __len__(self):
        return len(self.instances)

    @property
    def n_positive(self) -> int:
        return sum(1 for inst in self.instances if inst.label == 1)

    @property
    def n_negative(self) -> int:
        return len(self.instances) - self.n_positive

    @property
    def neg_per_pos(self) -> float:
        """Negatives per positive, i.e. the ``r`` in a ``1:r`` Pos:Neg ratio."""
        pos = self.n_positive
        return self.n_negative / pos if pos else math.inf

    def normalized(self, mode: str) -> "Dataset":
        if mode == "none":
            return self
        return Dataset(
            self.name,
            tuple(Instance(normalize_instance(i.features, mode), i.label) for i in self.instances),
            self.dimension,
        )

    def summary(self) -> dict:
        return {
            "name": self.name,
            "instances": len(self),
            "dimension": self.dimension,
            "positives": self.n_positive,
            "negatives": self.n_negative,
            "pos_neg_ratio": f"1:{self.neg_per_pos:.2f}",
        }


class LabelMapping:
    """Maps raw label tokens to {-1, +1}.

    Lookup tries the exact token first, then numeric equality against the
    keys, so ``"+1"``, ``"1"`` and ``"1.0"`` all hit a ``"1"`` entry.
    """

    def __init__(self, mapping: Mapping[str, int] | None = None):
        if mapping is None:
            mapping = {"+1": 1, "-1": -1}
        self._exact: dict[str, int] = {}
        self._numeric: dict[float, int] = {}
        for raw, target in mapping.items():
            target = int(target)
            if target not in (-1, 1):
                raise ValueError(f"label mapping target must be -1 or +1, got {target}")
            self._exact[str(raw)] = target
            try:
                self._numeric[float(raw)] = target
            except ValueError:
                pass

    def __call__(self, token: str) -> int:
        hit = self._exact.get(token)
        if hit is not None:
            return hit
        try:
            hit = self._numeric.get(float(token))
        except ValueError:
            hit = None
        if hit is None:
            raise UnmappedLabel(f"label {token!r} has no mapping entry")
        return hit

    def as_dict(self) -> dict[str, int]:
        return dict(self._exact)


DEFAULT_MAPPING = LabelMapping()


def _as_mapping(mapping) -> LabelMapping:
    if mapping is None:
        return DEFAULT_MAPPING
    if isinstance(mapping, LabelMapping):
        return mapping
    return LabelMapping(mapping)


def parse_libsvm_line(line: str, mapping=None) -> Instance:
    """Parse one ``<label> <index>:<value> ...`` line (text after ``#`` ignored)."""
    mapping = _as_mapping(mapping)
    body = line.split("#", 1)[0]
    tokens = body.split()
    if not tokens:
        raise MalformedToken("empty line")
    label = mapping(tokens[0])
    entries: dict[int, float] = {}
    for tok in tokens[1:]:
        idx_s, sep, val_s = tok.partition(":")
        if not sep:
            raise MalformedToken(f"expected <index>:<value>, got {tok!r}")
        try:
            idx = int(idx_s)
            val = float(val_s)
        except ValueError:
            raise MalformedToken(f"non-numeric token {tok!r}") from None
        if idx < 1:
            raise MalformedToken(f"feature index must be >= 1, got {idx}")
        if not math.isfinite(val):
            raise NonFiniteValue(f"non-finite value in {tok!r}")
        if idx - 1 in entries:
            raise DuplicateIndex(f"feature index {idx} appears twice")
        entries[idx - 1] = val
    return Instance(SparseFeatures.from_dict(entries), label)


def format_libsvm_line(instance: Instance) -> str:
    """Inverse of :func:`parse_libsvm_line` (labels written as ``+1``/``-1``)."""
    parts = ["+1" if instance.label == 1 else "-1"]
    f = instance.features
    parts.extend(f"{i + 1}:{v!r}" for i, v in zip(f.indices.tolist(), f.values.tolist()))
    return " ".join(parts)


def read_instances(lines: Iterable[str], mapping=None) -> list[Instance]:
    mapping = _as_mapping(mapping)
    out = []
    for lineno, line in enumerate(lines, 1):
        if not line.split("#", 1)[0].strip():
            continue
        try:
            out.append(parse_libsvm_line(line, mapping))
        except ParseError as exc:
            raise type(exc)(str(exc), line_number=lineno) from None
    return out


def load_dataset(path, mapping=None, name: str | None = None, dimension: int | None = None) -> Dataset:
    """Read a LIBSVM file into an immutable :class:`Dataset`.

    ``dimension`` defaults to the largest feature index seen.  Files ending in
    ``.bz2`` are decompressed on the fly.
    """
    path = Path(path)
    opener = bz2.open if path.suffix == ".bz2" else open
    with opener(path, "rt", encoding="utf-8") as fh:
        instances = read_instances(fh, mapping)
    if not instances:
        raise EmptyDataset(f"{path} contains no instances")
    seen = max(inst.features.max_index() for inst in instances) + 1
    dim = max(seen, 1) if dimension is None else dimension
    ds = Dataset(name or path.name, tuple(instances), dim)
    logger.info(
        "loaded %s: %d instances, %d features, %d pos / %d neg",
        ds.name, len(ds), ds.dimension, ds.n_positive, ds.n_negative,
    )
    return ds


def normalize_instance(features: SparseFeatures, mode: str) -> SparseFeatures:
    if mode not in NORMALIZE_MODES:
        raise ValueError(f"unknown normalization mode {mode!r}; expected one of {NORMALIZE_MODES}")
    if mode == "none":
        return features
    norm = features.norm()
    if norm == 0.0 or (mode == "l2-cap" and norm <= 1.0):
        return features
    # bring the largest entry to 1 first so subnormal inputs divide exactly
    scaled = features.values / np.abs(features.values).max()
    return SparseFeatures(features.indices.copy(), scaled / math.hypot(*scaled.tolist()))


# -- permutations -------------------------------------------------------------

class SplitMix64:
    """Vigna's SplitMix64 generator (64-bit state, 64-bit output)."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in ``[0, n)`` by rejection: draws below
        ``2**64 mod n`` are discarded, the rest reduced modulo ``n``."""
        if n <= 0:
            raise ValueError("n must be positive")
        threshold = (-n) % n  # == 2**64 mod n
        while True:
            r = self.next_u64()
            if r >= threshold:
                return r % n


def permute(count: int, seed: int) -> list[int]:
    """Fisher-Yates shuffle of ``range(count)`` driven by SplitMix64(seed).

    Swaps run from the last position down: for ``i = count-1 .. 1`` pick
    ``j = below(i + 1)`` and swap positions ``i`` and ``j``.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = SplitMix64(seed)
    perm = list(range(count))
    for i in range(count - 1, 0, -1):
        j = rng.below(i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    return perm


# -- manifest / fetching ------------------------------------------------------

@dataclass(frozen=True)
class DatasetSpec:
    name: str
    urls: tuple
    label_mapping: dict = field(default_factory=lambda: {"+1": 1, "-1": -1})
    checksum: str | None = None
    description: str = ""

    @property
    def mapping(self) -> LabelMapping:
        return LabelMapping(self.label_mapping)


def load_manifest(path=None) -> dict[str, DatasetSpec]:
    """Read a dataset manifest (``name -> {url, label_mapping, checksum}``).

    ``url`` may also be a list; the parts are concatenated in order.  Without a
    path, the manifest bundled with the package is used.
    """
    if path is None:
        raw = json.loads(resources.files("olgmean").joinpath("data/manifest.json").read_text())
    else:
        raw = json.loads(Path(path).read_text())
    out = {}
    for name, entry in raw.items():
        urls = entry["url"]
        if isinstance(urls, str):
            urls = [urls]
        out[name] = DatasetSpec(
            name=name,
            urls=tuple(urls),
            label_mapping=dict(entry.get("label_mapping", {"+1": 1, "-1": -1})),
            checksum=entry.get("checksum"),
            description=entry.get("description", ""),
        )
    return out


def default_cache_dir() -> Path:
    env = os.environ.get("OLGMEAN_CACHE")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "olgmean"


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _download(url: str, dest, timeout: float) -> None:
    try:
        with urllib.request.urlopen(url, timeout=timeout) as resp:
            if url.endswith(".bz2"):
                src = bz2.BZ2File(resp)
                shutil.copyfileobj(src, dest)
            else:
                shutil.copyfileobj(resp, dest)
    except (urllib.error.URLError, OSError, EOFError, ValueError) as exc:
        raise NetworkError(f"could not fetch {url}: {exc}") from exc


def fetch_dataset(name: str, url, cache_dir=None, checksum: str | None = None,
                  timeout: float = 60.0) -> Path:
    """Return the cached path of dataset ``name``, downloading it on a miss.

    ``url`` is a single URL or a list of URLs whose (decompressed, for
    ``.bz2``) payloads are concatenated.  When ``checksum`` is given it is
    the SHA-256 of the final decompressed file and is verified on both
    download and cache hit.
    """
    cache_dir = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    target = cache_dir / name
    if target.exists():
        if checksum and _sha256(target) != checksum.lower():
            raise ChecksumMismatch(f"cached {target} does not match checksum {checksum}")
        logger.debug("cache hit for %s at %s", name, target)
        return target

    urls = [url] if isinstance(url, str) else list(url)
    if not urls:
        raise NetworkError(f"no url configured for {name}")
    cache_dir.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{name}.", dir=cache_dir)
    tmp = Path(tmp_name)
    try:
        with os.fdopen(fd, "wb") as dest:
            for part in urls:
                logger.info("downloading %s", part)
                _download(part, dest, timeout)
        if checksum and _sha256(tmp) != checksum.lower():
            raise ChecksumMismatch(f"download of {name} does not match checksum {checksum}")
        os.replace(tmp, target)
    finally:
        if tmp.exists():
            tmp.unlink()
    return target


def open_dataset(name: str, manifest=None, cache_dir=None, normalize: str = "none") -> Dataset:
    """Resolve ``name`` through the manifest, fetch if needed, load and normalize."""
    if manifest is None or isinstance(manifest, (str, Path)):
        manifest = load_manifest(manifest)
    try:
        spec = manifest[name]
    except KeyError:
        raise UnknownDataset(f"dataset {name!r} not in manifest (known: {sorted(manifest)})") from None
    path = fetch_dataset(name, spec.urls, cache_dir, spec.checksum)
    return load_dataset(path, spec.mapping, name=name).normalized(normalize)


def write_libsvm(instances: Sequence[Instance], path) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for inst in instances:
            fh.write(format_libsvm_line(inst))
            fh.write("\n")
    return path
