#!/usr/bin/env python3
"""Populate the dataset cache from copies redistributed inside PyPI packages.

Use this when the LIBSVM download site is unreachable but a PyPI index is
not.  Each file is rebuilt in LIBSVM text format under the cache name used
by ``olgmean fetch``, so later fetches are plain cache hits.

    german     <- UCI german.data-numeric from ``imbalanced-databases``
                  (class 2 / "bad" -> +1, class 1 -> -1)
    svmguide3  <- dense CSV copy bundled with ``olpy``
    covtype    <- UCI covtype.csv from the ``scikit-multiflow`` 0.3.0 sdist
                  (cover type 2 -> raw label 2, every other type -> raw label 1)

ijcnn1 has no known PyPI copy and is skipped.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
import tarfile
import tempfile
import urllib.request
import zipfile
from pathlib import Path

from olgmean.dataio import default_cache_dir, load_manifest, open_dataset

SOURCES = {
    "german": ("imbalanced-databases", "0.1.1", ".whl",
               "imbalanced_databases/data/german/german.data-numeric.txt"),
    "svmguide3": ("olpy", "1.0.0.dev3", ".whl", "olpy/datasets/data/svmguide3"),
    "covtype": ("scikit-multiflow", "0.3.0", ".tar.gz",
                "scikit-multiflow-0.3.0/src/skmultiflow/data/datasets/covtype.csv"),
}


def pypi_file(package: str, version: str, suffix: str, workdir: Path) -> Path:
    meta = json.load(urllib.request.urlopen(f"https://pypi.org/pypi/{package}/json", timeout=60))
    entry = next(u for u in meta["releases"][version] if u["filename"].endswith(suffix))
    dest = workdir / entry["filename"]
    if not dest.exists():
        print(f"  downloading {entry['filename']} ({entry['size'] / 1e6:.1f} MB)")
        with urllib.request.urlopen(entry["url"], timeout=600) as resp, open(dest, "wb") as fh:
            fh.write(resp.read())
    digest = hashlib.sha256(dest.read_bytes()).hexdigest()
    if digest != entry["digests"]["sha256"]:
        raise RuntimeError(f"sha256 mismatch for {dest.name}")
    return dest


def member(archive: Path, name: str) -> bytes:
    if archive.suffix == ".whl":
        with zipfile.ZipFile(archive) as z:
            return z.read(name)
    with tarfile.open(archive) as t:
        return t.extractfile(name).read()


def sparse_tokens(values) -> list[str]:
    return [f"{i}:{v}" for i, v in enumerate(values, 1) if float(v) != 0.0]


def convert_german(raw: bytes) -> list[str]:
    lines = []
    for row in raw.decode().splitlines():
        vals = row.split()
        if not vals:
            continue
        label = "+1" if vals[-1] == "2" else "-1"
        lines.append(" ".join([label, *sparse_tokens(vals[:-1])]))
    return lines


def convert_svmguide3(raw: bytes) -> list[str]:
    reader = csv.reader(io.StringIO(raw.decode()))
    next(reader)  # header "0,1,...,21"
    return [" ".join([row[0], *sparse_tokens(row[1:])]) for row in reader if row]


def convert_covtype(raw: bytes) -> list[str]:
    reader = csv.reader(io.StringIO(raw.decode()))
    next(reader)
    lines = []
    for row in reader:
        label = "2" if row[-1] == "2" else "1"
        lines.append(" ".join([label, *sparse_tokens(row[:-1])]))
    return lines


CONVERTERS = {"german": convert_german, "svmguide3": convert_svmguide3, "covtype": convert_covtype}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--cache-dir", type=Path, default=default_cache_dir())
    ap.add_argument("--force", action="store_true", help="rebuild files already in the cache")
    ap.add_argument("datasets", nargs="*", default=list(SOURCES))
    args = ap.parse_args(argv)

    args.cache_dir.mkdir(parents=True, exist_ok=True)
    manifest = load_manifest()
    with tempfile.TemporaryDirectory() as tmp:
        for name in args.datasets:
            if name not in SOURCES:
                print(f"{name}: no PyPI source known, skipped")
                continue
            target = args.cache_dir / name
            if target.exists() and not args.force:
                print(f"{name}: already cached at {target}")
            else:
                package, version, suffix, inner = SOURCES[name]
                print(f"{name}: from {package}=={version}")
                archive = pypi_file(package, version, suffix, Path(tmp))
                lines = CONVERTERS[name](member(archive, inner))
                target.write_text("\n".join(lines) + "\n", encoding="utf-8")
            ds = open_dataset(name, manifest, args.cache_dir)
            print(f"  {json.dumps(ds.summary())}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
