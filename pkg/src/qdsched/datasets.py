"""Benchmark data download, layout, and integrity checks.

Instance sets are not redistributed with the package; `fetch` pulls them
from their public mirrors into the data root and verifies the expected file
counts. The data root defaults to ./data and can be moved with the
QDSCHED_DATA environment variable.
"""
from __future__ import annotations

import logging
import os
import urllib.request
import zipfile
from dataclasses import dataclass
from pathlib import Path

log = logging.getLogger(__name__)

DATA_ROOT_ENV = "QDSCHED_DATA"


@dataclass(frozen=True)
class DatasetSpec:
    name: str
    url: str
    suffix: str
    expected_count: int


DATASETS = {
    spec.name: spec
    for spec in (
        DatasetSpec("j30", "https://www.om-db.wi.tum.de/psplib/files/j30.sm.zip", ".sm", 480),
        DatasetSpec("j60", "https://www.om-db.wi.tum.de/psplib/files/j60.sm.zip", ".sm", 480),
        DatasetSpec("j90", "https://www.om-db.wi.tum.de/psplib/files/j90.sm.zip", ".sm", 480),
        DatasetSpec("j120", "https://www.om-db.wi.tum.de/psplib/files/j120.sm.zip", ".sm", 600),
        DatasetSpec(
            "rg300",
            "https://www.projectmanagement.ugent.be/sites/default/files/datasets/RG300.zip",
            ".rcp",
            480,
        ),
    )
}


def data_root(override=None) -> Path:
    if override:
        return Path(override)
    return Path(os.environ.get(DATA_ROOT_ENV, "data"))


def set_dir(name: str, root=None) -> Path:
    return data_root(root) / name


def count_instances(name: str, root=None) -> int:
    spec = DATASETS[name]
    directory = set_dir(name, root)
    if not directory.is_dir():
        return 0
    return sum(1 for p in directory.rglob(f"*{spec.suffix}") if p.is_file())


def verify(name: str, root=None) -> bool:
    """True when the set is present with exactly the expected file count."""
    return count_instances(name, root) == DATASETS[name].expected_count


def fetch(names=None, root=None, url_overrides=None) -> dict[str, int]:
    """Download and extract the named sets; returns per-set file counts.

    Sets already complete on disk are left untouched. Raises RuntimeError
    when a downloaded set does not contain the expected number of files
    (mirror layouts occasionally change; see the README for the manual
    layout).
    """
    names = list(names) if names else list(DATASETS)
    url_overrides = url_overrides or {}
    counts = {}
    for name in names:
        if name not in DATASETS:
            raise KeyError(f"unknown instance set {name!r}; known: {sorted(DATASETS)}")
        spec = DATASETS[name]
        target = set_dir(name, root)
        if verify(name, root):
            log.info("%s: already complete (%d files)", name, spec.expected_count)
            counts[name] = spec.expected_count
            continue
        url = url_overrides.get(name, spec.url)
        target.mkdir(parents=True, exist_ok=True)
        archive = target / "download.zip"
        log.info("%s: downloading %s", name, url)
        urllib.request.urlretrieve(url, archive)
        with zipfile.ZipFile(archive) as zf:
            zf.extractall(target)
        archive.unlink()
        counts[name] = count_instances(name, root)
        if counts[name] != spec.expected_count:
            raise RuntimeError(
                f"{name}: expected {spec.expected_count} files, found {counts[name]}"
            )
        log.info("%s: %d files verified", name, counts[name])
    return counts
