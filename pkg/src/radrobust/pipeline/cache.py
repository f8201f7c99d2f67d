"""Content-addressed stage cache.

A stage's key is the SHA-256 of its declared inputs (file digests) plus the
canonical JSON of the config subset it reads. Identical config + inputs give
identical keys, so reruns hit the cache and cache deletion is recompute-safe.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from ..cohort_io import CohortManifest


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def config_digest(obj) -> str:
    return hashlib.sha256(
        json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


def manifest_digest(manifest: CohortManifest, manifest_path) -> str:
    parts = [file_digest(manifest_path)]
    for row in manifest.rows:
        parts.append(file_digest(manifest.resolve(row.volume_path)))
        parts.append(file_digest(manifest.resolve(row.mask_path)))
    return hashlib.sha256("".join(parts).encode()).hexdigest()


def stage_key(stage: str, input_digests: list[str], config_obj) -> str:
    blob = json.dumps({"stage": stage, "inputs": sorted(input_digests),
                       "config": config_obj}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:24]


class StageCache:
    def __init__(self, root):
        self.root = Path(root)

    def dir_for(self, stage: str, key: str) -> Path:
        return self.root / stage / key

    def has(self, stage: str, key: str, filename: str) -> bool:
        return (self.dir_for(stage, key) / filename).exists()

    def path(self, stage: str, key: str, filename: str, create: bool = False) -> Path:
        d = self.dir_for(stage, key)
        if create:
            d.mkdir(parents=True, exist_ok=True)
        return d / filename
