"""Run manifests: config plus content hashes of inputs and outputs.

The manifest body is deterministic for fixed inputs and seed; wall-clock
metadata is quarantined under the "excluded" key so byte-level comparisons
of reproduced runs can drop it.
"""

from __future__ import annotations

import hashlib
import json
from datetime import datetime, timezone
from pathlib import Path


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for block in iter(lambda: handle.read(65536), b""):
            digest.update(block)
    return digest.hexdigest()


def write_manifest(
    path: str | Path,
    command: str,
    config: dict,
    inputs: dict[str, str | Path],
    outputs: dict[str, str | Path],
) -> dict:
    """Write a JSON manifest describing one pipeline run."""
    manifest = {
        "command": command,
        "config": config,
        "inputs": {
            name: {"path": str(p), "sha256": sha256_file(p)}
            for name, p in sorted(inputs.items())
        },
        "outputs": {
            name: {"path": str(p), "sha256": sha256_file(p)}
            for name, p in sorted(outputs.items())
        },
        "excluded": {
            "created_at": datetime.now(timezone.utc).isoformat(timespec="seconds")
        },
    }
    Path(path).write_text(
        json.dumps(manifest, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    return manifest


def manifest_core(manifest: dict) -> dict:
    """The manifest without its excluded (timestamped) section."""
    return {key: value for key, value in manifest.items() if key != "excluded"}
