"""Run manifests: provenance sidecars for every pipeline command."""

from __future__ import annotations

import hashlib
import json
import sys
import time


def file_digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def config_digest(params: dict) -> str:
    payload = json.dumps(params, sort_keys=True, default=str)
    return hashlib.sha256(payload.encode()).hexdigest()


def write_manifest(command: str, params: dict, inputs: dict[str, str],
                   outputs: dict[str, str], started: float) -> str:
    """Emit ``<first output>.manifest.json`` describing the run.

    ``inputs``/``outputs`` map logical names to file paths; all paths are
    digested so a run can be audited as a pure function of its inputs.
    """
    from . import __version__

    manifest = {
        "command": command,
        "argv": sys.argv,
        "tool_version": __version__,
        "params": params,
        "config_digest": config_digest(params),
        "inputs": {name: {"path": path, "sha256": file_digest(path)}
                   for name, path in inputs.items()},
        "outputs": {name: {"path": path, "sha256": file_digest(path)}
                    for name, path in outputs.items()},
        "started_at": started,
        "finished_at": time.time(),
    }
    first_output = next(iter(outputs.values()))
    path = f"{first_output}.manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, default=str)
        fh.write("\n")
    return path
