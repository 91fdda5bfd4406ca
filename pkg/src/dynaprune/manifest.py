"""Run manifests: a JSON sidecar written next to every CLI output artifact,
recording the subcommand, its flags, seeds, input digests, and outputs.
Replaying a manifest re-runs the subcommand with the recorded flags and
must reproduce every artifact bit-identically.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from importlib import metadata

from .errors import FormatError


def tool_version() -> str:
    try:
        return metadata.version("dynaprune")
    except metadata.PackageNotFoundError:
        return "unknown"


def file_sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    subcommand: str
    flags: dict
    seeds: list = field(default_factory=list)
    inputs: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    version: str = field(default_factory=tool_version)
    duration_seconds: float = 0.0

    def add_input(self, path: str) -> None:
        self.inputs[path] = file_sha256(path)

    def write(self, path: str) -> None:
        with open(path, "w") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")


def read_manifest(path: str) -> RunManifest:
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as e:
            raise FormatError(f"manifest is not valid JSON: {e}") from None
    try:
        return RunManifest(
            subcommand=raw["subcommand"],
            flags=dict(raw["flags"]),
            seeds=list(raw.get("seeds", [])),
            inputs=dict(raw.get("inputs", {})),
            outputs=list(raw.get("outputs", [])),
            version=raw.get("version", "unknown"),
            duration_seconds=float(raw.get("duration_seconds", 0.0)),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"manifest missing or malformed field: {e}") from None


def manifest_path_for(artifact_path: str) -> str:
    return artifact_path + ".manifest.json"
