"""Run manifests: enough metadata to reproduce any output bit-identically.

Every CLI command writes a JSON manifest next to its primary output, naming
the command, the full parameter set (seed included where randomness is
involved), library versions, the kernel backend, and timestamps. Estimates
are chunk-deterministic, so reproduction does not depend on the worker
count; the backend does matter for the last float bits and is recorded.
"""

from __future__ import annotations

import json
import platform
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import __version__, kernels


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _numba_version() -> str | None:
    if not kernels.HAVE_NUMBA:
        return None
    import numba

    return numba.__version__


@dataclass
class RunManifest:
    command: str
    parameters: dict
    version: str = __version__
    python: str = field(default_factory=platform.python_version)
    numpy: str = np.__version__
    numba: str | None = field(default_factory=_numba_version)
    backend: str = kernels.BACKEND
    rng: str | None = None  # "philox4x64" on sampling commands
    seed: int | None = None
    started: str = field(default_factory=_now)
    finished: str | None = None
    outputs: list[str] = field(default_factory=list)

    def finish(self, outputs: list[str]) -> "RunManifest":
        self.finished = _now()
        self.outputs = [str(p) for p in outputs]
        return self

    def write(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=False)
            fh.write("\n")


def manifest_path_for(output_path) -> str:
    return str(output_path) + ".manifest.json"
