"""Binary checkpoint cache for sieved counts.

Sieving to 1e8 or 1e9 is the expensive step of a race, so completed
checkpoints are persisted as they are produced and an interrupted run picks
up from the last one. Files are keyed by (q, limit, grid size, package
version) in the name and self-describe via a fixed little-endian header:

    magic     8 bytes  b"PRCOUNT\\x00"
    fmtver    u16      1
    q         u32
    limit     u64
    grid_n    u32      checkpoint count the run was configured with
    flags     u32      reserved, zero
    m         u32      number of residues coprime to q
    residues  m x u32  ascending
    ncomplete u32      records written so far, updated in place

followed by grid_n fixed-width records (u64 x, m x u64 prime counts,
m x u64 semiprime counts, m x f64 log-weighted counts). Quadratic-weight
counts are not stored: they are a cheap deterministic function of the prime
table and get recomputed on load, which keeps records appendable mid-run.

A cache is derived data. Any mismatch or corruption raises CacheError; the
CLI treats that as "recompute", never as a reason to trust partial contents.
"""

from __future__ import annotations

import math
import os
import struct
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .race import CountVector

MAGIC = b"PRCOUNT\x00"
FORMAT_VERSION = 1
_PRE = struct.Struct("<8sHIQII")  # magic, fmtver, q, limit, grid_n, flags

ENV_CACHE_DIR = "PRIMERACE_CACHE_DIR"


class CacheError(Exception):
    """Cache file is missing, stale, or does not match the requested run."""


def default_cache_dir() -> Path:
    env = os.environ.get(ENV_CACHE_DIR, "").strip()
    if env:
        return Path(env)
    return Path.home() / ".cache" / "primerace"


def cache_path(q: int, limit: int, grid_n: int, directory: Path | None = None) -> Path:
    base = directory if directory is not None else default_cache_dir()
    return base / f"counts_q{int(q)}_L{int(limit)}_n{int(grid_n)}_v{__version__}.bin"


def _units(q: int) -> tuple[int, ...]:
    return tuple(r for r in range(1, q) if math.gcd(r, q) == 1)


@dataclass
class CountCache:
    """Handle over one cache file; append() persists a checkpoint at a time."""

    path: Path
    q: int
    limit: int
    checkpoints: list[int]
    units: tuple[int, ...]
    ncomplete: int

    @property
    def _m(self) -> int:
        return len(self.units)

    @property
    def _header_size(self) -> int:
        return _PRE.size + 4 + 4 * self._m + 4

    @property
    def _record(self) -> struct.Struct:
        m = self._m
        return struct.Struct("<Q" + "Q" * m + "Q" * m + "d" * m)

    def _record_offset(self, k: int) -> int:
        return self._header_size + k * self._record.size

    def load_completed(self) -> list[CountVector]:
        """Read back the completed prefix, without quadratic weights."""
        rec = self._record
        m = self._m
        out: list[CountVector] = []
        with open(self.path, "rb") as fh:
            fh.seek(self._header_size)
            for k in range(self.ncomplete):
                raw = fh.read(rec.size)
                if len(raw) != rec.size:
                    raise CacheError(
                        f"{self.path}: truncated record {k} (counter says "
                        f"{self.ncomplete} complete)"
                    )
                vals = rec.unpack(raw)
                x = vals[0]
                if x != self.checkpoints[k]:
                    raise CacheError(
                        f"{self.path}: record {k} is for x={x}, expected "
                        f"checkpoint {self.checkpoints[k]}"
                    )
                pi = dict(zip(self.units, vals[1 : 1 + m]))
                pi2 = dict(zip(self.units, vals[1 + m : 1 + 2 * m]))
                psi = dict(zip(self.units, vals[1 + 2 * m :]))
                out.append(CountVector(x=int(x), pi=pi, pi2=pi2, psi=psi))
        return out

    def append(self, cv: CountVector) -> None:
        k = self.ncomplete
        if k >= len(self.checkpoints):
            raise CacheError(f"{self.path}: all {k} records already written")
        if cv.x != self.checkpoints[k]:
            raise CacheError(
                f"{self.path}: appending x={cv.x}, expected checkpoint "
                f"{self.checkpoints[k]}"
            )
        row = [cv.x]
        row += [cv.pi[r] for r in self.units]
        row += [cv.pi2[r] for r in self.units]
        row += [cv.psi[r] for r in self.units]
        with open(self.path, "r+b") as fh:
            fh.seek(self._record_offset(k))
            fh.write(self._record.pack(*row))
            fh.seek(self._header_size - 4)
            fh.write(struct.pack("<I", k + 1))
        self.ncomplete = k + 1

    @property
    def complete(self) -> bool:
        return self.ncomplete == len(self.checkpoints)


def create_cache(path: Path, q: int, limit: int, checkpoints) -> CountCache:
    cps = [int(c) for c in checkpoints]
    units = _units(int(q))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(_PRE.pack(MAGIC, FORMAT_VERSION, int(q), int(limit), len(cps), 0))
        fh.write(struct.pack("<I", len(units)))
        fh.write(struct.pack(f"<{len(units)}I", *units))
        fh.write(struct.pack("<I", 0))
    return CountCache(path, int(q), int(limit), cps, units, 0)


def open_cache(path: Path, q: int, limit: int, checkpoints) -> CountCache:
    """Validate an existing cache file against the requested run parameters."""
    cps = [int(c) for c in checkpoints]
    units = _units(int(q))
    path = Path(path)
    size = path.stat().st_size
    with open(path, "rb") as fh:
        raw = fh.read(_PRE.size)
        if len(raw) != _PRE.size:
            raise CacheError(f"{path}: too short for a header")
        magic, ver, fq, flimit, grid_n, flags = _PRE.unpack(raw)
        if magic != MAGIC:
            raise CacheError(f"{path}: bad magic {magic!r}")
        if ver != FORMAT_VERSION:
            raise CacheError(f"{path}: format version {ver}, expected {FORMAT_VERSION}")
        if flags != 0:
            raise CacheError(f"{path}: unknown flags {flags:#x}")
        if (fq, flimit, grid_n) != (int(q), int(limit), len(cps)):
            raise CacheError(
                f"{path}: header is for q={fq} limit={flimit} grid={grid_n}, "
                f"requested q={q} limit={limit} grid={len(cps)}"
            )
        (m,) = struct.unpack("<I", fh.read(4))
        if m != len(units):
            raise CacheError(f"{path}: {m} residues, expected {len(units)}")
        fres = struct.unpack(f"<{m}I", fh.read(4 * m))
        if fres != units:
            raise CacheError(f"{path}: residue set {fres} does not match {units}")
        (ncomplete,) = struct.unpack("<I", fh.read(4))
    cache = CountCache(path, int(q), int(limit), cps, units, int(ncomplete))
    if ncomplete > grid_n:
        raise CacheError(f"{path}: counter {ncomplete} exceeds grid {grid_n}")
    if size < cache._record_offset(ncomplete):
        raise CacheError(
            f"{path}: file holds fewer records than its counter ({ncomplete}) claims"
        )
    return cache
