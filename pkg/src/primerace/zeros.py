"""Critical-line zero lists: scanning, refinement, and the file format.

find_zeros locates the ordinates gamma > 0 of L(1/2 + i gamma, chi) for the
built-in characters by scanning the rotated real function on a fine grid and
bisecting each sign change. Every zero is recorded with multiplicity 1 (the
scan cannot see higher multiplicity, and none is expected); the count is
checked against the smooth estimate and a mismatch is a hard error, since it
means the grid step missed a close pair.

Zero files let external computations feed the same pipeline:

    ZEROS v1
    q=4 chi=1 height=300.0
    # comment lines start with '#'
    6.0209489046975965 1
    10.243770304566747 1
    ...

Line 1 is the exact magic string, line 2 the header (chi is the index into
characters(q) in canonical order), then one "gamma multiplicity" pair per
line, gammas strictly ascending and positive. Parse errors carry 1-based
line numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import lfunctions
from .characters import DirichletCharacter, characters

MAGIC = "ZEROS v1"
DEFAULT_STEP = 1e-3
REFINE_TOL = 1e-9
COUNT_SLACK = 2.0  # allowed |found - estimate|, plus log T


class ZeroFileError(ValueError):
    """Malformed or inconsistent zero file."""


@dataclass
class ZeroList:
    """Ordinates of the zeros of one character's L-function up to a height.

    gammas are strictly ascending positive floats; multiplicities are
    positive ints (always 1 for computed lists); source records whether the
    list was computed here or ingested from a file.
    """

    character: DirichletCharacter
    gammas: np.ndarray
    multiplicities: np.ndarray
    height: float
    source: str = "computed"

    def __post_init__(self):
        self.gammas = np.asarray(self.gammas, dtype=float)
        self.multiplicities = np.asarray(self.multiplicities, dtype=np.int64)
        if self.gammas.ndim != 1 or self.multiplicities.shape != self.gammas.shape:
            raise ValueError("gammas and multiplicities must be matching 1-d arrays")
        if self.gammas.size and self.gammas[0] <= 0:
            raise ValueError("ordinates must be positive")
        if np.any(np.diff(self.gammas) <= 0):
            raise ValueError("ordinates must be strictly ascending")
        if np.any(self.multiplicities < 1):
            raise ValueError("multiplicities must be >= 1")
        if not self.height > 0:
            raise ValueError(f"height must be positive, got {self.height}")
        if self.source not in ("computed", "ingested"):
            raise ValueError(f"source must be computed|ingested, got {self.source}")

    def count_check(self) -> tuple[float, float]:
        """(deviation, allowance) of the zero count against the smooth
        estimate; deviation <= allowance is the completeness invariant."""
        est = lfunctions.zero_count_estimate(self.character, self.height)
        found = float(self.multiplicities.sum())
        return abs(found - est), COUNT_SLACK + math.log(max(self.height, math.e))


def find_zeros(
    chi: DirichletCharacter,
    T: float,
    step: float = DEFAULT_STEP,
) -> ZeroList:
    """Scan (0, T] for zeros of the built-in characters' L-functions.

    Sign changes of the rotated function on a grid of the given step are
    bisected to 1e-9. If the resulting count disagrees with the smooth
    estimate by more than 2 + log T, the step was too coarse (a close pair
    slipped through) and the scan fails loudly rather than return an
    incomplete list.
    """
    T = float(T)
    if not 0 < T <= lfunctions.MAX_IMAG:
        raise ValueError(f"need 0 < T <= {lfunctions.MAX_IMAG}, got {T}")
    if not 0 < step <= 0.05:
        raise ValueError(f"step must be in (0, 0.05], got {step}")
    lfunctions._require_builtin(chi)

    npts = int(math.floor(T / step)) + 1
    ts = np.arange(1, npts + 1, dtype=float) * step
    ts = ts[ts <= T + 1e-12]
    zv = lfunctions.hardy_z_block(ts, chi)

    sign_flip = np.nonzero((zv[:-1] * zv[1:] < 0) | (zv[:-1] == 0.0))[0]
    gammas = []
    for i in sign_flip:
        lo, hi = float(ts[i]), float(ts[i + 1])
        flo, fhi = float(zv[i]), float(zv[i + 1])
        if flo == 0.0:
            gammas.append(lo)
            continue
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            fmid = lfunctions.hardy_z(mid, chi)
            if fmid == 0.0:
                lo = hi = mid
                break
            if (flo < 0) != (fmid < 0):
                hi, fhi = mid, fmid
            else:
                lo, flo = mid, fmid
            if hi - lo < REFINE_TOL:
                break
        gammas.append(0.5 * (lo + hi))
    # trailing grid point exactly on a zero
    if zv.size and zv[-1] == 0.0:
        gammas.append(float(ts[-1]))

    zl = ZeroList(
        character=chi,
        gammas=np.array(gammas, dtype=float),
        multiplicities=np.ones(len(gammas), dtype=np.int64),
        height=T,
        source="computed",
    )
    deviation, allowance = zl.count_check()
    if deviation > allowance:
        raise RuntimeError(
            f"zero count {len(gammas)} deviates from the estimate by "
            f"{deviation:.2f} (allowed {allowance:.2f}); the scan step "
            f"{step} is too coarse for height {T}"
        )
    return zl


def save_zeros(zl: ZeroList, path) -> None:
    """Write a zero file; floats use repr so a round trip is bit-exact."""
    with open(path, "w") as fh:
        fh.write(MAGIC + "\n")
        fh.write(f"q={zl.character.q} chi={zl.character.index} height={zl.height!r}\n")
        for g, m in zip(zl.gammas, zl.multiplicities):
            fh.write(f"{float(g)!r} {int(m)}\n")


def load_zeros(path, expect_q: int | None = None) -> ZeroList:
    """Parse a zero file; every failure names the offending line."""
    with open(path) as fh:
        lines = fh.read().splitlines()

    def fail(lineno: int, msg: str):
        raise ZeroFileError(f"{path}: line {lineno}: {msg}")

    if not lines or lines[0].strip() != MAGIC:
        fail(1, f"expected magic {MAGIC!r}, got {lines[0]!r}" if lines else "empty file")
    if len(lines) < 2:
        fail(2, "missing header line")
    header = lines[1].split()
    fields = {}
    for part in header:
        if "=" not in part:
            fail(2, f"malformed header field {part!r}")
        k, v = part.split("=", 1)
        fields[k] = v
    for key in ("q", "chi", "height"):
        if key not in fields:
            fail(2, f"header missing {key}=")
    try:
        q = int(fields["q"])
        chi_index = int(fields["chi"])
        height = float(fields["height"])
    except ValueError as exc:
        fail(2, f"unparseable header value: {exc}")
    if not height > 0:
        fail(2, f"height must be positive, got {height}")
    if expect_q is not None and q != expect_q:
        fail(2, f"modulus mismatch: file has q={q}, expected q={expect_q}")
    try:
        chars = characters(q)
    except ValueError as exc:
        fail(2, str(exc))
    if not 0 <= chi_index < len(chars):
        fail(2, f"chi={chi_index} out of range for q={q} ({len(chars)} characters)")

    gammas, mults = [], []
    prev = 0.0
    for lineno, line in enumerate(lines[2:], start=3):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        parts = text.split()
        if len(parts) != 2:
            fail(lineno, f"expected 'gamma multiplicity', got {text!r}")
        try:
            g = float(parts[0])
            m = int(parts[1])
        except ValueError:
            fail(lineno, f"unparseable values {text!r}")
        if g <= prev:
            fail(lineno, f"ordinates must be strictly ascending: {g} after {prev}")
        if m < 1:
            fail(lineno, f"multiplicity must be >= 1, got {m}")
        if g > height + 1e-9:
            fail(lineno, f"ordinate {g} exceeds declared height {height}")
        gammas.append(g)
        mults.append(m)
        prev = g

    return ZeroList(
        character=chars[chi_index],
        gammas=np.array(gammas, dtype=float),
        multiplicities=np.array(mults, dtype=np.int64),
        height=height,
        source="ingested",
    )
