"""Prime and semiprime races in arithmetic progressions.

Counts, for residue classes a and b mod q, the functions

    pi(x; q, r)   = #{p <= x prime, p = r mod q}
    pi2(x; q, r)  = #{n <= x, n = p1*p2 (p1 = p2 allowed), n = r mod q}
    psi(x; q, r)  = sum of log p over prime powers p^k <= x, p^k = r mod q
    psi2(x; q, r) = sum of log(p1) log(p2) over products of two prime powers

and derives the normalized race signals

    delta_norm(x)  = (log x / sqrt x) * (pi(x;q,a) - pi(x;q,b))
    delta2_norm(x) = (log x / (sqrt x log log x)) * (pi2(x;q,a) - pi2(x;q,b))
    sigma(x)       = delta2_norm - (n_sqrt(q,b) - n_sqrt(q,a)) / (2 phi(q))
                     + delta_norm

sigma is the residual that decays in quadratic mean when the two races are
combined; its window average is the main desk-scale diagnostic.

Counts accumulate by streaming classified sieve segments once and
snapshotting at checkpoints. psi2 is filled in afterwards by the hyperbola
method over per-residue prime-power tables (it needs the complete table up to
the limit, so it cannot be streamed).
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from . import sieve
from .sieve import PRIME, SEMIPRIME, Segment

DEFAULT_GRID_POINTS = 400
DEFAULT_GRID_START = 1000
PSI2_AUTO_LIMIT = 10**8

SIGN_DELTA_NEGATIVE = "delta_negative"
SIGN_DELTA2_POSITIVE = "delta2_positive"


@dataclass(frozen=True)
class RaceConfig:
    """A race between residue classes a and b modulo q."""

    q: int
    a: int
    b: int
    phi_q: int
    coprime_residues: tuple[int, ...]

    @staticmethod
    def make(q: int, a: int, b: int) -> "RaceConfig":
        q, a, b = int(q), int(a), int(b)
        if q < 3:
            raise ValueError(f"q must be >= 3, got {q}")
        a %= q
        b %= q
        if math.gcd(a, q) != 1 or math.gcd(b, q) != 1:
            raise ValueError(f"residues must be coprime to q={q}: a={a}, b={b}")
        if a == b:
            raise ValueError(f"residues must be distinct, got a == b == {a}")
        units = tuple(r for r in range(1, q) if math.gcd(r, q) == 1)
        return RaceConfig(q, a, b, len(units), units)


@dataclass
class CountVector:
    """All counting functions at a single checkpoint x.

    Maps are keyed by the residues coprime to q. psi2 is None when the
    quadratic weights were not requested.
    """

    x: int
    pi: dict[int, int]
    pi2: dict[int, int]
    psi: dict[int, float]
    psi2: dict[int, float] | None = None


@dataclass
class RaceSeries:
    """Normalized race signals sampled on an ascending grid of checkpoints."""

    x: np.ndarray
    delta_norm: np.ndarray
    delta2_norm: np.ndarray
    sigma: np.ndarray
    config: RaceConfig

    CSV_HEADER = "x,delta_norm,delta2_norm,sigma"

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.CSV_HEADER + "\n")
            for xi, d1, d2, sg in zip(self.x, self.delta_norm, self.delta2_norm, self.sigma):
                fh.write(f"{int(xi)},{d1:.17g},{d2:.17g},{sg:.17g}\n")

    @staticmethod
    def read_csv(path, config: RaceConfig) -> "RaceSeries":
        data = np.genfromtxt(path, delimiter=",", names=True)
        data = np.atleast_1d(data)
        return RaceSeries(
            x=data["x"].astype(np.int64),
            delta_norm=np.asarray(data["delta_norm"], dtype=float),
            delta2_norm=np.asarray(data["delta2_norm"], dtype=float),
            sigma=np.asarray(data["sigma"], dtype=float),
            config=config,
        )


def n_sqrt(q: int, a: int) -> int:
    """Number of square roots of a among the units mod q."""
    q, a = int(q), int(a) % q
    if q < 1:
        raise ValueError(f"q must be positive, got {q}")
    return sum(1 for r in range(1, q + 1) if math.gcd(r, q) == 1 and r * r % q == a)


def delta(counts: CountVector, a: int, b: int) -> int:
    """pi(x; q, a) - pi(x; q, b) at the checkpoint."""
    return counts.pi[a] - counts.pi[b]


def delta2(counts: CountVector, a: int, b: int) -> int:
    """pi2(x; q, a) - pi2(x; q, b) at the checkpoint."""
    return counts.pi2[a] - counts.pi2[b]


def log_grid(limit: int, points: int = DEFAULT_GRID_POINTS,
             start: int = DEFAULT_GRID_START) -> np.ndarray:
    """Log-spaced integer checkpoints from start (clamped to limit) up to limit."""
    limit = int(limit)
    start = min(int(start), limit)
    if start < 3:
        raise ValueError("grid must start above e for the normalizations")
    raw = np.geomspace(start, limit, num=points)
    grid = np.unique(np.rint(raw).astype(np.int64))
    grid[-1] = limit
    return grid


# ---------------------------------------------------------------------------
# accumulation

def _prime_power_corrections(limit: int, q: int):
    """(value, log p, residue) for proper prime powers p^k <= limit, k >= 2,
    gcd(p, q) = 1, sorted by value."""
    vals, logs, res = [], [], []
    for p in sieve.base_primes(max(2, math.isqrt(limit))):
        p = int(p)
        if math.gcd(p, q) != 1:
            continue
        pk = p * p
        while pk <= limit:
            vals.append(pk)
            logs.append(math.log(p))
            res.append(pk % q)
            pk *= p
    order = np.argsort(np.array(vals, dtype=np.int64), kind="stable")
    return (
        np.array(vals, dtype=np.int64)[order],
        np.array(logs, dtype=float)[order],
        np.array(res, dtype=np.int64)[order],
    )


def accumulate(
    stream: Iterable[Segment],
    checkpoints: Sequence[int],
    q: int,
    *,
    with_psi2: bool | None = None,
    resume_from: CountVector | None = None,
    on_checkpoint: Callable[[CountVector], None] | None = None,
) -> list[CountVector]:
    """Stream classified segments once, snapshotting counts at each checkpoint.

    The stream must tile [2, max(checkpoints)] contiguously (or
    [resume_from.x + 1, ...] when resuming); any gap is a hard error, since a
    missing block would silently corrupt every later count. with_psi2=None
    enables the quadratic weights automatically when the top checkpoint is at
    most 1e8 (the prime table at 1e9 costs ~600 MB). on_checkpoint fires as
    each snapshot completes, before the quadratic weights exist; the cache
    uses it to persist progress mid-run.
    """
    q = int(q)
    if q < 3:
        raise ValueError(f"q must be >= 3, got {q}")
    cps = [int(c) for c in checkpoints]
    if not cps:
        raise ValueError("need at least one checkpoint")
    if any(y <= x for x, y in zip(cps, cps[1:])):
        raise ValueError("checkpoints must be strictly ascending")
    if cps[0] < 2:
        raise ValueError(f"checkpoints start at 2, got {cps[0]}")
    top = cps[-1]
    if with_psi2 is None:
        with_psi2 = top <= PSI2_AUTO_LIMIT

    units = tuple(r for r in range(1, q) if math.gcd(r, q) == 1)
    units_arr = np.array(units, dtype=np.int64)
    slot = {r: i for i, r in enumerate(units)}
    m = len(units)

    pp_vals, pp_logs, pp_res = _prime_power_corrections(top, q)

    cnt1 = np.zeros(m, dtype=np.int64)
    cnt2 = np.zeros(m, dtype=np.int64)
    theta = np.zeros(m, dtype=float)
    expected_lo = 2
    if resume_from is not None:
        if set(resume_from.pi) != set(units):
            raise ValueError("resume state has mismatched residues")
        for r, i in slot.items():
            cnt1[i] = resume_from.pi[r]
            cnt2[i] = resume_from.pi2[r]
            theta[i] = resume_from.psi[r]
        # theta tracks primes only; snapshots re-add every proper power <= x,
        # so strip the powers below the resume point back out
        k = int(np.searchsorted(pp_vals, resume_from.x, side="right"))
        if k:
            w = np.bincount(pp_res[:k] % q, weights=pp_logs[:k], minlength=q)
            theta -= w[units_arr]
        expected_lo = resume_from.x + 1
        if cps[0] <= resume_from.x:
            raise ValueError("checkpoints must lie beyond the resume point")

    def snapshot(x: int) -> CountVector:
        # theta so far covers primes only; add log p for proper powers <= x
        k = int(np.searchsorted(pp_vals, x, side="right"))
        psi_now = theta.copy()
        if k:
            w = np.bincount(pp_res[:k] % q, weights=pp_logs[:k], minlength=q)
            psi_now += w[units_arr]
        return CountVector(
            x=x,
            pi={r: int(cnt1[i]) for r, i in slot.items()},
            pi2={r: int(cnt2[i]) for r, i in slot.items()},
            psi={r: float(psi_now[i]) for r, i in slot.items()},
        )

    out: list[CountVector] = []
    cp_iter = iter(cps)
    next_cp = next(cp_iter)

    for seg in stream:
        if seg.lo != expected_lo:
            raise ValueError(
                f"stream gap: expected segment starting at {expected_lo}, got {seg.lo}"
            )
        expected_lo = seg.hi
        cats = seg.classes()
        res = (np.arange(seg.lo, seg.hi, dtype=np.int64) % q).astype(np.int64)
        nvals = None  # lazy; only needed for psi weights

        cursor = seg.lo
        while True:
            stop_at = seg.hi if next_cp is None or next_cp >= seg.hi else next_cp + 1
            i0, i1 = cursor - seg.lo, stop_at - seg.lo
            if i1 > i0:
                c = cats[i0:i1]
                r = res[i0:i1]
                p_mask = c == PRIME
                s_mask = c == SEMIPRIME
                cnt1 += np.bincount(r[p_mask], minlength=q)[units_arr]
                cnt2 += np.bincount(r[s_mask], minlength=q)[units_arr]
                if nvals is None:
                    nvals = np.arange(seg.lo, seg.hi, dtype=np.int64)
                logs = np.log(nvals[i0:i1][p_mask].astype(float))
                theta += np.bincount(r[p_mask], weights=logs, minlength=q)[units_arr]
            cursor = stop_at
            if next_cp is not None and cursor == next_cp + 1:
                out.append(snapshot(next_cp))
                if on_checkpoint is not None:
                    on_checkpoint(out[-1])
                next_cp = next(cp_iter, None)
            if cursor >= seg.hi:
                break
        if next_cp is None:
            break

    if next_cp is not None:
        raise ValueError(
            f"stream ended at {expected_lo - 1} before checkpoint {next_cp}"
        )

    if with_psi2:
        fill_psi2(out, q)
    return out


def _prime_power_tables(limit: int, q: int, units: Sequence[int]):
    """Per-residue-class sorted prime-power values and prefix sums of log p,
    restricted to classes coprime to q."""
    primes = sieve.base_primes(limit)
    pvals = primes[np.gcd(primes, q) == 1]
    plogs = np.log(pvals.astype(float))
    xvals, xlogs, xres = _prime_power_corrections(limit, q)

    tables = {}
    pres = (pvals % q).astype(np.int64)
    for r in units:
        v1 = pvals[pres == r]
        l1 = plogs[pres == r]
        sel = xres == r
        v = np.concatenate((v1, xvals[sel]))
        l = np.concatenate((l1, xlogs[sel]))
        order = np.argsort(v, kind="stable")
        v = v[order]
        cum = np.concatenate(([0.0], np.cumsum(l[order])))
        tables[r] = (v, cum)
    return tables


def fill_psi2(out: Sequence[CountVector], q: int) -> None:
    """Compute the quadratic-weight counts in place for every CountVector.

    Runs after streaming (it needs the full prime table up to the largest x),
    so cached counts can be rehydrated without repeating the sieve.
    """
    if not out:
        return
    q = int(q)
    units = tuple(r for r in range(1, q) if math.gcd(r, q) == 1)
    top = max(cv.x for cv in out)
    tables = _prime_power_tables(top, q, units)
    inv = {r: pow(r, -1, q) for r in units}

    def chi_sum(cls: int, y: int) -> float:
        v, cum = tables[cls]
        return float(cum[np.searchsorted(v, y, side="right")])

    for cv in out:
        x = cv.x
        root = math.isqrt(x)
        psi2 = {}
        for r in units:
            total = 0.0
            for s in units:
                v, cum = tables[s]
                k = int(np.searchsorted(v, root, side="right"))
                if k:
                    tcls = (r * inv[s]) % q
                    tv, tcum = tables[tcls]
                    y = x // v[:k]
                    idx = np.searchsorted(tv, y, side="right")
                    lam = np.diff(cum[: k + 1])
                    total += float(np.dot(lam, tcum[idx]))
            boundary = sum(
                chi_sum(s, root) * chi_sum((r * inv[s]) % q, root) for s in units
            )
            psi2[r] = 2.0 * total - boundary
        cv.psi2 = psi2


def run_race(
    config: RaceConfig,
    limit: int,
    checkpoints: Sequence[int] | None = None,
    *,
    segment_size: int = sieve.SEGMENT_SIZE,
    workers: int = 1,
    with_psi2: bool | None = None,
    resume_from: CountVector | None = None,
    on_checkpoint: Callable[[CountVector], None] | None = None,
) -> list[CountVector]:
    """Sieve up to limit and accumulate counts for config at the checkpoints."""
    if checkpoints is None:
        checkpoints = log_grid(limit)
    cps = [int(c) for c in checkpoints]
    start = 2 if resume_from is None else resume_from.x + 1
    stream = sieve.segment_stream(
        start, cps[-1] + 1, segment_size=segment_size, workers=workers
    )
    return accumulate(
        stream,
        cps,
        config.q,
        with_psi2=with_psi2,
        resume_from=resume_from,
        on_checkpoint=on_checkpoint,
    )


# ---------------------------------------------------------------------------
# normalization

def normalize(counts: Sequence[CountVector], config: RaceConfig) -> RaceSeries:
    """Turn checkpoint counts into the normalized race signals.

    Every checkpoint must satisfy x > e, otherwise log log x is not positive
    and the semiprime normalization is meaningless.
    """
    xs = np.array([cv.x for cv in counts], dtype=np.int64)
    if xs.size == 0:
        raise ValueError("no checkpoints to normalize")
    if xs.min() <= math.e:
        raise ValueError(f"normalization requires every x > e, got {xs.min()}")
    a, b = config.a, config.b
    d1 = np.array([delta(cv, a, b) for cv in counts], dtype=float)
    d2 = np.array([delta2(cv, a, b) for cv in counts], dtype=float)
    xf = xs.astype(float)
    lx = np.log(xf)
    llx = np.log(lx)
    delta_norm = lx / np.sqrt(xf) * d1
    delta2_norm = lx / (np.sqrt(xf) * llx) * d2
    shift = (n_sqrt(config.q, config.b) - n_sqrt(config.q, config.a)) / (2 * config.phi_q)
    sigma = delta2_norm - shift + delta_norm
    return RaceSeries(xs, delta_norm, delta2_norm, sigma, config)


# ---------------------------------------------------------------------------
# exact integer scans

def _event_scan(config: RaceConfig, signal: str, limit: int,
                segment_size: int, workers: int):
    """Yield (lo, hi, running) where running[i] is the race difference at
    n = lo + i, inclusive of the jump at n itself."""
    if signal == "delta":
        want = PRIME
    elif signal == "delta2":
        want = SEMIPRIME
    else:
        raise ValueError(f"unknown signal {signal!r}")
    q, a, b = config.q, config.a, config.b
    prior = 0
    for seg in sieve.segment_stream(
        2, limit + 1, segment_size=segment_size, workers=workers
    ):
        cats = seg.classes()
        res = np.arange(seg.lo, seg.hi, dtype=np.int64) % q
        ev = np.zeros(seg.hi - seg.lo, dtype=np.int64)
        ev[(cats == want) & (res == a)] = 1
        ev[(cats == want) & (res == b)] = -1
        running = np.cumsum(ev) + prior
        yield seg.lo, seg.hi, running
        prior = int(running[-1])


def first_sign_change(
    q: int,
    a: int,
    b: int,
    which: str,
    limit: int,
    *,
    segment_size: int = sieve.SEGMENT_SIZE,
    workers: int = 1,
) -> int | None:
    """Smallest n <= limit where the race difference strictly crosses.

    which = "delta_negative":   first n with pi(n;q,a) - pi(n;q,b) < 0
    which = "delta2_positive":  first n with pi2(n;q,a) - pi2(n;q,b) > 0

    Step functions are evaluated at integers, so a jump at n counts from n
    itself. Returns None when no crossing occurs up to the limit.
    """
    config = RaceConfig.make(q, a, b)
    if which == SIGN_DELTA_NEGATIVE:
        signal, hit = "delta", lambda run: run < 0
    elif which == SIGN_DELTA2_POSITIVE:
        signal, hit = "delta2", lambda run: run > 0
    else:
        raise ValueError(
            f"which must be {SIGN_DELTA_NEGATIVE!r} or {SIGN_DELTA2_POSITIVE!r}, "
            f"got {which!r}"
        )
    for lo, hi, running in _event_scan(config, signal, limit, segment_size, workers):
        mask = hit(running)
        if mask.any():
            return lo + int(np.argmax(mask))
    return None


def empirical_log_density(
    q: int,
    a: int,
    b: int,
    X: int,
    signal: str = "delta",
    *,
    segment_size: int = sieve.SEGMENT_SIZE,
    workers: int = 1,
) -> float:
    """Logarithmic density proxy of the lead set up to X:

        (1 / log X) * sum over n <= X with difference > 0 of 1/n

    signal selects the prime race ("delta") or semiprime race ("delta2").
    """
    if X < 2:
        raise ValueError(f"X must be >= 2, got {X}")
    config = RaceConfig.make(q, a, b)
    acc = 0.0
    for lo, hi, running in _event_scan(config, signal, X, segment_size, workers):
        mask = running > 0
        if mask.any():
            n = np.arange(lo, hi, dtype=float)
            acc += float((1.0 / n[mask]).sum())
    return acc / math.log(X)
