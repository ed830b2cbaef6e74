"""Command line interface.

Subcommands mirror the library layers: `race` sieves and writes the
normalized series, `zeros` computes and saves L-function zeros, `density`
estimates the limiting lead densities, `signchange` locates the first strict
crossing, and `compare` lines the sieved series up against the truncated
zero-sum prediction. Every command writes its primary output to a file and a
JSON run manifest next to it.

Exit codes: 0 success, 2 bad arguments or unsupported request, 3 unreadable
or inconsistent data files, 4 a violated internal invariant (a bug or a
numerically impossible configuration, never user error).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, cache, model, race, zeros
from .characters import characters
from .explicit import predict_delta, predict_delta2, rms_misfit
from .lfunctions import UnsupportedCharacterError
from .manifest import RunManifest, manifest_path_for
from .model import build_limit_rv, density_delta, density_delta2
from .race import RaceConfig, normalize
from .zeros import ZeroFileError, find_zeros, load_zeros, save_zeros

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4

_WHICH_SIGN = {
    "delta-negative": race.SIGN_DELTA_NEGATIVE,
    "delta2-positive": race.SIGN_DELTA2_POSITIVE,
}


def _count(text: str) -> int:
    """Integer argument that tolerates scientific notation (1e8, 2.5e6)."""
    try:
        return int(text)
    except ValueError:
        pass
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if value != int(value):
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(value)


def _default_workers() -> int:
    return os.cpu_count() or 1


def _parameters(args: argparse.Namespace) -> dict:
    skip = {"func", "command"}
    out = {}
    for key, val in sorted(vars(args).items()):
        if key in skip:
            continue
        out[key] = str(val) if isinstance(val, Path) else val
    return out


def _begin(args: argparse.Namespace, **extra) -> RunManifest:
    return RunManifest(command=args.command, parameters=_parameters(args), **extra)


def _finish(man: RunManifest, outputs: list) -> None:
    man.finish([str(p) for p in outputs])
    man.write(manifest_path_for(outputs[0]))


def _resolve_zero_lists(q: int, paths: list[str] | None, T: float) -> list[zeros.ZeroList]:
    """Ingested lists when paths are given, otherwise computed up to T."""
    if paths:
        return [load_zeros(p, expect_q=q) for p in paths]
    out = []
    for chi in characters(q):
        if chi.is_principal:
            continue
        out.append(find_zeros(chi, T))
    return out


# ---------------------------------------------------------------------------
# race

def cmd_race(args: argparse.Namespace) -> int:
    config = RaceConfig.make(args.q, args.a, args.b)
    man = _begin(args)
    cps = [int(c) for c in race.log_grid(args.limit, args.grid, args.grid_start)]

    counts = None
    if args.no_cache:
        counts = race.run_race(
            config, args.limit, cps, workers=args.workers, with_psi2=False
        )
    else:
        path = cache.cache_path(args.q, args.limit, len(cps), args.cache_dir)
        handle, done = None, []
        if path.exists():
            try:
                handle = cache.open_cache(path, args.q, args.limit, cps)
                done = handle.load_completed()
            except cache.CacheError as exc:
                handle, done = None, []
                print(f"warning: ignoring cache: {exc}", file=sys.stderr)
        if handle is None:
            handle = cache.create_cache(path, args.q, args.limit, cps)
        if handle.complete:
            counts = done
        else:
            if done:
                print(
                    f"resuming from cached checkpoint x={done[-1].x} "
                    f"({len(done)}/{len(cps)})",
                    file=sys.stderr,
                )
            fresh = race.run_race(
                config,
                args.limit,
                cps[len(done):],
                workers=args.workers,
                with_psi2=False,
                resume_from=done[-1] if done else None,
                on_checkpoint=handle.append,
            )
            counts = done + fresh

    series = normalize(counts, config)
    out = Path(args.out) if args.out else Path(
        f"race_q{args.q}_a{args.a}_b{args.b}_L{args.limit}.csv"
    )
    series.write_csv(out)
    _finish(man, [out])

    last = counts[-1]
    d1 = race.delta(last, config.a, config.b)
    d2 = race.delta2(last, config.a, config.b)
    print(f"wrote {out} ({len(counts)} checkpoints)")
    print(
        f"final x={last.x}: delta={d1:+d} delta2={d2:+d} "
        f"delta_norm={series.delta_norm[-1]:+.4f} "
        f"delta2_norm={series.delta2_norm[-1]:+.4f} "
        f"sigma={series.sigma[-1]:+.4f}"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# zeros

def cmd_zeros(args: argparse.Namespace) -> int:
    q = args.q
    man = _begin(args)
    targets = [chi for chi in characters(q) if not chi.is_principal]
    if not targets:
        raise ValueError(f"no nonprincipal characters mod {q}")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = []
    for chi in targets:
        zl = find_zeros(chi, args.T, step=args.step)
        path = out_dir / f"zeros_q{q}_chi{chi.index}_T{args.T:g}.txt"
        save_zeros(zl, path)
        outputs.append(path)
        deviation, allowance = zl.count_check()
        print(
            f"chi index {chi.index} mod {q}: {zl.gammas.size} zeros up to "
            f"T={args.T:g} -> {path} (count deviation {deviation:.2f}, "
            f"allowed {allowance:.2f})"
        )
    _finish(man, outputs)
    return EXIT_OK


# ---------------------------------------------------------------------------
# density

def cmd_density(args: argparse.Namespace) -> int:
    config = RaceConfig.make(args.q, args.a, args.b)
    man = _begin(args, rng="philox4x64", seed=args.seed)
    zero_lists = _resolve_zero_lists(args.q, args.zeros, args.T)
    rv = build_limit_rv(config, zero_lists, with_tail=not args.no_tail)

    which = ["delta", "delta2"] if args.which == "both" else [args.which]
    rows = []
    for name in which:
        fn = density_delta if name == "delta" else density_delta2
        est = fn(rv, count=args.samples, seed=args.seed, workers=args.workers)
        rows.append((name, est))
        print(
            f"{name} lead density = {est.value:.5f} +/- {est.half_width:.5f} "
            f"(95% CI, {est.samples} samples, T={rv.zero_height:g}, "
            f"tail sigma={rv.tail_sigma:.5f})"
        )

    out = Path(args.out) if args.out else Path(
        f"density_q{args.q}_a{args.a}_b{args.b}.csv"
    )
    with open(out, "w") as fh:
        fh.write("q,a,b,which,T,samples,seed,value,ci_half_width,tail_sigma\n")
        for name, est in rows:
            fh.write(
                f"{args.q},{args.a},{args.b},{name},{rv.zero_height:g},"
                f"{est.samples},{args.seed},{est.value:.17g},"
                f"{est.half_width:.17g},{rv.tail_sigma:.17g}\n"
            )
    _finish(man, [out])
    print(f"wrote {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# signchange

def cmd_signchange(args: argparse.Namespace) -> int:
    man = _begin(args)
    found = race.first_sign_change(
        args.q,
        args.a,
        args.b,
        _WHICH_SIGN[args.which],
        args.limit,
        workers=args.workers,
    )
    print(found if found is not None else "none")
    out = Path(args.out) if args.out else Path(
        f"signchange_q{args.q}_a{args.a}_b{args.b}_{args.which}.csv"
    )
    with open(out, "w") as fh:
        fh.write("q,a,b,which,limit,x\n")
        fh.write(
            f"{args.q},{args.a},{args.b},{args.which},{args.limit},"
            f"{found if found is not None else ''}\n"
        )
    _finish(man, [out])
    return EXIT_OK


# ---------------------------------------------------------------------------
# compare

def cmd_compare(args: argparse.Namespace) -> int:
    config = RaceConfig.make(args.q, args.a, args.b)
    man = _begin(args)
    zero_lists = _resolve_zero_lists(args.q, args.zeros, args.T0)

    counts = race.run_race(
        config,
        args.limit,
        race.log_grid(args.limit, args.grid, args.grid_start),
        workers=args.workers,
        with_psi2=False,
    )
    series = normalize(counts, config)

    kappa = args.kappa if args.kappa > 0 else None
    pred1 = predict_delta(series.x, config, zero_lists, args.T0, kappa=kappa)
    pred2 = predict_delta2(series.x, config, zero_lists, args.T0)

    out = Path(args.out) if args.out else Path(
        f"compare_q{args.q}_a{args.a}_b{args.b}_L{args.limit}.csv"
    )
    with open(out, "w") as fh:
        fh.write(
            "x,measured_delta_norm,predicted_delta_norm,"
            "measured_delta2_norm,predicted_delta2_norm\n"
        )
        for i, x in enumerate(series.x):
            fh.write(
                f"{int(x)},{series.delta_norm[i]:.17g},{pred1.values[i]:.17g},"
                f"{series.delta2_norm[i]:.17g},{pred2.values[i]:.17g}\n"
            )
    _finish(man, [out])

    rms1 = rms_misfit(series, pred1)
    rms2 = float(np.sqrt(np.mean((series.delta2_norm - pred2.values) ** 2)))
    print(f"wrote {out} ({series.x.size} checkpoints)")
    print(
        f"rms misfit: delta {rms1:.4f}, delta2 {rms2:.4f} "
        f"(T0={args.T0:g}, kappa={pred1.kappa:g})"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser

def _add_race_triple(p: argparse.ArgumentParser) -> None:
    p.add_argument("--q", type=int, required=True, help="modulus (>= 3)")
    p.add_argument("--a", type=int, required=True, help="leading residue class")
    p.add_argument("--b", type=int, required=True, help="trailing residue class")


def _add_workers(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--workers",
        type=int,
        default=_default_workers(),
        help="worker threads (default: all cores)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="primerace",
        description="Prime and semiprime races in arithmetic progressions.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("race", help="sieve and write the normalized race series")
    _add_race_triple(p)
    p.add_argument("--limit", type=_count, required=True, help="sieve up to this x")
    p.add_argument("--grid", type=int, default=race.DEFAULT_GRID_POINTS,
                   help="number of log-spaced checkpoints")
    p.add_argument("--grid-start", type=_count, default=race.DEFAULT_GRID_START,
                   help="first checkpoint (clamped to the limit)")
    p.add_argument("--out", help="output CSV (default: race_q..._L....csv)")
    p.add_argument("--no-cache", action="store_true",
                   help="do not read or write the checkpoint cache")
    p.add_argument("--cache-dir", type=Path, default=None,
                   help=f"cache directory (default: ${cache.ENV_CACHE_DIR} "
                        "or ~/.cache/primerace)")
    _add_workers(p)
    p.set_defaults(func=cmd_race)

    p = sub.add_parser("zeros", help="compute L-function zeros and save zero files")
    p.add_argument("--q", type=int, required=True, help="modulus")
    p.add_argument("--T", type=float, default=model.DEFAULT_HEIGHT,
                   help="scan height (default 300)")
    p.add_argument("--step", type=float, default=zeros.DEFAULT_STEP,
                   help="scan grid step (default 1e-3)")
    p.add_argument("--out-dir", default=".", help="directory for zero files")
    p.set_defaults(func=cmd_zeros)

    p = sub.add_parser("density", help="Monte Carlo limiting lead densities")
    _add_race_triple(p)
    p.add_argument("--which", choices=["delta", "delta2", "both"], default="both",
                   help="which race's lead density")
    p.add_argument("--T", type=float, default=model.DEFAULT_HEIGHT,
                   help="zero height (default 300)")
    p.add_argument("--samples", type=_count, default=model.DEFAULT_SAMPLES,
                   help="Monte Carlo draws (default 2e6)")
    p.add_argument("--seed", type=int, default=model.DEFAULT_SEED)
    p.add_argument("--zeros", nargs="+", metavar="FILE",
                   help="ingest zero files instead of computing")
    p.add_argument("--no-tail", action="store_true",
                   help="drop the Gaussian tail for zeros above T")
    p.add_argument("--out", help="output CSV (default: density_q....csv)")
    _add_workers(p)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("signchange", help="first strict sign crossing of a race")
    _add_race_triple(p)
    p.add_argument("--which", choices=sorted(_WHICH_SIGN), required=True)
    p.add_argument("--limit", type=_count, required=True, help="scan up to this n")
    p.add_argument("--out", help="output CSV (default: signchange_q....csv)")
    _add_workers(p)
    p.set_defaults(func=cmd_signchange)

    p = sub.add_parser("compare", help="measured series vs truncated zero-sum prediction")
    _add_race_triple(p)
    p.add_argument("--limit", type=_count, required=True, help="sieve up to this x")
    p.add_argument("--T0", type=float, default=100.0,
                   help="truncation height of the zero sum (default 100)")
    p.add_argument("--grid", type=int, default=race.DEFAULT_GRID_POINTS)
    p.add_argument("--grid-start", type=_count, default=race.DEFAULT_GRID_START)
    p.add_argument("--kappa", type=float, default=0.0,
                   help="zero-sum prefactor; <= 0 means the default 1/phi(q)")
    p.add_argument("--zeros", nargs="+", metavar="FILE",
                   help="ingest zero files instead of computing")
    p.add_argument("--out", help="output CSV (default: compare_q....csv)")
    _add_workers(p)
    p.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ZeroFileError, cache.CacheError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (UnsupportedCharacterError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RuntimeError, AssertionError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
