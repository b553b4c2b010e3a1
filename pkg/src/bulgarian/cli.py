"""Command-line front end: ``bulgarian <command> ...``.

Exit status is 0 on success, 1 on a domain error (the error class name goes
to stderr) or a failed verify suite, and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import verify as _verify
from .dynamics import advance, default_workers, enumerate_recurrent, find_cycle, trajectory
from .errors import SolitaireError
from .marked import surplus_trace, trace_csv
from .partitions import Partition, parse_partition, random_partition
from .rules import parse_rule
from .shapes import (
    EXPONENTIAL,
    TRIANGLE,
    C_HI,
    C_LO,
    LimitShape,
    construction_scale,
    empirical_distance,
    interpolating_shape,
    regime_shape,
    shape_to_stable,
)
from .stability import find_stable, n_star_sweep

PRNG = "numpy PCG64"


class UsageError(Exception):
    pass


def _emit(text: str, out: str | None) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def _int(text: str) -> int:
    """Integers, also written as ``1e6``."""
    v = float(text) if any(c in text for c in "eE.") else int(text)
    if v != int(v):
        raise argparse.ArgumentTypeError(f"not an integer: {text}")
    return int(v)


def _int_list(text: str) -> list[int]:
    return [_int(t) for t in text.split(",") if t]


def _start(args) -> tuple[Partition, dict]:
    """The start partition, or a seeded random one of ``--n`` cards."""
    if args.start is not None:
        return parse_partition(args.start), {}
    if args.n is None:
        raise UsageError("give --start or --n")
    rng = np.random.default_rng(args.seed)
    return random_partition(args.n, rng), {"prng": PRNG, "seed": args.seed}


# commands ------------------------------------------------------------------


def cmd_play(args) -> int:
    rule = parse_rule(args.rule)
    p, meta = _start(args)
    header = {"rule": str(rule), "start": list(p.parts), "moves": args.moves, **meta}
    if args.final:
        end, most = advance(rule, p, args.moves)
        _emit(json.dumps({"header": header, "parts": list(end.parts), "max_sigma": most}), args.out)
        return 0
    traj = trajectory(rule, p, args.moves, every=args.every, diagnostics=args.diagnostics)
    _emit(json.dumps({"header": header}) + "\n" + traj.to_jsonl(), args.out)
    return 0


def cmd_stable(args) -> int:
    rule = parse_rule(args.rule)
    if args.ns:
        rows = [{"n": n, **r.to_dict()} for n, r in zip(args.ns, n_star_sweep(rule, sorted(args.ns)))]
        _emit(json.dumps({"rule": str(rule), "results": rows}), args.out)
        return 0
    if args.n is None:
        raise UsageError("give --n or --ns")
    _emit(json.dumps({"rule": str(rule), "n": args.n, **find_stable(rule, args.n).to_dict()}), args.out)
    return 0


def cmd_cycle(args) -> int:
    rule = parse_rule(args.rule)
    p, meta = _start(args)
    info = find_cycle(rule, p, max_steps=args.max_steps)
    _emit(json.dumps({"rule": str(rule), "start": list(p.parts), **meta, **info.to_dict()}), args.out)
    return 0


def cmd_recurrent(args) -> int:
    rule = parse_rule(args.rule)
    found = enumerate_recurrent(rule, args.n, workers=args.workers)
    body = {"rule": str(rule), "n": args.n, "count": len(found), "configs": [list(p.parts) for p in found]}
    _emit(json.dumps(body), args.out)
    return 0


def _named_shape(args) -> LimitShape:
    if args.C is not None:
        return interpolating_shape(args.C)
    if args.kind == "triangle":
        return TRIANGLE
    if args.kind == "exponential":
        return EXPONENTIAL
    if args.q is not None:
        if args.n is None:
            raise UsageError("--q needs --n")
        return regime_shape(args.q, args.n, args.c_lo, args.c_hi)
    raise UsageError("give --C, --kind, or --q with --n")


def cmd_shape(args) -> int:
    if args.construct is not None:
        if args.n is None:
            raise UsageError("--construct needs --n")
        phi = _named_shape(args)
        p = shape_to_stable(phi, args.construct, args.n)
        scale = construction_scale(args.construct, args.n)
        _emit(json.dumps({"shape": phi.to_dict(), "c": args.construct, "scale": scale, "parts": list(p.parts)}), args.out)
        return 0
    if args.partition is not None or args.stable:
        if args.stable:
            if args.q is None or args.n is None:
                raise UsageError("--stable needs --q and --n")
            p = find_stable(parse_rule(f"q:{args.q}"), args.n).config
        else:
            p = parse_partition(args.partition)
        phi = _named_shape(args)
        _emit(empirical_distance(p, None, phi).to_csv(), args.out)
        return 0
    _emit(_named_shape(args).to_json(), args.out)
    return 0


def cmd_deviation(args) -> int:
    rule = parse_rule(args.rule)
    p, meta = _start(args)
    ref = parse_partition(args.ref)
    text = trace_csv(surplus_trace(rule, p, ref, args.moves))
    if meta:
        text = f"# prng={meta['prng']} seed={meta['seed']}\n" + text
    _emit(text, args.out)
    return 0


def cmd_verify(args) -> int:
    caps = _verify.Caps(seed=args.seed)
    overrides = {k: getattr(args, k) for k in _CAP_FLAGS if getattr(args, k) is not None}
    caps = replace(caps, **overrides)
    reports = _verify.run_suite(args.suite, caps)
    _emit(json.dumps([r.to_dict() for r in reports], indent=2), args.out)
    return 0 if all(r.passed for r in reports) else 1


_CAP_FLAGS = ("exhaustive_n", "cycle_n", "stable_n", "convex_n", "marked_n", "conjecture_n",
              "partition_count_n", "random_pairs", "marked_trials", "pile_count_starts")


def _sweep_item(regime: str, n: int) -> tuple[str, int, dict, list]:
    res, dist = _verify.regime_distance(regime, n)
    q = _verify.regime_q(regime, n)
    row = {"n": n, "q": f"{q.numerator}/{q.denominator}", "C_n": float(n * q * q),
           "n_star": res.n_star, "lambda1": res.lambda1, "ell": res.config.ell,
           "sup_error": dist.sup_error}
    profile = list(zip(dist.grid, dist.empirical, dist.analytic, dist.errors))
    return regime, n, row, profile


def _write_csv(path: Path, header: list[str], rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    path.write_text(buf.getvalue(), encoding="utf-8", newline="\n")


def cmd_sweep(args) -> int:
    for g in args.regimes:
        _verify.regime_q(g, 1)  # reject unknown names before any work
    items = [(g, n) for g in args.regimes for n in args.ns]
    workers = args.workers or default_workers()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_item, *zip(*items)))
    else:
        results = [_sweep_item(g, n) for g, n in items]
    results.sort(key=lambda r: (r[0], r[1]))

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    cols = ["n", "q", "C_n", "n_star", "lambda1", "ell", "sup_error"]
    for g in sorted(set(args.regimes)):
        stem = g.replace(":", "_")
        mine = [r for r in results if r[0] == g]
        _write_csv(out / f"{stem}_distance.csv", cols, [[r[2][c] for c in cols] for r in mine])
        _write_csv(out / f"{stem}_profile.csv", ["n", "x", "empirical", "analytic", "abs_error"],
                   [[r[1], *map(repr, pt)] for r in mine for pt in r[3]])
        files += [f"{stem}_distance.csv", f"{stem}_profile.csv"]
    manifest = {
        "regimes": sorted(set(args.regimes)),
        "ns": sorted(set(args.ns)),
        "q_n": {"triangle": "n^-3/4", "exponential": "n^-1/4", "interp:C": "sqrt(C/n)"},
        "q_rational_max_denominator": 10**12,
        "configuration": "n*-stable",
        "grid": "256 uniform points on [0.1, x_end], step abscissae shifted half a step",
        "files": files,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8", newline="\n")
    return 0


# parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bulgarian", description="Generalized Bulgarian solitaire.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, rule=True, start=False):
        if rule:
            p.add_argument("--rule", required=True, help="q:3/10, levels:1,4@7, table:..., ordinary[@h], or a JSON file")
        if start:
            p.add_argument("--start", help="comma-separated descending parts")
            p.add_argument("--n", type=_int, help="cards in a random start (when --start is absent)")
            p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", help="write here instead of stdout")

    p = sub.add_parser("play", help="iterate the move and export the trajectory")
    common(p, start=True)
    p.add_argument("--moves", type=_int, required=True)
    p.add_argument("--every", type=_int, default=1)
    p.add_argument("--final", action="store_true", help="only the final configuration")
    p.add_argument("--diagnostics", action="store_true", help="check the new-pile bound on every move")
    p.set_defaults(fn=cmd_play)

    p = sub.add_parser("stable", help="stable configuration for n cards, or n*")
    common(p)
    p.add_argument("--n", type=_int)
    p.add_argument("--ns", type=_int_list, help="comma-separated deck sizes")
    p.set_defaults(fn=cmd_stable)

    p = sub.add_parser("cycle", help="tail, period and cycle of an orbit")
    common(p, start=True)
    p.add_argument("--max-steps", type=_int)
    p.set_defaults(fn=cmd_cycle)

    p = sub.add_parser("recurrent", help="every configuration of n cards on a cycle")
    common(p)
    p.add_argument("--n", type=_int, required=True)
    p.add_argument("--workers", type=int)
    p.set_defaults(fn=cmd_recurrent)

    p = sub.add_parser("shape", help="limit shapes, distances and shape-to-stable construction")
    common(p, rule=False)
    p.add_argument("--C", type=float, help="interpolating shape for this C")
    p.add_argument("--kind", choices=["triangle", "exponential"])
    p.add_argument("--q", help="proportion, e.g. 1/1000; with --n picks the regime shape")
    p.add_argument("--n", type=_int)
    p.add_argument("--c-lo", type=float, default=C_LO)
    p.add_argument("--c-hi", type=float, default=C_HI)
    p.add_argument("--partition", help="measure this partition against the shape (CSV)")
    p.add_argument("--stable", action="store_true", help="measure the n*-stable configuration of q:Q")
    p.add_argument("--construct", type=float, metavar="c", help="build a stable partition from the shape")
    p.set_defaults(fn=cmd_shape)

    p = sub.add_parser("deviation", help="surplus/deficit trace of the marked solitaire")
    common(p, start=True)
    p.add_argument("--ref", required=True, help="stable reference partition")
    p.add_argument("--moves", type=_int, required=True)
    p.set_defaults(fn=cmd_deviation)

    p = sub.add_parser("verify", help="run an invariant suite")
    p.add_argument("--suite", default="all")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    for flag in _CAP_FLAGS:
        p.add_argument("--" + flag.replace("_", "-"), dest=flag, type=_int)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("sweep", help="regime convergence CSVs plus a manifest")
    p.add_argument("--regimes", type=lambda s: [t for t in s.split(",") if t],
                   default=["triangle", "exponential", "interp:1", "interp:2.5"])
    p.add_argument("--ns", type=_int_list, default=[10**4, 10**5, 10**6, 10**7])
    p.add_argument("--out-dir", required=True)
    p.add_argument("--workers", type=int)
    p.set_defaults(fn=cmd_sweep)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except SolitaireError as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return 1
    except (UsageError, ValueError, OSError) as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
