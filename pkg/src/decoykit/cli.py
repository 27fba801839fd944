"""Command-line front end.

    decoykit rate      --config C --tally T
    decoykit simulate  --config C [--seed S | --expected] [--out T]
    decoykit optimize  --config C [--levels N] [--out P]
    decoykit sweep     --config C --vary KEY --from A --to B --points N [--log] [--optimize]
    decoykit detectors --config C [--from A --to B --points N]

Exit codes: 0 success (for ``rate``: key certified), 2 no key, 1 error.
"""
from __future__ import annotations

import argparse
import csv
import sys
import warnings
from dataclasses import replace
from typing import Optional, Sequence

from . import __version__
from .channel import expected_tally, sample_tally
from .io import (FormatError, RunConfig, SWEEPABLE, format_config, format_protocol, format_tally,
                 read_config, read_tally)
from .lp import BACKEND
from .model import SessionTally, validate
from .optimize import SearchOptions, optimize_protocol
from .stats import BOUNDS_PER_LEVEL
from .studies import CSV_COLUMNS, analyze_config, detector_curves, grid, sweep

EXIT_OK, EXIT_ERROR, EXIT_NO_KEY = 0, 1, 2


def _fmt(v) -> str:
    return repr(float(v))


def _open_out(path: Optional[str]):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def _load(args) -> RunConfig:
    cfg = read_config(args.config)
    if getattr(args, "intensity_uncertainty", None) is not None:
        cfg = replace(cfg, intensity_uncertainty=args.intensity_uncertainty)
    if getattr(args, "q_preset", None):
        cfg = replace(cfg, q_preset=args.q_preset)
    return cfg


def _options(args) -> SearchOptions:
    return SearchOptions(starts=args.starts, max_evals=args.max_evals, seed=args.seed or 0,
                         jobs=getattr(args, "jobs", 1))


def _need_protocol(cfg: RunConfig):
    if cfg.protocol is None:
        raise ValueError("config has no level.* entries")
    problems = validate(cfg.protocol, cfg.params())
    if problems:
        raise ValueError("invalid protocol: " + "; ".join(problems))
    return cfg.protocol


def cmd_rate(args) -> int:
    cfg = _load(args)
    protocol = _need_protocol(cfg)
    tally = read_tally(args.tally)
    if len(tally) == 0:
        tally = SessionTally(*(tuple(0.0 for _ in protocol.levels),) * 3)
    if len(tally) != len(protocol):
        raise ValueError(f"tally has {len(tally)} levels but the protocol has {len(protocol)}")
    if tally.n_total > 0:
        cfg = replace(cfg, n_total=tally.n_total)
    with warnings.catch_warnings():
        # reported below from the RateReport
        warnings.simplefilter("ignore", RuntimeWarning)
        analysis = analyze_config(cfg, protocol, tally)
    rep, sps = analysis.report, analysis.sps
    out = sys.stdout
    print(f"key_length: {_fmt(rep.key_length)}", file=out)
    print(f"rate: {_fmt(rep.rate)}", file=out)
    print(f"raw_key_length: {_fmt(rep.raw_key_length)}", file=out)
    print(f"b1_max: {_fmt(sps.b1_max)}", file=out)
    print(f"f_pa: {_fmt(rep.f_pa)}", file=out)
    for j, s, d, ec, pa, q in zip(rep.key_levels, rep.s, rep.d, rep.ec_cost, rep.pa_cost, rep.ber):
        print(f"level {j}: S={_fmt(s)} D={_fmt(d)} ec_cost={_fmt(ec)} pa_cost={_fmt(pa)} ber={_fmt(q)}",
              file=out)
    for j in range(len(protocol)):
        print(f"level {j}: P_S={_fmt(sps.p_s[j])} P_D={_fmt(sps.p_d[j])}", file=out)
    n_bounds = BOUNDS_PER_LEVEL * len(protocol)
    if cfg.q_preset or any(lv.q_row is not None for lv in protocol.levels):
        n_bounds += 2 * len(rep.key_levels)
    print(f"confidence_bounds_applied: {n_bounds}", file=out)
    for w in rep.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK if rep.key_length > 0 else EXIT_NO_KEY


def cmd_simulate(args) -> int:
    cfg = _load(args)
    protocol = _need_protocol(cfg)
    params = cfg.params()
    if args.expected:
        tally = expected_tally(protocol, params)
    else:
        tally = sample_tally(protocol, params, seed=args.seed if args.seed is not None else 0)
    fh, close = _open_out(args.out)
    try:
        fh.write(format_tally(tally))
    finally:
        if close:
            fh.close()
    return EXIT_OK


def cmd_optimize(args) -> int:
    cfg = _load(args)
    levels = args.levels or cfg.levels or 3
    res = optimize_protocol(cfg.params(), n_levels=levels, options=_options(args))
    text = format_config(replace(cfg, protocol=res.protocol, levels=levels))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(format_protocol(res.protocol))
    print(f"# rate = {_fmt(res.rate)}  key_length = {_fmt(res.rate * cfg.n_total)}  "
          f"evaluations = {res.evaluations}", file=sys.stderr if not args.out else sys.stdout)
    return EXIT_OK


def _write_csv(path, header, rows):
    fh, close = _open_out(path)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    finally:
        if close:
            fh.close()


def cmd_sweep(args) -> int:
    cfg = _load(args)
    if args.vary not in SWEEPABLE:
        raise ValueError(f"--vary must be one of {', '.join(SWEEPABLE)}")
    values = grid(args.start, args.stop, args.points, args.log)
    rows = sweep(cfg, args.vary, values, optimize=args.optimize, levels=args.levels,
                 options=_options(args), jobs=args.jobs)
    _write_csv(args.out, (args.vary,) + CSV_COLUMNS, rows)
    return EXIT_OK


def cmd_detectors(args) -> int:
    cfg = _load(args)
    names = ("snspd", "tes", "apd")
    rows = detector_curves(cfg, grid(args.start, args.stop, args.points), names,
                           options=_options(args), jobs=args.jobs)
    _write_csv(args.out, ("fiber_km",) + names, rows)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="decoykit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"decoykit {__version__} ({BACKEND} kernel)")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", required=True, help="key = value config file")
        sp.add_argument("--intensity-uncertainty", type=float, default=None, metavar="U",
                        help="relative half-width of the intensity uncertainty")
        sp.add_argument("--q-preset", choices=["four-laser"], default=None,
                        help="partially distinguishable levels")

    def search(sp):
        sp.add_argument("--levels", type=int, choices=[1, 2, 3, 4], default=None)
        sp.add_argument("--starts", type=int, default=8)
        sp.add_argument("--max-evals", type=int, default=400)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--jobs", type=int, default=1)

    sp = sub.add_parser("rate", help="analyze a tally")
    common(sp)
    sp.add_argument("--tally", required=True)
    sp.set_defaults(func=cmd_rate)

    sp = sub.add_parser("simulate", help="write a simulated tally")
    common(sp)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--expected", action="store_true", help="expectation values instead of samples")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("optimize", help="search the best protocol")
    common(sp)
    search(sp)
    sp.add_argument("--out", default=None, help="write the config with the optimized levels")
    sp.set_defaults(func=cmd_optimize)

    sp = sub.add_parser("sweep", help="CSV of results over one parameter")
    common(sp)
    search(sp)
    sp.add_argument("--vary", required=True, help=", ".join(SWEEPABLE))
    sp.add_argument("--from", dest="start", type=float, required=True)
    sp.add_argument("--to", dest="stop", type=float, required=True)
    sp.add_argument("--points", type=int, default=11)
    sp.add_argument("--log", action="store_true", help="geometric spacing")
    sp.add_argument("--optimize", action="store_true", help="optimize the protocol at every point")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("detectors", help="CSV of optimized rate vs fiber length per detector")
    common(sp)
    search(sp)
    sp.add_argument("--from", dest="start", type=float, default=0.0)
    sp.add_argument("--to", dest="stop", type=float, default=200.0)
    sp.add_argument("--points", type=int, default=21)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_detectors)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FormatError, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"decoykit: error: {msg}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
