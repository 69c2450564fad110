"""Command line entry point: ``v2xsched {simulate,sweep,bench-matching,dump-topology}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .scenario import ALGORITHMS, ConfigError, derived_rng, dump_config, load_config, parse_override

log = logging.getLogger("v2xsched")


def _config(args, **extra):
    overrides = dict(parse_override(s) for s in args.set or [])
    for flag, key in (("algorithm", "algorithm"), ("cues", "num_cues"), ("slots", "num_slots"),
                      ("runs", "num_runs"), ("seed", "base_seed")):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[key] = value
    overrides.update(extra)
    source = Path(args.config) if args.config else None
    if source is not None and not source.is_file():
        raise ConfigError(f"config file not found: {source}")
    return load_config(source, overrides)


def _int_range(text: str) -> list[int]:
    """``a:b:s`` (inclusive of b when it lands on the grid) or a comma list."""
    try:
        if ":" in text:
            parts = [int(x) for x in text.split(":")]
            if len(parts) not in (2, 3):
                raise ValueError
            lo, hi, step = parts[0], parts[1], parts[2] if len(parts) == 3 else 1
            if step <= 0 or hi < lo:
                raise ValueError
            return list(range(lo, hi + 1, step))
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"bad integer range {text!r}; use start:stop:step or a,b,c") from None


def cmd_simulate(args) -> int:
    from .engine import run_campaign
    from .report import summary_table
    from .topology import drop_users, topology_csv

    cfg = _config(args)
    if args.dump_topology:
        users = drop_users(cfg, derived_rng(cfg.base_seed, 0, "topology"))
        Path(args.dump_topology).write_text(topology_csv(users))
    report = run_campaign(cfg, out_dir=args.out_dir, workers=args.workers)
    print(summary_table(report))
    if args.out_dir:
        print(f"\nwrote metric files to {args.out_dir}")
    return 0


def cmd_sweep(args) -> int:
    from .engine import run_runs
    from .metrics import qos_capacity, summarize
    from .report import sweep_csv

    base = _config(args)
    rows = []
    for c in _int_range(args.cue_range):
        cfg = base.replace(num_cues=c)
        rep = summarize(run_runs(cfg, args.workers), cfg.algorithm, cfg.gamma0, cfg.max_sched_per_tti)
        rows.append((c, rep.satisfied_fraction, rep.plr["cue"], rep.mean_delay_ms["cue"]))
        log.info("C=%d satisfied=%.4f plr=%.4f", c, rows[-1][1], rows[-1][2])
    text = sweep_csv(rows)
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "sweep.csv").write_text(text)
    print(text, end="")
    print(f"QoS-constrained capacity: {qos_capacity({r[0]: r[1] for r in rows})} CUEs")
    return 0


def cmd_bench(args) -> int:
    from .engine import bench_matching

    sizes = _int_range(args.sizes)
    if not sizes or min(sizes) < 1:
        raise ConfigError("--sizes needs positive integers")
    rows, gs_exp, hu_exp = bench_matching(sizes, repeats=args.repeats, seed=args.seed)
    print("n,gs_seconds,hungarian_seconds,gs_proposals")
    for r in rows:
        print(f"{r.n},{r.gs_seconds:.6g},{r.hungarian_seconds:.6g},{r.gs_proposals}")
    print(f"fitted exponent: gale-shapley {gs_exp:.3f}, hungarian {hu_exp:.3f}")
    return 0


def cmd_dump_topology(args) -> int:
    from .topology import drop_users, topology_csv

    cfg = _config(args)
    users = drop_users(cfg, derived_rng(cfg.base_seed, args.run, "topology"))
    text = topology_csv(users)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_show_config(args) -> int:
    sys.stdout.write(dump_config(_config(args)))
    return 0


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML config file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one config key (repeatable)")
    p.add_argument("--seed", type=int, help="base seed")


def _sim_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--algorithm", choices=ALGORITHMS)
    p.add_argument("--slots", type=int, help="BWP-1 TTIs per run")
    p.add_argument("--runs", type=int, help="independent drops")
    p.add_argument("--workers", type=int, default=1, help="worker processes for the runs")
    p.add_argument("--out-dir", help="directory for the metric files")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="v2xsched", description="NR-V2X uplink resource allocation simulator")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a campaign and write metric files")
    _common(p)
    _sim_flags(p)
    p.add_argument("--cues", type=int, help="number of CUEs")
    p.add_argument("--dump-topology", metavar="CSV", help="also write the first run's user drop")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="satisfied-CUE fraction over a range of CUE counts")
    _common(p)
    _sim_flags(p)
    p.add_argument("--cues", dest="cue_range", default="100:200:8", help="CUE counts as start:stop:step or a,b,c")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bench-matching", help="time Gale-Shapley against Hungarian")
    p.add_argument("--sizes", default="32,64,128,256,512", help="matrix sizes, a,b,c or start:stop:step")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("dump-topology", help="write one user drop as CSV")
    _common(p)
    p.add_argument("--cues", type=int, help="number of CUEs")
    p.add_argument("--run", type=int, default=0, help="run index whose drop to dump")
    p.add_argument("--output", "-o", help="output file (default: stdout)")
    p.set_defaults(func=cmd_dump_topology)

    p = sub.add_parser("show-config", help="print the effective config as YAML")
    _common(p)
    p.set_defaults(func=cmd_show_config)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
