"""Command-line entry point: ``iollc run|compare|validate``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .scenario import MODES, ConfigError, compare, load_config, load_run, run_scenario


def _cmd_validate(args) -> int:
    cfg = load_config(args.config)
    print(f"{args.config}: ok ({cfg.name}, {len(cfg.tenants)} tenants, {cfg.duration:g} s)")
    return 0


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    mode = args.mode or cfg.mode
    res = run_scenario(cfg, mode=mode, seed=args.seed)
    out = Path(args.out) if args.out else Path("runs") / f"{cfg.name}-{mode}"
    res.write(out)
    t = res.summary["totals"]
    print(f"{cfg.name} [{mode}] {len(res.records)} intervals -> {out}")
    print(f"  ddio hit/miss {t['ddio_hit']}/{t['ddio_miss']}, mem writes {t['writes_bytes']} B, "
          f"final DDIO ways {res.summary['final_ddio_ways']}")
    return 0


def _cmd_compare(args) -> int:
    runs = {}
    for path in args.runs:
        name = Path(path).name
        if name in runs:
            name = str(path)
        runs[name] = load_run(path)
    ref = Path(args.reference).name if args.reference else None
    summary = compare(runs, reference=ref, skip=args.skip)
    text = json.dumps(summary, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="iollc", description="LLC/DDIO simulator and I/O-aware way manager")
    p.add_argument("-v", "--verbose", action="store_true", help="log controller warnings")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a scenario and write records.csv + summary.json")
    r.add_argument("config")
    r.add_argument("--mode", choices=MODES)
    r.add_argument("--seed", type=int)
    r.add_argument("--out", help="output directory (default runs/<name>-<mode>)")
    r.set_defaults(func=_cmd_run)

    c = sub.add_parser("compare", help="normalise runs against the first (or --reference) run")
    c.add_argument("runs", nargs="+", help="run directories or records.csv files")
    c.add_argument("--reference")
    c.add_argument("--skip", type=int, default=0, help="leading intervals to ignore")
    c.add_argument("--out", help="also write the JSON summary here")
    c.set_defaults(func=_cmd_compare)

    v = sub.add_parser("validate", help="check a scenario file")
    v.add_argument("config")
    v.set_defaults(func=_cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
