"""Command-line entry point.

    lpor [--config FILE] [--nodes N] [--speed V[,V...]] [--seed S[,S...]]
         [--protocol lpor,por] [--duration SEC] [--out PATH] [--trace PATH]
         [--set KEY=VALUE]...

Flags override config-file values; any file key is reachable via --set.
The CSV goes to stdout unless --out names a file.  Exit status: 0 on
success, 1 on configuration or runtime errors.
"""

import argparse
import sys
from pathlib import Path

from .config import ConfigError, ScenarioConfig, apply_overrides, parse_config
from .runner import run_experiment


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="lpor",
        description="Opportunistic-routing MANET simulator (lpor vs por).")
    p.add_argument("--config", metavar="FILE", help="scenario file (key = value lines)")
    p.add_argument("--nodes", metavar="N", help="number of nodes")
    p.add_argument("--speed", metavar="V[,V...]", help="node speeds, m/s")
    p.add_argument("--seed", metavar="S[,S...]", help="run seeds")
    p.add_argument("--protocol", metavar="P[,P]", help="lpor, por or both")
    p.add_argument("--duration", metavar="SEC", help="simulated seconds per run")
    p.add_argument("--out", metavar="PATH", default="-",
                   help="CSV output file, '-' for stdout (default)")
    p.add_argument("--trace", metavar="PATH",
                   help="write a per-run event trace; {protocol}/{speed}/{seed} "
                        "placeholders are substituted")
    p.add_argument("--set", metavar="KEY=VALUE", action="append", default=[],
                   dest="extra", help="override any config key")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config is not None:
            cfg = parse_config(Path(args.config).read_text())
        else:
            cfg = ScenarioConfig()
        overrides = {}
        for flag, key in (("nodes", "nodes"), ("speed", "speed"),
                          ("seed", "seed"), ("protocol", "protocol"),
                          ("duration", "sim_time")):
            value = getattr(args, flag)
            if value is not None:
                overrides[key] = value
        for item in args.extra:
            if "=" not in item:
                raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
            key, _, value = item.partition("=")
            overrides[key.strip()] = value.strip()
        if overrides:
            cfg = apply_overrides(cfg, overrides)
        csv_text = run_experiment(cfg, trace_template=args.trace)
    except (ConfigError, OSError) as exc:
        print(f"lpor: error: {exc}", file=sys.stderr)
        return 1
    if args.out == "-":
        sys.stdout.write(csv_text)
    else:
        Path(args.out).write_text(csv_text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
