"""Command line entry point: ``nbchannel <scenario> --config <path>``.

Exit status is 0 when every check passes, 1 when any check fails and 2 on
a configuration error.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import replace
from typing import Optional, Sequence

from .experiments.config import SCENARIOS, ConfigError, build_config, load_config, resolve_out
from .experiments.scenarios import run_scenario
from .timestepper import NumericalBlowup

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

log = logging.getLogger("nbchannel")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="nbchannel",
        description="Desk-scale experiments for the Newton-Boussinesq channel solver.",
    )
    p.add_argument("scenario", choices=SCENARIOS)
    p.add_argument("--config", help="JSON config; omitted sections take scenario defaults")
    p.add_argument("--out", help="directory for CSV/JSON outputs (relative out.* paths land here)")
    p.add_argument("--seed", type=int, help="override ic.seed")
    p.add_argument("--threads", type=int, default=1, help="worker threads for ensembles")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        cfg = load_config(args.scenario, args.config) if args.config else build_config(args.scenario)
        if args.seed is not None:
            cfg.ic = replace(cfg.ic, seed=args.seed)
        cfg = resolve_out(cfg, args.out)
        start = time.perf_counter()
        report = run_scenario(cfg, threads=args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalBlowup as exc:
        print(f"FAIL  {args.scenario}: numerical blow-up: {exc}", file=sys.stderr)
        return EXIT_FAIL

    for c in report.checks:
        status = "PASS" if c.passed else "FAIL"
        line = f"{status}  {c.name}: value={c.value!r} threshold={c.threshold!r}"
        print(line + (f"  ({c.detail})" if c.detail and not c.passed else ""))
    elapsed = time.perf_counter() - start
    verdict = "PASS" if report.passed else "FAIL"
    print(f"{verdict}  {cfg.scenario} [config {report.config_hash}] in {elapsed:.1f} s")
    if cfg.out.json:
        print(f"report: {cfg.out.json}")
    return EXIT_PASS if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
