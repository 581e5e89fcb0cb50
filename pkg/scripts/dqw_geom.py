#!/usr/bin/env python3
"""
scripts/dqw_geom.py

Batch driver for the quantum-walk geometry pipelines: simulate, geometry,
connection, curvature and converge.

Usage:
    python scripts/dqw_geom.py data/worked_example.ini --mode curvature --out out/example

Exit status: 0 on success, 2 for configuration or θ syntax errors, 3 for any
other numerical failure. Failures leave a JSON report on stderr and in
<out>/error.json. DQW_GEOM_THREADS caps the BLAS/OpenMP thread pools.
"""
import argparse
import json
import logging
import os
import sys

THREAD_VARS = ('OMP_NUM_THREADS', 'OPENBLAS_NUM_THREADS', 'MKL_NUM_THREADS')


def cap_threads() -> None:
    threads = os.environ.get('DQW_GEOM_THREADS')
    if threads:
        for var in THREAD_VARS:
            os.environ[var] = threads


cap_threads()

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from dqw_geom.config import MODES, load_config  # noqa: E402
from dqw_geom.errors import ConfigError, DQWGeomError, ThetaParseError  # noqa: E402
from dqw_geom.runner import run_mode  # noqa: E402

logger = logging.getLogger('dqw_geom.cli')

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def report_error(exc: DQWGeomError, out_dir: str) -> None:
    report = exc.to_report()
    text = json.dumps(report, sort_keys=True)
    print(text, file=sys.stderr)
    try:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, 'error.json'), 'w', encoding='utf-8') as fh:
            fh.write(text + '\n')
    except OSError as io_exc:
        logger.warning("could not write error report to %s: %s", out_dir, io_exc)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="Quantum-walk discrete geometry pipelines")
    parser.add_argument("config", help="Path to an INI run configuration")
    parser.add_argument("--mode", choices=MODES, default=None, help="Override [mode] name")
    parser.add_argument("--out", type=str, default=None, help="Override [output] dir")
    parser.add_argument("--quiet", action="store_true", help="Only log warnings and errors")
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format='%(levelname)s %(name)s: %(message)s')

    out_dir = args.out or 'out'
    try:
        cfg = load_config(args.config)
        out_dir = args.out or cfg.output.dir
        written = run_mode(cfg, mode=args.mode, out_dir=args.out)
    except (ConfigError, ThetaParseError) as exc:
        report_error(exc, out_dir)
        return EXIT_CONFIG
    except DQWGeomError as exc:
        report_error(exc, out_dir)
        return EXIT_NUMERIC

    if not args.quiet:
        for table, path in written.items():
            print(f"Wrote {table} to {path}")
    return EXIT_OK


def cli_main():
    sys.exit(main())


if __name__ == "__main__":
    cli_main()
