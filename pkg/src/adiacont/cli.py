"""Command-line experiment runner.

    adiacont run <experiment> <config-file> [--out DIR] [--fixtures DIR]
                                            [--write-fixtures]

Exit codes: 0 all assertions pass, 2 config error, 3 model assumption
violated (gap too small, degenerate ground state), 4 numerical failure
(quadrature/ODE/unitarity, fixture mismatch), 5 dense window cap exceeded.
The ``ADIACONT_OUT`` environment variable overrides the configured output
directory; ``--out`` overrides both.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .config import load_config
from .errors import AdiacontError
from .experiments import EXPERIMENTS, run_experiment
from .fixtures import FixtureMismatch, compare_fixture, write_fixture


def _out_dir(args, cfg) -> Path:
    if args.out:
        return Path(args.out)
    env = os.environ.get("ADIACONT_OUT")
    if env:
        return Path(env)
    return Path(cfg["output.dir"]) / args.experiment


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="adiacont",
        description="Heisenberg-picture adiabatic-evolution experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a named experiment from a config file")
    run.add_argument("experiment", choices=sorted(EXPERIMENTS))
    run.add_argument("config", help="path to a 'section.key = value' config file")
    run.add_argument("--out", default=None, help="output directory for CSVs and manifest")
    run.add_argument("--fixtures", default=None, help="regression fixture directory")
    run.add_argument(
        "--write-fixtures", action="store_true",
        help="record the current outputs as the regression fixtures",
    )
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        out_dir = _out_dir(args, cfg)
        result = run_experiment(args.experiment, cfg, out_dir)
        print(f"experiment {args.experiment}: wrote {len(result.csv_files)} artifacts to {out_dir}")
        for line in result.summary_lines():
            print(line)
        fixture_ok = True
        if args.fixtures:
            fixture_dir = Path(args.fixtures) / args.experiment
            for csv_path in result.csv_files:
                target = fixture_dir / csv_path.name
                if args.write_fixtures:
                    write_fixture(csv_path, target)
                    print(f"  [FIXTURE] recorded {target}")
                else:
                    try:
                        compare_fixture(csv_path, target, tolerance=cfg["tolerances.fixture"])
                        print(f"  [PASS] fixture match {target.name}")
                    except FixtureMismatch as exc:
                        fixture_ok = False
                        print(f"  [FAIL] {exc}")
        if not result.passed:
            print(f"experiment {args.experiment}: FAIL")
            return 1
        if not fixture_ok:
            print(f"experiment {args.experiment}: fixture mismatch")
            return 4
        print(f"experiment {args.experiment}: PASS")
        return 0
    except AdiacontError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
