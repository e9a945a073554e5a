"""
Command-line front-end.

    kq analyze  <scenario.json>...   R,exact,asymptotic,doob
    kq oracle   <scenario.json>...   R,oracle (+ diagnostics on stderr)
    kq compare  <scenario.json>...   R,exact,asymptotic,doob,oracle,ratio
    kq gw <pgf.json> --beta | --eval z | --series n | --radius

Tables go to standard output, or to DIR/<stem>.<command>.csv with
--output-dir. Exit codes: 0 ok, 2 bad input, 3 inadmissible, 4 no
convergence.
"""
import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional

import pandas as pd

from .config_handler import Config
from .errors import KernelQueueError, ScenarioError
from .kernel import build_tree_function, second_fixed_point, tree_eval, tree_series
from .pgf import from_json
from .scenario import STDIN, Scenario, load_scenario
from .tail_report import TailReport, write_csv

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_BAD_INPUT = 2

SCENARIO_COMMANDS = ("analyze", "oracle", "compare")


def setup_logging(level: str = "INFO", fmt: Optional[str] = None) -> None:
    """Set up logging configuration; records go to standard error."""
    logging.basicConfig(
        level=level,
        format=fmt or "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )
    logging.getLogger().setLevel(level)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML configuration file (default: $KQ_CONFIG or config/config.yaml)")
    common.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"],
                        help="Override the configured log level")

    numeric = argparse.ArgumentParser(add_help=False)
    numeric.add_argument("--order", type=int, help="Series truncation order")
    numeric.add_argument("--rmax", type=int, dest="r_max", help="Largest tail index R written")
    numeric.add_argument("--truncation", type=int, help="Oracle state-space bound per queue")
    numeric.add_argument("--tol", type=float, help="Oracle total-variation stopping threshold")
    numeric.add_argument("--jobs", type=int, help="Worker threads for several scenarios")
    numeric.add_argument("--output-dir", help="Write DIR/<scenario>.<command>.csv instead of stdout")

    parser = argparse.ArgumentParser(
        prog="kq",
        description="Stationary tails of discrete-time queues by the kernel method",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    helps = {
        "analyze": "Exact, asymptotic and reference tail curves",
        "oracle": "Tail of the truncated-chain oracle",
        "compare": "Analytic curves next to the oracle tail",
    }
    for name in SCENARIO_COMMANDS:
        sub = commands.add_parser(name, parents=[common, numeric], help=helps[name])
        sub.add_argument("scenarios", nargs="+", help="Scenario JSON file(s), '-' for stdin")

    gw = commands.add_parser("gw", parents=[common], help="Galton-Watson tree function utilities")
    gw.add_argument("pgf", help="Offspring PGF JSON file, '-' for stdin")
    mode = gw.add_mutually_exclusive_group(required=True)
    mode.add_argument("--beta", action="store_true", help="Second fixed point of A")
    mode.add_argument("--eval", type=float, metavar="Z", help="T_A(Z)")
    mode.add_argument("--series", type=int, metavar="N", help="Coefficients of T_A up to z^N")
    mode.add_argument("--radius", action="store_true", help="Tangency point tau and radius rho")
    return parser


def _table(command: str, scenario: Scenario) -> pd.DataFrame:
    report = TailReport(scenario)
    logger.info(f"Running {command} for '{scenario.name}' ({scenario.model.value})")
    if command == "analyze":
        return report.analytic_frame()
    if command == "oracle":
        frame, result = report.oracle_frame()
    else:
        frame, result = report.compare_frame()
    print(f"{scenario.name}: iterations={result.iterations} final_tv={result.final_tv:.3e} "
          f"clipped_mass_rate={result.clipped_mass_rate:.3e}", file=sys.stderr)
    return frame


def _failure(e: Exception, code: int) -> int:
    logger.error(f"{type(e).__name__}: {e}")
    return code


def _run_one(command: str, scenario: Scenario, output_dir: Optional[Path]) -> int:
    try:
        frame = _table(command, scenario)
    except KernelQueueError as e:
        return _failure(e, e.exit_code)
    except ValueError as e:
        return _failure(e, EXIT_BAD_INPUT)
    if output_dir is None:
        write_csv(frame, sys.stdout)
    else:
        target = output_dir / f"{scenario.name}.{command}.csv"
        write_csv(frame, str(target))
        logger.info(f"Wrote {len(frame)} rows to {target}")
    return EXIT_OK


def _run_scenarios(args: argparse.Namespace, config: Config) -> int:
    if len(args.scenarios) > 1 and not args.output_dir:
        raise ScenarioError("Several scenarios need --output-dir")
    if args.scenarios.count(STDIN) > 1:
        raise ScenarioError("Standard input can only be read once")
    defaults = config.defaults
    overrides = {"order": args.order, "r_max": args.r_max, "truncation": args.truncation, "tol": args.tol}
    scenarios = [load_scenario(source, defaults, overrides) for source in args.scenarios]
    stems = [s.name for s in scenarios]
    if len(set(stems)) != len(stems):
        raise ScenarioError(f"Scenario names collide in the output directory: {stems}")

    output_dir = None
    if args.output_dir:
        output_dir = Path(args.output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)

    jobs = args.jobs if args.jobs is not None else defaults["jobs"]
    if jobs < 1:
        raise ScenarioError(f"--jobs must be at least 1, got {jobs}")
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        codes = list(pool.map(lambda s: _run_one(args.command, s, output_dir), scenarios))
    return max(codes)


def _read_pgf(source: str):
    text = sys.stdin.read() if source == STDIN else Path(source).read_text()
    return from_json(json.loads(text))


def _run_gw(args: argparse.Namespace) -> int:
    a = _read_pgf(args.pgf)
    if args.beta:
        print(f"{second_fixed_point(a):.17g}")
    elif args.eval is not None:
        print(f"{tree_eval(build_tree_function(a), args.eval):.17g}")
    elif args.series is not None:
        coeffs = tree_series(build_tree_function(a), args.series).coeffs
        write_csv(pd.DataFrame({"n": range(coeffs.size), "coefficient": coeffs}), sys.stdout)
    else:
        tau, rho = build_tree_function(a).tangency()
        write_csv(pd.DataFrame({"tau": [tau], "rho": [rho]}), sys.stdout)
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """Run the kq command line; returns the process exit code."""
    args = build_parser().parse_args(argv)
    try:
        config = Config(args.config)
        setup_logging(args.log_level or config.log_level, config.log_format)
        if args.command == "gw":
            return _run_gw(args)
        return _run_scenarios(args, config)
    except KernelQueueError as e:
        return _failure(e, e.exit_code)
    except (OSError, ValueError) as e:
        # json.JSONDecodeError is a ValueError
        return _failure(e, EXIT_BAD_INPUT)
