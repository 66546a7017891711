"""
Singular Stein Lab

Command-line front door for the verification experiments: the exact
pseudoinverse counter-example, the divergence identity and bound chain behind
E[1/F] < ∞, and the infinite-mean pathology when rank(S) ≤ 2.

Usage:
    - `python main.py <subcommand> [flags]`, e.g.
      `python main.py verify-divergence --n 3 --p 5 --reps 100 --master-seed 42`.
    - `python main.py` with no subcommand asks for the experiment, reps and seed.

Functions:
    - `discover_experiments()`: Import every `experiments/<family>/experiment.py` and collect its experiments.
    - `build_parser(experiments)`: The argparse parser with one subcommand per experiment.
    - `get_config_interactively(experiments)`: Prompt for the subcommand, reps and seed.
    - `run(config)`: Run one experiment and wrap its result in a RunReport.
    - `main(argv)`: Parse, run, write the report and return the exit status.

Exit status:
    - 0: the run finished and every verification held.
    - 1: the report carries findings (a verification failed).
    - 2: usage error (bad flags, config file or preconditions).
"""

import argparse
import importlib
import logging
import pkgutil
import sys
import time
from typing import Dict, List, Optional, Type

import config
from base.experiment import Experiment
from base.experiment_config import FORMATS, SHRINKAGES, ExperimentConfig
from exceptions import ConfigError, LabError
from InquirerPy.resolver import prompt
from report.run_report import RunReport, emit_report, write_report

logger = logging.getLogger("steinlab")

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_USAGE = 2


def discover_experiments() -> Dict[str, Type[Experiment]]:
    package = importlib.import_module("experiments")
    found: Dict[str, Type[Experiment]] = {}
    for _, family, _ in pkgutil.iter_modules(package.__path__):
        module = importlib.import_module(f"experiments.{family}.experiment")
        for obj in vars(module).values():
            if isinstance(obj, type) and issubclass(obj, Experiment) and obj is not Experiment and obj.name:
                found[obj.name] = obj
    return dict(sorted(found.items()))


def _add_flags(parser: argparse.ArgumentParser) -> None:
    # every flag defaults to None so a --config file is only overridden by flags actually given
    parser.add_argument("--config", help="Read an experiment config file first; flags override it.")
    parser.add_argument("--n", type=int, help="Rows of Y.")
    parser.add_argument("--p", type=int, help="Dimension of X.")
    parser.add_argument("--theta", help="'zeros', 'ones' or comma-separated values.")
    parser.add_argument("--sigma", help="'identity', 'diag:v1,...,vp' or a matrix file.")
    parser.add_argument("--reps", type=int, help="Monte Carlo replications.")
    parser.add_argument("--master-seed", dest="master_seed", type=int, help="64-bit master seed.")
    parser.add_argument("--rank-tol", dest="rank_tol", help="Rank tolerance, or 'auto'.")
    parser.add_argument("--output", dest="output_path", help="Report path, '-' for stdout.")
    parser.add_argument("--format", choices=FORMATS, help="Report format.")
    parser.add_argument("--trials", type=int, help="Trials of the bound scan.")
    parser.add_argument("--shrinkage", choices=SHRINKAGES, help="Shrinkage function r.")
    parser.add_argument("--c1", type=float, help="Bound C1 of the shrinkage function.")
    parser.add_argument("--h", help="Finite-difference step, or 'auto'.")
    parser.add_argument("--contrast", action="store_true", default=None, help="Run the finite-mean contrast.")
    parser.add_argument("--workers", type=int, help="Threads for replication blocks.")
    parser.add_argument("--timing", action="store_true", default=None, help="Write wall-clock seconds into the report.")
    parser.add_argument("--verbose", "-v", action="store_true", help="Log progress.")


def build_parser(experiments: Dict[str, Type[Experiment]]) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="steinlab", description=f"{config.ARTIFACT_NAME} {config.ARTIFACT_VERSION}")
    subparsers = parser.add_subparsers(dest="subcommand")
    for name, experiment in experiments.items():
        _add_flags(subparsers.add_parser(name, help=experiment.help))
    return parser


def get_config_interactively(experiments: Dict[str, Type[Experiment]]) -> ExperimentConfig:
    questions = [
        {
            "type": "list",
            "name": "subcommand",
            "message": "Experiment:",
            "choices": list(experiments),
        },
        {
            "type": "input",
            "name": "reps",
            "message": "Replications",
            "default": "10000",
        },
        {
            "type": "input",
            "name": "master_seed",
            "message": "Master seed",
            "default": str(config.DEFAULT_MASTER_SEED),
        },
    ]
    answers = prompt(questions)
    try:
        reps, seed = int(answers["reps"]), int(answers["master_seed"])
    except ValueError as e:
        raise ConfigError(str(e)) from e
    return ExperimentConfig(subcommand=answers["subcommand"], reps=reps, master_seed=seed)


def run(
    experiment_config: ExperimentConfig,
    progress: bool = False,
    experiments: Optional[Dict[str, Type[Experiment]]] = None,
) -> RunReport:
    """
    Run the experiment named by the config.

    Raises:
        ConfigError: If no experiment has that name.
    """
    if experiments is None:
        experiments = discover_experiments()
    if experiment_config.subcommand not in experiments:
        raise ConfigError(f"unknown subcommand, expected one of {list(experiments)}", field="subcommand")
    logger.info("Running '%s' with master seed %d ...", experiment_config.subcommand, experiment_config.master_seed)
    start = time.perf_counter()
    payload = experiments[experiment_config.subcommand](experiment_config, progress).run()
    elapsed = time.perf_counter() - start
    return RunReport(
        subcommand=experiment_config.subcommand,
        config=experiment_config.to_dict(),
        master_seed=experiment_config.master_seed,
        payload=payload,
        wall_clock_seconds=elapsed if experiment_config.timing else None,
    )


def main(argv: Optional[List[str]] = None) -> int:
    experiments = discover_experiments()
    parser = build_parser(experiments)
    args = parser.parse_args(argv)
    verbose = getattr(args, "verbose", False)
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    try:
        if args.subcommand is None:
            print(f"{config.ARTIFACT_NAME} {config.ARTIFACT_VERSION}")
            experiment_config = get_config_interactively(experiments)
        else:
            experiment_config = ExperimentConfig.from_namespace(args)
        report = run(experiment_config, progress=verbose, experiments=experiments)
        write_report(emit_report(report, experiment_config.format), experiment_config.output_path)
    except ConfigError as e:
        print(f"error: {e.message}", file=sys.stderr)
        return EXIT_USAGE
    except LabError as e:
        print(f"error: {type(e).__name__}: {e.message}", file=sys.stderr)
        return EXIT_USAGE

    for finding in report.findings:
        logger.warning("Finding: %s", finding)
    return EXIT_OK if report.passed else EXIT_FINDINGS


if __name__ == "__main__":
    sys.exit(main())
