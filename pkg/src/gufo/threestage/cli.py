# ---------------------------------------------------------------------
# Gufo Three-Stage: Command-line interface
# ---------------------------------------------------------------------
# Copyright (C) 2025, Gufo Labs
# ---------------------------------------------------------------------

"""
`gufo-threestage` command.

``` shell
gufo-threestage run scenarios/fig2-pad-passive.yml --trials 100
```

Exit codes:

* `0` - scenario ran, all property checks passed.
* `1` - configuration error.
* `2` - runtime error.
* `3` - property violation detected during the run.
"""

# Python modules
import argparse
import logging
import sys
from dataclasses import replace
from enum import IntEnum
from typing import List, Optional

# Gufo Labs modules
from . import __version__
from .config import MAX_SEED, load_config
from .error import ConfigError, ThreeStageError
from .scenario import TRANSCRIPT_DIGEST, TRANSCRIPT_FULL, run_scenario

logger = logging.getLogger(__name__)


class ExitCode(IntEnum):
    """Process exit codes."""

    OK = 0
    CONFIG_ERROR = 1
    RUNTIME_ERROR = 2
    PROPERTY_VIOLATION = 3


def _positive(s: str) -> int:
    v = int(s)
    if v < 1:
        msg = f"must be >= 1, got {v}"
        raise argparse.ArgumentTypeError(msg)
    return v


def _seed(s: str) -> int:
    v = int(s)
    if not 0 <= v <= MAX_SEED:
        msg = f"must be in 0..{MAX_SEED}, got {v}"
        raise argparse.ArgumentTypeError(msg)
    return v


class Cli(object):
    """Command-line interface."""

    @staticmethod
    def get_parser() -> argparse.ArgumentParser:
        """Build argument parser."""
        parser = argparse.ArgumentParser(
            prog="gufo-threestage",
            description="Multi-located party protocol simulator",
        )
        parser.add_argument(
            "--version", action="version", version=f"%(prog)s {__version__}"
        )
        parser.add_argument(
            "-v",
            "--verbose",
            action="count",
            default=0,
            help="Increase log verbosity",
        )
        commands = parser.add_subparsers(dest="command", required=True)
        run = commands.add_parser("run", help="Run scenario")
        run.add_argument("config", help="Scenario file")
        run.add_argument("--trials", type=_positive, help="Override trials")
        run.add_argument("--seed", type=_seed, help="Override seed")
        run.add_argument(
            "--transcript",
            choices=[TRANSCRIPT_FULL, TRANSCRIPT_DIGEST],
            default=TRANSCRIPT_FULL,
            help="Include trial 0 transcript or digest only",
        )
        run.add_argument(
            "--out", help="Report path, standard output if not set"
        )
        run.add_argument(
            "--jobs", type=_positive, default=1, help="Worker threads"
        )
        return parser

    def run(self: "Cli", args: List[str]) -> ExitCode:
        """
        Execute command.

        Args:
            args: Command-line arguments, without program name.

        Returns:
            Exit code.
        """
        ns = self.get_parser().parse_args(args)
        logging.basicConfig(
            level=logging.DEBUG if ns.verbose else logging.WARNING,
            format="%(asctime)s [%(name)s] %(levelname)s: %(message)s",
            stream=sys.stderr,
        )
        return self.handle_run(
            ns.config,
            trials=ns.trials,
            seed=ns.seed,
            transcript=ns.transcript,
            out=ns.out,
            jobs=ns.jobs,
        )

    def handle_run(
        self: "Cli",
        path: str,
        *,
        trials: Optional[int] = None,
        seed: Optional[int] = None,
        transcript: str = TRANSCRIPT_FULL,
        out: Optional[str] = None,
        jobs: int = 1,
    ) -> ExitCode:
        """
        Run scenario file and write report.

        Args:
            path: Scenario file.
            trials: Trials override.
            seed: Seed override.
            transcript: Transcript mode, `full` or `digest`.
            out: Report path.
            jobs: Worker threads.

        Returns:
            Exit code.
        """
        try:
            config = load_config(path)
        except ConfigError as e:
            for issue in e.issues:
                print(f"{path}: {issue}", file=sys.stderr)
            return ExitCode.CONFIG_ERROR
        if trials is not None:
            config = replace(config, trials=trials)
        if seed is not None:
            config = replace(config, seed=seed)
        try:
            report = run_scenario(config, jobs=jobs)
            data = report.dump(transcript)
            if out:
                with open(out, "w", encoding="utf-8") as f:
                    f.write(data)
            else:
                sys.stdout.write(data)
        except (ThreeStageError, ValueError, OSError) as e:
            logger.error("Scenario failed: %s", e)
            return ExitCode.RUNTIME_ERROR
        if not report.passed:
            return ExitCode.PROPERTY_VIOLATION
        return ExitCode.OK


def main() -> int:
    """Console script entry point."""
    return Cli().run(sys.argv[1:]).value
