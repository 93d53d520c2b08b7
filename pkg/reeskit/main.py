import argparse
import json
import logging
import sys
from typing import Any, Optional, Sequence

from pydantic import ValidationError

from reeskit.config import load_settings
from reeskit.errors import BudgetExceededError
from reeskit.models import JobSpec
from reeskit.services.jobs import COMMANDS, JobService

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INPUT_ERROR = 2
EXIT_BUDGET = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reeskit",
        description="Exact checks for filtrations, extended Rees algebras and toric models.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--job", help="JSON job file (optional for example41)")
    parser.add_argument("--threads", type=int, help="Worker threads for flatness sweeps")
    parser.add_argument(
        "--budget-gb-steps", type=int, help="Maximum S-pair reductions per basis"
    )
    parser.add_argument(
        "--budget-cells", type=int, help="Maximum graded-piece cells per window"
    )
    parser.add_argument("--out", default="-", help="Report file, or - for stdout")
    return parser


def _read_job(path: Optional[str]) -> dict[str, Any]:
    if not path:
        return {}
    with open(path, encoding="utf-8") as handle:
        payload = json.load(handle)
    if not isinstance(payload, dict):
        raise ValueError("A job file must contain a JSON object")
    return payload


def run(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = load_settings()
    except ValueError as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    logging.basicConfig(
        stream=sys.stderr,
        level=getattr(logging, settings.log_level.upper(), logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )
    settings = settings.with_overrides(
        threads=args.threads,
        gb_step_budget=args.budget_gb_steps,
        cell_budget=args.budget_cells,
    )

    try:
        payload = _read_job(args.job)
        if args.command == "example41":
            spec = JobService.example41_spec(payload)
        else:
            if not args.job:
                raise ValueError(f"The {args.command} command needs --job")
            spec = JobSpec.model_validate(payload)
        report = JobService.run(args.command, spec, settings)
    except BudgetExceededError as e:
        logger.error(f"❌ {e}")
        return EXIT_BUDGET
    except (ValidationError, ValueError, OSError) as e:
        logger.error(f"❌ Input error: {e}")
        return EXIT_INPUT_ERROR
    except Exception as e:
        logger.error(f"❌ Unexpected error: {type(e).__name__}")
        raise

    rendered = report.render()
    if args.out == "-":
        sys.stdout.write(rendered)
    else:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(rendered)
        logger.info(f"✅ Report written to {args.out}")
    return EXIT_NEGATIVE if report.exit_code else EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
