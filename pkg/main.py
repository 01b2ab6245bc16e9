import argparse
import logging
import sys
from typing import List, Optional

from dotenv import load_dotenv

from src.cli.runner import COMMANDS, ExperimentRunner, build_manifest
from src.utils.config import LabSettings, setup_logging
from src.utils.errors import SchemaError

# Load environment variables from .env file
load_dotenv()

logger = logging.getLogger(__name__)


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        description="Cyclicity experiments for generalized exponential polynomials."
    )
    parser.add_argument("command", choices=COMMANDS, help="Check or sweep to run.")
    parser.add_argument("--input", required=True, help="JSON parameters or sweep configuration.")
    parser.add_argument("--output", required=True, help="Report path ending in .json or .csv.")
    parser.add_argument("--seed", type=int, default=None, help="Sweep seed (overrides the input file).")
    parser.add_argument("--truncation", type=int, default=None, help="Jet truncation order.")
    parser.add_argument("--workers", type=int, default=None, help="Sweep worker processes.")
    parser.add_argument("--epsilon", type=float, default=None, help="Parameter-ball radius for sweeps.")
    parser.add_argument("--delta", type=float, default=None, help="Disk radius for zero counts.")
    parser.add_argument("--samples", type=int, default=None, help="Number of sweep samples.")
    parser.add_argument("--H", type=float, default=None, dest="H", help="Cartan H in (0, 1].")
    parser.add_argument("--d", type=float, default=None, dest="d", help="Cartan exclusion exponent d > 0.")
    parser.add_argument("--R", type=float, default=None, dest="R", help="Cartan disk radius.")
    parser.add_argument("--c-hat", type=float, default=None, dest="c_hat", help="Remez constant to assert.")
    parser.add_argument("--max-n", type=int, default=None, dest="max_n", help="Highest coefficient for coeffs.")
    parser.add_argument("--archive", default=None, help="Optional sqlite file that archives sweeps.")
    return parser.parse_args(argv)


def main(argv: Optional[List[str]] = None) -> int:
    args = parse_args(argv)
    try:
        settings = LabSettings.from_env().with_overrides(truncation=args.truncation, workers=args.workers)
        setup_logging(settings.log_level)
        manifest = build_manifest(
            args.command, args.input, args.output,
            seed=args.seed, truncation=args.truncation, workers=args.workers,
            epsilon=args.epsilon, delta=args.delta, samples=args.samples,
            H=args.H, d=args.d, R=args.R, c_hat=args.c_hat, max_n=args.max_n,
            archive=args.archive,
        )
    except (SchemaError, ValueError) as e:
        logger.error(f"Invalid invocation: {str(e)}")
        return 1
    return ExperimentRunner(manifest, settings).run()


if __name__ == "__main__":
    sys.exit(main())
