"""CLI entry point for invariant-kit."""

import argparse
import json
import logging
import sys
from pathlib import Path

from invariant_kit import __version__
from invariant_kit.config import settings
from invariant_kit.errors import InvariantKitError
from invariant_kit.expr import parse
from invariant_kit.minfunc import SAMPLED_CAVEAT, MuCandidate, classify
from invariant_kit.models import DeclaredProperties
from invariant_kit.runner import EXIT_CODES, run
from invariant_kit.runner.jobs import STATUS_OUTCOMES

# Configure logging
logging.basicConfig(
    level=settings.log_level.upper(),
    format="%(asctime)s [%(levelname)s] %(message)s",
    datefmt="%H:%M:%S",
)
logger = logging.getLogger(__name__)


def check_mu(args) -> int:
    """Classify one comparison function given on the command line."""
    try:
        mu = parse(args.expression, ["w"])
        declared = DeclaredProperties(
            locally_lipschitz=True if args.lipschitz else None,
            divergent_integral=args.divergent,
            note="command line",
        )
        verdict = classify(MuCandidate(mu, declared, (-args.probe, 0.0)))
    except (InvariantKitError, ValueError) as e:
        logger.error(f"Cannot classify {args.expression!r}: {e}")
        return EXIT_CODES["error"]

    print(json.dumps(verdict.model_dump(), indent=2, sort_keys=True, default=str))
    if verdict.confidence == "sampled":
        print(f"note: {SAMPLED_CAVEAT}")
    return EXIT_CODES[STATUS_OUTCOMES[verdict.status]]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="invariant-kit",
        description="invariant-kit - verify set invariance with minimal barrier functions",
    )
    parser.add_argument(
        "--verbose", "-v",
        action="store_true",
        help="Enable verbose logging",
    )
    parser.add_argument(
        "--quiet", "-q",
        action="store_true",
        help="Only log warnings and errors",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run_parser = commands.add_parser("run", help="Run the jobs of a problem config")
    run_parser.add_argument("config", type=Path, help="Problem config JSON, or the name of a bundled problem")
    run_parser.add_argument("--out", "-o", type=Path, default=None, help="Output directory (default: out)")
    run_parser.add_argument("--seed", type=int, default=None, help="Seed for random initial states (default: 0)")
    run_parser.add_argument("--threads", type=int, default=None, help="Worker threads (default: INVARIANT_KIT_THREADS or 1)")

    mu_parser = commands.add_parser("check-mu", help="Classify a comparison function mu(w)")
    mu_parser.add_argument("expression", help="Expression in w, e.g. \"-cbrt(w)^2\"")
    mu_parser.add_argument("--lipschitz", action="store_true", help="Declare mu locally Lipschitz")
    divergence = mu_parser.add_mutually_exclusive_group()
    divergence.add_argument("--divergent", dest="divergent", action="store_true", default=None,
                            help="Declare the integral of 1/mu divergent towards 0")
    divergence.add_argument("--convergent", dest="divergent", action="store_false",
                            help="Declare the integral of 1/mu convergent towards 0")
    mu_parser.add_argument("--probe", type=float, default=1.0, help="Probe interval width k for [-k, 0] (default: 1)")

    commands.add_parser("version", help="Print the version")
    return parser


def main(argv=None):
    """Main CLI entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    elif args.quiet:
        logging.getLogger().setLevel(logging.WARNING)

    if args.command == "version":
        print(f"invariant-kit {__version__}")
        sys.exit(0)

    if args.command == "check-mu":
        if args.probe <= 0:
            parser.error("--probe must be positive")
        sys.exit(check_mu(args))

    if args.threads is not None and args.threads < 1:
        parser.error("--threads must be at least 1")
    try:
        code = run(args.config, out_dir=args.out, seed=args.seed, threads=args.threads, quiet=args.quiet)
    except KeyboardInterrupt:
        logger.info("Interrupted by user")
        code = EXIT_CODES["error"]
    sys.exit(code)


if __name__ == "__main__":
    main()
