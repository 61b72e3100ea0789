import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from app.commands import analyze, channel, crypt, debug
from app.errors import ToolkitError
from app.settings import settings

logging.basicConfig(
    level=settings.LOG_LEVEL,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    datefmt='%Y-%m-%d %H:%M:%S'
)

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cbcsti", description="Chaos-based image encryption toolkit")
    subparsers = parser.add_subparsers(dest="command", required=True)

    crypt.register(subparsers)
    analyze.register(subparsers)
    channel.register(subparsers)
    debug.register(subparsers)
    return parser


def run_cli(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.handler(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 0
    except ToolkitError as exc:
        logger.error(f"{type(exc).__name__}: {exc.detail}")
        print(f"error: {exc.detail}", file=sys.stderr)
        return exc.exit_code
    except ValidationError as exc:
        logger.error(f"Invalid configuration: {exc.error_count()} errors")
        print(f"error: invalid configuration\n{exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        logger.error(f"I/O failure: {exc}")
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(run_cli())
