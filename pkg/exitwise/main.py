import argparse
import logging
import sys
from logging.handlers import RotatingFileHandler
from typing import List, Optional

from . import __version__
from .commands import COMMANDS
from .commands.common import RunConfig
from .config import Config
from .errors import (
    EXIT_USAGE,
    AbortMaxTerms,
    ExitwiseError,
    UsageError,
)

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
LOG_DATEFMT = '%Y-%m-%d %H:%M:%S'


# 配置日志系统
def setup_logging(level: Optional[str] = None):
    """配置日志：控制台写 stderr（stdout 留给 CSV），可选文件 WARNING+"""
    root_logger = logging.getLogger()
    root_logger.setLevel(logging.DEBUG)

    # 清除已有的 handlers（避免重复）
    root_logger.handlers.clear()

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(getattr(logging, (level or Config.LOG_LEVEL).upper(), logging.INFO))
    console_handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=LOG_DATEFMT))
    root_logger.addHandler(console_handler)

    if Config.LOG_FILE:
        file_handler = RotatingFileHandler(
            Config.LOG_FILE,
            maxBytes=10 * 1024 * 1024,  # 10MB
            backupCount=5,
            encoding='utf-8'
        )
        file_handler.setLevel(logging.WARNING)
        file_handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=LOG_DATEFMT))
        root_logger.addHandler(file_handler)
        logging.info(f"日志系统已初始化，文件路径: {Config.LOG_FILE}")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="exitwise", description="Exact exit time / exit position sampling for 1-D diffusions")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", dest="log_level", help="console log level (default EXITWISE_LOG_LEVEL)")
    subparsers = parser.add_subparsers(dest="subcommand", parser_class=_Parser)
    for command in COMMANDS:
        command.register(subparsers)
    parser.set_defaults(subcommand_parsers=subparsers.choices)
    return parser


def _print_usage(parser: argparse.ArgumentParser, argv: List[str], message: str):
    sys.stderr.write(f"error: {message}\n\n")
    commands = parser.get_default("subcommand_parsers") or {}
    chosen = next((a for a in argv if a in commands), None)
    if chosen:
        sys.stderr.write(commands[chosen].format_help())
    else:
        sys.stderr.write(parser.format_help())


def run(argv: Optional[List[str]] = None) -> int:
    """Parse argv, run the subcommand and map failures to exit codes."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "handler", None):
            raise UsageError("missing subcommand")
        handler = args.handler
        log_level = args.log_level
        del args.log_level
        del args.subcommand_parsers
        setup_logging(log_level)
        cfg = RunConfig.from_args(args)
        logger.info(f"exitwise {__version__}: {cfg.subcommand} with {cfg.model_dump(exclude_none=True)}")
        return handler(cfg)
    except UsageError as e:
        _print_usage(parser, argv, str(e))
        return EXIT_USAGE
    except AbortMaxTerms as e:
        logger.error(f"aborted: {e}")
        sys.stderr.write(f"aborted: {e}\n")
        return EXIT_USAGE
    except (ExitwiseError, ValueError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        sys.stderr.write(f"error: {e}\n")
        return EXIT_USAGE


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
