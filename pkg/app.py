import argparse
import logging
import os
import sys

import numpy as np

from config import Config, __version__
from errors import TeleprobeError
from extensions import init_extensions

# 1. Keep BLAS single-threaded; parallelism comes from joblib workers
os.environ.setdefault("OMP_NUM_THREADS", "1")
os.environ.setdefault("MKL_NUM_THREADS", "1")

LOG_FORMAT = "%(asctime)s %(levelname)s:%(name)s:%(message)s"

logger = logging.getLogger(__name__)


def create_app():
    """Application factory: builds the CLI and registers every command module."""
    parser = argparse.ArgumentParser(
        prog='teleprobe',
        description="Direct density-matrix element measurement by logical-qubit teleportation",
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    parser.add_argument('--log-level', default=Config.LOG_LEVEL,
                        choices=('DEBUG', 'INFO', 'WARNING', 'ERROR'))

    from commands import COMMANDS

    subparsers = parser.add_subparsers(dest='command', required=True)
    for command in COMMANDS:
        sub = command.register(subparsers)
        sub.set_defaults(handler=command.run)
    return parser


def main(argv=None):
    from commands.utils import emit_config, extension_settings, resolve_config

    parser = create_app()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code

    logging.basicConfig(level=args.log_level, format=LOG_FORMAT, stream=sys.stderr, force=True)

    try:
        cfg = resolve_config(args)
        if args.emit_config:
            emit_config(cfg)
            return 0
        init_extensions(extension_settings(cfg))
        return args.handler(cfg)
    except TeleprobeError as exc:
        logger.error("%s failed: %s", args.command, exc)
        return exc.exit_code
    except np.linalg.LinAlgError:
        logger.exception("Linear algebra failure")
        return 3
    finally:
        init_extensions(Config)


if __name__ == '__main__':
    sys.exit(main())
