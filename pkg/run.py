# ./fcl/run.py

import logging
import sys

# Import configuration and the command runner
import config
from core.cli import run

# --- Logging Setup ---
# Reports go to stdout, so log records go to stderr
log_formatter = logging.Formatter('%(asctime)s %(levelname)s:%(name)s: %(message)s')
log_handler = logging.StreamHandler(sys.stderr)
log_handler.setFormatter(log_formatter)

root_logger = logging.getLogger()
root_logger.setLevel(config.LOG_LEVEL)
root_logger.addHandler(log_handler)

logger = logging.getLogger('fcl.run')


def main() -> int:
    """Main entry point for the command line."""
    logger.debug(f"Running fcl with arguments {sys.argv[1:]}")
    try:
        return run(sys.argv[1:])
    except KeyboardInterrupt:
        logger.info("Interrupted.")
        return 2


if __name__ == "__main__":
    sys.exit(main())
