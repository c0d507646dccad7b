# Logging setup for the matconc command line
import logging
import sys
from pathlib import Path

from rich.logging import RichHandler

LOG_FORMAT = '%(asctime)s %(levelname)s:%(message)s'


def setup_logging(level='INFO', log_file=None):
    """Configure the root logger once; later calls replace the handlers."""
    if sys.stderr.isatty():
        stream = RichHandler(show_path=False, rich_tracebacks=True)
        stream.setFormatter(logging.Formatter('%(message)s'))
    else:
        stream = logging.StreamHandler()
        stream.setFormatter(logging.Formatter(LOG_FORMAT))
    handlers = [stream]

    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file)
        file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handlers.append(file_handler)

    logging.basicConfig(
        level=getattr(logging, str(level).upper(), logging.INFO),
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )
    return logging.getLogger('matconc')
