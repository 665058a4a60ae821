# ========================================
# FileName: logging.py
# Brief: Logging tools.
# =========================================

import logging
import os
from rich.console import Console
from rich.logging import RichHandler
import yaml

DEFAULT_LOGGING_LEVEL = logging.INFO
DEFAULT_CONFIG_FILE = 'jetfdi.yaml'


def parse_logging_level(level):
    """Parse a logging level from a string.

    :param level: The logging level as a string.
    :type level: str

    :return: The logging level.
    :rtype: int
    """
    if level == 'DEBUG':
        return logging.DEBUG
    elif level == 'INFO':
        return logging.INFO
    elif level == 'WARNING':
        return logging.WARNING
    elif level == 'ERROR':
        return logging.ERROR
    elif level == 'CRITICAL':
        return logging.CRITICAL
    else:
        raise ValueError(f"Unknown logging level {level}.")


def get_config_path():
    """Path of the YAML configuration file, honouring JETFDI_CONFIG."""
    return os.environ.get('JETFDI_CONFIG', DEFAULT_CONFIG_FILE)


def load_config(path=None):
    """Load the optional YAML configuration file.

    :param path: Path to the configuration file. Defaults to
                 :func:`get_config_path`.
    :type path: str

    :return: The configuration, empty when no file is present.
    :rtype: dict
    """
    path = get_config_path() if path is None else path
    try:
        with open(path, 'r') as f:
            config = yaml.safe_load(f)
    except FileNotFoundError:
        return {}
    return config if isinstance(config, dict) else {}


def setup_logger(level=None):
    """Setup a logger for jetfdi using rich console.

    :param level: Explicit logging level name overriding the configuration
                  file, e.g. 'DEBUG'.
    :type level: str

    :return: The logger.
    """

    try:
        if level is not None:
            LOGGING_LEVEL = parse_logging_level(level)
        else:
            LOGGING_LEVEL = parse_logging_level(load_config()['logging'])
    except (KeyError, ValueError, TypeError, yaml.YAMLError):
        LOGGING_LEVEL = DEFAULT_LOGGING_LEVEL

    logging.basicConfig(
        level=LOGGING_LEVEL,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True),
                              rich_tracebacks=True,
                              markup=True)]
    )

    logger = logging.getLogger("rich")
    if level is not None:
        logger.setLevel(LOGGING_LEVEL)

    return logger
