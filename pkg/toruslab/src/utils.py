import os
import sys
import logging
from fractions import Fraction

import regex

from .errors import MalformedInput


RATIONAL = regex.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")
SEED_ENV = "TORUSLAB_SEED"


def parse_rational(text) -> Fraction:
    r"""
    Reads "num/den" or an integer. Floats are refused so that files stay exact.
    """
    if isinstance(text, bool):
        raise MalformedInput(f"not a rational: {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, Fraction):
        return text
    match = RATIONAL.match(str(text))
    if match is None:
        raise MalformedInput(f"not a rational: {text!r}")
    num, den = match.group(1), match.group(2)
    if den is not None and int(den) == 0:
        raise MalformedInput(f"zero denominator: {text!r}")
    return Fraction(int(num), int(den) if den else 1)


def frac_str(value) -> str:
    return str(Fraction(value))


def resolve_seed(seed):
    if seed is not None:
        return int(seed)
    env = os.environ.get(SEED_ENV)
    if env is not None and env.strip():
        return int(env)
    return 0


def resolve_threads(threads):
    if threads is None or threads <= 0:
        return os.cpu_count() or 1
    return threads


class LoggerHandler(logging.Handler):
    r"""
    Keeps the formatted records of one run, used to attach diagnostics to suite checks.
    """

    def __init__(self):
        super().__init__()
        self.log = ""

    def reset(self):
        self.log = ""

    def emit(self, record):
        log_entry = self.format(record)
        self.log += log_entry
        self.log += "\n"


def reset_logging():
    r"""
    Removes basic config of root logger
    """
    root = logging.getLogger()
    list(map(root.removeHandler, root.handlers))
    list(map(root.removeFilter, root.filters))


def set_log_level(level: str):
    for name, logger in logging.root.manager.loggerDict.items():
        if isinstance(logger, logging.Logger) and "src" in name.split("."):
            logger.setLevel(level.upper())


def get_logger(name: str) -> logging.Logger:
    formatter = logging.Formatter(
        fmt="%(asctime)s - %(levelname)s - %(name)s - %(message)s",
        datefmt="%m/%d/%Y %H:%M:%S"
    )
    # stdout is reserved for JSON results
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(formatter)

    logger = logging.getLogger(name)
    logger.setLevel(logging.INFO)
    if not logger.handlers:
        logger.addHandler(handler)
    logger.propagate = False

    return logger
