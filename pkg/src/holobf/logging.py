#!/usr/bin/env python3
# Justin, 2026-01-12
"""Logging setup shared by the library modules and the 'holobf' script.

Library modules only call 'get_logger(__name__)'. Handlers are attached to
the 'holobf' logger by the script (or by the user), and every module logger
propagates to it.

The numerical drivers attach their refinement tables as the 'details'
record attribute, e.g.

    logger.debug("T-box converged", extra={"details": ["level 2: ...", ...]})

which is appended tab-separated to the message, or with 'human_readable=True'
expanded into one line per entry, aligned under the message:

    20260112_075924  DEBUG    integrate_t_box:158  | T-box converged
                                                   |   level 2: 0.4312
                                                   |   level 3: 0.4274

Changelog:
    2026-01-12, Justin: Init, 'details' tables for the quadrature drivers.
    2026-03-12, Justin: Replace previously attached default handlers.
"""

__all__ = [
    "LoggingOverrideFormatter", "get_logger", "set_default_handlers",
    "set_logging_level", "verbosity2level", "label2level",
]

import logging
import sys

_LOGGING_FMT = "{asctime}\t{levelname:<7s}\t{funcName}:{lineno}\t| {message}"
_LOGGING_DATEFMT = "%Y%m%d_%H%M%S"

VERBOSITY_LEVELS = (logging.WARNING, logging.INFO, logging.DEBUG)
LABEL_LEVELS = {
    "debug": logging.DEBUG,
    "info": logging.INFO,
    "warning": logging.WARNING,
    "error": logging.ERROR,
    "critical": logging.CRITICAL,
}


class LoggingOverrideFormatter(logging.Formatter):
    """Formatter accepting caller overrides and a 'details' attribute.

    The record attributes '_funcname', '_filename' and '_lineno' replace
    'funcName', 'filename' and 'lineno', for helpers that log on behalf of
    their caller [1].

    'details' may be a list of lines or a dict, rendered as "key: value".

    References:
        [1]: <https://stackoverflow.com/a/71228329>
    """
    OVERRIDES = {"_funcname": "funcName", "_filename": "filename", "_lineno": "lineno"}

    def __init__(self, *args, human_readable=False, delimiter="| ", **kwargs):
        super().__init__(*args, **kwargs)
        self.human_readable = human_readable
        self.delimiter = delimiter

    def format(self, record):
        for source, target in self.OVERRIDES.items():
            if hasattr(record, source):
                setattr(record, target, getattr(record, source))
        message = super().format(record)

        details = getattr(record, "details", None)
        if details is None:
            return message
        if not self.human_readable:
            return f"{message}\t{details}"
        return "\n".join([message, *self._detail_lines(message, details)])

    def _detail_lines(self, message, details):
        if isinstance(details, dict):
            details = [f"{k}: {v}" for k, v in details.items()]
        elif isinstance(details, str):
            details = [details]
        head, delimiter, text = message.partition(self.delimiter)
        if not delimiter:
            return [f"  {line}" for line in details]

        # Blank out the head but keep its tabs, so the delimiters line up
        indent = "".join(c if c.isspace() else " " for c in head)
        pad = " " * (len(text) - len(text.lstrip(" ")))
        return [f"{indent}{self.delimiter}{pad}  {line}" for line in details]


def _default_formatter(human_readable=False):
    return LoggingOverrideFormatter(
        fmt=_LOGGING_FMT, datefmt=_LOGGING_DATEFMT, style="{",
        human_readable=human_readable,
    )

def get_logger(name, level=None, human_readable=False):
    """Returns the named logger.

    With 'level' given and no handler attached yet, a stderr handler with the
    default format is attached and the level set from its label.
    """
    logger = logging.getLogger(name)
    if level is not None and not logger.handlers:
        set_default_handlers(logger, human_readable=human_readable)
        logger.setLevel(label2level(level))
    return logger

def verbosity2level(verbosity):
    verbosity = max(0, min(int(verbosity), len(VERBOSITY_LEVELS) - 1))
    return VERBOSITY_LEVELS[verbosity]

def label2level(label):
    return LABEL_LEVELS.get(str(label).lower(), logging.WARNING)

def set_default_handlers(logger, stream=None, file="", mode="w", human_readable=False):
    """Attaches a stream handler (stderr unless given) and optionally a file handler.

    Handlers attached by an earlier call are removed first. Pass
    'stream=False' for file-only logging.
    """
    for handler in [h for h in logger.handlers if getattr(h, "_holobf_default", False)]:
        logger.removeHandler(handler)
        handler.close()

    handlers = []
    if stream is not False:
        handlers.append(logging.StreamHandler(stream=sys.stderr if stream is None else stream))
    if file:
        handlers.append(logging.FileHandler(filename=file, mode=mode))
    formatter = _default_formatter(human_readable)
    for handler in handlers:
        handler.setFormatter(formatter)
        handler._holobf_default = True
        logger.addHandler(handler)
    logger.propagate = False

def set_logging_level(logger, verbosity):
    logger.setLevel(verbosity2level(verbosity))
