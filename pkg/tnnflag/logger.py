"""
tnnflag Logger
==============
Structured logging for sweeps and the HTTP surface. Records go to stderr so
that JSON reports written to stdout stay byte-identical between runs.
"""

import logging
import sys
from datetime import datetime, timezone
from typing import Any, Dict
from pythonjsonlogger import jsonlogger

from tnnflag.config import settings

CONTEXT_FIELDS = ("command", "case_key", "seed", "request_id")


class CustomJsonFormatter(jsonlogger.JsonFormatter):
    """
    JSON formatter adding service metadata and sweep context to every record.
    """

    def add_fields(self, log_record: Dict[str, Any], record: logging.LogRecord, message_dict: Dict[str, Any]) -> None:
        super().add_fields(log_record, record, message_dict)

        log_record['timestamp'] = datetime.now(timezone.utc).isoformat().replace('+00:00', 'Z')
        log_record['level'] = record.levelname
        log_record['logger'] = record.name
        log_record['service'] = settings.app_name
        log_record['version'] = settings.app_version
        log_record['environment'] = settings.environment

        if record.exc_info:
            log_record['exception'] = self.formatException(record.exc_info)

        for field in CONTEXT_FIELDS:
            if hasattr(record, field):
                log_record[field] = getattr(record, field)
        if hasattr(record, 'duration_ms'):
            log_record['duration_ms'] = round(record.duration_ms, 3)


class TextFormatter(logging.Formatter):
    """Human-readable formatter for terminals"""

    COLORS = {
        'DEBUG': '\033[36m',
        'INFO': '\033[32m',
        'WARNING': '\033[33m',
        'ERROR': '\033[31m',
        'CRITICAL': '\033[35m',
        'RESET': '\033[0m'
    }

    def format(self, record: logging.LogRecord) -> str:
        color = self.COLORS.get(record.levelname, self.COLORS['RESET'])
        reset = self.COLORS['RESET']
        timestamp = datetime.now(timezone.utc).strftime('%Y-%m-%d %H:%M:%S')

        msg = f"{color}{timestamp} | {record.levelname:8} | {record.name}{reset} | {record.getMessage()}"

        extras = [f"{field}={getattr(record, field)}" for field in CONTEXT_FIELDS if hasattr(record, field)]
        if hasattr(record, 'duration_ms'):
            extras.append(f"duration={record.duration_ms:.1f}ms")
        if extras:
            msg += f" | {' '.join(extras)}"

        if record.exc_info:
            msg += f"\n{self.formatException(record.exc_info)}"

        return msg


def setup_logging(level: str | None = None) -> logging.Logger:
    """
    Configure the `tnnflag` logger.

    JSON output when LOG_FORMAT=json or in production, coloured text otherwise.
    """
    log_level = getattr(logging, (level or settings.log_level).upper(), logging.INFO)

    logger = logging.getLogger("tnnflag")
    logger.setLevel(log_level)
    logger.handlers.clear()

    handler = logging.StreamHandler(sys.stderr)
    handler.setLevel(log_level)

    if settings.log_format.lower() == "json" or settings.environment == "production":
        formatter = CustomJsonFormatter('%(timestamp)s %(level)s %(name)s %(message)s')
    else:
        formatter = TextFormatter()

    handler.setFormatter(formatter)
    logger.addHandler(handler)
    logger.propagate = False

    return logger


class LoggerAdapter(logging.LoggerAdapter):
    """
    Adapter carrying context fields.

    Usage:
        logger = get_logger(__name__).with_context(command="verify", seed=0)
        logger.info("sweep finished", extra={"duration_ms": 12.5})
    """

    def process(self, msg: str, kwargs: Dict[str, Any]) -> tuple:
        extra = kwargs.get('extra', {})
        extra.update(self.extra)
        kwargs['extra'] = extra
        return msg, kwargs

    def with_context(self, **kwargs) -> 'LoggerAdapter':
        """New adapter with additional context"""
        return LoggerAdapter(self.logger, {**self.extra, **kwargs})


def get_logger(name: str) -> LoggerAdapter:
    """Logger for a module, nested under the `tnnflag` logger."""
    if name.startswith("tnnflag."):
        name = name[len("tnnflag."):]
    base_logger = logging.getLogger(f"tnnflag.{name}")

    if not base_logger.handlers:
        base_logger.parent = logging.getLogger("tnnflag")

    return LoggerAdapter(base_logger, {})


root_logger = setup_logging()
