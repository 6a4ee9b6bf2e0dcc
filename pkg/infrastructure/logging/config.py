import logging
import os
import sys
import uuid
from datetime import datetime
from logging.handlers import RotatingFileHandler
from typing import Any, Dict, Optional

from pythonjsonlogger import jsonlogger

from shared.config.settings import settings

_run_context: Dict[str, Optional[str]] = {"run_id": None, "command": None}


def set_run_context(command: Optional[str] = None, run_id: Optional[str] = None) -> str:
    """Tag every subsequent record with the CLI command and a run id"""
    _run_context["command"] = command
    _run_context["run_id"] = run_id or uuid.uuid4().hex[:12]
    return _run_context["run_id"]


class RunContextFilter(logging.Filter):
    """Add run context to log records."""

    def filter(self, record):
        if not hasattr(record, "run_id"):
            record.run_id = _run_context["run_id"]
        if not hasattr(record, "command"):
            record.command = _run_context["command"]
        return True


class CustomJsonFormatter(jsonlogger.JsonFormatter):
    """Custom JSON formatter with additional fields."""

    def add_fields(self, log_record: Dict[str, Any], record: logging.LogRecord, message_dict: Dict[str, Any]):
        super().add_fields(log_record, record, message_dict)

        log_record["timestamp"] = datetime.utcnow().isoformat() + "Z"
        log_record["service"] = settings.app_name
        log_record["version"] = settings.app_version
        log_record["level"] = record.levelname

        if getattr(record, "run_id", None):
            log_record["run_id"] = record.run_id
        if getattr(record, "command", None):
            log_record["command"] = record.command


def _level() -> int:
    if settings.debug:
        return logging.DEBUG
    return getattr(logging, str(settings.log_level).upper(), logging.INFO)


def setup_logging(log_dir: Optional[str] = None) -> logging.Logger:
    """Configure structured logging: stderr always, rotating files when a log dir is set."""
    log_dir = log_dir or settings.log_dir

    root_logger = logging.getLogger()
    root_logger.setLevel(_level())

    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)

    json_formatter = CustomJsonFormatter(fmt="%(timestamp)s %(level)s %(name)s %(message)s")

    # stdout carries CSV output, so logs go to stderr
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(json_formatter)
    console_handler.addFilter(RunContextFilter())
    console_handler.setLevel(_level())
    root_logger.addHandler(console_handler)

    if log_dir:
        os.makedirs(log_dir, exist_ok=True)

        app_handler = RotatingFileHandler(
            filename=os.path.join(log_dir, "app.log"),
            maxBytes=10 * 1024 * 1024,  # 10MB
            backupCount=10,
            encoding="utf-8",
        )
        app_handler.setFormatter(json_formatter)
        app_handler.addFilter(RunContextFilter())
        app_handler.setLevel(logging.INFO)
        root_logger.addHandler(app_handler)

        error_handler = RotatingFileHandler(
            filename=os.path.join(log_dir, "error.log"),
            maxBytes=10 * 1024 * 1024,
            backupCount=10,
            encoding="utf-8",
        )
        error_handler.setFormatter(json_formatter)
        error_handler.addFilter(RunContextFilter())
        error_handler.setLevel(logging.ERROR)
        root_logger.addHandler(error_handler)

    logging.getLogger("celery").setLevel(logging.INFO if settings.debug else logging.WARNING)

    root_logger.debug("Logging system initialized", extra={
        "log_dir": log_dir,
        "debug_mode": settings.debug,
        "handlers": len(root_logger.handlers),
    })

    return root_logger
