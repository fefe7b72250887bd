from __future__ import annotations

import sys
import time
import uuid
from collections.abc import Callable, Iterator
from contextlib import contextmanager
from contextvars import ContextVar
from typing import Any

import structlog

from .config import settings

run_id_ctx_var: ContextVar[str | None] = ContextVar("run_id", default=None)


def get_run_id() -> str | None:
    return run_id_ctx_var.get()


def configure_logging(level: str | None = None) -> None:
    processors: list[Callable[..., Any]] = [
        structlog.processors.add_log_level,
        structlog.processors.TimeStamper(fmt="iso"),
        _add_run_id,
        structlog.processors.StackInfoRenderer(),
        structlog.processors.format_exc_info,
        structlog.processors.JSONRenderer(),
    ]

    structlog.configure(
        processors=processors,
        wrapper_class=structlog.make_filtering_bound_logger(
            _level_to_numeric(level or settings.LOG_LEVEL)
        ),
        # stdout carries reports; logs go to stderr
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )


def _level_to_numeric(level: str) -> int:
    mapping = {
        "CRITICAL": 50,
        "ERROR": 40,
        "WARNING": 30,
        "INFO": 20,
        "DEBUG": 10,
        "NOTSET": 0,
    }
    return mapping.get(level.upper(), 20)


def _add_run_id(_logger: Any, _method_name: str, event_dict: dict[str, Any]) -> dict[str, Any]:
    rid = get_run_id()
    if rid:
        event_dict["run_id"] = rid
    return event_dict


@contextmanager
def run_context(name: str) -> Iterator[str]:
    """Bind a fresh run id for the duration of a suite or subcommand."""
    rid = uuid.uuid4().hex[:12]
    token = run_id_ctx_var.set(rid)
    start = time.perf_counter()
    try:
        yield rid
    finally:
        duration_ms = (time.perf_counter() - start) * 1000
        structlog.get_logger().info("run_finished", name=name, duration_ms=round(duration_ms, 2))
        run_id_ctx_var.reset(token)


def get_logger() -> Any:
    return structlog.get_logger()
