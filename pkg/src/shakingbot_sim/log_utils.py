"""Logging setup and the call-logging decorator of the ShakingBot simulator."""

import dataclasses
import inspect
import json
import logging
import time
from functools import wraps
from pathlib import Path
from typing import Any, Callable, Optional, ParamSpec, TypeVar, cast

import numpy as np
import structlog
from pythonjsonlogger.json import JsonFormatter

P = ParamSpec("P")
T = TypeVar("T")

# Results whose string form exceeds this are summarised in debug logs
MAX_LOGGED_RESULT_CHARS = 1000

CONSOLE_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
JSON_FIELDS = (
    "%(timestamp)s %(level)s %(name)s %(message)s %(module)s %(funcName)s %(lineno)d"
)

stdlogger = logging.getLogger(__name__)


def _configure_structlog(renderer: Any, *extra: Any) -> None:
    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            *extra,
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            renderer,
        ],
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )


def setup_logging(log_level: str, log_file: Optional[str] = None) -> None:
    """
    Route all logging either to a JSON file or to the console.

    With ``log_file`` nothing reaches the console, so suites stay quiet and
    ``serve`` keeps stdio for the protocol. Without it, plain text goes to
    stderr and stdout is left to command output.

    Raises:
        ValueError: If ``log_level`` is not a logging level name
    """
    numeric_level = getattr(logging, log_level.upper(), None)
    if not isinstance(numeric_level, int):
        raise ValueError(f"Invalid log level: {log_level}")

    root_logger = logging.getLogger()
    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)
    root_logger.setLevel(numeric_level)

    if log_file:
        target = Path(log_file).absolute()
        target.parent.mkdir(parents=True, exist_ok=True)
        handler: logging.Handler = logging.FileHandler(target)
        handler.setFormatter(JsonFormatter(fmt=JSON_FIELDS, timestamp=True))
        root_logger.addHandler(handler)
        _configure_structlog(
            structlog.processors.JSONRenderer(),
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.processors.TimeStamper(fmt="%Y-%m-%d %H:%M:%S"),
        )
        stdlogger.info(f"Logging initialized: file={target}, level={log_level}")
        return

    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter(CONSOLE_FORMAT))
    root_logger.addHandler(handler)
    _configure_structlog(
        structlog.processors.KeyValueRenderer(key_order=["event"], drop_missing=True)
    )
    stdlogger.info(f"Logging initialized: console={log_level}")


def to_loggable(value: Any) -> Any:
    """
    Convert a value into something json.dumps accepts.

    Arrays are summarised by shape and dtype, dataclasses by type name, so
    that simulation states never end up dumped into a log line.
    """
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, np.ndarray):
        return f"<ndarray shape={value.shape} dtype={value.dtype}>"
    if isinstance(value, np.generic):
        return value.item()
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return f"<{type(value).__name__}>"
    try:
        json.dumps(value)
        return value
    except (TypeError, OverflowError):
        return str(value)


def _call_parameters(
    func: Callable[..., Any], args: tuple[Any, ...], kwargs: dict[str, Any]
) -> dict[str, Any]:
    """Loggable arguments by parameter name, without ``self`` or ``cls``."""
    try:
        bound = inspect.signature(func).bind_partial(*args, **kwargs)
        arguments = dict(bound.arguments)
    except (TypeError, ValueError):
        arguments = {f"arg{i}": value for i, value in enumerate(args)}
        arguments.update(kwargs)
    arguments.pop("self", None)
    arguments.pop("cls", None)
    return {name: to_loggable(value) for name, value in arguments.items()}


def _result_summary(result: Any) -> Any:
    if result is None:
        return None
    loggable = to_loggable(result)
    length = len(str(loggable))
    if length > MAX_LOGGED_RESULT_CHARS:
        return f"<Large result of type {type(result).__name__}, length: {length}>"
    return loggable


def _has_file_handler() -> bool:
    return any(isinstance(h, logging.FileHandler) for h in logging.getLogger().handlers)


def log_function_call(func: Callable[P, T]) -> Callable[P, T]:
    """
    Log calls of ``func`` with parameters, elapsed time and result.

    Meant for coarse operations such as trials, suites and loaders; the
    per-step physics is not decorated. Structured events are only emitted
    while a JSON log file is configured. Exceptions are logged and re-raised.
    """
    name = func.__name__

    @wraps(func)
    def wrapper(*args: P.args, **kwargs: P.kwargs) -> T:
        parameters = _call_parameters(func, args, kwargs)
        events = None
        if _has_file_handler():
            events = structlog.get_logger(func.__module__).bind(
                function=name,
                module=func.__module__,
                lineno=func.__code__.co_firstlineno,
            )
            events.debug(f"Calling function {name}", parameters=parameters)
        stdlogger.debug(
            f"Calling {name} with parameters: {json.dumps(parameters, default=str)}"
        )

        started = time.perf_counter()
        try:
            result = func(*args, **kwargs)
        except Exception as e:
            elapsed_ms = round((time.perf_counter() - started) * 1000, 2)
            if events is not None:
                events.error(
                    f"Function {name} failed",
                    execution_time_ms=elapsed_ms,
                    error_type=type(e).__name__,
                    error_message=str(e),
                    exc_info=True,
                )
            stdlogger.error(
                f"{name} failed after {elapsed_ms}ms with error: "
                f"{type(e).__name__}: {e}",
                exc_info=True,
            )
            raise

        elapsed_ms = round((time.perf_counter() - started) * 1000, 2)
        summary = _result_summary(result)
        if events is not None:
            events.debug(
                f"Function {name} completed",
                execution_time_ms=elapsed_ms,
                status="success",
                result=summary,
            )
        stdlogger.debug(f"{name} completed in {elapsed_ms}ms with result: {summary}")
        return result

    return cast(Callable[P, T], wrapper)
