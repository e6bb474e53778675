"""
Logging middleware.
Logs every command invocation and its wall time.
"""
import logging
import time
from typing import Any, Awaitable, Callable, Dict
from utils.formatters import format_duration

logger = logging.getLogger(__name__)


class LoggingMiddleware:
    """Middleware to log command start, exit code and duration."""

    async def __call__(
        self,
        handler: Callable[[Any, Dict[str, Any]], Awaitable[int]],
        args: Any,
        data: Dict[str, Any]
    ) -> int:
        if getattr(args, "verbose", False):
            logging.getLogger().setLevel(logging.DEBUG)
        command = data.get("command", "?")
        options = {key: value for key, value in vars(args).items() if not key.startswith("_") and key != "verbose"}
        logger.info(f"Running '{command}' with {options}")
        started = time.perf_counter()
        try:
            code = await handler(args, data)
        finally:
            elapsed = time.perf_counter() - started
            logger.info(f"'{command}' finished in {format_duration(elapsed)}")
        return code
