"""
Middleware wrapped around every command handler.
Provides error-to-exit-code mapping and invocation logging.
"""
from .error_handler import ErrorHandlerMiddleware, exit_code_for
from .logging_middleware import LoggingMiddleware

__all__ = ["ErrorHandlerMiddleware", "exit_code_for", "LoggingMiddleware"]
