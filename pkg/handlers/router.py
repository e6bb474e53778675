"""
Command routing: routers collect async handlers, the dispatcher builds the
argument parser, wraps handlers in middleware and runs the selected command.
"""
import argparse
import logging
from dataclasses import dataclass, field
from typing import Any, Awaitable, Callable, Dict, List, Optional, Sequence, Tuple

logger = logging.getLogger(__name__)

Handler = Callable[[argparse.Namespace, Dict[str, Any]], Awaitable[int]]
Middleware = Callable[[Handler, argparse.Namespace, Dict[str, Any]], Awaitable[int]]


@dataclass
class Argument:
    """Positional and keyword arguments of one parser.add_argument call."""
    flags: Tuple[str, ...]
    options: Dict[str, Any] = field(default_factory=dict)


def arg(*flags: str, **options) -> Argument:
    return Argument(tuple(flags), options)


@dataclass
class Command:
    path: Tuple[str, ...]
    handler: Handler
    help: str = ""
    arguments: Sequence[Argument] = ()

    @property
    def name(self) -> str:
        return " ".join(self.path)


class Router:
    """
    A group of commands, one router per handler module.

    Usage:
        router = Router()

        @router.command("bem", "equilibrium", help="...", arguments=[arg("--h", type=float)])
        async def bem_equilibrium(args, data):
            ...
    """

    def __init__(self, name: str = ""):
        self.name = name
        self.commands: List[Command] = []

    def command(self, *path: str, help: str = "", arguments: Sequence[Argument] = ()) -> Callable:
        def decorator(handler: Handler) -> Handler:
            self.commands.append(Command(tuple(path), handler, help, tuple(arguments)))
            return handler
        return decorator


class Dispatcher:
    """Holds routers and middleware; middleware registered first runs outermost."""

    def __init__(self, prog: str = "bcopt", description: str = ""):
        self.prog = prog
        self.description = description
        self.routers: List[Router] = []
        self.middleware: List[Middleware] = []
        self.global_arguments: List[Argument] = []

    def include_router(self, router: Router) -> None:
        self.routers.append(router)

    def add_middleware(self, middleware: Middleware) -> None:
        self.middleware.append(middleware)

    def add_global_argument(self, *flags: str, **options) -> None:
        self.global_arguments.append(Argument(tuple(flags), options))

    @property
    def commands(self) -> List[Command]:
        return [command for router in self.routers for command in router.commands]

    def build_parser(self) -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(prog=self.prog, description=self.description)
        for argument in self.global_arguments:
            parser.add_argument(*argument.flags, **argument.options)
        top = parser.add_subparsers(dest="command", required=True)
        groups: Dict[str, Any] = {}
        for command in self.commands:
            head, *rest = command.path
            if not rest:
                sub = top.add_parser(head, help=command.help)
            else:
                if head not in groups:
                    group_parser = top.add_parser(head, help=f"{head} commands")
                    groups[head] = group_parser.add_subparsers(dest="subcommand", required=True)
                sub = groups[head].add_parser(" ".join(rest), help=command.help)
            for argument in command.arguments:
                sub.add_argument(*argument.flags, **argument.options)
            sub.set_defaults(_command=command)
        return parser

    def _wrap(self, handler: Handler) -> Handler:
        wrapped = handler
        for middleware in reversed(self.middleware):
            wrapped = self._bind(middleware, wrapped)
        return wrapped

    @staticmethod
    def _bind(middleware: Middleware, inner: Handler) -> Handler:
        async def call(args: argparse.Namespace, data: Dict[str, Any]) -> int:
            return await middleware(inner, args, data)
        return call

    async def dispatch(self, argv: Optional[Sequence[str]], data: Dict[str, Any]) -> int:
        args = self.build_parser().parse_args(argv)
        command: Command = args._command
        data = dict(data, command=command.name)
        return await self._wrap(command.handler)(args, data)
