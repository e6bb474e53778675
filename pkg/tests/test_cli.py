import argparse
import asyncio
import pytest
from handlers.router import Dispatcher, Router, arg
from main import build_dispatcher
from middleware import ErrorHandlerMiddleware, LoggingMiddleware, exit_code_for
from storage import header_hash
from utils.constants import EXIT_CONFIG, EXIT_OK, EXIT_SOLVER, EXIT_UNEXPECTED, EXIT_VALIDATION
from utils.errors import AcceptanceError, ConfigError, SolvabilityError, SolverError, TopologyError, ValidationError


def run(dispatcher, argv, data=None):
    return asyncio.run(dispatcher.dispatch(argv, data or {}))


# ==================== ROUTING ====================

def test_nested_commands_and_middleware_order():
    calls = []
    router = Router("demo")

    @router.command("bem", "equilibrium", arguments=[arg("--h", type=float, default=0.5)])
    async def equilibrium(args, data):
        calls.append(("handler", data["command"], args.h))
        return EXIT_OK

    def tracer(name):
        async def middleware(handler, args, data):
            calls.append(("enter", name))
            code = await handler(args, data)
            calls.append(("leave", name))
            return code
        return middleware

    dp = Dispatcher()
    dp.add_middleware(tracer("outer"))
    dp.add_middleware(tracer("inner"))
    dp.include_router(router)

    assert run(dp, ["bem", "equilibrium", "--h", "0.25"]) == EXIT_OK
    assert calls == [("enter", "outer"), ("enter", "inner"), ("handler", "bem equilibrium", 0.25),
                     ("leave", "inner"), ("leave", "outer")]


def test_unknown_command_exits_with_usage():
    dp = build_dispatcher()
    with pytest.raises(SystemExit) as info:
        run(dp, ["nonsense"])
    assert info.value.code == 2


def test_all_commands_are_registered():
    names = {command.name for command in build_dispatcher().commands}
    assert {"mesh gen", "solve", "optimize", "validate"} <= names
    assert any(name.startswith("bem ") for name in names)


# ==================== ERROR HANDLING ====================

@pytest.mark.parametrize("error, code", [
    (ConfigError("bad key", "mesh.size"), EXIT_CONFIG),
    (ValidationError("bad value", "tau0"), EXIT_CONFIG),
    (SolvabilityError("singular"), EXIT_SOLVER),
    (SolverError("lu failed"), EXIT_SOLVER),
    (TopologyError("odd interface"), EXIT_SOLVER),
    (AcceptanceError("1 check failed", ["bem.mean"]), EXIT_VALIDATION),
    (RuntimeError("boom"), EXIT_UNEXPECTED),
])
def test_error_handler_maps_exit_codes(error, code, capsys):
    async def failing(args, data):
        raise error

    middleware = ErrorHandlerMiddleware()
    result = asyncio.run(middleware(failing, argparse.Namespace(), {"command": "test"}))
    assert result == code
    assert exit_code_for(error) == code
    assert capsys.readouterr().err.strip()


def test_error_handler_names_config_key(capsys):
    async def failing(args, data):
        raise ConfigError("must be positive", "mesh.size")

    asyncio.run(ErrorHandlerMiddleware()(failing, argparse.Namespace(), {}))
    assert "Configuration error (mesh.size): must be positive" in capsys.readouterr().err


def test_logging_middleware_passes_code_through(caplog):
    async def handler(args, data):
        return 7

    with caplog.at_level("INFO"):
        code = asyncio.run(LoggingMiddleware()(handler, argparse.Namespace(verbose=False, h=0.1), {"command": "x"}))
    assert code == 7
    assert "Running 'x' with {'h': 0.1}" in caplog.text


# ==================== END TO END ====================

def test_mesh_gen_writes_artifacts(tmp_path, capsys):
    dp = build_dispatcher()
    code = run(dp, ["--output", str(tmp_path), "mesh", "gen", "--shape", "square", "--target-h", "0.25"])
    assert code == EXIT_OK
    mesh_text = (tmp_path / "mesh.mesh").read_text()
    vtk_text = (tmp_path / "mesh.vtk").read_text()
    assert header_hash(mesh_text)
    assert "Triangles\n32" in mesh_text
    assert "DATASET UNSTRUCTURED_GRID" in vtk_text
    assert "25 vertices, 32 triangles" in capsys.readouterr().out


def test_invalid_config_file_exits_with_config_code(tmp_path):
    path = tmp_path / "run.json"
    path.write_text('{"mesh": {"target_h": 0}}')
    code = run(build_dispatcher(), ["--output", str(tmp_path), "mesh", "gen", "--config", str(path)])
    assert code == EXIT_CONFIG
    assert not (tmp_path / "mesh.mesh").exists()


def test_mesh_gen_honours_output_formats(tmp_path):
    path = tmp_path / "run.json"
    path.write_text('{"mesh": {"shape": "square", "target_h": 0.25}, "output": {"formats": ["medit"]}}')
    out = tmp_path / "out"
    code = run(build_dispatcher(), ["--output", str(out), "mesh", "gen", "--config", str(path)])
    assert code == EXIT_OK
    assert sorted(p.name for p in out.iterdir()) == ["mesh.mesh"]
