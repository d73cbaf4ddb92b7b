"""
Tests para el controller de comandos: handlers, salida y códigos de salida.
"""

import json

import pytest

from qlidar.config import settings
from qlidar.controllers import commands
from qlidar.controllers.commands import CommandOptions, exit_code_for, execute
from qlidar.schemas import MetrologyError
from qlidar.verification import CheckResult, VerifyReport


@pytest.fixture(autouse=True)
def no_default_config(monkeypatch):
    """Fixture que desactiva QLIDAR_CONFIG_PATH durante cada test."""
    monkeypatch.setattr(settings, "config_path", None)


def _report(passed: bool) -> VerifyReport:
    error = 0.0 if passed else 1.0
    return VerifyReport(
        checks=[CheckResult(name="unit", points=1, max_error=error, tolerance=0.5)]
    )


@pytest.mark.parametrize(
    "code, expected",
    [
        ("CONFIG_PARSE", 1),
        ("CONFIG_INVALID", 1),
        ("INVALID_PARAMETER", 1),
        ("DEGENERATE_POINT", 3),
        ("NON_IDENTIFIABLE", 3),
        ("IO_ERROR", 2),
        ("NON_FINITE_RESULT", 2),
        ("ILL_CONDITIONED", 2),
    ],
)
def test_exit_code_for(code, expected):
    """Test: mapeo de códigos de error a códigos de salida."""
    error = MetrologyError(component="test", code=code, message="m")

    assert exit_code_for(error) == expected


def test_run_two_target_to_stdout(capsys):
    """Test: two-target emite CSV y termina con 0."""
    code = execute("run", {"mode": "two-target", "dt": 0.1, "domega": 0.2})

    out = capsys.readouterr().out
    assert code == 0
    header, row = out.splitlines()
    assert header.startswith("sigma,kappa,dt,domega,epsilon,H_dt_dt")
    assert row.endswith(",0")


def test_run_degenerate_point_exits_3(capsys):
    """Test: la tabla se emite y el código es 3 si hay filas degeneradas."""
    code = execute("run", {"mode": "two-target", "dt": 0.0, "domega": 0.0})

    out = capsys.readouterr().out
    assert code == 3
    assert out.splitlines()[1].endswith(",1")


def test_run_invalid_config_exits_1(capsys):
    """Test: κ fuera de rango es error de configuración."""
    code = execute("run", {"mode": "two-target", "kappa": 1.5})

    captured = capsys.readouterr()
    assert code == 1
    assert captured.out == ""
    assert "CONFIG_INVALID" in captured.err


def test_run_missing_config_file_exits_1(tmp_path, capsys):
    """Test: archivo de configuración inexistente es CONFIG_PARSE."""
    code = execute("run", {"mode": "two-target"}, str(tmp_path / "missing.json"))

    assert code == 1
    assert "CONFIG_PARSE" in capsys.readouterr().err


def test_run_io_error_exits_2(tmp_path, capsys):
    """Test: salida a un directorio inexistente es IO_ERROR."""
    overrides = {
        "mode": "two-target",
        "dt": 0.1,
        "out": str(tmp_path / "missing" / "out.csv"),
    }

    assert execute("run", overrides) == 2
    assert "IO_ERROR" in capsys.readouterr().err


def test_run_json_to_file(tmp_path):
    """Test: JSON con metadata y registros en archivo."""
    path = tmp_path / "single.json"

    code = execute(
        "run", {"mode": "single-target", "format": "json", "out": str(path), "seed": 9}
    )

    document = json.loads(path.read_text(encoding="utf-8"))
    assert code == 0
    assert document["metadata"]["seed"] == 9
    assert document["records"][0]["H_beta_beta"] == pytest.approx(108.0)


def test_sweep_requires_axis(capsys):
    """Test: sweep sin ejes es CONFIG_INVALID."""
    assert execute("sweep", {"mode": "two-target"}) == 1
    assert "CONFIG_INVALID" in capsys.readouterr().err


def test_sweep_with_plot_data(tmp_path, capsys):
    """Test: barrido de dos curvas con datos para gráfica."""
    plot = tmp_path / "plot.csv"
    options = CommandOptions(
        plot_out=str(plot),
        plot_x="domega_sq_over_sigma_sq",
        plot_y="H_dt_dt",
        plot_group="dt_sq_sigma_sq",
    )
    overrides = {
        "mode": "two-target",
        "sweep": {"dt_sq_sigma_sq": "0.01,0.1", "domega_sq_over_sigma_sq": "0:5:11"},
    }

    code = execute("sweep", overrides, options=options)

    assert code == 0
    assert len(capsys.readouterr().out.splitlines()) == 23
    header = plot.read_text(encoding="utf-8").splitlines()[0]
    assert header.startswith(
        "domega_sq_over_sigma_sq@dt_sq_sigma_sq=0.01,H_dt_dt@dt_sq_sigma_sq=0.01"
    )


def test_plot_out_requires_columns(tmp_path, capsys):
    """Test: --plot-out sin columnas es CONFIG_INVALID."""
    options = CommandOptions(plot_out=str(tmp_path / "plot.csv"))

    code = execute("sweep", {"sweep": {"dt": "0.1,0.2"}}, options=options)

    assert code == 1
    assert "CONFIG_INVALID" in capsys.readouterr().err


def test_simulate_hadamard_records(capsys):
    """Test: --records emite un disparo por fila."""
    overrides = {"mode": "simulate-hadamard", "dt": 0.5, "shots": 10, "seed": 4}

    code = execute("run", overrides, options=CommandOptions(records=True))

    lines = capsys.readouterr().out.splitlines()
    assert code == 0
    assert lines[0] == "shot_index,nu_gap,outcome"
    assert len(lines) == 11


def test_simulate_joint(capsys):
    """Test: simulate joint produce una fila con el producto de incertidumbres."""
    overrides = {"mode": "simulate-joint", "kappa": 0.9, "shots": 20_000}

    assert execute("run", overrides) == 0
    assert "uncertainty_product" in capsys.readouterr().out


@pytest.mark.parametrize("passed, expected", [(True, 0), (False, 2)])
def test_verify_exit_codes(mocker, capsys, passed, expected):
    """Test: verify devuelve 0 si todo pasa y 2 si algún chequeo falla."""
    run = mocker.patch.object(commands, "run_verify", return_value=_report(passed))

    code = execute("verify", {"mode": "verify", "seed": 3}, options=CommandOptions())

    assert code == expected
    assert run.call_args.kwargs["seed"] == 3
    assert "unit" in capsys.readouterr().out


def test_verify_skip_monte_carlo(mocker, capsys):
    """Test: la opción monte_carlo se propaga a run_verify."""
    run = mocker.patch.object(commands, "run_verify", return_value=_report(True))

    execute("verify", {"mode": "verify"}, options=CommandOptions(monte_carlo=False))

    assert run.call_args.kwargs["monte_carlo"] is False


def test_unexpected_error_exits_2(mocker, capsys):
    """Test: excepciones no previstas son INTERNAL_ERROR con código 2."""
    mocker.patch.object(commands, "Orchestrator", side_effect=RuntimeError("boom"))

    code = execute("run", {"mode": "two-target", "dt": 0.1})

    assert code == 2
    assert "INTERNAL_ERROR" in capsys.readouterr().err
