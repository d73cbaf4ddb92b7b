"""
Punto de entrada de la CLI.
Inicializa logging, interpreta argumentos y delega en el controller.
"""

import argparse
from collections.abc import Sequence
import logging
import sys
from typing import Any, Optional

from qlidar import __version__, metrics
from qlidar.config import LOG_LEVELS, settings
from qlidar.controllers.commands import EXIT_FAILURE, CommandOptions, execute
from qlidar.schemas import SWEEPABLE
from qlidar.utils import setup_logging

logger = logging.getLogger(__name__)

SWEEP_MODES = ("single-target", "two-target", "simulate-hadamard", "simulate-joint")


def _add_common(parser: argparse.ArgumentParser) -> None:
    """Flags compartidos; por defecto None para no pisar el archivo."""
    physics = parser.add_argument_group("parámetros físicos")
    physics.add_argument("--sigma", type=float, help="Ancho de banda σ")
    physics.add_argument("--kappa", type=float, help="Entrelazamiento κ en [0, 1)")
    physics.add_argument("--omega0", type=float, help="Frecuencia saliente ω̄₀")
    physics.add_argument("--c", type=float, help="Velocidad de la luz")
    physics.add_argument("--x", type=float, help="Posición del blanco")
    physics.add_argument("--beta", type=float, help="β = v/c")
    physics.add_argument("--dt", type=float, help="Separación temporal Δt")
    physics.add_argument("--domega", type=float, help="Separación en frecuencia Δω")
    physics.add_argument("--centroid-time", type=float, help="Centroide T")
    physics.add_argument("--centroid-frequency", type=float, help="Centroide Ω")

    run = parser.add_argument_group("ejecución")
    run.add_argument("--shots", type=int, help="Disparos por simulación")
    run.add_argument("--trials", type=int, help="Ensayos repetidos")
    run.add_argument("--seed", type=int, help="Semilla de 64 bits")
    run.add_argument("--workers", type=int, help="Procesos paralelos")
    run.add_argument("--tolerance", type=float, help="Tolerancia relativa de verify")
    run.add_argument(
        "--exact-doppler",
        action="store_const",
        const=True,
        help="Derivadas Doppler exactas en el Jacobiano (x, β)",
    )

    out = parser.add_argument_group("salida")
    out.add_argument("--format", choices=("csv", "json"), help="Formato de salida")
    out.add_argument("--out", help="Archivo de salida (por defecto stdout)")
    out.add_argument("--config", help="Archivo JSON de configuración")
    out.add_argument("--metrics-out", help="Exporta métricas Prometheus a un archivo")
    out.add_argument(
        "--log-level", type=str.upper, choices=LOG_LEVELS, help="Nivel de logging"
    )


def _add_plot(parser: argparse.ArgumentParser) -> None:
    plot = parser.add_argument_group("datos para gráficas")
    plot.add_argument("--plot-out", help="Archivo de pares x/y por curva")
    plot.add_argument("--plot-x", help="Columna x")
    plot.add_argument("--plot-y", help="Columna y")
    plot.add_argument("--plot-group", help="Columna que separa curvas")


def _axis(text: str) -> tuple[str, str]:
    key, sep, spec = text.partition("=")
    if not sep or key not in SWEEPABLE:
        raise argparse.ArgumentTypeError(
            f"se esperaba clave=start:stop:count con clave en {', '.join(SWEEPABLE)}"
        )
    return key, spec


def build_parser() -> argparse.ArgumentParser:
    """Parser con los subcomandos de la herramienta."""
    parser = argparse.ArgumentParser(
        prog="qlidar",
        description="Cotas cuánticas de precisión para lidar de rango y velocidad",
    )
    parser.add_argument("--version", action="version", version=__version__)
    commands = parser.add_subparsers(dest="command", required=True)

    for name, text in (
        ("single-target", "QFI y conmutadores de un blanco"),
        ("two-target", "QFI de la separación de dos blancos"),
    ):
        sub = commands.add_parser(name, help=text)
        _add_common(sub)

    simulate = commands.add_parser("simulate", help="Simulación de medidas")
    measures = simulate.add_subparsers(dest="measurement", required=True)
    hadamard = measures.add_parser("hadamard", help="Puerta Hadamard en frecuencia")
    _add_common(hadamard)
    hadamard.add_argument(
        "--no-phase-calibration",
        dest="phase_calibration",
        action="store_const",
        const=False,
        help="Modelo sin calibrar la fase del centroide",
    )
    hadamard.add_argument(
        "--records",
        action="store_true",
        help="Emite los disparos (shot_index, nu_gap, outcome)",
    )
    joint = measures.add_parser("joint", help="Medida conjunta ω₊ / t₋")
    _add_common(joint)

    sweep = commands.add_parser("sweep", help="Barrido cartesiano de parámetros")
    _add_common(sweep)
    _add_plot(sweep)
    sweep.add_argument("--mode", choices=SWEEP_MODES, help="Modo evaluado")
    sweep.add_argument(
        "--axis",
        type=_axis,
        action="append",
        default=[],
        help="Eje clave=start:stop:count o clave=a,b,c (repetible)",
    )

    verify = commands.add_parser("verify", help="Formas cerradas vs oráculo")
    _add_common(verify)
    verify.add_argument(
        "--skip-monte-carlo",
        action="store_true",
        help="Omite el chequeo Monte-Carlo",
    )
    return parser


def _overrides(args: argparse.Namespace, mode: Optional[str]) -> dict[str, Any]:
    keys = (
        "sigma",
        "kappa",
        "omega0",
        "c",
        "x",
        "beta",
        "dt",
        "domega",
        "centroid_time",
        "centroid_frequency",
        "shots",
        "trials",
        "seed",
        "workers",
        "tolerance",
        "exact_doppler",
        "format",
        "out",
        "phase_calibration",
    )
    overrides = {k: getattr(args, k, None) for k in keys}
    overrides["mode"] = mode
    axes = getattr(args, "axis", None)
    if axes:
        overrides["sweep"] = dict(axes)
    return overrides


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Ejecuta la CLI.

    Returns:
        Código de salida: 0 éxito, 1 configuración, 2 fallo de verify o E/S,
        3 puntos degenerados en la rejilla
    """
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level or settings.log_level)

    if args.command == "simulate":
        mode: Optional[str] = f"simulate-{args.measurement}"
        command = "run"
    elif args.command == "sweep":
        mode = args.mode
        command = "sweep"
    elif args.command == "verify":
        mode = "verify"
        command = "verify"
    else:
        mode = args.command
        command = "run"

    options = CommandOptions(
        records=getattr(args, "records", False),
        plot_out=getattr(args, "plot_out", None),
        plot_x=getattr(args, "plot_x", None),
        plot_y=getattr(args, "plot_y", None),
        plot_group=getattr(args, "plot_group", None),
        monte_carlo=not getattr(args, "skip_monte_carlo", False),
    )
    code = execute(command, _overrides(args, mode), args.config, options)

    metrics_path = args.metrics_out or settings.metrics_path
    if metrics_path:
        try:
            metrics.write_metrics(metrics_path)
        except OSError as e:
            logger.error(
                "No se pudieron escribir las métricas", extra={"error": str(e)}
            )
            return code or EXIT_FAILURE
    return code


if __name__ == "__main__":
    sys.exit(main())
