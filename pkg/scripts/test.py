"""
Script de utilidad para ejecutar tests, lint y chequeos locales de qlidar.

Uso: python scripts/test.py [test|slow|lint|types|verify|all]
"""

import subprocess
import sys

PACKAGES = ["qlidar/", "tests/"]


def run_tests(marker: str = "not slow") -> int:
    """Suite de tests; por defecto sin las simulaciones a escala completa."""
    print(f"Ejecutando tests ({marker})...")
    cmd = [
        "pytest",
        "-v",
        "-m",
        marker,
        "--cov=qlidar",
        "--cov-report=html",
        "--cov-report=term-missing",
    ]
    return subprocess.run(cmd).returncode


def run_slow() -> int:
    """Simulaciones Monte-Carlo con N = 10⁵ / 10⁶ disparos."""
    return run_tests("slow")


def run_lint() -> int:
    """Black en modo chequeo y Flake8."""
    print("\n Black (formato)...")
    black = subprocess.run(["black", "--check", *PACKAGES]).returncode

    print("\n Flake8 (linting)...")
    flake8 = subprocess.run(["flake8", "--max-line-length=88", *PACKAGES]).returncode
    return black or flake8


def run_types() -> int:
    """mypy sobre el paquete."""
    print("\n mypy (tipos)...")
    return subprocess.run(["mypy", "qlidar/"]).returncode


def run_verify() -> int:
    """Formas cerradas frente al oráculo, sin Monte-Carlo."""
    print("\n qlidar verify...")
    return subprocess.run(["qlidar", "verify", "--skip-monte-carlo"]).returncode


def run_all() -> int:
    for name, step in (("Lint", run_lint), ("Tipos", run_types), ("Tests", run_tests)):
        result = step()
        if result != 0:
            print(f"  {name} falló")
            return result
    print(" Todo OK!")
    return 0


COMMANDS = {
    "test": run_tests,
    "slow": run_slow,
    "lint": run_lint,
    "types": run_types,
    "verify": run_verify,
    "all": run_all,
}


def main() -> None:
    """Main entry point."""
    command = sys.argv[1] if len(sys.argv) > 1 else None
    if command not in COMMANDS:
        if command:
            print(f"Comando desconocido: {command}")
        print(f"Uso: python scripts/test.py [{'|'.join(COMMANDS)}]")
        sys.exit(1)
    sys.exit(COMMANDS[command]())


if __name__ == "__main__":
    main()
