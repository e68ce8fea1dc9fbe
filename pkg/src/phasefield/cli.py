"""
Interfaz de Línea de Comandos
=============================

    python main.py <subcomando> --config <ruta> [--out <dir>] [--threads <k>] [--log-level <nivel>]

Subcomandos: ``solve``, ``sweep-beta``, ``sweep-eps``, ``mms``, ``check``.
El código de salida es 0 si y solo si ningún canal es NaN y todas las puertas
pedidas pasan; ante un error se escribe ``<out>/error.json``.
"""
import argparse
import json
import logging
import math
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

from .core.dependencies import (
    build_manufactured,
    build_problem,
    build_solver_config,
    build_sweep_plan,
    get_property_suite_service,
    get_result_repository,
    resolve_output_dir,
)
from .core.environment import get_settings
from .core.exceptions import GateFailedError
from .core.logging_config import setup_logging
from .middleware.error_handler import EXIT_OK, ErrorHandler
from .middleware.performance import track_performance
from .repositories.result_repository import ResultRepository
from .schemas.reports import RateReport
from .schemas.run_config import DEFAULT_MMS_LADDER, DomainConfig, RunConfig, load_config
from .services.asymptotics import SweepParameter, beta_sweep, eps_sweep, mms_verify
from .services.diagnostics import monitor
from .services.galerkin_solver import GalerkinSolver

logger = logging.getLogger(__name__)

SUBCOMMANDS = ("solve", "sweep-beta", "sweep-eps", "mms", "check")


def default_config() -> RunConfig:
    """Configuración por defecto: intervalo unitario, resto de valores documentados"""
    return RunConfig(domain=DomainConfig(lengths=[1.0]))


# ============================================================================
# Subcomandos
# ============================================================================

def _run_solve(config: RunConfig, out: Path, threads: int, repo: ResultRepository) -> None:
    pd = build_problem(config)
    cfg = build_solver_config(config)
    solver = GalerkinSolver(pd, cfg)
    traj = solver.solve()
    report = monitor(traj, pd, solver.basis)

    target = out / "solve"
    repo.write_snapshot(target / "snapshot.pfg", traj, solver.basis, pd)
    repo.write_monitor_csv(target / "monitor.csv", report)
    repo.write_json(target / "monitor.json", report)
    for name, value in report.rows():
        print(f"{name},{value:.16e}")
    if report.flagged:
        raise GateFailedError(f"non-finite channels: {', '.join(report.flagged)}", details={"channels": report.flagged})


def _finish_rate_report(report: RateReport, target: Path, repo: ResultRepository, enforce_gates: bool) -> None:
    repo.write_levels_csv(target / "levels.csv", report)
    repo.write_json(target / "rate_report.json", report)
    for name, slope in report.slopes.items():
        print(f"slope {name}: {'nan' if slope is None else format(slope, '.4f')}")
    for name, passed in report.gates.items():
        print(f"{'PASS' if passed else 'FAIL'} {name}")

    non_finite = [
        f"{level.index}:{name}"
        for level in report.levels if level.ok
        for name, value in {**level.channels, **level.monitor}.items()
        if not math.isfinite(value)
    ]
    if report.failures:
        raise GateFailedError(f"failed levels: {report.failures}", details={"levels": report.failures})
    if non_finite:
        raise GateFailedError("non-finite channels in sweep", details={"channels": non_finite})
    failed = [name for name, passed in report.gates.items() if not passed]
    if enforce_gates and failed:
        raise GateFailedError(f"acceptance gates failed: {', '.join(failed)}", details={"gates": failed})


def _run_sweep_beta(config: RunConfig, out: Path, threads: int, repo: ResultRepository) -> None:
    plan = build_sweep_plan(config, SweepParameter.BETA, threads)
    report = beta_sweep(plan, gate_channels=config.sweeps.beta.gate_channels)
    _finish_rate_report(report, out / "sweep_beta", repo, config.sweeps.enforce_gates)


def _run_sweep_eps(config: RunConfig, out: Path, threads: int, repo: ResultRepository) -> None:
    plan = build_sweep_plan(config, SweepParameter.EPS, threads)
    report = eps_sweep(plan)
    _finish_rate_report(report, out / "sweep_eps", repo, config.sweeps.enforce_gates)


def _run_mms(config: RunConfig, out: Path, threads: int, repo: ResultRepository) -> None:
    report = mms_verify(
        build_manufactured(config),
        build_problem(config),
        build_solver_config(config),
        ladder=config.mms.values(DEFAULT_MMS_LADDER),
        refine=config.mms.refine,
        threads=threads,
    )
    _finish_rate_report(report, out / "mms", repo, enforce_gates=True)


def _run_check(config: RunConfig, out: Path, threads: int, repo: ResultRepository) -> None:
    report = get_property_suite_service(config).run()
    repo.write_json(out / "check" / "report.json", report)
    for result in report.results:
        print(f"{'PASS' if result.passed else 'FAIL'} {result.name}")
    failed = [result.name for result in report.results if not result.passed]
    if failed:
        raise GateFailedError(f"properties failed: {', '.join(failed)}", details={"properties": failed})


COMMANDS: Dict[str, Callable[[RunConfig, Path, int, ResultRepository], None]] = {
    "solve": _run_solve,
    "sweep-beta": _run_sweep_beta,
    "sweep-eps": _run_sweep_eps,
    "mms": _run_mms,
    "check": _run_check,
}


def run(
    config: RunConfig,
    subcommand: str,
    out: Optional[str] = None,
    threads: Optional[int] = None,
    repo: Optional[ResultRepository] = None,
) -> int:
    """Ejecuta un subcomando; devuelve el código de salida y deja los artefactos en disco"""
    if subcommand not in COMMANDS:
        raise ValueError(f"unknown subcommand '{subcommand}', expected one of {SUBCOMMANDS}")
    repo = repo or get_result_repository()
    out_dir = resolve_output_dir(config, out)
    threads = threads or config.output.threads
    try:
        with track_performance(subcommand):
            COMMANDS[subcommand](config, out_dir, threads, repo)
        return EXIT_OK
    except Exception as exc:
        code, payload = ErrorHandler().handle(exc)
        repo.write_error(out_dir, payload)
        print(json.dumps(payload, sort_keys=True, default=str))
        return code


# ============================================================================
# Entrada
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phasefield",
        description="Experimentos del sistema de campo de fase con conducción de calor tipo III",
    )
    parser.add_argument("subcommand", choices=SUBCOMMANDS, help="Experimento a ejecutar")
    parser.add_argument("--config", help="Archivo de configuración JSON (opcional para 'check')")
    parser.add_argument("--out", help="Directorio de salida")
    parser.add_argument("--threads", type=int, help="Hilos para los niveles de los barridos")
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="Nivel de logging")
    parser.add_argument("--no-log-file", action="store_true", help="No escribir archivos de log")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level, log_to_file=not args.no_log_file)
    settings = get_settings()
    logger.info(f"🚀 {settings.name} v{settings.version}: {args.subcommand}")

    if args.threads is not None and args.threads < 1:
        print("--threads must be >= 1", file=sys.stderr)
        return 2

    if args.config is None:
        if args.subcommand != "check":
            print(f"--config is required for '{args.subcommand}'", file=sys.stderr)
            return 2
        config = default_config()
    else:
        try:
            config = load_config(args.config)
        except Exception as exc:
            code, payload = ErrorHandler().handle(exc)
            out_dir = Path(args.out or settings.output_dir)
            get_result_repository().write_error(out_dir, payload)
            print(json.dumps(payload, sort_keys=True, default=str))
            return code

    return run(config, args.subcommand, out=args.out, threads=args.threads)


__all__: List[str] = ["run", "main", "build_parser", "default_config", "SUBCOMMANDS"]
