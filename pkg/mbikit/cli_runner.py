"""Command-line front end for mbikit.

Subcommands:

- ``simulate --config <path> [--run-dir <dir>]``: evolve initial data, write
  snapshots, ``diagnostics.csv``, ``summary.json`` and the resolved ``config.json``;
  the property suite runs first with the ``checks`` settings
- ``verify-algebra --samples N --seed S``: run the pointwise property suite
- ``decay-report --run <dir>``: fit decay exponents from a finished run
- ``schema``: print the run-configuration JSON schema

Exit codes: 0 ok, 1 configuration or input error, 2 degenerate state,
3 property failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path
from typing import List, Optional

from . import diagnostics as dg
from .config import RUN_CONFIG_SCHEMA, RunConfig, ensure_writable, load_run_config, log_level
from .errors import ConfigError, DegenerateState, InsufficientData, InsufficientHistory
from .field_solver import (
    Evolution,
    FieldState,
    Grid,
    SlabExecutor,
    SolverConfig,
    check_state,
    make_initial_data,
    residual_components,
    step_rk4,
)
from .snapshots import snapshot_stem, write_snapshot
from .verification import DEFAULT_TOLERANCE, run_suite

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DEGENERATE = 2
EXIT_PROPERTY = 3

SERIES_FILE = 'diagnostics.csv'
SUMMARY_FILE = 'summary.json'
CONFIG_FILE = 'config.json'
DEGENERACY_FILE = 'degeneracy.json'
ALGEBRA_FILE = 'algebra.json'
DECAY_REPORT_FILE = 'decay_report.json'
SNAPSHOT_DIR = 'snapshots'
# allowed |fitted - target| before a component is flagged in the decay report
DECAY_TOLERANCE = 0.5


def _write_json(path: Path, payload: dict) -> Path:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + '\n', encoding='utf-8')
    return path


def _relative_drift(initial: float, final: float) -> float:
    if initial == 0.0:
        return 0.0 if final == 0.0 else math.inf
    return abs(final - initial) / abs(initial)


def default_q0(config: RunConfig) -> float:
    """Retarded-time offset of the pulse: the configured q0 or the data centre radius."""
    if config.diagnostics.q0 is not None:
        return float(config.diagnostics.q0)
    if config.initial_data.kind in ('zero', 'random_smooth'):
        return 0.0
    return math.sqrt(sum(c * c for c in config.initial_data.center))


class RunObserver:
    """Feeds the diagnostic recorder and writes snapshots per the output policy."""

    def __init__(self, config: RunConfig, run_dir: Path, final_step: int, executor: SlabExecutor):
        self.config = config
        self.final_step = final_step
        self.snapshot_dir = run_dir / SNAPSHOT_DIR
        self.recorder = dg.DiagnosticRecorder(
            config.mode, config.order, config.diagnostics.shells, executor
        )
        self.snapshots: List[str] = []

    def wants_snapshot(self, step: int) -> bool:
        policy = self.config.output.snapshots
        if policy == 'cadence':
            return True
        if policy == 'ends':
            return step in (0, self.final_step)
        return False

    def __call__(self, step: int, state: FieldState) -> None:
        self.recorder(step, state)
        if self.wants_snapshot(step):
            stem = snapshot_stem(self.snapshot_dir, step)
            write_snapshot(state, stem, self.config.mode, self.config.order, self.config.seed)
            self.snapshots.append(stem.name)

    @property
    def series(self) -> Optional[dg.DiagnosticSeries]:
        return self.recorder.series


def _final_residual(state: FieldState, dt: float, config: RunConfig, executor: SlabExecutor) -> dict:
    """Residual on the final state and two further steps of the same size."""
    window = [state]
    for _ in range(2):
        window.append(step_rk4(window[-1], dt, config.mode, config.order, executor))
    return residual_components(window, config.mode, config.order)


def cmd_simulate(config: RunConfig) -> int:
    run_dir = ensure_writable(config.output.dir)
    _write_json(run_dir / CONFIG_FILE, config.to_dict())

    algebra = run_suite(
        samples=config.checks.algebra_samples,
        seed=config.seed,
        tolerance=config.checks.tolerance,
    )
    _write_json(run_dir / ALGEBRA_FILE, algebra.as_dict())
    if not algebra.passed:
        logging.error('Property failures before evolution: %s', ', '.join(algebra.failed))
        return EXIT_PROPERTY

    grid = Grid(config.grid.n, config.grid.h)
    executor = SlabExecutor()
    solver = SolverConfig(
        mode=config.mode,
        order=config.order,
        cfl=config.cfl,
        t_end=config.t_end,
        cadence=config.output.cadence,
    )
    observer: Optional[RunObserver] = None
    try:
        initial = make_initial_data(config.initial_data, grid, config.order)
        check_state(initial, config.mode)
        evolution = Evolution(initial, solver, executor)
        observer = RunObserver(config, run_dir, evolution.steps, executor)
        energy_start = dg.mbi_energy(initial, config.mode)
        final = evolution.run(observer)
        residual = _final_residual(final, evolution.dt, config, executor)
    except DegenerateState as e:
        logging.error('Degenerate state: %s', e)
        _write_json(run_dir / DEGENERACY_FILE, e.location_report())
        if observer is not None and observer.series is not None:
            observer.series.to_csv(run_dir / SERIES_FILE)
        return EXIT_DEGENERATE

    series = observer.series
    series.to_csv(run_dir / SERIES_FILE)
    e0 = series.column('E0')
    energy_end = dg.mbi_energy(final, config.mode)
    summary = {
        'mode': config.mode,
        'n': grid.n,
        'h': grid.h,
        'order': config.order,
        'dt': evolution.dt,
        'steps': evolution.steps,
        't_end': final.t,
        'seed': config.seed,
        'records': len(series),
        'E0_initial': float(e0[0]),
        'E0_final': float(e0[-1]),
        'E0_drift': _relative_drift(float(e0[0]), float(e0[-1])),
        'mbi_energy_initial': energy_start,
        'mbi_energy_final': energy_end,
        'mbi_energy_drift': _relative_drift(energy_start, energy_end),
        'ell_min': float(series.column('ell_min').min()),
        'divB_max': float(series.column('divB_max').max()),
        'divD_max': float(series.column('divD_max').max()),
        'field_scale': final.field_scale(),
        'residual': residual,
        'q0': default_q0(config),
        'shell_radii': [float(r) for r in series.radii],
        'snapshots': observer.snapshots,
    }
    _write_json(run_dir / SUMMARY_FILE, summary)
    logging.info(
        'Run complete: %d steps, E0 drift %.3e, MBI energy drift %.3e, ell_min %.6g -> %s',
        evolution.steps, summary['E0_drift'], summary['mbi_energy_drift'], summary['ell_min'], run_dir,
    )
    return EXIT_OK


def cmd_verify_algebra(samples: int, seed: int, tolerance: float = DEFAULT_TOLERANCE, out: Optional[str] = None) -> int:
    report = run_suite(samples=samples, seed=seed, tolerance=tolerance)
    payload = report.as_dict()
    text = json.dumps(payload, indent=2)
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text + '\n', encoding='utf-8')
    print(text)
    if not report.passed:
        logging.error('Property failures: %s', ', '.join(report.failed))
        return EXIT_PROPERTY
    return EXIT_OK


def decay_report(run_dir: str | Path, q0: Optional[float] = None, t_min: float = 0.0) -> dict:
    """Fit every null component of a finished run against its target exponent."""
    run_dir = Path(run_dir)
    series_path = run_dir / SERIES_FILE
    if not series_path.exists():
        raise InsufficientData(f'{series_path} not found; run simulate first')
    if q0 is None:
        summary_path = run_dir / SUMMARY_FILE
        q0 = 0.0
        if summary_path.exists():
            q0 = float(json.loads(summary_path.read_text(encoding='utf-8')).get('q0', 0.0))
    series = dg.DiagnosticSeries.from_csv(series_path)
    fits = {}
    for component in dg.PROFILE_COMPONENTS:
        fit = dg.decay_fit(series, component, q=q0, t_min=t_min)
        entry = fit.as_dict()
        entry['deviation'] = fit.deviation()
        entry['within_tolerance'] = abs(fit.deviation()) <= DECAY_TOLERANCE
        fits[component] = entry
    return {'run': str(run_dir), 'q0': q0, 't_min': t_min, 'tolerance': DECAY_TOLERANCE, 'fits': fits}


def cmd_decay_report(run_dir: str, q0: Optional[float] = None, t_min: float = 0.0) -> int:
    report = decay_report(run_dir, q0, t_min)
    _write_json(Path(run_dir) / DECAY_REPORT_FILE, report)
    print(json.dumps(report, indent=2))
    for component, fit in report['fits'].items():
        logging.info(
            '%s (%s): exponent %.3f ± %.3f, target %.2f',
            component, fit['tracking'], fit['exponent'], fit['ci95'], fit['target'],
        )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='mbikit', description='Maxwell-Born-Infeld simulation and verification kit.')
    sub = parser.add_subparsers(dest='command', required=True)

    sim = sub.add_parser('simulate', help='Evolve initial data and write diagnostics.')
    sim.add_argument('--config', required=True, help='Path to a JSON run configuration')
    sim.add_argument('--run-dir', default=None, help='Output directory (overrides output.dir)')

    ver = sub.add_parser('verify-algebra', help='Run the pointwise property suite.')
    ver.add_argument('--samples', type=int, default=1000, help='Random samples per property (default: 1000)')
    ver.add_argument('--seed', type=int, default=0, help='Random seed (default: 0)')
    ver.add_argument('--tolerance', type=float, default=DEFAULT_TOLERANCE, help='Relative tolerance')
    ver.add_argument('--out', default=None, help='Also write the JSON report here')

    dec = sub.add_parser('decay-report', help='Fit decay exponents of a finished run.')
    dec.add_argument('--run', required=True, help='Run directory written by simulate')
    dec.add_argument('--q0', type=float, default=None, help='Retarded-time offset (default: from summary.json)')
    dec.add_argument('--t-min', type=float, default=0.0, help='Ignore records before this time')

    sub.add_parser('schema', help='Print the run configuration JSON schema.')
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=log_level(), format='%(asctime)s - %(levelname)s - %(message)s')

    try:
        if args.command == 'simulate':
            config = load_run_config(args.config, args.run_dir)
            return cmd_simulate(config)
        if args.command == 'verify-algebra':
            if args.samples < 1:
                raise ConfigError('--samples must be >= 1')
            return cmd_verify_algebra(args.samples, args.seed, args.tolerance, args.out)
        if args.command == 'decay-report':
            return cmd_decay_report(args.run, args.q0, args.t_min)
        if args.command == 'schema':
            print(json.dumps(RUN_CONFIG_SCHEMA, indent=2))
            return EXIT_OK
    except (ConfigError, InsufficientData, InsufficientHistory) as e:
        logging.error('%s', e)
        return EXIT_CONFIG
    parser.error(f'unknown command {args.command!r}')
    return EXIT_CONFIG


def run() -> None:
    raise SystemExit(main(sys.argv[1:]))


if __name__ == '__main__':
    run()
