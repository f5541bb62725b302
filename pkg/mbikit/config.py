"""Run configuration and environment settings.

A run is described by a JSON document validated against ``RUN_CONFIG_SCHEMA``
(unknown keys are rejected at every level). Process-wide knobs that do not
change results come from environment variables:

- ``MBIKIT_WORKERS``: slab worker threads for grid kernels (default 1)
- ``MBIKIT_LOG_LEVEL``: logging level name (default INFO)
- ``MBIKIT_PROGRESS``: set to 0 to disable the progress bar
"""
from __future__ import annotations

import json
import logging
import os
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import jsonschema

from .errors import ConfigError

INITIAL_DATA_KINDS = ('zero', 'gaussian_loop', 'plane_packet', 'random_smooth')
MODES = ('mbi', 'maxwell')
SNAPSHOT_POLICIES = ('none', 'ends', 'cadence')

# envelope widths counted as the support radius of generated data
ENVELOPE_WIDTHS = 4.0

_VECTOR3 = {'type': 'array', 'items': {'type': 'number'}, 'minItems': 3, 'maxItems': 3}

RUN_CONFIG_SCHEMA: Dict[str, Any] = {
    '$schema': 'https://json-schema.org/draft/2020-12/schema',
    'title': 'mbikit run configuration',
    'type': 'object',
    'additionalProperties': False,
    'required': ['mode', 'grid', 'initial_data', 't_end'],
    'properties': {
        'mode': {'enum': list(MODES)},
        'grid': {
            'type': 'object',
            'additionalProperties': False,
            'required': ['n', 'h'],
            'properties': {
                'n': {'type': 'integer', 'minimum': 8},
                'h': {'type': 'number', 'exclusiveMinimum': 0},
            },
        },
        'initial_data': {
            'type': 'object',
            'additionalProperties': False,
            'required': ['kind'],
            'properties': {
                'kind': {'enum': list(INITIAL_DATA_KINDS)},
                'amplitude': {'type': 'number'},
                'width': {'type': 'number', 'exclusiveMinimum': 0},
                'center': _VECTOR3,
                'wavevector': _VECTOR3,
                'polarization': _VECTOR3,
                'seed': {'type': 'integer', 'minimum': 0},
            },
        },
        'order': {'enum': [2, 4]},
        'cfl': {'type': 'number', 'exclusiveMinimum': 0, 'maximum': 0.5},
        't_end': {'type': 'number', 'minimum': 0},
        'seed': {'type': 'integer', 'minimum': 0},
        'output': {
            'type': 'object',
            'additionalProperties': False,
            'properties': {
                'dir': {'type': 'string', 'minLength': 1},
                'cadence': {'type': 'integer', 'minimum': 1},
                'snapshots': {'enum': list(SNAPSHOT_POLICIES)},
            },
        },
        'diagnostics': {
            'type': 'object',
            'additionalProperties': False,
            'properties': {
                'shells': {'type': 'integer', 'minimum': 1},
                'q0': {'type': ['number', 'null']},
            },
        },
        'checks': {
            'type': 'object',
            'additionalProperties': False,
            'properties': {
                'algebra_samples': {'type': 'integer', 'minimum': 1},
                'tolerance': {'type': 'number', 'exclusiveMinimum': 0},
                'enforce_non_wrap': {'type': 'boolean'},
            },
        },
    },
}


@dataclass(frozen=True)
class GridSettings:
    n: int
    h: float

    @property
    def extent(self) -> float:
        return self.n * self.h


@dataclass(frozen=True)
class InitialDataSpec:
    """Parameters of one initial-data family.

    ``gaussian_loop`` and ``random_smooth`` use ``width`` as the Gaussian
    envelope scale; ``plane_packet`` modulates a plane wave with wave vector
    ``wavevector`` and polarization ``polarization`` by the same envelope.
    """

    kind: str = 'gaussian_loop'
    amplitude: float = 0.01
    width: float = 1.0
    center: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    wavevector: Tuple[float, float, float] = (2.0, 0.0, 0.0)
    polarization: Tuple[float, float, float] = (0.0, 1.0, 0.0)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in INITIAL_DATA_KINDS:
            raise ConfigError(f'unknown initial data kind {self.kind!r}; expected one of {INITIAL_DATA_KINDS}')
        if self.width <= 0:
            raise ConfigError('initial data width must be positive')

    def data_radius(self) -> float:
        """Radius of a ball about the origin holding the data up to exponentially small tails."""
        if self.kind == 'zero':
            return 0.0
        offset = sum(c * c for c in self.center) ** 0.5
        if self.kind == 'random_smooth':
            offset = 0.0
        return offset + ENVELOPE_WIDTHS * self.width


@dataclass(frozen=True)
class OutputSettings:
    dir: str = 'runs/latest'
    cadence: int = 10
    snapshots: str = 'ends'


@dataclass(frozen=True)
class DiagnosticSettings:
    shells: int = 16
    q0: Optional[float] = None


@dataclass(frozen=True)
class CheckSettings:
    algebra_samples: int = 1000
    tolerance: float = 1e-10
    enforce_non_wrap: bool = True


@dataclass(frozen=True)
class RunConfig:
    mode: str
    grid: GridSettings
    initial_data: InitialDataSpec
    t_end: float
    order: int = 4
    cfl: float = 0.4
    seed: int = 0
    output: OutputSettings = field(default_factory=OutputSettings)
    diagnostics: DiagnosticSettings = field(default_factory=DiagnosticSettings)
    checks: CheckSettings = field(default_factory=CheckSettings)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'RunConfig':
        validate_document(data)
        init = dict(data['initial_data'])
        for key in ('center', 'wavevector', 'polarization'):
            if key in init:
                init[key] = tuple(float(v) for v in init[key])
        return cls(
            mode=data['mode'],
            grid=GridSettings(**data['grid']),
            initial_data=InitialDataSpec(**init),
            t_end=float(data['t_end']),
            order=int(data.get('order', 4)),
            cfl=float(data.get('cfl', 0.4)),
            seed=int(data.get('seed', 0)),
            output=OutputSettings(**data.get('output', {})),
            diagnostics=DiagnosticSettings(**data.get('diagnostics', {})),
            checks=CheckSettings(**data.get('checks', {})),
        )

    def to_dict(self) -> Dict[str, Any]:
        out = asdict(self)
        for key in ('center', 'wavevector', 'polarization'):
            out['initial_data'][key] = list(out['initial_data'][key])
        return out

    def with_output_dir(self, run_dir: str | os.PathLike) -> 'RunConfig':
        return replace(self, output=replace(self.output, dir=str(run_dir)))

    def check_non_wrap(self) -> None:
        """Periodic images must not reach the data before t_end: n·h >= 2(t_end + R)."""
        needed = 2.0 * (self.t_end + self.initial_data.data_radius())
        if self.grid.extent < needed:
            raise ConfigError(
                f'grid extent n*h = {self.grid.extent:g} is below 2*(t_end + data radius) = {needed:g}; '
                'enlarge the grid or shorten t_end'
            )


def validate_document(data: Any) -> None:
    """Validate a decoded JSON document against RUN_CONFIG_SCHEMA."""
    validator = jsonschema.Draft202012Validator(RUN_CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        lines = []
        for err in errors:
            where = '/'.join(str(p) for p in err.absolute_path) or '<root>'
            lines.append(f'{where}: {err.message}')
        raise ConfigError('invalid run configuration:\n  ' + '\n  '.join(lines))


def ensure_writable(directory: str | os.PathLike) -> Path:
    path = Path(directory)
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ConfigError(f'cannot create output directory {path}: {e}') from e
    if not os.access(path, os.W_OK):
        raise ConfigError(f'output directory {path} is not writable')
    return path


def load_run_config(path: str | os.PathLike, run_dir: Optional[str | os.PathLike] = None) -> RunConfig:
    """Read, validate and sanity-check a run configuration file."""
    try:
        text = Path(path).read_text(encoding='utf-8')
    except OSError as e:
        raise ConfigError(f'cannot read config {path}: {e}') from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f'config {path} is not valid JSON: {e}') from e
    config = RunConfig.from_dict(data)
    if run_dir is not None:
        config = config.with_output_dir(run_dir)
    if config.checks.enforce_non_wrap:
        config.check_non_wrap()
    ensure_writable(config.output.dir)
    logging.info('Loaded run config %s (mode=%s, n=%d, h=%g)', path, config.mode, config.grid.n, config.grid.h)
    return config


def solver_workers() -> int:
    raw = os.environ.get('MBIKIT_WORKERS', '1')
    try:
        workers = int(raw)
    except ValueError:
        raise ConfigError(f'MBIKIT_WORKERS must be an integer, got {raw!r}') from None
    if workers < 1:
        raise ConfigError(f'MBIKIT_WORKERS must be >= 1, got {workers}')
    return workers


def progress_enabled() -> bool:
    return os.environ.get('MBIKIT_PROGRESS', '1').lower() not in ('0', 'false', 'no')


def log_level() -> int:
    name = os.environ.get('MBIKIT_LOG_LEVEL', 'INFO').upper()
    level = logging.getLevelName(name)
    return level if isinstance(level, int) else logging.INFO


__all__ = [
    'RUN_CONFIG_SCHEMA',
    'GridSettings',
    'InitialDataSpec',
    'OutputSettings',
    'DiagnosticSettings',
    'CheckSettings',
    'RunConfig',
    'validate_document',
    'ensure_writable',
    'load_run_config',
    'solver_workers',
    'progress_enabled',
    'log_level',
]
