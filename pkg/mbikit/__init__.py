"""mbikit package entrypoint.

Numerical kit for the Maxwell-Born-Infeld system on Minkowski space:
tensor algebra and null frames (`minkowski_core`), the constitutive law
(`mbi_constitutive`), stress tensors and currents (`stress_currents`), a
periodic finite-difference solver (`field_solver`), grid diagnostics
(`diagnostics`) and the command-line front end (`cli_runner`).
Run it as a package with ``python -m mbikit``.
"""
from __future__ import annotations

from .errors import (
    ConfigError,
    DegenerateState,
    FrameSingularity,
    InsufficientData,
    InsufficientHistory,
    MbiKitError,
    NotCausal,
)
from .minkowski_core import TwoForm, em_decompose, em_recompose, hodge_dual, invariants, null_frame_at
from .mbi_constitutive import ell, maxwell_tensor
from .field_solver import Evolution, FieldState, Grid, SolverConfig
from .config import RunConfig, load_run_config


def main(argv: list[str] | None = None) -> int:
    """Run the command-line interface (see `mbikit.cli_runner`)."""
    from .cli_runner import main as cli_main

    return cli_main(argv)


__all__ = [
    'main',
    'MbiKitError',
    'DegenerateState',
    'FrameSingularity',
    'NotCausal',
    'InsufficientHistory',
    'InsufficientData',
    'ConfigError',
    'TwoForm',
    'em_decompose',
    'em_recompose',
    'hodge_dual',
    'invariants',
    'null_frame_at',
    'ell',
    'maxwell_tensor',
    'Grid',
    'FieldState',
    'SolverConfig',
    'Evolution',
    'RunConfig',
    'load_run_config',
]
