"""Weighted norms, energies, Lie derivatives, null profiles and decay fits.

Everything here reads solver states or snapshots and never mutates them.
Grid integrals use midpoint quadrature (h³ Σ) accumulated over fixed z-chunks
in index order, so values do not depend on how the solver was parallelised.
"""
from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import ndimage, stats

from .errors import InsufficientData, InsufficientHistory
from .field_solver import (
    FieldState,
    Grid,
    SlabExecutor,
    div_h,
    diff_h,
    faraday_with_rate,
    spatial_gradient,
)
from .minkowski_core import (
    POINT_R_MIN,
    TwoForm,
    hodge_dual,
    null_decompose,
    null_frame_at,
)
from .stress_currents import (
    CONFORMAL_GENERATORS,
    KillingGenerator,
    em_tensor_mbi,
    energy_current_j0,
    knorm_sq,
    knorm_sq_from_interior_products,
    lie_derivative,
    modified_lie_derivative,
)

MAX_SOBOLEV_ORDER = 3
MAX_ENERGY_ORDER = 1
CHUNK_ROWS = 8
SHELL_POINTS = 256
MIN_FIT_SAMPLES = 5
SERIES_COLUMNS = ('time', 'E0', 'E1', 'knorm_int', 'divB_max', 'divD_max', 'ell_min')
PROFILE_COMPONENTS = ('ualpha', 'alpha', 'rho', 'sigma')
TARGET_EXPONENTS = {'ualpha': -1.0, 'alpha': -2.5, 'rho': -2.0, 'sigma': -2.0}
DEFAULT_TRACKING = {'ualpha': 'fixed_q', 'alpha': 'wavezone', 'rho': 'wavezone', 'sigma': 'wavezone'}
# generators whose action involves ∂t
TIME_DEPENDENT = frozenset({'T0', 'O01', 'O02', 'O03', 'S', 'Kbar'})

_PROFILE_COLUMN = re.compile(r'^(ualpha|alpha|rho|sigma)_r(.+)$')


def _chunks(n: int) -> Iterable[Tuple[int, int]]:
    for z0 in range(0, n, CHUNK_ROWS):
        yield z0, min(n, z0 + CHUNK_ROWS)


def _integrate(density: Callable[[int, int], np.ndarray], grid: Grid) -> float:
    total = 0.0
    for z0, z1 in _chunks(grid.n):
        total += float(np.sum(density(z0, z1)))
    return total * grid.cell_volume


# ---------------------------------------------------------------------------
# weighted Sobolev norms

def _derivative_tree(u: np.ndarray, h: float, order: int, depth: int, max_depth: int, visit) -> None:
    visit(depth, u)
    if depth < max_depth:
        for j in range(3):
            _derivative_tree(diff_h(u, j, h, order), h, order, depth + 1, max_depth, visit)


def _check_order(n_derivs: int) -> None:
    if not 0 <= n_derivs <= MAX_SOBOLEV_ORDER:
        raise ValueError(f'derivative order must be between 0 and {MAX_SOBOLEV_ORDER}, got {n_derivs}')


def weighted_sobolev_norm(u: np.ndarray, grid: Grid, n_derivs: int, delta: float, order: int = 4) -> float:
    """‖U‖_{H^N_δ} = (Σ_{n≤N} ∫ (1+|x|²)^{δ+n} |∇^n U|²)^{1/2}.

    ``u`` has any number of leading component axes followed by (nz, ny, nx).
    """
    _check_order(n_derivs)
    u = np.asarray(u, dtype=float)
    base = 1.0 + grid.radius() ** 2
    total = [0.0]

    def visit(depth: int, value: np.ndarray) -> None:
        sq = np.sum(value.reshape((-1,) + grid.shape) ** 2, axis=0)
        total[0] += float(np.sum(base ** (delta + depth) * sq))

    _derivative_tree(u, grid.h, order, 0, n_derivs, visit)
    return math.sqrt(total[0] * grid.cell_volume)


def weighted_c_norm(u: np.ndarray, grid: Grid, n_derivs: int, delta: float, order: int = 4) -> float:
    """‖U‖_{C^N_δ} = (Σ_{n≤N} sup (1+|x|²)^{δ+n} |∇^n U|²)^{1/2}."""
    _check_order(n_derivs)
    u = np.asarray(u, dtype=float)
    base = 1.0 + grid.radius() ** 2
    per_level = [np.zeros(grid.shape) for _ in range(n_derivs + 1)]

    def visit(depth: int, value: np.ndarray) -> None:
        per_level[depth] += np.sum(value.reshape((-1,) + grid.shape) ** 2, axis=0)

    _derivative_tree(u, grid.h, order, 0, n_derivs, visit)
    total = sum(float(np.max(base ** (delta + n) * level)) for n, level in enumerate(per_level))
    return math.sqrt(total)


def embedding_ratio(u: np.ndarray, grid: Grid, delta_sup: float, delta: float, order: int = 4) -> float:
    """‖U‖_{C⁰_δ'} / ‖U‖_{H²_δ}; bounded for δ' < δ + 3/2."""
    denom = weighted_sobolev_norm(u, grid, 2, delta, order)
    if denom == 0:
        return 0.0
    return weighted_c_norm(u, grid, 0, delta_sup, order) / denom


# ---------------------------------------------------------------------------
# Faraday data on a time slice

@dataclass(frozen=True, eq=False)
class FaradaySlice:
    """F on one time slice, with ∂t F when it is known."""

    form: TwoForm
    t: float
    grid: Grid
    rate: Optional[TwoForm] = None
    order: int = 4

    @classmethod
    def from_state(
        cls,
        state: FieldState,
        mode: str = 'mbi',
        order: int = 4,
        executor: Optional[SlabExecutor] = None,
    ) -> 'FaradaySlice':
        form, rate = faraday_with_rate(state, mode, order, executor)
        return cls(form, state.t, state.grid, rate, order)

    @classmethod
    def from_snapshots(
        cls,
        previous: FieldState,
        current: FieldState,
        following: FieldState,
        mode: str = 'mbi',
        order: int = 4,
    ) -> 'FaradaySlice':
        back = current.t - previous.t
        ahead = following.t - current.t
        if back <= 0 or not math.isclose(back, ahead, rel_tol=1e-9):
            raise InsufficientHistory('centered time derivative needs equally spaced neighbouring snapshots')
        rate = (following.faraday(mode) - previous.faraday(mode)) * (1.0 / (back + ahead))
        return cls(current.faraday(mode), current.t, current.grid, rate, order)

    def dual(self) -> 'FaradaySlice':
        rate = hodge_dual(self.rate) if self.rate is not None else None
        return FaradaySlice(hodge_dual(self.form), self.t, self.grid, rate, self.order)

    def gradient(self) -> List[TwoForm]:
        """[∂t F, ∂1 F, ∂2 F, ∂3 F]; raises InsufficientHistory without ∂t F."""
        if self.rate is None:
            raise InsufficientHistory('time derivative of F is not available for this slice')
        return [self.rate] + spatial_gradient(self.form, self.grid.h, self.order)

    def spatial_gradient(self) -> List[TwoForm]:
        return spatial_gradient(self.form, self.grid.h, self.order)


def lie_derivative_field(
    field: FaradaySlice,
    z: KillingGenerator,
    modified: bool = False,
) -> TwoForm:
    """£_Z F (or the modified £̂_Z F) on the grid, indices down."""
    if z.id in TIME_DEPENDENT and field.rate is None:
        raise InsufficientHistory(f'Lie derivative along {z.id} needs ∂t F (a rate or neighbouring snapshots)')
    spatial = field.spatial_gradient()
    time_part = field.rate if field.rate is not None else TwoForm.zeros(field.grid.shape)
    gradient = [time_part] + spatial
    points = field.grid.points()
    op = modified_lie_derivative if modified else lie_derivative
    parts = []
    for z0, z1 in _chunks(field.grid.n):
        rows = slice(z0, z1)
        parts.append(
            op(field.form[rows], [g[rows] for g in gradient], z, field.t, points[rows]).components
        )
    return TwoForm(np.concatenate(parts, axis=0))


# ---------------------------------------------------------------------------
# energies and weighted integral norms

def _background(field: FaradaySlice, mode: str) -> TwoForm:
    return TwoForm.zeros(field.grid.shape) if mode == 'maxwell' else field.form


def _j0_integral(background: TwoForm, variation: TwoForm, t: float, grid: Grid) -> float:
    points = grid.points()

    def density(z0: int, z1: int) -> np.ndarray:
        rows = slice(z0, z1)
        return energy_current_j0(background[rows], variation[rows], t, points[rows])

    return _integrate(density, grid)


def _variations(field: FaradaySlice, n_lie: int, generators: Sequence[KillingGenerator]) -> Iterable[TwoForm]:
    if not 0 <= n_lie <= MAX_ENERGY_ORDER:
        raise ValueError(f'Lie order must be 0 or 1, got {n_lie}')
    yield field.form
    if n_lie == 1:
        for z in generators:
            yield lie_derivative_field(field, z)


def energy_EN(
    field: FaradaySlice,
    n_lie: int = 0,
    mode: str = 'mbi',
    generators: Sequence[KillingGenerator] = CONFORMAL_GENERATORS,
) -> float:
    """𝓔_N = (Σ_{|I|≤N} ∫ J⁰[£^I F])^{1/2}.

    The MBI current uses F itself as the background; in maxwell mode the
    background is zero and J⁰ is the conformal Maxwell energy density.
    """
    background = _background(field, mode)
    total = sum(_j0_integral(background, var, field.t, field.grid) for var in _variations(field, n_lie, generators))
    return math.sqrt(max(total, 0.0))


def knorm_sq_field(form: TwoForm, t: float, points: np.ndarray) -> np.ndarray:
    """Knorm² at grid nodes; the frame at r = 0 is taken along x̂ (Knorm² is frame independent there)."""
    r = np.sqrt(np.sum(points ** 2, axis=-1))
    at_origin = r < 10.0 * POINT_R_MIN
    if np.any(at_origin):
        points = points.copy()
        points[at_origin] = [10.0 * POINT_R_MIN, 0.0, 0.0]
    return knorm_sq(null_decompose(form, null_frame_at(t, points)))


def knorm_integral(
    field: FaradaySlice,
    n_lie: int = 0,
    generators: Sequence[KillingGenerator] = CONFORMAL_GENERATORS,
) -> float:
    """|||F|||_N = (∫ Σ_{|I|≤N} Knorm²(£^I F))^{1/2}."""
    points = field.grid.points()
    total = 0.0
    for var in _variations(field, n_lie, generators):
        total += _integrate(
            lambda z0, z1, v=var: knorm_sq_field(v[z0:z1], field.t, points[z0:z1]),
            field.grid,
        )
    return math.sqrt(total)


def ebpq_integral(field: FaradaySlice) -> float:
    """∫ 2(|E|² + |B|² + |P|² + |Q|²) with P = i_S F and Q = i_S ⋆F; equals |||F|||₀²."""
    points = field.grid.points()
    return _integrate(
        lambda z0, z1: knorm_sq_from_interior_products(field.form[z0:z1], field.t, points[z0:z1]),
        field.grid,
    )


def mbi_energy(state: FieldState, mode: str = 'mbi') -> float:
    """∫ T^{00}: the MBI energy, or ½∫(|D|² + |B|²) in maxwell mode."""
    if mode == 'maxwell':
        return 0.5 * float(np.sum(state.d ** 2) + np.sum(state.b ** 2)) * state.grid.cell_volume
    form = state.faraday(mode)
    return _integrate(lambda z0, z1: em_tensor_mbi(form[z0:z1]).upper[..., 0, 0], state.grid)


# ---------------------------------------------------------------------------
# null-component profiles on spheres

def fibonacci_sphere(count: int = SHELL_POINTS) -> np.ndarray:
    i = np.arange(count) + 0.5
    z = 1.0 - 2.0 * i / count
    phi = np.pi * (3.0 - np.sqrt(5.0)) * np.arange(count)
    rho = np.sqrt(1.0 - z ** 2)
    return np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=-1)


def shell_radii(grid: Grid, shells: int) -> np.ndarray:
    """r_k = k Δr with Δr = 2h, kept inside the periodic box."""
    dr = 2.0 * grid.h
    r_max = 0.5 * grid.extent - 2.0 * grid.h
    radii = dr * np.arange(1, shells + 1)
    kept = radii[radii <= r_max]
    if len(kept) < shells:
        logging.warning('Only %d of %d shells fit inside the grid (r_max=%g)', len(kept), shells, r_max)
    return kept


@dataclass(frozen=True, eq=False)
class ShellProfile:
    t: float
    radii: np.ndarray
    ualpha: np.ndarray
    alpha: np.ndarray
    rho: np.ndarray
    sigma: np.ndarray

    def component(self, name: str) -> np.ndarray:
        if name not in PROFILE_COMPONENTS:
            raise ValueError(f'unknown null component {name!r}')
        return getattr(self, name)


def interpolate_form(form: TwoForm, grid: Grid, positions: np.ndarray) -> TwoForm:
    """Trilinear periodic interpolation of a grid two-form to arbitrary positions (..., 3)."""
    frac = (positions - np.asarray(grid.origin)) / grid.h
    coords = np.stack([frac[..., 2].ravel(), frac[..., 1].ravel(), frac[..., 0].ravel()])
    comps = [
        ndimage.map_coordinates(form.components[..., c], coords, order=1, mode='grid-wrap')
        for c in range(6)
    ]
    return TwoForm(np.stack(comps, axis=-1).reshape(positions.shape[:-1] + (6,)))


def null_profiles(form: TwoForm, grid: Grid, t: float, radii: np.ndarray) -> ShellProfile:
    """Per-shell maxima of |ᾱ|, |α|, |ρ|, |σ| over a Fibonacci lattice."""
    directions = fibonacci_sphere()
    radii = np.asarray(radii, dtype=float)
    positions = radii[:, None, None] * directions[None, :, :]
    sampled = interpolate_form(form, grid, positions)
    nc = null_decompose(sampled, null_frame_at(t, positions))
    return ShellProfile(
        t=t,
        radii=radii,
        ualpha=np.max(np.linalg.norm(nc.ualpha, axis=-1), axis=-1),
        alpha=np.max(np.linalg.norm(nc.alpha, axis=-1), axis=-1),
        rho=np.max(np.abs(nc.rho), axis=-1),
        sigma=np.max(np.abs(nc.sigma), axis=-1),
    )


# ---------------------------------------------------------------------------
# time series

def _profile_column(component: str, radius: float) -> str:
    return f'{component}_r{radius:.10g}'


class DiagnosticSeries:
    """Time-ordered diagnostic records with per-shell null-component maxima."""

    def __init__(self, radii: Sequence[float] = ()):
        self.radii = np.asarray(radii, dtype=float)
        self._rows: List[Dict[str, float]] = []

    def __len__(self) -> int:
        return len(self._rows)

    @property
    def columns(self) -> List[str]:
        shells = [_profile_column(c, r) for c in PROFILE_COMPONENTS for r in self.radii]
        return list(SERIES_COLUMNS) + shells

    def append(self, record: Dict[str, float], profile: Optional[ShellProfile] = None) -> None:
        row = {key: float(record[key]) for key in SERIES_COLUMNS}
        if profile is not None:
            if not np.array_equal(profile.radii, self.radii):
                raise ValueError('profile radii differ from the series radii')
            for comp in PROFILE_COMPONENTS:
                for r, value in zip(self.radii, profile.component(comp)):
                    row[_profile_column(comp, r)] = float(value)
        missing = [c for c in self.columns if c not in row]
        if missing:
            raise ValueError(f'record is missing columns {missing[:4]}')
        bad = [k for k, v in row.items() if not math.isfinite(v)]
        if bad:
            raise ValueError(f'non-finite diagnostic values in {bad}')
        if self._rows and not row['time'] > self._rows[-1]['time']:
            raise ValueError(f'times must increase: {row["time"]} after {self._rows[-1]["time"]}')
        self._rows.append(row)

    @property
    def times(self) -> np.ndarray:
        return self.column('time')

    def column(self, name: str) -> np.ndarray:
        return np.array([row[name] for row in self._rows])

    def profile(self, component: str) -> np.ndarray:
        """Shell maxima of one component, shape (times, shells)."""
        if component not in PROFILE_COMPONENTS:
            raise ValueError(f'unknown null component {component!r}')
        names = [_profile_column(component, r) for r in self.radii]
        return np.array([[row[n] for n in names] for row in self._rows]).reshape(len(self._rows), len(names))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self._rows, columns=self.columns)

    def to_csv(self, path: str | Path) -> Path:
        path = Path(path)
        self.to_frame().to_csv(path, index=False, float_format='%.17g')
        return path

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> 'DiagnosticSeries':
        missing = [c for c in SERIES_COLUMNS if c not in frame.columns]
        if missing:
            raise ValueError(f'diagnostic table lacks columns {missing}')
        radii: List[float] = []
        for name in frame.columns:
            match = _PROFILE_COLUMN.match(name)
            if match and match.group(1) == PROFILE_COMPONENTS[0]:
                radii.append(float(match.group(2)))
        series = cls(radii)
        expected = series.columns
        for record in frame.to_dict(orient='records'):
            row = {k: float(record[k]) for k in expected}
            if series._rows and not row['time'] > series._rows[-1]['time']:
                raise ValueError('times in diagnostic table are not increasing')
            series._rows.append(row)
        return series

    @classmethod
    def from_csv(cls, path: str | Path) -> 'DiagnosticSeries':
        return cls.from_frame(pd.read_csv(path, float_precision='round_trip'))


class DiagnosticRecorder:
    """Observer for :class:`~mbikit.field_solver.Evolution` that fills a series."""

    def __init__(
        self,
        mode: str,
        order: int = 4,
        shells: int = 16,
        executor: Optional[SlabExecutor] = None,
    ):
        self.mode = mode
        self.order = order
        self.shells = shells
        self.executor = executor
        self.series: Optional[DiagnosticSeries] = None

    def record(self, state: FieldState) -> Dict[str, float]:
        field = FaradaySlice.from_state(state, self.mode, self.order, self.executor)
        h = state.grid.h
        values = {
            'time': state.t,
            'E0': energy_EN(field, 0, self.mode),
            'E1': energy_EN(field, 1, self.mode),
            'knorm_int': knorm_integral(field),
            'divB_max': float(np.abs(div_h(state.b, h, self.order)).max()),
            'divD_max': float(np.abs(div_h(state.d, h, self.order)).max()),
            'ell_min': float(state.ell_sq().min()),
        }
        if self.series is None:
            self.series = DiagnosticSeries(shell_radii(state.grid, self.shells))
        profile = null_profiles(field.form, state.grid, state.t, self.series.radii)
        self.series.append(values, profile)
        logging.debug('t=%.6g E0=%.10g E1=%.10g ell_min=%.6g', state.t, values['E0'], values['E1'], values['ell_min'])
        return values

    def __call__(self, step: int, state: FieldState) -> None:
        self.record(state)


# ---------------------------------------------------------------------------
# decay fits

@dataclass(frozen=True)
class DecayFit:
    component: str
    tracking: str
    exponent: float
    stderr: float
    ci95: float
    intercept: float
    samples: int
    target: float

    def deviation(self) -> float:
        return self.exponent - self.target

    def as_dict(self) -> Dict[str, float]:
        return {
            'component': self.component,
            'tracking': self.tracking,
            'exponent': self.exponent,
            'stderr': self.stderr,
            'ci95': self.ci95,
            'intercept': self.intercept,
            'samples': self.samples,
            'target': self.target,
        }


def _tracked_samples(
    series: DiagnosticSeries,
    component: str,
    tracking: str,
    q: float,
    band: float,
    t_min: float,
) -> Tuple[np.ndarray, np.ndarray]:
    radii = series.radii
    values = series.profile(component)
    dr = float(radii[1] - radii[0]) if len(radii) > 1 else 1.0
    xs, ys = [], []
    for t, row in zip(series.times, values):
        if t < t_min:
            continue
        target_r = t + q
        if tracking == 'wavezone':
            window = np.abs(radii - target_r) <= band
            if not np.any(window):
                continue
            idx = np.flatnonzero(window)[int(np.argmax(row[window]))]
        else:
            idx = int(np.argmin(np.abs(radii - target_r)))
            if abs(radii[idx] - target_r) > 0.5 * dr + 1e-12:
                continue
        if not row[idx] > 0:
            continue
        s = t + radii[idx]
        xs.append(math.log1p(s))
        ys.append(math.log(row[idx]))
    return np.array(xs), np.array(ys)


def decay_fit(
    series: DiagnosticSeries,
    component: str,
    tracking: Optional[str] = None,
    q: float = 0.0,
    band: Optional[float] = None,
    t_min: float = 0.0,
) -> DecayFit:
    """Least-squares slope of log(shell maximum) against log(1 + s).

    ``wavezone`` takes the largest value among shells within ``band`` of
    r = t + q (default band: one shell spacing); ``fixed_q`` takes the single
    shell nearest to r = t + q.
    """
    if component not in PROFILE_COMPONENTS:
        raise ValueError(f'unknown null component {component!r}')
    tracking = tracking or DEFAULT_TRACKING[component]
    if tracking not in ('wavezone', 'fixed_q'):
        raise ValueError(f'tracking must be wavezone or fixed_q, got {tracking!r}')
    if len(series.radii) == 0:
        raise InsufficientData('series has no shell profiles')
    if band is None:
        band = float(series.radii[1] - series.radii[0]) if len(series.radii) > 1 else float(series.radii[0])
    xs, ys = _tracked_samples(series, component, tracking, q, band, t_min)
    if len(xs) < MIN_FIT_SAMPLES:
        raise InsufficientData(
            f'{component}: {len(xs)} usable samples on the tracked shell, need at least {MIN_FIT_SAMPLES}'
        )
    fit = stats.linregress(xs, ys)
    ci95 = float(fit.stderr * stats.t.ppf(0.975, len(xs) - 2))
    return DecayFit(
        component=component,
        tracking=tracking,
        exponent=float(fit.slope),
        stderr=float(fit.stderr),
        ci95=ci95,
        intercept=float(fit.intercept),
        samples=len(xs),
        target=TARGET_EXPONENTS[component],
    )


__all__ = [
    'weighted_sobolev_norm',
    'weighted_c_norm',
    'embedding_ratio',
    'FaradaySlice',
    'lie_derivative_field',
    'energy_EN',
    'knorm_sq_field',
    'knorm_integral',
    'ebpq_integral',
    'mbi_energy',
    'fibonacci_sphere',
    'shell_radii',
    'ShellProfile',
    'interpolate_form',
    'null_profiles',
    'DiagnosticSeries',
    'DiagnosticRecorder',
    'DecayFit',
    'decay_fit',
    'TARGET_EXPONENTS',
]
