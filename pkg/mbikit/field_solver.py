"""Method-of-lines evolution of (B, D) on a periodic uniform grid.

Vector fields are stored component-major as arrays of shape (3, nz, ny, nx):
x is the last axis, z the first spatial axis. The curl-form equations

    ∂t B = -curl E(B, D),    ∂t D = curl H(B, D)

are discretised with centered differences (order 2 or 4) and advanced with the
classical four-stage Runge–Kutta scheme. Nodewise work is split into z-slabs
run through joblib's threading backend; each output node is computed by the
same arithmetic regardless of the slab split, so results do not depend on the
worker count.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from tqdm import tqdm

from .config import InitialDataSpec, progress_enabled, solver_workers
from .errors import DegenerateState, InsufficientHistory
from .mbi_constitutive import ELL_EPSILON, contract_big_h, e_h_of_db, ell_of_db
from .minkowski_core import TwoForm, cross, em_recompose

# derivative = Σ_k c_k (u[i+k] - u[i-k]) / h
STENCILS = {
    2: ((1, 0.5),),
    4: ((1, 2.0 / 3.0), (2, -1.0 / 12.0)),
}
MODES = ('mbi', 'maxwell')
COMPLEX_STEP = 1e-30
UNIFORM_DT_RTOL = 1e-9


@dataclass(frozen=True)
class Grid:
    """Periodic cube of n³ nodes with spacing h, centered on the origin by default."""

    n: int
    h: float
    origin: Optional[Tuple[float, float, float]] = None

    def __post_init__(self):
        if self.n < 5:
            raise ValueError(f'grid needs at least 5 points per axis, got {self.n}')
        if not self.h > 0:
            raise ValueError(f'grid spacing must be positive, got {self.h}')
        if self.origin is None:
            corner = -0.5 * self.n * self.h
            object.__setattr__(self, 'origin', (corner, corner, corner))
        else:
            object.__setattr__(self, 'origin', tuple(float(c) for c in self.origin))

    @property
    def extent(self) -> float:
        return self.n * self.h

    @property
    def shape(self) -> Tuple[int, int, int]:
        return (self.n, self.n, self.n)

    @property
    def cell_volume(self) -> float:
        return self.h ** 3

    def axis(self, direction: int) -> np.ndarray:
        """Node coordinates along x (0), y (1) or z (2)."""
        return self.origin[direction] + self.h * np.arange(self.n)

    def points(self) -> np.ndarray:
        """Node positions, shape (nz, ny, nx, 3) with (x, y, z) last."""
        z, y, x = np.meshgrid(self.axis(2), self.axis(1), self.axis(0), indexing='ij')
        return np.stack([x, y, z], axis=-1)

    def radius(self) -> np.ndarray:
        return np.sqrt(np.sum(self.points() ** 2, axis=-1))

    def point_at(self, index: Sequence[int]) -> Tuple[float, float, float]:
        k, j, i = (int(v) for v in index)
        return (
            self.origin[0] + i * self.h,
            self.origin[1] + j * self.h,
            self.origin[2] + k * self.h,
        )


def point_view(field_: np.ndarray) -> np.ndarray:
    """(3, nz, ny, nx) -> (nz, ny, nx, 3)."""
    return np.moveaxis(field_, 0, -1)


def component_view(points: np.ndarray) -> np.ndarray:
    """(nz, ny, nx, 3) -> (3, nz, ny, nx)."""
    return np.ascontiguousarray(np.moveaxis(points, -1, 0))


# ---------------------------------------------------------------------------
# stencils

def _stencil(order: int):
    try:
        return STENCILS[order]
    except KeyError:
        raise ValueError(f'unsupported stencil order {order}; expected one of {sorted(STENCILS)}') from None


def diff_h(u: np.ndarray, direction: int, h: float, order: int = 4) -> np.ndarray:
    """Centered periodic derivative of ``u`` along x (0), y (1) or z (2)."""
    axis = -1 - direction
    out = np.zeros_like(u)
    for shift, coeff in _stencil(order):
        out = out + coeff * (np.roll(u, -shift, axis=axis) - np.roll(u, shift, axis=axis))
    return out / h


def modified_wavenumber(k, h: float, order: int = 4):
    """Discrete symbol of diff_h acting on exp(ikx), divided by i."""
    k = np.asarray(k, dtype=float)
    return sum(2.0 * coeff * np.sin(shift * k * h) for shift, coeff in _stencil(order)) / h


def curl_h(field_: np.ndarray, h: float, order: int = 4) -> np.ndarray:
    fx, fy, fz = field_[0], field_[1], field_[2]
    return np.stack([
        diff_h(fz, 1, h, order) - diff_h(fy, 2, h, order),
        diff_h(fx, 2, h, order) - diff_h(fz, 0, h, order),
        diff_h(fy, 0, h, order) - diff_h(fx, 1, h, order),
    ])


def div_h(field_: np.ndarray, h: float, order: int = 4) -> np.ndarray:
    return diff_h(field_[0], 0, h, order) + diff_h(field_[1], 1, h, order) + diff_h(field_[2], 2, h, order)


# ---------------------------------------------------------------------------
# slab parallelism

class SlabExecutor:
    """Runs grid kernels over contiguous z-slabs.

    A kernel receives ``(z0, z1)`` and returns the output rows z0..z1-1 with z
    on axis -3; the rows are concatenated in index order.
    """

    def __init__(self, workers: Optional[int] = None):
        self.workers = workers if workers is not None else solver_workers()
        if self.workers < 1:
            raise ValueError('workers must be >= 1')

    def bounds(self, n: int) -> List[Tuple[int, int]]:
        count = min(n, self.workers)
        edges = np.linspace(0, n, count + 1).round().astype(int)
        return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]

    def map(self, kernel: Callable[[int, int], np.ndarray], n: int) -> np.ndarray:
        slabs = self.bounds(n)
        if len(slabs) == 1:
            parts = [kernel(*slabs[0])]
        else:
            parts = Parallel(n_jobs=len(slabs), backend='threading')(
                delayed(kernel)(z0, z1) for z0, z1 in slabs
            )
        return np.concatenate(parts, axis=-3)


def _halo_rows(z0: int, z1: int, n: int, width: int) -> np.ndarray:
    return np.arange(z0 - width, z1 + width) % n


def curl_h_slabs(field_: np.ndarray, h: float, order: int, executor: SlabExecutor) -> np.ndarray:
    """curl_h computed slab by slab with periodic halos; equals curl_h exactly."""
    width = max(shift for shift, _ in _stencil(order))
    n = field_.shape[-3]

    def kernel(z0: int, z1: int) -> np.ndarray:
        block = np.take(field_, _halo_rows(z0, z1, n, width), axis=-3)
        return curl_h(block, h, order)[..., width:width + (z1 - z0), :, :]

    return executor.map(kernel, n)


# ---------------------------------------------------------------------------
# state

@dataclass(frozen=True, eq=False)
class FieldState:
    b: np.ndarray
    d: np.ndarray
    t: float
    grid: Grid

    def __post_init__(self):
        expected = (3,) + self.grid.shape
        for name in ('b', 'd'):
            value = np.asarray(getattr(self, name), dtype=float)
            if value.shape != expected:
                raise ValueError(f'{name} has shape {value.shape}, expected {expected}')
            object.__setattr__(self, name, value)

    def e_h(self, mode: str = 'mbi') -> Tuple[np.ndarray, np.ndarray]:
        if mode == 'maxwell':
            return self.d, self.b
        e, h = e_h_of_db(point_view(self.d), point_view(self.b))
        return component_view(e), component_view(h)

    def faraday(self, mode: str = 'mbi') -> TwoForm:
        e, _ = self.e_h(mode)
        return em_recompose(point_view(e), point_view(self.b))

    def ell_sq(self) -> np.ndarray:
        return ell_of_db(point_view(self.b), point_view(self.d)) ** 2

    def field_scale(self) -> float:
        return float(max(np.abs(self.b).max(initial=0.0), np.abs(self.d).max(initial=0.0)))


@dataclass(frozen=True)
class SolverConfig:
    mode: str = 'mbi'
    order: int = 4
    cfl: float = 0.4
    t_end: float = 0.0
    cadence: int = 10

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f'mode must be one of {MODES}, got {self.mode!r}')
        _stencil(self.order)
        if not 0.0 < self.cfl <= 0.5:
            raise ValueError(f'cfl must satisfy 0 < cfl <= 0.5, got {self.cfl}')
        if self.t_end < 0:
            raise ValueError('t_end must be nonnegative')
        if self.cadence < 1:
            raise ValueError('cadence must be >= 1')

    def schedule(self, grid: Grid) -> Tuple[int, float]:
        """(steps, dt) with dt <= cfl*h landing exactly on t_end."""
        if self.t_end == 0:
            return 0, self.cfl * grid.h
        steps = max(1, math.ceil(self.t_end / (self.cfl * grid.h) - 1e-12))
        return steps, self.t_end / steps


def _require_admissible(ell_sq: np.ndarray, grid: Grid, t: float, row_offset: int = 0) -> None:
    bad = ~(ell_sq > ELL_EPSILON)
    if np.any(bad):
        local = np.unravel_index(int(np.argmax(bad)), bad.shape)
        value = float(ell_sq[local])
        index = (int(local[0]) + row_offset, int(local[1]), int(local[2]))
        point = grid.point_at(index)
        raise DegenerateState(
            f'ℓ² = {value:.6g} <= {ELL_EPSILON:g} at node {tuple(int(i) for i in index)}, '
            f't = {t:.6g}, x = {point}',
            index=index,
            point=(t,) + point,
            value=value,
        )


def _require_finite(state: FieldState) -> None:
    for name in ('b', 'd'):
        value = getattr(state, name)
        finite = np.isfinite(value).all(axis=0)
        if not finite.all():
            index = np.unravel_index(int(np.argmin(finite)), finite.shape)
            raise DegenerateState(
                f'non-finite {name.upper()} at node {tuple(int(i) for i in index)}, t = {state.t:.6g}',
                index=index,
                point=(state.t,) + state.grid.point_at(index),
            )


def check_state(state: FieldState, mode: str = 'mbi') -> None:
    """Raise DegenerateState at the first non-finite node, or in mbi mode the first node with ℓ² <= ε."""
    _require_finite(state)
    if mode == 'mbi':
        _require_admissible(state.ell_sq(), state.grid, state.t)


def _constitutive_slabs(state: FieldState, executor: SlabExecutor) -> Tuple[np.ndarray, np.ndarray]:
    n = state.grid.n

    def kernel(z0: int, z1: int) -> np.ndarray:
        b = point_view(state.b[:, z0:z1])
        d = point_view(state.d[:, z0:z1])
        _require_admissible(ell_of_db(b, d) ** 2, state.grid, state.t, row_offset=z0)
        e, h = e_h_of_db(d, b)
        return np.concatenate([component_view(e), component_view(h)], axis=0)

    stacked = executor.map(kernel, n)
    return stacked[:3], stacked[3:]


def rhs(
    state: FieldState,
    mode: str = 'mbi',
    order: int = 4,
    executor: Optional[SlabExecutor] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """(∂t B, ∂t D) = (-curl_h E, curl_h H); maxwell mode uses E = D and H = B."""
    if mode not in MODES:
        raise ValueError(f'mode must be one of {MODES}, got {mode!r}')
    executor = executor or SlabExecutor()
    _require_finite(state)
    if mode == 'maxwell':
        e, h = state.d, state.b
    else:
        e, h = _constitutive_slabs(state, executor)
    h_ = state.grid.h
    return -curl_h_slabs(e, h_, order, executor), curl_h_slabs(h, h_, order, executor)


def step_rk4(
    state: FieldState,
    dt: float,
    mode: str = 'mbi',
    order: int = 4,
    executor: Optional[SlabExecutor] = None,
) -> FieldState:
    executor = executor or SlabExecutor()

    k1b, k1d = rhs(state, mode, order, executor)
    s2 = FieldState(state.b + 0.5 * dt * k1b, state.d + 0.5 * dt * k1d, state.t + 0.5 * dt, state.grid)
    k2b, k2d = rhs(s2, mode, order, executor)
    s3 = FieldState(state.b + 0.5 * dt * k2b, state.d + 0.5 * dt * k2d, state.t + 0.5 * dt, state.grid)
    k3b, k3d = rhs(s3, mode, order, executor)
    s4 = FieldState(state.b + dt * k3b, state.d + dt * k3d, state.t + dt, state.grid)
    k4b, k4d = rhs(s4, mode, order, executor)

    b = state.b + (dt / 6.0) * (k1b + 2.0 * k2b + 2.0 * k3b + k4b)
    d = state.d + (dt / 6.0) * (k1d + 2.0 * k2d + 2.0 * k3d + k4d)
    return FieldState(b, d, state.t + dt, state.grid)


class Evolution:
    """Owns a state and advances it to ``config.t_end``.

    ``observer(step, state)`` is called for the initial state, every
    ``config.cadence`` steps and for the final state.
    """

    def __init__(self, state: FieldState, config: SolverConfig, executor: Optional[SlabExecutor] = None):
        self.state = state
        self.config = config
        self.executor = executor or SlabExecutor()
        self.steps, self.dt = config.schedule(state.grid)

    def run(self, observer: Optional[Callable[[int, FieldState], None]] = None) -> FieldState:
        cfg = self.config
        logging.info(
            'Evolving %s mode: n=%d h=%g order=%d dt=%g steps=%d workers=%d',
            cfg.mode, self.state.grid.n, self.state.grid.h, cfg.order, self.dt, self.steps,
            self.executor.workers,
        )
        if observer is not None:
            observer(0, self.state)
        with tqdm(total=self.steps, desc=f'{cfg.mode} evolution', disable=None if progress_enabled() else True) as bar:
            for step in range(1, self.steps + 1):
                self.state = step_rk4(self.state, self.dt, cfg.mode, cfg.order, self.executor)
                bar.update(1)
                if observer is not None and (step % cfg.cadence == 0 or step == self.steps):
                    observer(step, self.state)
        return self.state


# ---------------------------------------------------------------------------
# initial data

def _envelope(points: np.ndarray, center, width: float) -> Tuple[np.ndarray, np.ndarray]:
    y = points - np.asarray(center, dtype=float)
    return y, np.exp(-np.sum(y ** 2, axis=-1) / width ** 2)


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ValueError('direction vector must be nonzero')
    return v / norm


def _potentials(spec: InitialDataSpec, grid: Grid) -> Tuple[np.ndarray, np.ndarray]:
    points = grid.points()
    a = spec.amplitude
    zeros = np.zeros(points.shape)
    if spec.kind == 'zero' or a == 0:
        return zeros, zeros.copy()
    if spec.kind == 'gaussian_loop':
        _, env = _envelope(points, spec.center, spec.width)
        phi = a * env
        a1 = zeros.copy()
        a2 = zeros.copy()
        a1[..., 2] = phi
        a2[..., 0] = phi
        return a1, a2
    if spec.kind == 'plane_packet':
        k = np.asarray(spec.wavevector, dtype=float)
        khat = _unit(k)
        pol = np.asarray(spec.polarization, dtype=float)
        phat = _unit(pol - np.dot(pol, khat) * khat)
        y, env = _envelope(points, spec.center, spec.width)
        wave = a * np.cos(y @ k) * env
        a1 = wave[..., None] * phat
        a2 = -wave[..., None] * cross(khat, phat)
        return a1, a2
    if spec.kind == 'random_smooth':
        rng = np.random.default_rng(spec.seed)
        _, env = _envelope(points, (0.0, 0.0, 0.0), spec.width)
        modes = np.array([m for m in np.ndindex(3, 3, 3)], dtype=float) - 1.0
        modes = modes[np.any(modes != 0, axis=1)]
        wavenumbers = modes * (np.pi / spec.width)
        phases = points @ wavenumbers.T
        scale = a / np.sqrt(len(modes))
        out = []
        for _ in range(2):
            cos_c = rng.standard_normal((len(modes), 3))
            sin_c = rng.standard_normal((len(modes), 3))
            pot = np.cos(phases) @ cos_c + np.sin(phases) @ sin_c
            out.append(scale * env[..., None] * pot)
        return out[0], out[1]
    raise ValueError(f'unknown initial data kind {spec.kind!r}')


def make_initial_data(spec: InitialDataSpec, grid: Grid, order: int = 4) -> FieldState:
    """B = curl_h A1 and D = curl_h A2 for smooth enveloped potentials."""
    a1, a2 = _potentials(spec, grid)
    b = curl_h(component_view(a1), grid.h, order)
    d = curl_h(component_view(a2), grid.h, order)
    logging.info('Initial data %s: amplitude=%g width=%g max|B|=%.3e max|D|=%.3e',
                 spec.kind, spec.amplitude, spec.width, np.abs(b).max(), np.abs(d).max())
    return FieldState(b, d, 0.0, grid)


# ---------------------------------------------------------------------------
# time derivatives and residuals

def faraday_with_rate(
    state: FieldState,
    mode: str = 'mbi',
    order: int = 4,
    executor: Optional[SlabExecutor] = None,
) -> Tuple[TwoForm, TwoForm]:
    """(F, ∂t F) from a single state.

    ∂t B, ∂t D come from the evolution equations; ∂t E is the complex-step
    derivative of E(B, D) along them.
    """
    db, dd = rhs(state, mode, order, executor)
    b = point_view(state.b)
    if mode == 'maxwell':
        e = point_view(state.d)
        de = point_view(dd)
    else:
        e, _ = e_h_of_db(point_view(state.d), b)
        perturbed, _ = e_h_of_db(
            point_view(state.d) + 1j * COMPLEX_STEP * point_view(dd),
            b + 1j * COMPLEX_STEP * point_view(db),
        )
        de = perturbed.imag / COMPLEX_STEP
    return em_recompose(e, b), em_recompose(de, point_view(db))


def spatial_gradient(form: TwoForm, h: float, order: int = 4) -> List[TwoForm]:
    """[∂_1 F, ∂_2 F, ∂_3 F] for a two-form sampled on the grid."""
    comps = np.moveaxis(form.components, -1, 0)
    return [TwoForm(np.moveaxis(diff_h(comps, j, h, order), 0, -1)) for j in range(3)]


# cyclic triples for ∂_[λ F_μν]
_BIANCHI_TRIPLES = ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3))


def _uniform_dt(window: Sequence[FieldState]) -> float:
    times = np.array([s.t for s in window])
    steps = np.diff(times)
    if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=UNIFORM_DT_RTOL, atol=0.0):
        raise InsufficientHistory('residual needs snapshots at uniformly spaced increasing times')
    return float(steps[0])


def residual_components(window: Sequence[FieldState], mode: str = 'mbi', order: int = 4) -> dict:
    """Max-norm residuals of ∂_[λ F_μν] = 0 and H^{μνκλ}∂_μ F_κλ = 0.

    Time derivatives are centered differences across neighbouring snapshots,
    so every interior snapshot of the window is checked.
    """
    if len(window) < 3:
        raise InsufficientHistory(f'residual needs at least 3 snapshots, got {len(window)}')
    dt = _uniform_dt(window)
    forms = [s.faraday(mode) for s in window]
    h = window[0].grid.h
    bianchi = 0.0
    field_eq = 0.0
    for k in range(1, len(window) - 1):
        form = forms[k]
        grad = [(forms[k + 1] - forms[k - 1]) * (0.5 / dt)] + spatial_gradient(form, h, order)
        lowered = np.stack([g.lower for g in grad], axis=-3)
        for lam, mu, nu in _BIANCHI_TRIPLES:
            cyc = lowered[..., lam, mu, nu] + lowered[..., mu, nu, lam] + lowered[..., nu, lam, mu]
            bianchi = max(bianchi, float(np.abs(cyc).max(initial=0.0)))
        if mode == 'maxwell':
            contracted = [g.upper for g in grad]
        else:
            contracted = [contract_big_h(form, g).upper for g in grad]
        divergence = sum(contracted[mu][..., mu, :] for mu in range(4))
        field_eq = max(field_eq, float(np.abs(divergence).max(initial=0.0)))
    return {'bianchi': bianchi, 'field_equation': field_eq}


def residual_mbi(window: Sequence[FieldState], mode: str = 'mbi', order: int = 4) -> float:
    parts = residual_components(window, mode, order)
    return max(parts.values())


__all__ = [
    'STENCILS',
    'Grid',
    'point_view',
    'component_view',
    'diff_h',
    'modified_wavenumber',
    'curl_h',
    'div_h',
    'SlabExecutor',
    'curl_h_slabs',
    'FieldState',
    'check_state',
    'SolverConfig',
    'rhs',
    'step_rk4',
    'Evolution',
    'make_initial_data',
    'faraday_with_rate',
    'spatial_gradient',
    'residual_components',
    'residual_mbi',
]
