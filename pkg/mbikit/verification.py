"""Pointwise property suite over seeded random samples.

Each property evaluates an identity (or inequality) of the tensor algebra,
the constitutive laws or the stress machinery on every sample at once and
reports the worst relative error. Properties that take the Hodge dual from
the ``dual`` argument of :func:`run_suite` see an injected dual; among those,
the ones whose outcome changes with its orientation are flagged
``dual_related``. Everything else goes through the library, so a faulty
:func:`minkowski_core.hodge_dual` also shows up in unflagged routes.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import permutations
from typing import Callable, List, Optional, Tuple

import numpy as np

from . import mbi_constitutive as mc
from . import minkowski_core as mk
from . import stress_currents as sc

DEFAULT_TOLERANCE = 1e-10
DEC_TOLERANCE = 1e-12
DENSITY_MARGIN = 1e-8
WEAK_FIELD_SLOPE = 2.9
ADMISSIBLE_ELL_SQ = 1e-6
E_BOX = 0.9
B_BOX = 3.0
T_RANGE = 5.0
X_BOX = 5.0
R_FLOOR = 0.1

DualFn = Callable[[mk.TwoForm], mk.TwoForm]


# ---------------------------------------------------------------------------
# samplers

def sample_admissible_eb(rng: np.random.Generator, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Uniform (E, B) in [-0.9, 0.9]³ x [-3, 3]³, rejecting ℓ² <= 1e-6."""
    es, bs, have = [], [], 0
    while have < n:
        e = rng.uniform(-E_BOX, E_BOX, size=(2 * n, 3))
        b = rng.uniform(-B_BOX, B_BOX, size=(2 * n, 3))
        ell_sq = 1.0 + np.sum(b * b, axis=1) - np.sum(e * e, axis=1) - np.sum(e * b, axis=1) ** 2
        keep = ell_sq > ADMISSIBLE_ELL_SQ
        es.append(e[keep])
        bs.append(b[keep])
        have += int(keep.sum())
    return np.concatenate(es)[:n], np.concatenate(bs)[:n]


def _in_ball(rng: np.random.Generator, n: int, radius: float) -> np.ndarray:
    direction = rng.standard_normal((n, 3))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    return direction * (radius * rng.uniform(0.0, 1.0, size=(n, 1)) ** (1.0 / 3.0))


def sample_compact_eb(rng: np.random.Generator, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """(E, B) uniform in the balls |E| <= 0.9, |B| <= 3, where ℓ² >= 0.19."""
    return _in_ball(rng, n, E_BOX), _in_ball(rng, n, B_BOX)


def sample_points(rng: np.random.Generator, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Times in [0, 5] and positions in [-5, 5]³ with |x| >= 0.1."""
    t = rng.uniform(0.0, T_RANGE, size=n)
    x = rng.uniform(-X_BOX, X_BOX, size=(n, 3))
    small = np.linalg.norm(x, axis=1) < R_FLOOR
    while np.any(small):
        x[small] = rng.uniform(-X_BOX, X_BOX, size=(int(small.sum()), 3))
        small = np.linalg.norm(x, axis=1) < R_FLOOR
    return t, x


def sample_future_causal(rng: np.random.Generator, n: int) -> np.ndarray:
    """Future-directed causal vectors; every other one is exactly null."""
    w = rng.standard_normal((n, 3))
    spatial = np.linalg.norm(w, axis=1)
    stretch = rng.uniform(0.0, 1.0, size=n)
    stretch[::2] = 0.0
    t = spatial * (1.0 + stretch)
    t[t == 0.0] = 1.0
    return np.concatenate([t[:, None], w], axis=1)


# ---------------------------------------------------------------------------
# sample set

@dataclass(frozen=True, eq=False)
class SampleSet:
    e: np.ndarray
    b: np.ndarray
    form: mk.TwoForm
    other: mk.TwoForm
    variation: mk.TwoForm
    compact: mk.TwoForm
    t: np.ndarray
    x: np.ndarray
    frame: mk.NullFrame
    causal_x: np.ndarray
    causal_y: np.ndarray
    gradient: Tuple[mk.TwoForm, ...]

    @property
    def size(self) -> int:
        return len(self.t)

    @classmethod
    def draw(cls, samples: int, seed: int) -> 'SampleSet':
        rng = np.random.default_rng(seed)
        e, b = sample_admissible_eb(rng, samples)
        other = mk.em_recompose(rng.standard_normal((samples, 3)), rng.standard_normal((samples, 3)))
        variation = mk.em_recompose(rng.standard_normal((samples, 3)), rng.standard_normal((samples, 3)))
        ce, cb = sample_compact_eb(rng, samples)
        t, x = sample_points(rng, samples)
        gradient = tuple(mk.TwoForm(rng.standard_normal((samples, 6))) for _ in range(4))
        return cls(
            e=e,
            b=b,
            form=mk.em_recompose(e, b),
            other=other,
            variation=variation,
            compact=mk.em_recompose(ce, cb),
            t=t,
            x=x,
            frame=mk.null_frame_at(t, x),
            causal_x=sample_future_causal(rng, samples),
            causal_y=sample_future_causal(rng, samples),
            gradient=gradient,
        )


# ---------------------------------------------------------------------------
# results

@dataclass(frozen=True)
class PropertyResult:
    id: str
    passed: bool
    worst: float
    tolerance: float
    samples: int
    dual_related: bool
    detail: str = ''

    def as_dict(self) -> dict:
        return {
            'id': self.id,
            'passed': self.passed,
            'worst': self.worst,
            'tolerance': self.tolerance,
            'samples': self.samples,
            'dual_related': self.dual_related,
            'detail': self.detail,
        }


@dataclass
class SuiteReport:
    seed: int
    samples: int
    results: List[PropertyResult] = field(default_factory=list)

    @property
    def failed(self) -> List[str]:
        return [r.id for r in self.results if not r.passed]

    @property
    def passed(self) -> bool:
        return not self.failed

    def as_dict(self) -> dict:
        return {
            'seed': self.seed,
            'samples': self.samples,
            'passed': self.passed,
            'failed': self.failed,
            'properties': [r.as_dict() for r in self.results],
        }


# measure(samples, dual) -> (worst, passed, detail)
Measure = Callable[[SampleSet, DualFn, float], Tuple[float, bool, str]]


@dataclass(frozen=True)
class Property:
    id: str
    dual_related: bool
    measure: Measure


PROPERTIES: List[Property] = []


def register(prop_id: str, dual_related: bool = False):
    def wrap(func: Measure) -> Measure:
        PROPERTIES.append(Property(prop_id, dual_related, func))
        return func
    return wrap


def _per_sample(values: np.ndarray, n: int) -> np.ndarray:
    return np.abs(np.asarray(values, dtype=float)).reshape(n, -1).max(axis=1)


def relative_error(actual, expected) -> float:
    """max over samples of |a - b| / (1 + max(|a|, |b|)), scales taken per sample."""
    actual = np.asarray(actual, dtype=float)
    expected = np.asarray(expected, dtype=float)
    actual, expected = np.broadcast_arrays(actual, expected)
    if actual.ndim == 0:
        return float(abs(actual - expected) / (1.0 + max(abs(actual), abs(expected))))
    n = actual.shape[0]
    diff = _per_sample(actual - expected, n)
    scale = 1.0 + np.maximum(_per_sample(actual, n), _per_sample(expected, n))
    return float(np.max(diff / scale))


def _equality(actual, expected, tol: float, detail: str = '') -> Tuple[float, bool, str]:
    worst = relative_error(actual, expected)
    return worst, worst <= tol, detail


# ---------------------------------------------------------------------------
# minkowski_core

def _levi_civita_upper() -> np.ndarray:
    eps = np.zeros((4, 4, 4, 4))
    for perm in permutations(range(4)):
        inversions = sum(1 for i in range(4) for j in range(i + 1, 4) if perm[i] > perm[j])
        eps[perm] = -1.0 if inversions % 2 == 0 else 1.0
    return eps


@register('dual_oracle', dual_related=True)
def _dual_oracle(s, dual, tol):
    eps_up = _levi_civita_upper()
    star_up = 0.5 * np.einsum('klmn,...kl->...mn', eps_up, s.form.lower)
    g = np.diag([-1.0, 1.0, 1.0, 1.0])
    expected = np.einsum('am,...mn,nb->...ab', g, star_up, g)
    return _equality(dual(s.form).lower, expected, tol)


@register('double_dual')
def _double_dual(s, dual, tol):
    return _equality(mk.hodge_dual(mk.hodge_dual(s.form)).components, -s.form.components, tol)


@register('first_invariant')
def _first_invariant(s, dual, tol):
    i1, _ = mk.invariants(s.form)
    return _equality(i1, np.sum(s.b ** 2, axis=1) - np.sum(s.e ** 2, axis=1), tol)


@register('second_invariant', dual_related=True)
def _second_invariant(s, dual, tol):
    i2 = 0.25 * mk.contract(dual(s.form), s.form)
    return _equality(i2, np.sum(s.e * s.b, axis=1), tol)


@register('second_invariant_determinant')
def _second_invariant_det(s, dual, tol):
    _, i2 = mk.invariants(s.form)
    return _equality(i2 ** 2, np.abs(np.linalg.det(s.form.lower)), tol)


def _metric_square(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    """A_{μκ} B_ν^κ for lower-index matrices."""
    return np.einsum('...mk,kl,...nl->...mn', first, mk.INVERSE_METRIC, second)


# quadratic in the dual, so its orientation cancels
@register('em_identity_first')
def _em_identity_first(s, dual, tol):
    f = s.form.lower
    star = dual(s.form).lower
    actual = _metric_square(f, f) - _metric_square(star, star)
    i1 = np.sum(s.b ** 2, axis=1) - np.sum(s.e ** 2, axis=1)
    return _equality(actual, i1[:, None, None] * mk.METRIC, tol, 'F·F - ⋆F·⋆F = I1 g')


@register('em_identity_second', dual_related=True)
def _em_identity_second(s, dual, tol):
    actual = _metric_square(s.form.lower, dual(s.form).lower)
    i2 = np.sum(s.e * s.b, axis=1)
    return _equality(actual, i2[:, None, None] * mk.METRIC, tol, 'F·⋆F = I2 g')


@register('em_roundtrip')
def _em_roundtrip(s, dual, tol):
    e, b = mk.em_decompose(mk.em_recompose(s.e, s.b))
    return _equality(np.concatenate([e, b], axis=1), np.concatenate([s.e, s.b], axis=1), tol)


@register('norm_eb')
def _norm_eb(s, dual, tol):
    expected = 2.0 * (np.sum(s.e ** 2, axis=1) + np.sum(s.b ** 2, axis=1))
    return _equality(mk.euclidean_norm_sq(s.form), expected, tol)


@register('interior_time_translation')
def _interior_t0(s, dual, tol):
    t0 = np.array([1.0, 0.0, 0.0, 0.0])
    expected = np.concatenate([np.zeros((s.size, 1)), s.e], axis=1)
    return _equality(mk.interior_product(t0, s.form), expected, tol)


@register('interior_scaling')
def _interior_s(s, dual, tol):
    position = np.concatenate([s.t[:, None], s.x], axis=1)
    p = mk.interior_product(position, s.form)
    expected = np.concatenate(
        [-np.sum(s.e * s.x, axis=1)[:, None], s.t[:, None] * s.e + mk.cross(s.x, s.b)], axis=1
    )
    return _equality(p, expected, tol)


@register('null_frame_metric')
def _frame_metric(s, dual, tol):
    fr = s.frame
    vectors = [fr.ul, fr.l, fr.e1, fr.e2]
    gram = np.stack([np.stack([mk.minkowski_dot(v, w) for w in vectors], -1) for v in vectors], -2)
    expected = np.array([[0.0, -2.0, 0.0, 0.0], [-2.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]])
    return _equality(gram, np.broadcast_to(expected, gram.shape), tol)


@register('null_roundtrip')
def _null_roundtrip(s, dual, tol):
    nc = mk.null_decompose(s.form, s.frame)
    return _equality(mk.null_recompose(nc, s.frame).components, s.form.components, tol)


@register('null_norm')
def _null_norm(s, dual, tol):
    nc = mk.null_decompose(s.form, s.frame)
    return _equality(nc.norm_sq(), mk.euclidean_norm_sq(s.form), tol)


@register('null_radial_components')
def _null_radial(s, dual, tol):
    nc = mk.null_decompose(s.form, s.frame)
    omega = s.frame.omega
    expected = np.stack([-np.sum(s.e * omega, axis=1), np.sum(s.b * omega, axis=1)], axis=1)
    return _equality(np.stack([nc.rho, nc.sigma], axis=1), expected, tol)


@register('dual_null_components', dual_related=True)
def _dual_null(s, dual, tol):
    direct = mk.null_decompose(dual(s.form), s.frame)
    derived = mk.dual_null_components(mk.null_decompose(s.form, s.frame))
    pack = lambda nc: np.concatenate([nc.ualpha, nc.alpha, nc.rho[:, None], nc.sigma[:, None]], axis=1)
    return _equality(pack(direct), pack(derived), tol)


@register('null_form_q1')
def _q1(s, dual, tol):
    f = mk.null_decompose(s.form, s.frame)
    g = mk.null_decompose(s.other, s.frame)
    return _equality(mk.null_form_q1(s.form, s.other), mk.null_form_q1_expansion(f, g), tol)


@register('null_form_q2', dual_related=True)
def _q2(s, dual, tol):
    f = mk.null_decompose(s.form, s.frame)
    g = mk.null_decompose(s.other, s.frame)
    return _equality(mk.contract(dual(s.form), s.other), mk.null_form_q2_expansion(f, g), tol)


@register('invariants_null_components')
def _invariants_null(s, dual, tol):
    i1, i2 = mk.invariants(s.form)
    n1, n2 = mk.invariants_from_null(mk.null_decompose(s.form, s.frame))
    return _equality(np.stack([n1, n2], 1), np.stack([i1, i2], 1), tol)


@register('contraction_seminorm_order')
def _seminorm_order(s, dual, tol):
    ll = mk.contraction_seminorm(s.form, s.frame, 'L', 'L')
    lt = mk.contraction_seminorm(s.form, s.frame, 'L', 'T')
    tu = mk.contraction_seminorm(s.form, s.frame, 'T', 'U')
    uu = mk.contraction_seminorm(s.form, s.frame, 'U', 'U')
    slack = float(np.min(np.stack([lt - ll, tu - lt, uu - tu])))
    return slack, slack >= -tol, 'L ⊂ T ⊂ U monotonicity'


# ---------------------------------------------------------------------------
# mbi_constitutive

@register('ell_routes')
def _ell_routes(s, dual, tol):
    d, _ = mc.d_h_of_eb(s.e, s.b)
    return _equality(mc.ell_of_db(s.b, d), mc.ell(s.form), tol)


@register('constitutive_roundtrip')
def _constitutive_roundtrip(s, dual, tol):
    d, h = mc.d_h_of_eb(s.e, s.b)
    e, h2 = mc.e_h_of_db(d, s.b)
    return _equality(np.concatenate([e, h2], 1), np.concatenate([s.e, h], 1), tol)


@register('maxwell_tensor_route')
def _maxwell_route(s, dual, tol):
    d1, h1 = mc.d_h_of_eb(s.e, s.b)
    d2, h2 = mc.d_h_of_maxwell(s.form)
    return _equality(np.concatenate([d2, h2], 1), np.concatenate([d1, h1], 1), tol)


@register('maxwell_dual_consistency', dual_related=True)
def _maxwell_dual(s, dual, tol):
    return _equality(dual(mc.maxwell_tensor(s.form)).components, mc.maxwell_dual(s.form).components, tol)


@register('weak_field_limit', dual_related=True)
def _weak_field(s, dual, tol):
    base = s.form[: min(s.size, 64)]
    lambdas = np.logspace(-3, -1, 5)
    gaps = []
    for lam in lambdas:
        scaled = base * lam
        gap = mc.maxwell_tensor(scaled).components - dual(scaled).components
        gaps.append(float(np.max(np.abs(gap))))
    slope = float(np.polyfit(np.log(lambdas), np.log(np.maximum(gaps, 1e-300)), 1)[0])
    return slope, slope >= WEAK_FIELD_SLOPE, 'log-log slope of |M(λF) - ⋆(λF)|'


@register('h_tensor_symmetries')
def _h_symmetries(s, dual, tol):
    sub = s.form[: min(s.size, 512)]
    big, tri = mc.big_h_tensor(sub)
    small = mc.h_tensor(sub)
    worst = 0.0
    for tensor in (big, tri, small):
        scale = 1.0 + float(np.abs(tensor.components).max())
        worst = max(worst, tensor.antisymmetry_defect() / scale, tensor.pair_symmetry_defect() / scale)
    return worst, worst <= tol, ''


@register('big_h_split')
def _big_h_split(s, dual, tol):
    sub = s.form[: min(s.size, 512)]
    big, tri = mc.big_h_tensor(sub)
    return _equality(big.components, mc.MAXWELL_PART.components + tri.components, tol)


@register('contract_big_h_route')
def _contract_route(s, dual, tol):
    sub = s.form[: min(s.size, 512)]
    var = s.variation[: min(s.size, 512)]
    big, _ = mc.big_h_tensor(sub)
    return _equality(mc.contract_big_h(sub, var).upper, big.contract(var), tol)


@register('bi_inverse_vacuum')
def _bi_inverse(s, dual, tol):
    zero = mk.TwoForm.zeros((s.size,))
    return _equality(mc.bi_inverse_metric(zero), np.broadcast_to(mk.INVERSE_METRIC, (s.size, 4, 4)), tol)


# ---------------------------------------------------------------------------
# stress_currents

@register('em_tensor_symmetric')
def _em_symmetric(s, dual, tol):
    lower = sc.em_tensor_mbi(s.form).lower
    return _equality(lower, np.swapaxes(lower, -1, -2), tol)


@register('dominant_energy')
def _dominant_energy(s, dual, tol):
    value = sc.dec_value(s.form, s.causal_x, s.causal_y)
    scale = (
        (1.0 + mk.euclidean_norm_sq(s.form))
        * np.linalg.norm(s.causal_x, axis=1)
        * np.linalg.norm(s.causal_y, axis=1)
    )
    worst = float(np.min(value / scale))
    return worst, worst >= -DEC_TOLERANCE, 'min T(X,Y)/scale'


@register('dominant_energy_null_frame')
def _dec_null(s, dual, tol):
    res = sc.dec_null_bounds(s.form, s.frame)
    ell = res.ell
    worst = max(
        relative_error(res.ul_ul, res.ualpha_sq / ell),
        relative_error(res.l_l, res.alpha_sq / ell),
        relative_error(ell * res.ul_l, res.ul_l_expansion),
    )
    slack = float(np.min(ell * res.ul_l - res.ul_l_lower_bound))
    return worst, worst <= tol and slack >= -tol, f'min slack of ℓT(uL,L) bound {slack:.3e}'


@register('maxwell_stress_null_frame')
def _maxwell_null(s, dual, tol):
    stress = sc.em_tensor_maxwell(s.variation)
    nc = mk.null_decompose(s.variation, s.frame)
    fr = s.frame
    actual = np.stack([stress.evaluate(fr.ul, fr.ul), stress.evaluate(fr.l, fr.l), stress.evaluate(fr.ul, fr.l)], 1)
    expected = np.stack([np.sum(nc.ualpha ** 2, 1), np.sum(nc.alpha ** 2, 1), nc.rho ** 2 + nc.sigma ** 2], 1)
    return _equality(actual, expected, tol)


@register('canonical_trace_free')
def _trace_free(s, dual, tol):
    stress = sc.canonical_stress_blocks(s.form, s.variation)
    return _equality(stress.trace()[:, None] / (1.0 + np.abs(stress.mixed).reshape(s.size, -1).max(1))[:, None], 0.0, tol)


@register('canonical_routes')
def _canonical_routes(s, dual, tol):
    n = min(s.size, 512)
    dense = sc.canonical_stress(s.form[:n], s.variation[:n])
    blocks = sc.canonical_stress_blocks(s.form[:n], s.variation[:n])
    return _equality(dense.lower, blocks.lower, tol)


@register('canonical_antisymmetric_part')
def _canonical_antisym(s, dual, tol):
    stress = sc.canonical_stress_blocks(s.form, s.variation)
    return _equality(stress.antisymmetric_part(), sc.canonical_stress_antisymmetric_part(s.form, s.variation), tol)


@register('canonical_vacuum')
def _canonical_vacuum(s, dual, tol):
    zero = mk.TwoForm.zeros((s.size,))
    return _equality(sc.canonical_stress(zero, s.variation).lower, sc.em_tensor_maxwell(s.variation).lower, tol)


@register('energy_current_vacuum')
def _j0_vacuum(s, dual, tol):
    zero = mk.TwoForm.zeros((s.size,))
    j0 = sc.energy_current_j0(zero, s.variation, s.t, s.x)
    knorm_sq = sc.knorm_sq(mk.null_decompose(s.variation, s.frame))
    return _equality(4.0 * j0, knorm_sq, tol, 'J⁰ at F = 0 is a quarter of Knorm²')


@register('knorm_interior_products')
def _knorm_ebpq(s, dual, tol):
    knorm_sq = sc.knorm_sq(mk.null_decompose(s.variation, s.frame))
    return _equality(knorm_sq, sc.knorm_sq_from_interior_products(s.variation, s.t, s.x), tol)


@register('morawetz_null_components')
def _morawetz_null(s, dual, tol):
    k_l, k_ul, k_a = sc.morawetz_null_components(s.frame)
    q, sv = s.frame.q, s.frame.s
    actual = np.concatenate([k_l[:, None], k_ul[:, None], k_a], 1)
    expected = np.concatenate([-(1.0 + q ** 2)[:, None], -(1.0 + sv ** 2)[:, None], np.zeros((s.size, 2))], 1)
    return _equality(actual, expected, tol)


@register('energy_density_routes')
def _density_routes(s, dual, tol):
    return _equality(
        sc.local_energy_density(s.form, s.variation),
        sc.local_energy_density_expanded(s.form, s.variation),
        tol,
    )


@register('energy_density_vacuum')
def _density_vacuum(s, dual, tol):
    zero = mk.TwoForm.zeros((s.size,))
    e, b = mk.em_decompose(s.variation)
    expected = np.sum(e ** 2, 1) + np.sum(b ** 2, 1)
    return _equality(sc.local_energy_density(zero, s.variation), expected, tol)


@register('energy_density_positive')
def _density_positive(s, dual, tol):
    ratio = sc.min_energy_density_ratio(s.compact)
    worst = float(np.min(ratio))
    return worst, worst > DENSITY_MARGIN, f'empirical positivity constant {worst:.6g}'


@register('sylvester_minors')
def _sylvester(s, dual, tol):
    e, b = mk.em_decompose(s.compact)
    blocks = sc.sylvester_blocks(e, b)
    rows = np.abs(blocks.matrix).sum(axis=-1)
    # rounding bound of an LU determinant for each leading block
    conditioning = np.stack([16.0 * np.finfo(float).eps * np.prod(rows[:, :k], axis=1) for k in range(1, 5)], 1)
    scale = np.abs(blocks.closed_form) + conditioning
    worst = float(np.max(np.abs(blocks.minors - blocks.closed_form) / scale))
    positive = bool(np.all(blocks.closed_form > 0) and np.all(blocks.minors > 0))
    return worst, worst <= tol and positive, 'leading minors against closed forms'


@register('multiplier_vacuum')
def _vmult_vacuum(s, dual, tol):
    zero = mk.TwoForm.zeros((s.size,))
    return _equality(sc.vmult(zero), np.broadcast_to([2.0, 0.0, 0.0, 0.0], (s.size, 4)), tol)


@register('deformation_tensors')
def _deformation(s, dual, tol):
    n = min(s.size, 256)
    t, x = s.t[:n], s.x[:n]
    worst = 0.0
    for z in sc.GENERATORS.values():
        pi = sc.deformation_tensor(z, t, x, step=1e-3)
        factor = 4.0 * t if z.id == 'Kbar' else np.full(n, z.c)
        expected = factor[:, None, None] * mk.METRIC
        worst = max(worst, relative_error(pi, expected))
    return worst, worst <= tol, 'π = c g (4t g for K̄)'


@register('lie_dual_commutation')
def _lie_dual(s, dual, tol):
    worst = 0.0
    dual_grad = [mk.hodge_dual(g) for g in s.gradient]
    for z in sc.GENERATORS.values():
        lhs = sc.lie_derivative(mk.hodge_dual(s.form), dual_grad, z, s.t, s.x)
        rhs = mk.hodge_dual(sc.lie_derivative(s.form, list(s.gradient), z, s.t, s.x))
        worst = max(worst, relative_error(lhs.components, rhs.components))
    return worst, worst <= tol, ''


@register('modified_lie_shift')
def _modified_lie(s, dual, tol):
    worst = 0.0
    for z in sc.CONFORMAL_GENERATORS:
        plain = sc.lie_derivative(s.form, list(s.gradient), z, s.t, s.x)
        modified = sc.modified_lie_derivative(s.form, list(s.gradient), z, s.t, s.x)
        shift = (modified - plain).components
        worst = max(worst, relative_error(shift, 2.0 * sc.modified_lie_constant(z) * s.form.components))
    return worst, worst <= tol, ''


# ---------------------------------------------------------------------------

def run_suite(
    samples: int = 1000,
    seed: int = 0,
    tolerance: float = DEFAULT_TOLERANCE,
    dual: Optional[DualFn] = None,
    only: Optional[List[str]] = None,
) -> SuiteReport:
    """Evaluate every registered property on ``samples`` random inputs."""
    if samples < 1:
        raise ValueError('samples must be >= 1')
    dual = dual or mk.hodge_dual
    data = SampleSet.draw(samples, seed)
    report = SuiteReport(seed=seed, samples=samples)
    for prop in PROPERTIES:
        if only is not None and prop.id not in only:
            continue
        worst, passed, detail = prop.measure(data, dual, tolerance)
        result = PropertyResult(
            id=prop.id,
            passed=bool(passed),
            worst=float(worst),
            tolerance=tolerance,
            samples=samples,
            dual_related=prop.dual_related,
            detail=detail,
        )
        if not result.passed:
            logging.warning('Property %s failed: worst=%.3e (%s)', prop.id, result.worst, detail)
        report.results.append(result)
    logging.info('Verified %d properties on %d samples (seed=%d): %d failed',
                 len(report.results), samples, seed, len(report.failed))
    return report


def dual_related_ids() -> List[str]:
    return [p.id for p in PROPERTIES if p.dual_related]


__all__ = [
    'sample_admissible_eb',
    'sample_compact_eb',
    'sample_points',
    'sample_future_causal',
    'SampleSet',
    'PropertyResult',
    'SuiteReport',
    'PROPERTIES',
    'register',
    'relative_error',
    'run_suite',
    'dual_related_ids',
]
