"""Energy-momentum tensors, canonical stress, energy currents and the
conformal Killing generators used to weight them.

Stress samples are stored index-down; ``mixed`` raises the first index.
The canonical stress has two evaluation routes: ``canonical_stress`` contracts
the dense H tensor, ``canonical_stress_blocks`` uses the expanded block form
and is the one used on grids.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Dict, Sequence, Tuple

import numpy as np

from .errors import NotCausal
from .mbi_constitutive import (
    ELL_EPSILON,
    big_h_tensor,
    bi_inverse_metric,
    mbi_scalars,
    require_positive,
)
from .minkowski_core import (
    INVERSE_METRIC,
    METRIC,
    SIGNATURE,
    FourVector,
    NullComponents,
    NullFrame,
    TwoForm,
    contract,
    cross,
    em_decompose,
    em_recompose,
    hodge_dual,
    interior_product,
    lower_two,
    lower_vector,
    minkowski_dot,
    null_decompose,
)

# ξ⁰, the g-dual of T(0), index down
XI0_LOWER = np.array([-1.0, 0.0, 0.0, 0.0])
CAUSAL_TOLERANCE = 1e-12


class StressKind(Enum):
    EM_MBI = 'em_mbi'
    EM_MAXWELL = 'em_maxwell'
    CANONICAL = 'canonical'


@dataclass(frozen=True, eq=False)
class StressSample:
    lower: np.ndarray
    kind: StressKind

    @property
    def upper(self) -> np.ndarray:
        return lower_two(self.lower)

    @property
    def mixed(self) -> np.ndarray:
        """S^μ_ν."""
        return SIGNATURE[:, None] * self.lower

    def trace(self) -> np.ndarray:
        return np.einsum('...mm->...', self.mixed)

    def evaluate(self, first: FourVector, second: FourVector) -> np.ndarray:
        """S(X, Y) = S_{μν} X^μ Y^ν."""
        return np.einsum('...mn,...m,...n->...', self.lower, first, second)

    def antisymmetric_part(self) -> np.ndarray:
        return self.lower - np.swapaxes(self.lower, -1, -2)


# ---------------------------------------------------------------------------
# energy-momentum tensors

def em_tensor_mbi(form: TwoForm) -> StressSample:
    """T^{μν} = ℓ⁻¹(F^{μκ}F^ν_κ - I2² g^{μν}) + g^{μν}(1 - ℓ)."""
    sc = mbi_scalars(form)
    f_up = form.upper
    ff = np.einsum('...mk,kl,...nl->...mn', f_up, METRIC, f_up)
    ell = sc.ell[..., None, None]
    i2 = sc.i2[..., None, None]
    upper = (ff - i2 ** 2 * INVERSE_METRIC) / ell + INVERSE_METRIC * (1.0 - ell)
    return StressSample(lower_two(upper), StressKind.EM_MBI)


def _mixed_product(first: TwoForm, second: TwoForm) -> np.ndarray:
    """A_μ^ζ B_{νζ}."""
    return np.einsum('...ma,ab,...nb->...mn', first.lower, INVERSE_METRIC, second.lower)


def em_tensor_maxwell(variation: TwoForm) -> StressSample:
    """Ḟ_μ^ζ Ḟ_{νζ} - ¼ g_{μν} Ḟ_{ζη}Ḟ^{ζη}."""
    ff = _mixed_product(variation, variation)
    lower = ff - 0.25 * METRIC * contract(variation, variation)[..., None, None]
    return StressSample(lower, StressKind.EM_MAXWELL)


def _require_future_causal(vector: FourVector, name: str) -> None:
    vector = np.asarray(vector, dtype=float)
    norm = minkowski_dot(vector, vector)
    scale = np.einsum('...m,...m->...', vector, vector)
    if np.any(norm > CAUSAL_TOLERANCE * scale) or np.any(vector[..., 0] <= 0.0):
        raise NotCausal(f'{name} must be future-directed causal (g(X,X) <= 0 and X^0 > 0)')


def dec_value(form: TwoForm, first: FourVector, second: FourVector) -> np.ndarray:
    """T_MBI(X, Y) for future-directed causal X, Y; nonnegative for admissible F."""
    _require_future_causal(first, 'X')
    _require_future_causal(second, 'Y')
    return em_tensor_mbi(form).evaluate(first, second)


@dataclass(frozen=True, eq=False)
class NullFrameEnergy:
    """T_MBI along a null frame next to the quantities bounding it."""

    ul_ul: np.ndarray
    l_l: np.ndarray
    ul_l: np.ndarray
    ell: np.ndarray
    ualpha_sq: np.ndarray
    alpha_sq: np.ndarray
    ul_l_expansion: np.ndarray
    ul_l_lower_bound: np.ndarray


def dec_null_bounds(form: TwoForm, frame: NullFrame) -> NullFrameEnergy:
    """T(uL,uL) = ℓ⁻¹|ᾱ|², T(L,L) = ℓ⁻¹|α|², ℓT(uL,L) >= ρ² + σ² + I2²."""
    sc = mbi_scalars(form)
    tensor = em_tensor_mbi(form)
    nc = null_decompose(form, frame)
    return NullFrameEnergy(
        ul_ul=tensor.evaluate(frame.ul, frame.ul),
        l_l=tensor.evaluate(frame.l, frame.l),
        ul_l=tensor.evaluate(frame.ul, frame.l),
        ell=sc.ell,
        ualpha_sq=np.sum(nc.ualpha ** 2, axis=-1),
        alpha_sq=np.sum(nc.alpha ** 2, axis=-1),
        ul_l_expansion=(
            np.sum(nc.ualpha * nc.alpha, axis=-1)
            + 2.0 * nc.rho ** 2
            + 2.0 * sc.i2 ** 2
            + 2.0 * sc.ell * (sc.ell - 1.0)
        ),
        ul_l_lower_bound=nc.rho ** 2 + nc.sigma ** 2 + sc.i2 ** 2,
    )


# ---------------------------------------------------------------------------
# canonical stress

def canonical_stress(form: TwoForm, variation: TwoForm) -> StressSample:
    """S^μ_ν = H^{μζκλ}Ḟ_{κλ}Ḟ_{νζ} - ¼δ^μ_ν H^{ζηκλ}Ḟ_{ζη}Ḟ_{κλ} via the dense H."""
    big, _ = big_h_tensor(form)
    g = big.contract(variation)
    fdot = variation.lower
    mixed = np.einsum('...mz,...nz->...mn', g, fdot)
    mixed = mixed - 0.25 * np.eye(4) * np.einsum('...zh,...zh->...', g, fdot)[..., None, None]
    return StressSample(SIGNATURE[:, None] * mixed, StressKind.CANONICAL)


def canonical_stress_blocks(form: TwoForm, variation: TwoForm) -> StressSample:
    """Same tensor from the expanded form: Maxwell part plus four nonlinear blocks."""
    sc = mbi_scalars(form)
    star = hodge_dual(form)
    fd = contract(form, variation)[..., None, None]
    sd = contract(star, variation)[..., None, None]
    inv2 = (1.0 / sc.ell ** 2)[..., None, None]
    i2 = sc.i2[..., None, None]
    f_mix = _mixed_product(form, variation)
    s_mix = _mixed_product(star, variation)

    lower = em_tensor_maxwell(variation).lower
    lower = lower + 0.5 * inv2 * (-f_mix * fd + 0.25 * METRIC * fd ** 2)
    lower = lower + 0.5 * (1.0 + i2 ** 2 * inv2) * (-s_mix * sd + 0.25 * METRIC * sd ** 2)
    lower = lower + 0.5 * i2 * inv2 * (f_mix * sd - 0.25 * METRIC * fd * sd)
    lower = lower + 0.5 * i2 * inv2 * (s_mix * fd - 0.25 * METRIC * fd * sd)
    return StressSample(lower, StressKind.CANONICAL)


def canonical_stress_antisymmetric_part(form: TwoForm, variation: TwoForm) -> np.ndarray:
    """S_{μν} - S_{νμ} written directly in terms of F, ⋆F and Ḟ."""
    sc = mbi_scalars(form)
    star = hodge_dual(form)
    fd = contract(form, variation)[..., None, None]
    sd = contract(star, variation)[..., None, None]
    inv2 = (1.0 / sc.ell ** 2)[..., None, None]
    i2 = sc.i2[..., None, None]
    f_mix = _mixed_product(form, variation)
    s_mix = _mixed_product(star, variation)
    f_t = np.swapaxes(f_mix, -1, -2)
    s_t = np.swapaxes(s_mix, -1, -2)
    return (
        0.5 * inv2 * fd * (f_t - f_mix)
        + 0.5 * (1.0 + i2 ** 2 * inv2) * sd * (s_t - s_mix)
        + 0.5 * i2 * inv2 * sd * (f_mix - f_t)
        + 0.5 * i2 * inv2 * fd * (s_mix - s_t)
    )


# ---------------------------------------------------------------------------
# conformal Killing generators

@dataclass(frozen=True)
class KillingGenerator:
    """One of T(μ), Ω(μν), S, or the Morawetz field K̄.

    ``c`` is the constant with Lie_Z g = c g (0 for Killing fields, 2 for S).
    K̄ is outside the commuting set and carries no constant; its deformation
    tensor is 4t g.
    """

    id: str
    c: float | None = 0.0

    def __call__(self, t, x) -> np.ndarray:
        return killing_eval(self, t, x)


def _build_generators() -> Dict[str, KillingGenerator]:
    generators: Dict[str, KillingGenerator] = {}
    for mu in range(4):
        generators[f'T{mu}'] = KillingGenerator(f'T{mu}')
    for a, b in ((1, 2), (1, 3), (2, 3), (0, 1), (0, 2), (0, 3)):
        generators[f'O{a}{b}'] = KillingGenerator(f'O{a}{b}')
    generators['S'] = KillingGenerator('S', c=2.0)
    generators['Kbar'] = KillingGenerator('Kbar', c=None)
    return generators


GENERATORS = _build_generators()
CONFORMAL_GENERATORS: Tuple[KillingGenerator, ...] = tuple(
    GENERATORS[name] for name in
    ('T0', 'T1', 'T2', 'T3', 'O12', 'O13', 'O23', 'O01', 'O02', 'O03', 'S')
)
KBAR = GENERATORS['Kbar']


def generator(name: str) -> KillingGenerator:
    try:
        return GENERATORS[name]
    except KeyError:
        raise ValueError(f'unknown generator {name!r}; known: {sorted(GENERATORS)}') from None


def _position(t, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    t = np.broadcast_to(np.asarray(t, dtype=float), x.shape[:-1])
    return np.concatenate([t[..., None], x], axis=-1)


def killing_eval(z: KillingGenerator, t, x) -> np.ndarray:
    """Contravariant components Z^μ at (t, x)."""
    pos = _position(t, x)
    out = np.zeros_like(pos)
    name = z.id
    if name.startswith('T'):
        out[..., int(name[1])] = 1.0
    elif name.startswith('O'):
        a, b = int(name[1]), int(name[2])
        low = lower_vector(pos)
        out[..., b] += low[..., a]
        out[..., a] -= low[..., b]
    elif name == 'S':
        out = pos.copy()
    elif name == 'Kbar':
        t_ = pos[..., 0]
        xs = pos[..., 1:]
        out[..., 0] = 1.0 + t_ ** 2 + np.sum(xs ** 2, axis=-1)
        out[..., 1:] = 2.0 * t_[..., None] * xs
    else:
        raise ValueError(f'unknown generator {name!r}')
    return out


def killing_jacobian(z: KillingGenerator, t, x) -> np.ndarray:
    """∂_μ Z^κ at (t, x), indexed [..., μ, κ]."""
    pos = _position(t, x)
    out = np.zeros(pos.shape[:-1] + (4, 4))
    name = z.id
    if name.startswith('T'):
        pass
    elif name.startswith('O'):
        a, b = int(name[1]), int(name[2])
        out[..., a, b] = SIGNATURE[a]
        out[..., b, a] = -SIGNATURE[b]
    elif name == 'S':
        out[...] = np.eye(4)
    elif name == 'Kbar':
        t_ = pos[..., 0]
        xs = pos[..., 1:]
        out[..., 0, 0] = 2.0 * t_
        out[..., 1:, 0] = 2.0 * xs
        out[..., 0, 1:] = 2.0 * xs
        out[..., 1:, 1:] = 2.0 * t_[..., None, None] * np.eye(3)
    else:
        raise ValueError(f'unknown generator {name!r}')
    return out


def modified_lie_constant(z: KillingGenerator) -> float:
    """c_Z with Lie_Z g = c_Z g; the modified Lie derivative is £_Z + 2c_Z."""
    if z.c is None:
        raise ValueError(f'{z.id} is not in the commuting set; it has no modified Lie constant')
    return z.c


def deformation_tensor(z: KillingGenerator, t, x, step: float = 1e-4) -> np.ndarray:
    """π_{μν} = ∂_μ Z_ν + ∂_ν Z_μ by centered differences of the lowered field."""
    pos = _position(t, x)
    grad = np.zeros(pos.shape[:-1] + (4, 4))
    for mu in range(4):
        shift = np.zeros(4)
        shift[mu] = step
        plus = pos + shift
        minus = pos - shift
        zp = lower_vector(killing_eval(z, plus[..., 0], plus[..., 1:]))
        zm = lower_vector(killing_eval(z, minus[..., 0], minus[..., 1:]))
        grad[..., mu, :] = (zp - zm) / (2.0 * step)
    return grad + np.swapaxes(grad, -1, -2)


def lie_derivative(form: TwoForm, gradient: Sequence[TwoForm], z: KillingGenerator, t, x) -> TwoForm:
    """£_Z F_{μν} = Z^κ∂_κF_{μν} + F_{κν}∂_μZ^κ + F_{μκ}∂_νZ^κ.

    ``gradient`` holds ∂_0F, ∂_1F, ∂_2F, ∂_3F at the same points as ``form``.
    """
    if len(gradient) != 4:
        raise ValueError('gradient needs one two-form per coordinate direction')
    zv = killing_eval(z, t, x)
    jac = killing_jacobian(z, t, x)
    grad = np.stack([g.lower for g in gradient], axis=-3)
    fl = form.lower
    value = (
        np.einsum('...k,...kmn->...mn', zv, grad)
        + np.einsum('...kn,...mk->...mn', fl, jac)
        + np.einsum('...mk,...nk->...mn', fl, jac)
    )
    return TwoForm.from_matrix(value, check=False)


def modified_lie_derivative(form: TwoForm, gradient: Sequence[TwoForm], z: KillingGenerator, t, x) -> TwoForm:
    return lie_derivative(form, gradient, z, t, x) + form * (2.0 * modified_lie_constant(z))


# ---------------------------------------------------------------------------
# Morawetz field, weighted norm and energy current

def morawetz_K(t, x) -> np.ndarray:
    """K̄ = (1 + t² + |x|², 2t x)."""
    return killing_eval(KBAR, t, x)


def morawetz_null_components(frame: NullFrame) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(K̄_L, K̄_uL, (K̄_1, K̄_2)) = (-(1+q²), -(1+s²), 0)."""
    k = morawetz_K(frame.t, frame.x)
    k_a = np.stack([minkowski_dot(k, frame.e1), minkowski_dot(k, frame.e2)], axis=-1)
    return minkowski_dot(k, frame.l), minkowski_dot(k, frame.ul), k_a


def knorm_sq(nc: NullComponents) -> np.ndarray:
    """(1+q²)|ᾱ|² + (1+s²)|α|² + (2+q²+s²)(ρ²+σ²)."""
    q2 = nc.q ** 2
    s2 = nc.s ** 2
    return (
        (1.0 + q2) * np.sum(nc.ualpha ** 2, axis=-1)
        + (1.0 + s2) * np.sum(nc.alpha ** 2, axis=-1)
        + (2.0 + q2 + s2) * (nc.rho ** 2 + nc.sigma ** 2)
    )


def knorm(nc: NullComponents) -> np.ndarray:
    return np.sqrt(knorm_sq(nc))


def knorm_sq_from_interior_products(form: TwoForm, t, x) -> np.ndarray:
    """2(|E|² + |B|² + |P|² + |Q|²) with P = i_S F, Q = i_S ⋆F (Euclidean norms)."""
    pos = _position(t, x)
    e, b = em_decompose(form)
    p = interior_product(pos, form)
    q = interior_product(pos, hodge_dual(form))
    total = (
        np.sum(e ** 2, axis=-1) + np.sum(b ** 2, axis=-1)
        + np.sum(p ** 2, axis=-1) + np.sum(q ** 2, axis=-1)
    )
    return 2.0 * total


def energy_current(form: TwoForm, variation: TwoForm, t, x) -> np.ndarray:
    """J^μ = -S^μ_ν K̄^ν."""
    stress = canonical_stress_blocks(form, variation)
    return -np.einsum('...mn,...n->...m', stress.mixed, morawetz_K(t, x))


def energy_current_j0(form: TwoForm, variation: TwoForm, t, x) -> np.ndarray:
    """J⁰ = S(ξ⁰, K̄); at F = 0 this is a quarter of knorm_sq(Ḟ)."""
    return energy_current(form, variation, t, x)[..., 0]


# ---------------------------------------------------------------------------
# multiplier and positivity

def vmult(form: TwoForm) -> np.ndarray:
    """V^μ = 2ℓ²(1 + I1)(b⁻¹)^{μν} ξ⁰_ν."""
    sc = mbi_scalars(form)
    binv = bi_inverse_metric(form)
    factor = (2.0 * sc.ell ** 2 * (1.0 + sc.i1))[..., None]
    return factor * np.einsum('...mn,n->...m', binv, XI0_LOWER)


def local_energy_density(form: TwoForm, variation: TwoForm) -> np.ndarray:
    """S^μ_ν ξ⁰_μ V^ν."""
    stress = canonical_stress_blocks(form, variation)
    return np.einsum('...mn,m,...n->...', stress.mixed, XI0_LOWER, vmult(form))


def local_energy_density_expanded(form: TwoForm, variation: TwoForm) -> np.ndarray:
    """2(1+|B|²)ℓ² S_00 - 2ℓ² S_{0a} F^{aρ} F_{0ρ}."""
    sc = mbi_scalars(form)
    _, b = em_decompose(form)
    stress = canonical_stress_blocks(form, variation).lower
    fa_f0 = np.einsum('...ar,...r->...a', form.upper[..., 1:, :], form.lower[..., 0, :])
    ell_sq = sc.ell ** 2
    return (
        2.0 * (1.0 + np.sum(b ** 2, axis=-1)) * ell_sq * stress[..., 0, 0]
        - 2.0 * ell_sq * np.einsum('...a,...a->...', stress[..., 0, 1:], fa_f0)
    )


def _unit_variations() -> Tuple[TwoForm, ...]:
    basis = np.eye(6)
    return tuple(em_recompose(row[:3], row[3:]) for row in basis)


def energy_density_matrix(form: TwoForm) -> np.ndarray:
    """Symmetric 6x6 matrix of Ḟ -> S(ξ⁰, V) in the coordinates (Ė, Ḃ)."""
    units = _unit_variations()
    shape = form.shape

    def density(var: TwoForm) -> np.ndarray:
        broadcast = TwoForm(np.broadcast_to(var.components, shape + (6,)))
        return local_energy_density(form, broadcast)

    diag = [density(u) for u in units]
    matrix = np.zeros(shape + (6, 6))
    for i in range(6):
        matrix[..., i, i] = diag[i]
        for j in range(i + 1, 6):
            value = 0.5 * (density(units[i] + units[j]) - diag[i] - diag[j])
            matrix[..., i, j] = value
            matrix[..., j, i] = value
    return matrix


def min_energy_density_ratio(form: TwoForm) -> np.ndarray:
    """min over Ḟ of S(ξ⁰, V)/|Ḟ|², with |Ḟ|² = 2(|Ė|² + |Ḃ|²)."""
    eigenvalues = np.linalg.eigvalsh(energy_density_matrix(form))
    return 0.5 * eigenvalues[..., 0]


@dataclass(frozen=True, eq=False)
class SylvesterBlocks:
    matrix: np.ndarray
    minors: np.ndarray
    closed_form: np.ndarray
    e_par: np.ndarray
    e_perp: np.ndarray
    e_cross: np.ndarray
    e_mag: np.ndarray
    b_par: np.ndarray
    b_perp: np.ndarray
    ell_sq: np.ndarray


_FRAME_TOLERANCE = 1e-12


def _normalize(v: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    norm = np.sqrt(np.sum(v ** 2, axis=-1))
    safe = np.where(norm > 0.0, norm, 1.0)
    return v / safe[..., None], norm


def sylvester_blocks(e, b) -> SylvesterBlocks:
    """Matrix A in (Ḃ∥, Ḃ⊥, Ė∥, Ė⊥) and its leading principal minors.

    The frame puts E along e∥ and B in span{e∥, e⊥} with B⊥ >= 0. If E
    vanishes e∥ follows B (or x̂); if B is parallel to E, B⊥ = 0 and e⊥ is
    any unit vector orthogonal to e∥.
    """
    e = np.asarray(e, dtype=float)
    b = np.asarray(b, dtype=float)
    e, b = np.broadcast_arrays(e, b)
    xhat = np.broadcast_to([1.0, 0.0, 0.0], e.shape)
    zhat = np.broadcast_to([0.0, 0.0, 1.0], e.shape)

    e_unit, e_mag = _normalize(e)
    b_unit, b_mag = _normalize(b)
    e_par = np.where(
        (e_mag >= _FRAME_TOLERANCE)[..., None], e_unit,
        np.where((b_mag >= _FRAME_TOLERANCE)[..., None], b_unit, xhat),
    )
    e_mag = np.where(e_mag >= _FRAME_TOLERANCE, e_mag, 0.0)

    b_par = np.sum(b * e_par, axis=-1)
    perp_vec = b - b_par[..., None] * e_par
    perp_unit, b_perp = _normalize(perp_vec)
    parallel = b_perp <= _FRAME_TOLERANCE * np.maximum(1.0, b_mag)
    b_perp = np.where(parallel, 0.0, b_perp)
    fallback, fb_norm = _normalize(cross(e_par, zhat))
    fallback = np.where((fb_norm < 1e-8)[..., None], _normalize(cross(e_par, xhat))[0], fallback)
    e_perp = np.where(parallel[..., None], fallback, perp_unit)
    e_cross = cross(e_par, e_perp)

    e2 = e_mag ** 2
    bpar2 = b_par ** 2
    bperp2 = b_perp ** 2
    bsq = bpar2 + bperp2
    ell_sq = 1.0 + bsq - e2 - (e_mag * b_par) ** 2
    require_positive(ell_sq, 'ℓ²', ELL_EPSILON)

    lam = ell_sq + e2 * bperp2
    one_b = 1.0 + bsq
    elec = 1.0 + bperp2 - e2

    a = np.zeros(e_mag.shape + (4, 4))
    a[..., 0, 0] = lam * elec
    a[..., 0, 1] = -lam * b_par * b_perp
    a[..., 0, 2] = one_b * e_mag * b_par * bperp2
    a[..., 0, 3] = one_b * elec * e_mag * b_perp
    a[..., 1, 1] = lam * (1.0 + bpar2)
    a[..., 1, 2] = -one_b * (1.0 + bpar2) * e_mag * b_perp
    a[..., 1, 3] = -one_b * e_mag * b_par * bperp2
    a[..., 2, 2] = one_b ** 2 * (1.0 + bpar2)
    a[..., 2, 3] = one_b ** 2 * b_par * b_perp
    a[..., 3, 3] = one_b ** 2 * elec
    a = a + np.swapaxes(np.triu(a, 1), -1, -2)

    minors = np.stack([np.linalg.det(a[..., :k, :k]) for k in range(1, 5)], axis=-1)
    closed = np.stack(
        [
            lam * elec,
            lam ** 2 * ell_sq,
            (1.0 + bpar2) * one_b ** 2 * lam * ell_sq ** 2,
            one_b ** 4 * ell_sq ** 4,
        ],
        axis=-1,
    )
    return SylvesterBlocks(
        matrix=a,
        minors=minors,
        closed_form=closed,
        e_par=e_par,
        e_perp=e_perp,
        e_cross=e_cross,
        e_mag=e_mag,
        b_par=b_par,
        b_perp=b_perp,
        ell_sq=ell_sq,
    )
