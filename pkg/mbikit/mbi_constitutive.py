"""Born–Infeld constitutive structure (β = 1).

ℓ = sqrt(1 + I1 - I2²) controls everything here; states with ℓ² at or below
``ELL_EPSILON`` raise :class:`~mbikit.errors.DegenerateState`. The (B, D)
maps are written with plain dot and cross products so they also accept complex
arrays, which the solver uses for complex-step tangents.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import DegenerateState
from .minkowski_core import (
    INVERSE_METRIC,
    INVERSE_VOLUME_FORM,
    METRIC,
    ThreeVector,
    TwoForm,
    contract,
    cross,
    em_recompose,
    hodge_dual,
    invariants,
)

ELL_EPSILON = 1e-10


def _dot(u, v):
    return np.einsum('...j,...j->...', u, v)


def require_positive(value, what: str, threshold: float = ELL_EPSILON) -> None:
    """Raise DegenerateState at the first sample where ``value`` is not > threshold."""
    value = np.asarray(value)
    bad = ~(value > threshold)
    if np.any(bad):
        index = np.unravel_index(int(np.argmax(bad)), value.shape) if value.ndim else ()
        offending = float(value[index])
        raise DegenerateState(
            f'{what} = {offending:.6g} <= {threshold:g} at sample {tuple(int(i) for i in index)}',
            index=index,
            value=offending,
        )


@dataclass(frozen=True, eq=False)
class MbiScalars:
    i1: np.ndarray
    i2: np.ndarray
    ell: np.ndarray

    @property
    def lagrangian(self) -> np.ndarray:
        return 1.0 - self.ell


@dataclass(frozen=True, eq=False)
class StatePoint:
    """Solver unknowns (B, D) at a point or batch of points."""

    b: np.ndarray
    d: np.ndarray

    def ell(self) -> np.ndarray:
        return ell_of_db(self.b, self.d)

    def e_h(self) -> Tuple[np.ndarray, np.ndarray]:
        return e_h_of_db(self.d, self.b)

    def faraday(self) -> TwoForm:
        e, _ = self.e_h()
        return em_recompose(e, self.b)


@dataclass(frozen=True, eq=False)
class RankFourTensor:
    """Dense contravariant rank-4 tensor, batched on leading axes."""

    components: np.ndarray

    def __add__(self, other: 'RankFourTensor') -> 'RankFourTensor':
        return RankFourTensor(self.components + other.components)

    def __sub__(self, other: 'RankFourTensor') -> 'RankFourTensor':
        return RankFourTensor(self.components - other.components)

    def contract(self, form: TwoForm) -> np.ndarray:
        """T^{μνκλ} X_{κλ}, returned with indices up."""
        return np.einsum('...mnkl,...kl->...mn', self.components, form.lower)

    def antisymmetry_defect(self) -> float:
        c = self.components
        first = np.abs(c + np.swapaxes(c, -4, -3))
        second = np.abs(c + np.swapaxes(c, -2, -1))
        return float(max(first.max(initial=0.0), second.max(initial=0.0)))

    def pair_symmetry_defect(self) -> float:
        c = self.components
        swapped = np.swapaxes(np.swapaxes(c, -4, -2), -3, -1)
        return float(np.abs(c - swapped).max(initial=0.0))


# ½ (g^{μκ} g^{νλ} - g^{μλ} g^{νκ})
MAXWELL_PART = RankFourTensor(
    0.5 * (np.einsum('mk,nl->mnkl', INVERSE_METRIC, INVERSE_METRIC)
           - np.einsum('ml,nk->mnkl', INVERSE_METRIC, INVERSE_METRIC))
)


def mbi_scalars(form: TwoForm) -> MbiScalars:
    i1, i2 = invariants(form)
    ell_sq = 1.0 + i1 - i2 ** 2
    require_positive(ell_sq, 'ℓ²')
    return MbiScalars(i1=i1, i2=i2, ell=np.sqrt(ell_sq))


def ell(form: TwoForm) -> np.ndarray:
    """ℓ = sqrt(1 + I1 - I2²)."""
    return mbi_scalars(form).ell


def lagrangian(form: TwoForm) -> np.ndarray:
    """L̂ = 1 - ℓ."""
    return mbi_scalars(form).lagrangian


def maxwell_tensor(form: TwoForm) -> TwoForm:
    """M = ℓ⁻¹(⋆F + I2 F)."""
    sc = mbi_scalars(form)
    return (hodge_dual(form) + form * sc.i2) * (1.0 / sc.ell)


def maxwell_dual(form: TwoForm) -> TwoForm:
    """⋆M = -ℓ⁻¹(F - I2 ⋆F)."""
    sc = mbi_scalars(form)
    return (form - hodge_dual(form) * sc.i2) * (-1.0 / sc.ell)


def d_h_of_eb(e: ThreeVector, b: ThreeVector) -> Tuple[np.ndarray, np.ndarray]:
    """Displacement and magnetic field from (E, B)."""
    e = np.asarray(e, dtype=float)
    b = np.asarray(b, dtype=float)
    eb = _dot(e, b)
    root_sq = 1.0 + _dot(b, b) - _dot(e, e) - eb ** 2
    require_positive(root_sq, '1 + |B|² - |E|² - (E·B)²')
    root = np.sqrt(root_sq)[..., None]
    d = (e + eb[..., None] * b) / root
    h = (b - eb[..., None] * e) / root
    return d, h


def d_h_of_maxwell(form: TwoForm) -> Tuple[np.ndarray, np.ndarray]:
    """D_j = -⋆M_{j0}, H_j = -M_{j0}; an independent route to d_h_of_eb."""
    d = maxwell_dual(form).components[..., 0:3]
    h = maxwell_tensor(form).components[..., 0:3]
    return d, h


def e_h_of_db(d, b) -> Tuple[np.ndarray, np.ndarray]:
    """Electric and magnetic fields from the solver state; defined for all finite (B, D)."""
    d = np.asarray(d)
    b = np.asarray(b)
    dxb = cross(d, b)
    w = np.sqrt(1.0 + _dot(b, b) + _dot(d, d) + _dot(dxb, dxb))[..., None]
    e = (d + cross(b, dxb)) / w
    h = (b - cross(d, dxb)) / w
    return e, h


def ell_of_db(b, d) -> np.ndarray:
    """ℓ² = (1 + |B|²)² / (1 + |B|² + |D|² + |B×D|²)."""
    b = np.asarray(b)
    d = np.asarray(d)
    bxd = cross(b, d)
    one_b = 1.0 + _dot(b, b)
    return one_b / np.sqrt(one_b + _dot(d, d) + _dot(bxd, bxd))


def _outer(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    return np.einsum('...mn,...kl->...mnkl', first, second)


def h_tensor(form: TwoForm) -> RankFourTensor:
    """h^{μνκλ}, the Euler–Lagrange principal tensor including its ε term."""
    sc = mbi_scalars(form)
    f_up = form.upper
    s_up = hodge_dual(form).upper
    inv1 = (1.0 / sc.ell)[..., None, None, None, None]
    inv3 = inv1 ** 3
    i2 = sc.i2[..., None, None, None, None]
    value = 0.5 * (
        inv1 * (2.0 * MAXWELL_PART.components)
        - inv3 * _outer(f_up, f_up)
        + i2 * inv3 * (_outer(f_up, s_up) + _outer(s_up, f_up))
        - (inv1 + i2 ** 2 * inv3) * _outer(s_up, s_up)
        - inv1 * i2 * INVERSE_VOLUME_FORM
    )
    return RankFourTensor(value)


def h_triangle(form: TwoForm) -> RankFourTensor:
    """Nonlinear part H_△ of H."""
    sc = mbi_scalars(form)
    f_up = form.upper
    s_up = hodge_dual(form).upper
    inv2 = (1.0 / sc.ell ** 2)[..., None, None, None, None]
    i2 = sc.i2[..., None, None, None, None]
    value = 0.5 * (
        -inv2 * _outer(f_up, f_up)
        + i2 * inv2 * (_outer(f_up, s_up) + _outer(s_up, f_up))
        - (1.0 + i2 ** 2 * inv2) * _outer(s_up, s_up)
    )
    return RankFourTensor(value)


def big_h_tensor(form: TwoForm) -> Tuple[RankFourTensor, RankFourTensor]:
    """(H, H_△) with H = ℓ(h + ½ℓ⁻¹ I2 ε); H equals the Maxwell part plus H_△."""
    sc = mbi_scalars(form)
    h = h_tensor(form)
    ell4 = sc.ell[..., None, None, None, None]
    i2 = sc.i2[..., None, None, None, None]
    big = RankFourTensor(ell4 * h.components + 0.5 * i2 * INVERSE_VOLUME_FORM)
    return big, h_triangle(form)


def contract_big_h(form: TwoForm, variation: TwoForm) -> TwoForm:
    """H^{μνκλ} X_{κλ} without building H (index-down result).

    H_△ contracts to ½(a F + b ⋆F) with scalars a, b built from F·X and ⋆F·X.
    """
    sc = mbi_scalars(form)
    star = hodge_dual(form)
    f_dot = contract(form, variation)
    s_dot = contract(star, variation)
    inv2 = 1.0 / sc.ell ** 2
    a = -inv2 * f_dot + sc.i2 * inv2 * s_dot
    b = sc.i2 * inv2 * f_dot - (1.0 + sc.i2 ** 2 * inv2) * s_dot
    return variation + form * (0.5 * a) + star * (0.5 * b)


def bi_inverse_metric(form: TwoForm) -> np.ndarray:
    """(b⁻¹)^{μν} = g^{μν} - (1 + I1)⁻¹ F^{μκ} F^ν_κ."""
    i1, _ = invariants(form)
    require_positive(1.0 + i1, '1 + I1')
    f_up = form.upper
    ff = np.einsum('...mk,kl,...nl->...mn', f_up, METRIC, f_up)
    return INVERSE_METRIC - ff / (1.0 + i1)[..., None, None]
