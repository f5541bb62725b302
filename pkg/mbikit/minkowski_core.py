"""Pointwise tensor algebra on Minkowski space with g = diag(-1, 1, 1, 1).

Every function here is a pure function of numpy arrays and works on a single
point or on a batch: leading axes are batch axes, trailing axes are tensor
indices. Two-forms are stored as their six independent index-down components
``(F_01, F_02, F_03, F_12, F_13, F_23)`` so antisymmetry holds exactly.

Orientation: the volume form has ε_{0123} = +1, hence ε^{0123} = -1, and the
spatial volume form has ε̄_{123} = +1. With these choices the Hodge dual maps
(E, B) to (-B, E) and satisfies ⋆⋆F = -F.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import Tuple

import numpy as np

from .errors import FrameSingularity

METRIC = np.diag([-1.0, 1.0, 1.0, 1.0])
INVERSE_METRIC = np.diag([-1.0, 1.0, 1.0, 1.0])
SIGNATURE = np.array([-1.0, 1.0, 1.0, 1.0])

# independent (row, column) pairs of a two-form, in storage order
PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
_ROWS = np.array([p[0] for p in PAIRS])
_COLS = np.array([p[1] for p in PAIRS])

POINT_R_MIN = 1e-12
FRAME_SEED_TOLERANCE = 1e-8


def _permutation_symbol(rank: int) -> np.ndarray:
    symbol = np.zeros((rank,) * rank)
    for perm in permutations(range(rank)):
        inversions = sum(1 for i in range(rank) for j in range(i + 1, rank) if perm[i] > perm[j])
        symbol[perm] = -1.0 if inversions % 2 else 1.0
    return symbol


LEVI_CIVITA_3 = _permutation_symbol(3)
VOLUME_FORM = _permutation_symbol(4)
INVERSE_VOLUME_FORM = -VOLUME_FORM
# ε̸_{AB} on the spheres, relative to (e_1, e_2)
ANGULAR_VOLUME_FORM = np.array([[0.0, 1.0], [-1.0, 0.0]])

FourVector = np.ndarray
ThreeVector = np.ndarray


def raise_two(tensor: np.ndarray) -> np.ndarray:
    """Raise (or lower) both indices of a rank-2 array; g is its own inverse."""
    return tensor * SIGNATURE[:, None] * SIGNATURE[None, :]


lower_two = raise_two


def lower_vector(vector: np.ndarray) -> np.ndarray:
    return np.asarray(vector) * SIGNATURE


def minkowski_dot(x: FourVector, y: FourVector) -> np.ndarray:
    """g(X, Y) for batches of contravariant vectors."""
    return np.einsum('...m,...m->...', lower_vector(x), y)


@dataclass(frozen=True, eq=False)
class TwoForm:
    """Antisymmetric covariant rank-2 tensor, possibly batched."""

    components: np.ndarray

    def __post_init__(self):
        comps = np.asarray(self.components, dtype=float)
        if comps.shape[-1:] != (6,):
            raise ValueError(f'TwoForm expects trailing axis of length 6, got shape {comps.shape}')
        object.__setattr__(self, 'components', comps)

    @classmethod
    def zeros(cls, shape: Tuple[int, ...] = ()) -> 'TwoForm':
        return cls(np.zeros(tuple(shape) + (6,)))

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, check: bool = True) -> 'TwoForm':
        """Build from 4x4 index-down components.

        With ``check`` the input must be exactly antisymmetric; otherwise the
        upper triangle is taken as authoritative.
        """
        m = np.asarray(matrix, dtype=float)
        if m.shape[-2:] != (4, 4):
            raise ValueError(f'expected trailing 4x4 block, got shape {m.shape}')
        if check and not np.array_equal(m, -np.swapaxes(m, -1, -2)):
            raise ValueError('matrix is not antisymmetric')
        return cls(m[..., _ROWS, _COLS])

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.components.shape[:-1]

    @property
    def lower(self) -> np.ndarray:
        out = np.zeros(self.shape + (4, 4))
        out[..., _ROWS, _COLS] = self.components
        out[..., _COLS, _ROWS] = -self.components
        return out

    @property
    def upper(self) -> np.ndarray:
        return raise_two(self.lower)

    def __getitem__(self, index) -> 'TwoForm':
        return TwoForm(self.components[index])

    def __add__(self, other: 'TwoForm') -> 'TwoForm':
        return TwoForm(self.components + other.components)

    def __sub__(self, other: 'TwoForm') -> 'TwoForm':
        return TwoForm(self.components - other.components)

    def __neg__(self) -> 'TwoForm':
        return TwoForm(-self.components)

    def __mul__(self, factor) -> 'TwoForm':
        return TwoForm(np.asarray(factor, dtype=float)[..., None] * self.components)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class NullFrame:
    """Null frame {uL, L, e_1, e_2} at (t, x) with x away from the origin."""

    t: np.ndarray
    x: np.ndarray
    ul: np.ndarray
    l: np.ndarray
    e1: np.ndarray
    e2: np.ndarray

    @property
    def r(self) -> np.ndarray:
        return np.sqrt(np.einsum('...j,...j->...', self.x, self.x))

    @property
    def q(self) -> np.ndarray:
        return self.r - self.t

    @property
    def s(self) -> np.ndarray:
        return self.r + self.t

    @property
    def omega(self) -> np.ndarray:
        return self.l[..., 1:]

    def matrix(self) -> np.ndarray:
        """Columns uL, L, e_1, e_2 (contravariant components)."""
        return np.stack([self.ul, self.l, self.e1, self.e2], axis=-1)


@dataclass(frozen=True, eq=False)
class NullComponents:
    """(ᾱ, α, ρ, σ) of a two-form, with the null coordinates of the base point."""

    ualpha: np.ndarray
    alpha: np.ndarray
    rho: np.ndarray
    sigma: np.ndarray
    q: np.ndarray = 0.0
    s: np.ndarray = 0.0

    def __post_init__(self):
        for name in ('ualpha', 'alpha', 'rho', 'sigma', 'q', 's'):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if self.ualpha.shape[-1:] != (2,) or self.alpha.shape[-1:] != (2,):
            raise ValueError('ualpha and alpha need a trailing axis of length 2')

    def norm_sq(self) -> np.ndarray:
        """|ᾱ|² + |α|² + 2(ρ² + σ²), the Euclidean |F|² of the two-form."""
        return (
            np.sum(self.ualpha ** 2, axis=-1)
            + np.sum(self.alpha ** 2, axis=-1)
            + 2.0 * (self.rho ** 2 + self.sigma ** 2)
        )


def hodge_dual(form: TwoForm) -> TwoForm:
    """⋆F^{μν} = ½ ε^{κλμν} F_{κλ}, returned with indices down."""
    star_upper = 0.5 * np.einsum('klmn,...kl->...mn', INVERSE_VOLUME_FORM, form.lower)
    return TwoForm.from_matrix(lower_two(star_upper), check=False)


def contract(first: TwoForm, second: TwoForm) -> np.ndarray:
    """F^{κλ} G_{κλ}."""
    return np.einsum('...kl,...kl->...', first.upper, second.lower)


def invariants(form: TwoForm) -> Tuple[np.ndarray, np.ndarray]:
    """(I1, I2) = (½ F_{κλ}F^{κλ}, ¼ F_{κλ}⋆F^{κλ}) = (|B|² - |E|², E·B)."""
    i1 = 0.5 * contract(form, form)
    i2 = 0.25 * contract(hodge_dual(form), form)
    return i1, i2


def em_decompose(form: TwoForm) -> Tuple[ThreeVector, ThreeVector]:
    """E_j = F_{j0}, B_j = ½ ε̄_j^{ab} F_{ab}."""
    c = form.components
    e = -c[..., 0:3]
    b = np.stack([c[..., 5], -c[..., 4], c[..., 3]], axis=-1)
    return e, b


def em_recompose(e: ThreeVector, b: ThreeVector) -> TwoForm:
    e = np.asarray(e, dtype=float)
    b = np.asarray(b, dtype=float)
    e, b = np.broadcast_arrays(e, b)
    comps = np.stack(
        [-e[..., 0], -e[..., 1], -e[..., 2], b[..., 2], -b[..., 1], b[..., 0]],
        axis=-1,
    )
    return TwoForm(comps)


def euclidean_norm_sq(form: TwoForm) -> np.ndarray:
    """Sum of squares of all sixteen index-down components."""
    return 2.0 * np.sum(form.components ** 2, axis=-1)


def interior_product(vector: FourVector, form: TwoForm) -> np.ndarray:
    """(i_X F)_μ = F_{μκ} X^κ (covariant components)."""
    return np.einsum('...mk,...k->...m', form.lower, vector)


def evaluate(form: TwoForm, first: FourVector, second: FourVector) -> np.ndarray:
    """F(X, Y) = F_{μν} X^μ Y^ν."""
    return np.einsum('...mn,...m,...n->...', form.lower, first, second)


def cross(u: ThreeVector, v: ThreeVector) -> ThreeVector:
    """(u × v)^i = ε̄^i_{jk} u^j v^k."""
    return np.einsum('ijk,...j,...k->...i', LEVI_CIVITA_3, u, v)


def null_frame_at(t, x, r_min: float = POINT_R_MIN) -> NullFrame:
    """Standard null frame at (t, x).

    e_1 normalises ẑ × ω (x̂ × ω when ẑ is nearly parallel to ω) and
    e_2 = ω × e_1, so (ω, e_1, e_2) is positively oriented.
    """
    x = np.asarray(x, dtype=float)
    t = np.broadcast_to(np.asarray(t, dtype=float), x.shape[:-1]).copy()
    r = np.sqrt(np.einsum('...j,...j->...', x, x))
    if np.any(r < r_min):
        raise FrameSingularity(f'null frame undefined at r={float(np.min(r)):.3e} (r_min={r_min:.3e})')
    omega = x / r[..., None]

    seed = cross(np.broadcast_to([0.0, 0.0, 1.0], omega.shape), omega)
    seed_norm = np.sqrt(np.einsum('...j,...j->...', seed, seed))
    fallback = seed_norm < FRAME_SEED_TOLERANCE
    if np.any(fallback):
        alt = cross(np.broadcast_to([1.0, 0.0, 0.0], omega.shape), omega)
        seed = np.where(fallback[..., None], alt, seed)
        seed_norm = np.sqrt(np.einsum('...j,...j->...', seed, seed))
    e1 = seed / seed_norm[..., None]
    e2 = cross(omega, e1)

    ones = np.ones(omega.shape[:-1] + (1,))
    zeros = np.zeros(omega.shape[:-1] + (1,))
    return NullFrame(
        t=t,
        x=x,
        ul=np.concatenate([ones, -omega], axis=-1),
        l=np.concatenate([ones, omega], axis=-1),
        e1=np.concatenate([zeros, e1], axis=-1),
        e2=np.concatenate([zeros, e2], axis=-1),
    )


def null_decompose(form: TwoForm, frame: NullFrame) -> NullComponents:
    """ᾱ_A = F(e_A, uL), α_A = F(e_A, L), ρ = ½F(uL, L), σ = F(e_1, e_2)."""
    ualpha = np.stack([evaluate(form, frame.e1, frame.ul), evaluate(form, frame.e2, frame.ul)], axis=-1)
    alpha = np.stack([evaluate(form, frame.e1, frame.l), evaluate(form, frame.e2, frame.l)], axis=-1)
    rho = 0.5 * evaluate(form, frame.ul, frame.l)
    sigma = evaluate(form, frame.e1, frame.e2)
    return NullComponents(ualpha=ualpha, alpha=alpha, rho=rho, sigma=sigma, q=frame.q, s=frame.s)


def null_recompose(nc: NullComponents, frame: NullFrame) -> TwoForm:
    """Inverse of null_decompose for the same frame."""
    shape = np.broadcast_shapes(nc.rho.shape, frame.t.shape)
    phi = np.zeros(shape + (4, 4))
    # frame slots: 0 -> uL, 1 -> L, 2 -> e_1, 3 -> e_2
    phi[..., 0, 1] = 2.0 * nc.rho
    phi[..., 2, 0] = nc.ualpha[..., 0]
    phi[..., 3, 0] = nc.ualpha[..., 1]
    phi[..., 2, 1] = nc.alpha[..., 0]
    phi[..., 3, 1] = nc.alpha[..., 1]
    phi[..., 2, 3] = nc.sigma
    phi = phi - np.swapaxes(phi, -1, -2)

    inverse = np.linalg.inv(frame.matrix())
    lower = np.swapaxes(inverse, -1, -2) @ phi @ inverse
    return TwoForm.from_matrix(lower, check=False)


def dual_null_components(nc: NullComponents) -> NullComponents:
    """Null components of ⋆F from those of F."""
    ualpha = -np.einsum('...b,ba->...a', nc.ualpha, ANGULAR_VOLUME_FORM)
    alpha = np.einsum('...b,ba->...a', nc.alpha, ANGULAR_VOLUME_FORM)
    return NullComponents(ualpha=ualpha, alpha=alpha, rho=nc.sigma, sigma=-nc.rho, q=nc.q, s=nc.s)


def null_form_q1(first: TwoForm, second: TwoForm) -> np.ndarray:
    """Q1(F, G) = F^{κλ} G_{κλ}."""
    return contract(first, second)


def null_form_q2(first: TwoForm, second: TwoForm) -> np.ndarray:
    """Q2(F, G) = ⋆F^{κλ} G_{κλ}."""
    return contract(hodge_dual(first), second)


def _angular(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    return np.einsum('...a,ab,...b->...', first, ANGULAR_VOLUME_FORM, second)


def null_form_q1_expansion(f: NullComponents, g: NullComponents) -> np.ndarray:
    """Q1 written in null components; no ᾱ[F]ᾱ[G] products appear."""
    return (
        -np.sum(f.ualpha * g.alpha, axis=-1)
        - np.sum(g.ualpha * f.alpha, axis=-1)
        - 2.0 * f.rho * g.rho
        + 2.0 * f.sigma * g.sigma
    )


def null_form_q2_expansion(f: NullComponents, g: NullComponents) -> np.ndarray:
    return (
        _angular(f.ualpha, g.alpha)
        + _angular(g.ualpha, f.alpha)
        - 2.0 * f.sigma * g.rho
        - 2.0 * f.rho * g.sigma
    )


def invariants_from_null(nc: NullComponents) -> Tuple[np.ndarray, np.ndarray]:
    """I1 = -ᾱ·α - ρ² + σ², I2 = ½ ε̸^{AB} ᾱ_A α_B - ρσ."""
    i1 = -np.sum(nc.ualpha * nc.alpha, axis=-1) - nc.rho ** 2 + nc.sigma ** 2
    i2 = 0.5 * _angular(nc.ualpha, nc.alpha) - nc.rho * nc.sigma
    return i1, i2


_FRAME_SETS = {
    'L': ('l',),
    'T': ('l', 'e1', 'e2'),
    'U': ('ul', 'l', 'e1', 'e2'),
}


def contraction_seminorm(form: TwoForm, frame: NullFrame, first: str = 'U', second: str = 'U') -> np.ndarray:
    """Σ |F(V, W)| over V in the first frame subset and W in the second."""
    try:
        vs = _FRAME_SETS[first]
        ws = _FRAME_SETS[second]
    except KeyError as exc:
        raise ValueError(f'unknown frame subset {exc.args[0]!r}; expected one of L, T, U') from None
    total = 0.0
    for v in vs:
        for w in ws:
            total = total + np.abs(evaluate(form, getattr(frame, v), getattr(frame, w)))
    return total
