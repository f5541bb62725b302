import numpy as np
import pytest

from mbikit import minkowski_core as mk
from mbikit import stress_currents as sc
from mbikit.errors import NotCausal
from mbikit.verification import sample_compact_eb, sample_future_causal


class TestEnergyMomentum:
    """T_MBI symmetry and the dominant energy condition"""

    def test_symmetric(self, admissible):
        _, _, form = admissible
        lower = sc.em_tensor_mbi(form).lower
        np.testing.assert_allclose(lower, np.swapaxes(lower, -1, -2), atol=1e-12)

    def test_vacuum_vanishes(self):
        np.testing.assert_allclose(sc.em_tensor_mbi(mk.TwoForm.zeros()).lower, 0.0)

    def test_weak_field_energy_density(self, rng):
        """T_00 ≈ ½(|E|² + |B|²) for small fields"""
        e, b = rng.standard_normal((2, 3)) * 1e-4
        t00 = sc.em_tensor_mbi(mk.em_recompose(e, b)).lower[0, 0]
        assert t00 == pytest.approx(0.5 * (e @ e + b @ b), rel=1e-6)

    def test_dominant_energy(self, admissible, rng):
        _, _, form = admissible
        x = sample_future_causal(rng, len(form.components))
        y = sample_future_causal(rng, len(form.components))
        value = sc.dec_value(form, x, y)
        scale = (1.0 + mk.euclidean_norm_sq(form)) * np.linalg.norm(x, axis=1) * np.linalg.norm(y, axis=1)
        assert np.all(value >= -1e-12 * scale)

    def test_rejects_spacelike(self, admissible):
        _, _, form = admissible
        with pytest.raises(NotCausal):
            sc.dec_value(form[0], np.array([1.0, 2.0, 0.0, 0.0]), np.array([1.0, 0.0, 0.0, 0.0]))

    def test_rejects_past_directed(self, admissible):
        _, _, form = admissible
        with pytest.raises(NotCausal):
            sc.dec_value(form[0], np.array([-1.0, 0.0, 0.0, 0.0]), np.array([1.0, 0.0, 0.0, 0.0]))

    def test_null_frame_bounds(self, admissible, points):
        _, _, form = admissible
        res = sc.dec_null_bounds(form, mk.null_frame_at(*points))
        np.testing.assert_allclose(res.ul_ul * res.ell, res.ualpha_sq, rtol=1e-10, atol=1e-12)
        np.testing.assert_allclose(res.l_l * res.ell, res.alpha_sq, rtol=1e-10, atol=1e-12)
        np.testing.assert_allclose(res.ell * res.ul_l, res.ul_l_expansion, rtol=1e-10, atol=1e-10)
        assert np.all(res.ell * res.ul_l >= res.ul_l_lower_bound - 1e-10)

    def test_maxwell_tensor_null_components(self, rng, points):
        var = mk.TwoForm(rng.standard_normal((200, 6)))
        fr = mk.null_frame_at(*points)
        nc = mk.null_decompose(var, fr)
        stress = sc.em_tensor_maxwell(var)
        np.testing.assert_allclose(stress.evaluate(fr.ul, fr.l), nc.rho ** 2 + nc.sigma ** 2, atol=1e-11)
        np.testing.assert_allclose(stress.evaluate(fr.l, fr.l), np.sum(nc.alpha ** 2, -1), atol=1e-11)


class TestCanonicalStress:
    """Dense and block routes, trace and antisymmetric part"""

    def test_routes_agree(self, admissible, rng):
        _, _, form = admissible
        var = mk.TwoForm(rng.standard_normal((50, 6)))
        dense = sc.canonical_stress(form[:50], var)
        blocks = sc.canonical_stress_blocks(form[:50], var)
        np.testing.assert_allclose(dense.lower, blocks.lower, atol=1e-10)

    def test_trace_free(self, admissible, rng):
        _, _, form = admissible
        var = mk.TwoForm(rng.standard_normal((200, 6)))
        stress = sc.canonical_stress_blocks(form, var)
        scale = 1.0 + np.abs(stress.mixed).reshape(200, -1).max(1)
        assert np.all(np.abs(stress.trace()) <= 1e-11 * scale)

    def test_antisymmetric_part_formula(self, admissible, rng):
        _, _, form = admissible
        var = mk.TwoForm(rng.standard_normal((200, 6)))
        stress = sc.canonical_stress_blocks(form, var)
        np.testing.assert_allclose(
            stress.antisymmetric_part(), sc.canonical_stress_antisymmetric_part(form, var), atol=1e-10
        )

    def test_vacuum_background_is_maxwell(self, rng):
        var = mk.TwoForm(rng.standard_normal((10, 6)))
        zero = mk.TwoForm.zeros((10,))
        np.testing.assert_allclose(
            sc.canonical_stress(zero, var).lower, sc.em_tensor_maxwell(var).lower, atol=1e-13
        )

    def test_kind_tags(self, admissible, rng):
        _, _, form = admissible
        var = mk.TwoForm(rng.standard_normal(6))
        assert sc.canonical_stress_blocks(form[0], var).kind is sc.StressKind.CANONICAL
        assert sc.em_tensor_mbi(form[0]).kind is sc.StressKind.EM_MBI


class TestGenerators:
    """Conformal Killing fields, deformation tensors and Lie derivatives"""

    def test_commuting_set(self):
        assert len(sc.CONFORMAL_GENERATORS) == 11
        assert sc.KBAR not in sc.CONFORMAL_GENERATORS

    def test_unknown_generator(self):
        with pytest.raises(ValueError, match='unknown generator'):
            sc.generator('O45')

    def test_explicit_values(self):
        x = np.array([1.0, 2.0, 3.0])
        np.testing.assert_allclose(sc.generator('S')(0.5, x), [0.5, 1.0, 2.0, 3.0])
        np.testing.assert_allclose(sc.morawetz_K(0.0, np.zeros(3)), [1.0, 0.0, 0.0, 0.0])
        np.testing.assert_allclose(sc.generator('T2')(0.5, x), [0.0, 0.0, 1.0, 0.0])

    @pytest.mark.parametrize('name,factor', [('T0', 0.0), ('O12', 0.0), ('O03', 0.0), ('S', 2.0)])
    def test_deformation_constant(self, name, factor, points):
        t, x = points
        pi = sc.deformation_tensor(sc.generator(name), t[:20], x[:20], step=1e-3)
        np.testing.assert_allclose(pi, factor * np.broadcast_to(mk.METRIC, pi.shape), atol=1e-8)

    def test_morawetz_deformation(self, points):
        t, x = points
        pi = sc.deformation_tensor(sc.KBAR, t[:20], x[:20], step=1e-3)
        np.testing.assert_allclose(pi, 4.0 * t[:20, None, None] * mk.METRIC, atol=1e-7)

    def test_morawetz_has_no_modified_constant(self):
        with pytest.raises(ValueError):
            sc.modified_lie_constant(sc.KBAR)

    def test_jacobian_matches_differences(self, points):
        t, x = points
        z = sc.generator('O01')
        jac = sc.killing_jacobian(z, t[:5], x[:5])
        pos = np.concatenate([t[:5, None], x[:5]], axis=1)
        for mu in range(4):
            shift = np.zeros(4)
            shift[mu] = 1e-4
            plus, minus = pos + shift, pos - shift
            fd = (sc.killing_eval(z, plus[:, 0], plus[:, 1:]) - sc.killing_eval(z, minus[:, 0], minus[:, 1:])) / 2e-4
            np.testing.assert_allclose(jac[:, mu, :], fd, atol=1e-8)

    def test_lie_derivative_commutes_with_dual(self, rng, points):
        t, x = points
        form = mk.TwoForm(rng.standard_normal((200, 6)))
        grad = [mk.TwoForm(rng.standard_normal((200, 6))) for _ in range(4)]
        for z in sc.GENERATORS.values():
            lhs = sc.lie_derivative(mk.hodge_dual(form), [mk.hodge_dual(g) for g in grad], z, t, x)
            rhs = mk.hodge_dual(sc.lie_derivative(form, grad, z, t, x))
            np.testing.assert_allclose(lhs.components, rhs.components, atol=1e-10)

    def test_modified_lie_derivative(self, rng, points):
        t, x = points
        form = mk.TwoForm(rng.standard_normal((200, 6)))
        grad = [mk.TwoForm(np.zeros((200, 6))) for _ in range(4)]
        s = sc.generator('S')
        diff = sc.modified_lie_derivative(form, grad, s, t, x) - sc.lie_derivative(form, grad, s, t, x)
        np.testing.assert_allclose(diff.components, 4.0 * form.components)

    def test_lie_derivative_needs_four_gradients(self, rng):
        form = mk.TwoForm(rng.standard_normal(6))
        with pytest.raises(ValueError):
            sc.lie_derivative(form, [form] * 3, sc.generator('T0'), 0.0, np.ones(3))


class TestWeightedNorms:
    """Knorm, the energy current and the multiplier"""

    def test_morawetz_null_components(self, points):
        fr = mk.null_frame_at(*points)
        k_l, k_ul, k_a = sc.morawetz_null_components(fr)
        np.testing.assert_allclose(k_l, -(1.0 + fr.q ** 2), rtol=1e-12)
        np.testing.assert_allclose(k_ul, -(1.0 + fr.s ** 2), rtol=1e-12)
        np.testing.assert_allclose(k_a, 0.0, atol=1e-12)

    def test_knorm_interior_products(self, rng, points):
        t, x = points
        var = mk.TwoForm(rng.standard_normal((200, 6)))
        nc = mk.null_decompose(var, mk.null_frame_at(t, x))
        np.testing.assert_allclose(sc.knorm_sq(nc), sc.knorm_sq_from_interior_products(var, t, x), rtol=1e-10)
        np.testing.assert_allclose(sc.knorm(nc) ** 2, sc.knorm_sq(nc), rtol=1e-12)

    def test_current_at_vacuum_is_quarter_knorm(self, rng, points):
        t, x = points
        var = mk.TwoForm(rng.standard_normal((200, 6)))
        zero = mk.TwoForm.zeros((200,))
        knorm_sq = sc.knorm_sq(mk.null_decompose(var, mk.null_frame_at(t, x)))
        np.testing.assert_allclose(4.0 * sc.energy_current_j0(zero, var, t, x), knorm_sq, rtol=1e-10)

    def test_multiplier_at_vacuum(self):
        np.testing.assert_allclose(sc.vmult(mk.TwoForm.zeros()), [2.0, 0.0, 0.0, 0.0])

    def test_density_routes(self, admissible, rng):
        _, _, form = admissible
        var = mk.TwoForm(rng.standard_normal((200, 6)))
        np.testing.assert_allclose(
            sc.local_energy_density(form, var), sc.local_energy_density_expanded(form, var), rtol=1e-9, atol=1e-10
        )

    def test_density_matrix_reproduces_density(self, admissible, rng):
        _, _, form = admissible
        var = mk.em_recompose(*rng.standard_normal((2, 3)))
        e, b = mk.em_decompose(var)
        v = np.concatenate([e, b])
        matrix = sc.energy_density_matrix(form[:5])
        expected = sc.local_energy_density(form[:5], mk.TwoForm(np.broadcast_to(var.components, (5, 6))))
        np.testing.assert_allclose(np.einsum('i,...ij,j->...', v, matrix, v), expected, rtol=1e-9)

    def test_density_positive_on_compact_set(self, rng):
        e, b = sample_compact_eb(rng, 500)
        ratio = sc.min_energy_density_ratio(mk.em_recompose(e, b))
        assert np.all(ratio > 1e-8)

    def test_vacuum_density_ratio(self):
        """At F = 0 the density is |Ė|² + |Ḃ|², half of |Ḟ|²"""
        assert sc.min_energy_density_ratio(mk.TwoForm.zeros()) == pytest.approx(0.5)


class TestSylvester:
    """Leading principal minors of the positivity matrix"""

    def test_minors_match_closed_forms(self, rng):
        e, b = sample_compact_eb(rng, 500)
        blocks = sc.sylvester_blocks(e, b)
        np.testing.assert_allclose(blocks.minors, blocks.closed_form, rtol=1e-9)
        assert np.all(blocks.closed_form > 0)

    def test_frame_layout(self, rng):
        e, b = sample_compact_eb(rng, 50)
        blocks = sc.sylvester_blocks(e, b)
        np.testing.assert_allclose(np.sum(blocks.e_par * blocks.e_perp, -1), 0.0, atol=1e-12)
        assert np.all(blocks.b_perp >= 0.0)

    def test_parallel_fields(self):
        """B ∥ E: B⊥ = 0 and a perpendicular axis is still produced"""
        blocks = sc.sylvester_blocks(np.array([0.3, 0.0, 0.0]), np.array([1.0, 0.0, 0.0]))
        assert blocks.b_perp == 0.0
        assert np.linalg.norm(blocks.e_perp) == pytest.approx(1.0)
        np.testing.assert_allclose(blocks.minors, blocks.closed_form, rtol=1e-10)

    def test_vanishing_electric_field(self):
        blocks = sc.sylvester_blocks(np.zeros(3), np.array([0.0, 2.0, 0.0]))
        np.testing.assert_allclose(blocks.e_par, [0.0, 1.0, 0.0])
        np.testing.assert_allclose(blocks.minors, blocks.closed_form, rtol=1e-10)
