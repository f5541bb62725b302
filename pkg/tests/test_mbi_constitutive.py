import numpy as np
import pytest

from mbikit import mbi_constitutive as mc
from mbikit import minkowski_core as mk
from mbikit.errors import DegenerateState


class TestScalars:
    """ℓ, the Lagrangian and admissibility"""

    def test_vacuum(self):
        zero = mk.TwoForm.zeros()
        assert mc.ell(zero) == pytest.approx(1.0)
        assert mc.lagrangian(zero) == pytest.approx(0.0)

    def test_known_value(self):
        """E = (0.6, 0, 0), B = 0: ℓ = 0.8"""
        form = mk.em_recompose(np.array([0.6, 0.0, 0.0]), np.zeros(3))
        assert mc.ell(form) == pytest.approx(0.8)

    def test_degenerate_field_reports_sample(self):
        e = np.array([[0.1, 0.0, 0.0], [1.0, 0.0, 0.0]])
        form = mk.em_recompose(e, np.zeros((2, 3)))
        with pytest.raises(DegenerateState) as info:
            mc.ell(form)
        assert info.value.index == (1,)
        assert info.value.location_report()['value'] == pytest.approx(0.0)

    def test_require_positive_scalar(self):
        mc.require_positive(1.0, 'x')
        with pytest.raises(DegenerateState):
            mc.require_positive(0.0, 'x')


class TestConstitutiveMaps:
    """(E, B) <-> (D, H) and the two routes to ℓ"""

    def test_pure_electric(self):
        e = np.array([0.6, 0.0, 0.0])
        d, h = mc.d_h_of_eb(e, np.zeros(3))
        np.testing.assert_allclose(d, e / 0.8)
        np.testing.assert_allclose(h, 0.0)

    def test_round_trip(self, admissible):
        e, b, _ = admissible
        d, h = mc.d_h_of_eb(e, b)
        e2, h2 = mc.e_h_of_db(d, b)
        np.testing.assert_allclose(e2, e, rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(h2, h, rtol=1e-12, atol=1e-12)

    def test_ell_routes_agree(self, admissible):
        e, b, form = admissible
        d, _ = mc.d_h_of_eb(e, b)
        np.testing.assert_allclose(mc.ell_of_db(b, d), mc.ell(form), rtol=1e-12)

    def test_maxwell_tensor_route(self, admissible):
        e, b, form = admissible
        d1, h1 = mc.d_h_of_eb(e, b)
        d2, h2 = mc.d_h_of_maxwell(form)
        np.testing.assert_allclose(d2, d1, rtol=1e-11, atol=1e-11)
        np.testing.assert_allclose(h2, h1, rtol=1e-11, atol=1e-11)

    def test_state_point(self, admissible):
        e, b, form = admissible
        d, _ = mc.d_h_of_eb(e, b)
        point = mc.StatePoint(b, d)
        np.testing.assert_allclose(point.faraday().components, form.components, atol=1e-12)
        np.testing.assert_allclose(point.ell(), mc.ell(form), rtol=1e-12)

    def test_e_h_accepts_complex_tangent(self, rng):
        """Complex-step derivative of E(D, B) matches a centered difference"""
        d, b, dd = rng.standard_normal((3, 3)) * 0.5
        step = 1e-30
        e_c, _ = mc.e_h_of_db(d + 1j * step * dd, b.astype(complex))
        tangent = e_c.imag / step
        fd = (mc.e_h_of_db(d + 1e-6 * dd, b)[0] - mc.e_h_of_db(d - 1e-6 * dd, b)[0]) / 2e-6
        np.testing.assert_allclose(tangent, fd, rtol=1e-6, atol=1e-9)


class TestMaxwellTensor:
    def test_weak_field_limit(self, rng):
        """M(λF) - ⋆(λF) is cubic in λ"""
        form = mk.TwoForm(rng.standard_normal(6))
        lambdas = np.array([1e-3, 1e-2, 1e-1])
        gaps = [np.abs((mc.maxwell_tensor(form * lam) - mk.hodge_dual(form * lam)).components).max() for lam in lambdas]
        slope = np.polyfit(np.log(lambdas), np.log(gaps), 1)[0]
        assert slope >= 2.9

    def test_dual_of_maxwell_tensor(self, admissible):
        _, _, form = admissible
        np.testing.assert_allclose(
            mk.hodge_dual(mc.maxwell_tensor(form)).components, mc.maxwell_dual(form).components, atol=1e-11
        )


class TestHTensors:
    """Symmetries, the Maxwell/nonlinear split and the closed-form contraction"""

    def test_symmetries(self, admissible):
        _, _, form = admissible
        sub = form[:20]
        big, tri = mc.big_h_tensor(sub)
        for tensor in (big, tri, mc.h_tensor(sub)):
            scale = 1.0 + np.abs(tensor.components).max()
            assert tensor.antisymmetry_defect() <= 1e-12 * scale
            assert tensor.pair_symmetry_defect() <= 1e-12 * scale

    def test_split(self, admissible):
        _, _, form = admissible
        big, tri = mc.big_h_tensor(form[:20])
        np.testing.assert_allclose(big.components, (mc.MAXWELL_PART + tri).components, atol=1e-11)

    def test_vacuum_is_maxwell_part(self):
        big, tri = mc.big_h_tensor(mk.TwoForm.zeros())
        np.testing.assert_allclose(big.components, mc.MAXWELL_PART.components)
        np.testing.assert_allclose(tri.components, 0.0)

    def test_closed_form_contraction(self, admissible, rng):
        _, _, form = admissible
        var = mk.TwoForm(rng.standard_normal((20, 6)))
        big, _ = mc.big_h_tensor(form[:20])
        np.testing.assert_allclose(mc.contract_big_h(form[:20], var).upper, big.contract(var), atol=1e-10)

    def test_maxwell_part_contracts_to_identity(self, rng):
        var = mk.TwoForm(rng.standard_normal(6))
        np.testing.assert_allclose(mc.MAXWELL_PART.contract(var), var.upper)


def test_bi_inverse_metric_vacuum():
    np.testing.assert_allclose(mc.bi_inverse_metric(mk.TwoForm.zeros()), mk.INVERSE_METRIC)
