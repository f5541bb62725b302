import logging

import numpy as np
import pytest

from mbikit import diagnostics as dg
from mbikit import field_solver as fs
from mbikit.config import InitialDataSpec
from mbikit.errors import InsufficientData, InsufficientHistory
from mbikit.minkowski_core import TwoForm, hodge_dual
from mbikit.stress_currents import generator
from tests.fixtures.field_fixtures import constant_state, plane_wave_state, synthetic_decay_series


@pytest.fixture
def loop_state(small_grid):
    return fs.make_initial_data(InitialDataSpec(kind='gaussian_loop', amplitude=0.05), small_grid)


class TestWeightedNorms:
    """H^N_δ and C^N_δ on the grid"""

    def test_constant_unweighted(self, small_grid):
        ones = np.ones(small_grid.shape)
        assert dg.weighted_sobolev_norm(ones, small_grid, 2, 0.0) == pytest.approx(small_grid.extent ** 1.5)
        assert dg.weighted_c_norm(ones, small_grid, 3, 0.0) == pytest.approx(1.0)

    def test_weight_grows_norm(self, small_grid, rng):
        u = rng.standard_normal((3,) + small_grid.shape)
        assert dg.weighted_sobolev_norm(u, small_grid, 0, 1.0) > dg.weighted_sobolev_norm(u, small_grid, 0, 0.0)

    def test_derivatives_add(self, small_grid, rng):
        u = rng.standard_normal(small_grid.shape)
        assert dg.weighted_sobolev_norm(u, small_grid, 1, 0.0) > dg.weighted_sobolev_norm(u, small_grid, 0, 0.0)

    def test_order_limit(self, small_grid):
        with pytest.raises(ValueError, match='derivative order'):
            dg.weighted_sobolev_norm(np.zeros(small_grid.shape), small_grid, 4, 0.0)
        with pytest.raises(ValueError, match='derivative order'):
            dg.weighted_c_norm(np.zeros(small_grid.shape), small_grid, -1, 0.0)

    def test_embedding_ratio_of_zero(self, small_grid):
        assert dg.embedding_ratio(np.zeros(small_grid.shape), small_grid, 0.5, 0.0) == 0.0


class TestFaradaySlice:
    def test_from_snapshots_needs_equal_spacing(self, small_grid):
        zero = constant_state(small_grid, np.zeros(3), np.zeros(3))
        later = [fs.FieldState(zero.b, zero.d, t, small_grid) for t in (0.1, 0.3)]
        with pytest.raises(InsufficientHistory):
            dg.FaradaySlice.from_snapshots(zero, *later)

    def test_from_snapshots_rate_matches_solver(self, plane_wave):
        dt = 1e-3
        ahead = fs.step_rk4(plane_wave, dt, 'maxwell')
        behind = fs.step_rk4(plane_wave, -dt, 'maxwell')
        centered = dg.FaradaySlice.from_snapshots(behind, plane_wave, ahead, 'maxwell')
        exact = dg.FaradaySlice.from_state(plane_wave, 'maxwell')
        np.testing.assert_allclose(centered.rate.components, exact.rate.components, atol=1e-8)

    def test_gradient_needs_rate(self, loop_state):
        field = dg.FaradaySlice(loop_state.faraday(), 0.0, loop_state.grid)
        with pytest.raises(InsufficientHistory):
            field.gradient()
        with pytest.raises(InsufficientHistory, match='T0'):
            dg.lie_derivative_field(field, generator('T0'))

    def test_spatial_generators_do_not_need_rate(self, loop_state):
        field = dg.FaradaySlice(loop_state.faraday(), 0.0, loop_state.grid)
        lie = dg.lie_derivative_field(field, generator('T1'))
        np.testing.assert_allclose(lie.components, field.spatial_gradient()[0].components)


class TestLieDerivatives:
    def test_static_field_along_time(self, small_grid):
        state = constant_state(small_grid, np.array([0.0, 0.0, 0.3]), np.array([0.1, 0.0, 0.0]))
        field = dg.FaradaySlice.from_state(state, 'mbi')
        np.testing.assert_allclose(dg.lie_derivative_field(field, generator('T0')).components, 0.0, atol=1e-14)

    def test_dual_commutes_on_grid(self, loop_state):
        field = dg.FaradaySlice.from_state(loop_state, 'maxwell')
        z = generator('O12')
        dual_first = dg.lie_derivative_field(field.dual(), z)
        np.testing.assert_allclose(
            dual_first.components, hodge_dual(dg.lie_derivative_field(field, z)).components, atol=1e-13
        )


class TestEnergies:
    def test_zero_field(self, small_grid):
        field = dg.FaradaySlice.from_state(constant_state(small_grid, np.zeros(3), np.zeros(3)))
        assert dg.energy_EN(field, 0) == 0.0
        assert dg.energy_EN(field, 1) == 0.0
        assert dg.knorm_integral(field) == 0.0

    def test_maxwell_energy_is_half_knorm(self, loop_state):
        """In maxwell mode J⁰ = Knorm²/4 pointwise, so 𝓔₀ = |||F|||₀ / 2"""
        field = dg.FaradaySlice.from_state(loop_state, 'maxwell')
        e0 = dg.energy_EN(field, 0, 'maxwell')
        assert e0 > 0
        assert e0 == pytest.approx(0.5 * dg.knorm_integral(field), rel=1e-10)

    def test_knorm_matches_interior_products(self, loop_state):
        field = dg.FaradaySlice.from_state(loop_state, 'mbi')
        assert dg.ebpq_integral(field) == pytest.approx(dg.knorm_integral(field) ** 2, rel=1e-10)

    def test_first_order_energy_dominates(self, loop_state):
        field = dg.FaradaySlice.from_state(loop_state, 'mbi')
        assert dg.energy_EN(field, 1) > dg.energy_EN(field, 0)

    def test_lie_order_limit(self, loop_state):
        with pytest.raises(ValueError, match='Lie order'):
            dg.energy_EN(dg.FaradaySlice.from_state(loop_state), 2)

    def test_mbi_energy_weak_field(self, loop_state):
        maxwell = dg.mbi_energy(loop_state, 'maxwell')
        expected = 0.5 * (np.sum(loop_state.b ** 2) + np.sum(loop_state.d ** 2)) * loop_state.grid.cell_volume
        assert maxwell == pytest.approx(expected)
        assert dg.mbi_energy(loop_state, 'mbi') == pytest.approx(maxwell, rel=1e-2)


class TestShellProfiles:
    def test_shell_radii_truncation(self, small_grid, caplog):
        """Δr = 2h; shells stop 2h inside the box half-width"""
        with caplog.at_level(logging.WARNING):
            radii = dg.shell_radii(small_grid, 4)
        np.testing.assert_allclose(radii, [1.0, 2.0, 3.0])
        assert 'Only 3 of 4 shells' in caplog.text

    def test_fibonacci_sphere_is_unit(self):
        directions = dg.fibonacci_sphere(64)
        np.testing.assert_allclose(np.linalg.norm(directions, axis=1), 1.0)

    def test_constant_electric_field(self, small_grid):
        """Max of |ρ| over the shell is |E| (up to the lattice), σ vanishes"""
        state = constant_state(small_grid, np.zeros(3), np.array([0.0, 0.0, 0.2]))
        profile = dg.null_profiles(state.faraday('maxwell'), small_grid, 0.5, np.array([1.0, 2.0]))
        np.testing.assert_allclose(profile.rho, 0.2, rtol=1e-2)
        np.testing.assert_allclose(profile.alpha, 0.2, rtol=1e-2)
        np.testing.assert_allclose(profile.ualpha, 0.2, rtol=1e-2)
        np.testing.assert_allclose(profile.sigma, 0.0, atol=1e-15)

    def test_unknown_component(self, small_grid):
        profile = dg.null_profiles(TwoForm.zeros(small_grid.shape), small_grid, 0.0, np.array([1.0]))
        with pytest.raises(ValueError):
            profile.component('beta')

    def test_interpolation_reproduces_nodes(self, loop_state):
        form = loop_state.faraday()
        index = (3, 9, 12)
        sampled = dg.interpolate_form(form, loop_state.grid, np.array([loop_state.grid.point_at(index)]))
        np.testing.assert_allclose(sampled.components[0], form.components[index], atol=1e-14)


class TestDiagnosticSeries:
    def test_csv_round_trip(self, decay_series, tmp_path):
        path = decay_series.to_csv(tmp_path / 'series.csv')
        again = dg.DiagnosticSeries.from_csv(path)
        np.testing.assert_array_equal(again.radii, decay_series.radii)
        np.testing.assert_array_equal(again.times, decay_series.times)
        np.testing.assert_array_equal(again.profile('alpha'), decay_series.profile('alpha'))

    def test_rejects_non_increasing_time(self):
        record = {name: 0.0 for name in dg.SERIES_COLUMNS}
        record['time'] = 1.0
        series = dg.DiagnosticSeries()
        series.append(record)
        with pytest.raises(ValueError, match='increase'):
            series.append(record)

    def test_rejects_non_finite(self):
        record = {name: 0.0 for name in dg.SERIES_COLUMNS}
        record['E0'] = float('nan')
        with pytest.raises(ValueError, match='non-finite'):
            dg.DiagnosticSeries().append(record)

    def test_columns(self):
        series = dg.DiagnosticSeries([1.0, 2.5])
        assert series.columns[:7] == list(dg.SERIES_COLUMNS)
        assert 'ualpha_r1' in series.columns and 'sigma_r2.5' in series.columns


class TestDecayFit:
    """Exponent fits on a synthetic power-law series"""

    @pytest.mark.parametrize('tracking', ['wavezone', 'fixed_q'])
    def test_recovers_exponents(self, decay_series, tracking):
        for component, target in dg.TARGET_EXPONENTS.items():
            fit = dg.decay_fit(decay_series, component, tracking)
            assert fit.exponent == pytest.approx(target, abs=1e-9)
            assert fit.deviation() == pytest.approx(0.0, abs=1e-9)
            assert fit.samples == 24

    def test_default_tracking(self, decay_series):
        assert dg.decay_fit(decay_series, 'ualpha').tracking == 'fixed_q'
        assert dg.decay_fit(decay_series, 'alpha').tracking == 'wavezone'

    def test_shifted_retarded_time(self):
        series = synthetic_decay_series({'ualpha': -1.5, 'alpha': -2.5, 'rho': -2.0, 'sigma': -2.0}, q=1.0)
        assert dg.decay_fit(series, 'ualpha', q=1.0).exponent == pytest.approx(-1.5, abs=1e-9)

    def test_t_min_drops_early_records(self, decay_series):
        fit = dg.decay_fit(decay_series, 'rho', t_min=5.0)
        assert fit.samples == int(np.sum(decay_series.times >= 5.0))

    def test_too_few_samples(self):
        series = synthetic_decay_series(dg.TARGET_EXPONENTS, shells=4)
        with pytest.raises(InsufficientData):
            dg.decay_fit(series, 'alpha')

    def test_unknown_component_and_tracking(self, decay_series):
        with pytest.raises(ValueError):
            dg.decay_fit(decay_series, 'beta')
        with pytest.raises(ValueError, match='tracking'):
            dg.decay_fit(decay_series, 'rho', 'sideways')


class TestRecorder:
    def test_records_every_observed_step(self, small_grid):
        recorder = dg.DiagnosticRecorder('maxwell', shells=2)
        config = fs.SolverConfig('maxwell', 4, 0.4, t_end=0.6, cadence=1)
        fs.Evolution(plane_wave_state(small_grid), config).run(recorder)
        series = recorder.series
        assert len(series) == 4
        np.testing.assert_allclose(series.times, [0.0, 0.2, 0.4, 0.6])
        np.testing.assert_allclose(series.radii, [1.0, 2.0])
        assert series.column('divB_max').max() < 1e-12
        np.testing.assert_allclose(series.column('ell_min'), 1.0, rtol=1e-3)
        assert np.all(series.column('E1') >= series.column('E0'))
