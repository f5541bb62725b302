"""Desktop-scale reference experiments.

These take minutes to hours and are deselected by default; run them with
``pytest -m manual tests/test_reference_runs.py``. MBIKIT_WORKERS may be raised
for speed: results do not depend on it.
"""
import json
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

from mbikit import cli_runner
from mbikit import field_solver as fs
from mbikit.config import InitialDataSpec

pytestmark = pytest.mark.manual

CONFIGS = Path(__file__).resolve().parent.parent / 'configs'


def _simulate(config_name: str, run_dir: Path) -> dict:
    code = cli_runner.main(['simulate', '--config', str(CONFIGS / config_name), '--run-dir', str(run_dir)])
    assert code == cli_runner.EXIT_OK
    return json.loads((run_dir / cli_runner.SUMMARY_FILE).read_text())


def test_small_data_constraints(tmp_path):
    """64³ small-data run keeps div B and div D at roundoff and ℓ² away from 0"""
    summary = _simulate('mbi_small_data.json', tmp_path / 'small')
    assert summary['divB_max'] <= 1e-10 * summary['field_scale']
    assert summary['divD_max'] <= 1e-10 * summary['field_scale']
    assert summary['ell_min'] > 0.9


def test_energy_drift_96(tmp_path):
    config = json.loads((CONFIGS / 'mbi_small_data.json').read_text())
    config['grid'] = {'n': 96, 'h': 0.25}
    config['t_end'] = 4.0
    path = tmp_path / 'drift.json'
    path.write_text(json.dumps(config))
    code = cli_runner.main(['simulate', '--config', str(path), '--run-dir', str(tmp_path / 'drift')])
    assert code == cli_runner.EXIT_OK
    summary = json.loads((tmp_path / 'drift' / cli_runner.SUMMARY_FILE).read_text())
    assert summary['mbi_energy_drift'] < 1e-6
    assert summary['E0_drift'] < 1e-2


@pytest.mark.parametrize('config_name', ['maxwell_reference_128.json', 'mbi_reference_128.json'])
def test_decay_exponents_128(tmp_path, config_name):
    run_dir = tmp_path / 'ref'
    _simulate(config_name, run_dir)
    report = cli_runner.decay_report(run_dir, t_min=2.0)
    for component, fit in report['fits'].items():
        assert fit['within_tolerance'], (component, fit)


def test_maxwell_mbi_pairing(tmp_path):
    """Small data: MBI and Maxwell runs agree to leading order"""
    maxwell = _simulate('maxwell_smoke.json', tmp_path / 'maxwell')
    config = json.loads((CONFIGS / 'maxwell_smoke.json').read_text())
    config['mode'] = 'mbi'
    path = tmp_path / 'mbi.json'
    path.write_text(json.dumps(config))
    assert cli_runner.main(['simulate', '--config', str(path), '--run-dir', str(tmp_path / 'mbi')]) == 0
    mbi = json.loads((tmp_path / 'mbi' / cli_runner.SUMMARY_FILE).read_text())
    assert mbi['E0_final'] == pytest.approx(maxwell['E0_final'], rel=1e-2)


def test_residual_convergence_slope():
    """Residual of a smooth MBI solution falls at least like h²"""
    spec = InitialDataSpec(kind='gaussian_loop', amplitude=0.1, width=1.0)
    hs, residuals = [], []
    for n, h in ((32, 0.5), (64, 0.25), (128, 0.125)):
        grid = fs.Grid(n, h)
        window = [fs.make_initial_data(spec, grid)]
        for _ in range(2):
            window.append(fs.step_rk4(window[-1], 0.4 * h, 'mbi'))
        hs.append(h)
        residuals.append(fs.residual_mbi(window))
    slope = stats.linregress(np.log(hs), np.log(residuals)).slope
    assert slope >= 1.8
