import math

import pytest

from config import Config, RunConfig
from src.exceptions import ConfigError


def test_defaults():
    config = RunConfig.from_dict({})
    assert config == RunConfig()
    assert config.geometry.t_half == 0.5
    assert config.geometry.omega_half == math.pi
    assert config.budget.epsilon == 0.2
    assert config.sigma_is_auto
    assert config.sweep.r_list == (8.0, 16.0, 32.0, 64.0)
    assert config.geometry.points_per_unit == 32
    assert config.geometry.quadrature == 'corrected'
    assert config.output.csv_precision == 12


def test_round_trip_through_dict():
    config = RunConfig.from_dict({
        'geometry': {'t_half': 1, 'margin': 1.5},
        'budget': {'epsilon': 0.3, 'sigma': 0.2},
        'sweep': {'r_list': [2.5, 5], 'max_workers': 3},
        'output': {'emit_plots': False, 'csv_precision': 8},
    })
    assert RunConfig.from_dict(config.to_dict()) == config
    assert config.sweep.r_list == (2.5, 5.0)
    assert config.geometry.t_half == 1.0


def test_round_trip_through_yaml(tmp_path):
    path = tmp_path / 'run.yaml'
    config = RunConfig().with_overrides(epsilon=0.1, sigma=0.05, r_list=[4, 8])
    config.dump(path)
    assert RunConfig.load(path) == config
    # 再序列化一次，文本不变
    again = tmp_path / 'again.yaml'
    RunConfig.load(path).dump(again)
    assert again.read_text(encoding='utf-8') == path.read_text(encoding='utf-8')


def test_all_errors_reported_together():
    with pytest.raises(ConfigError) as info:
        RunConfig.from_dict({
            'budget': {'epsilon': 2, 'sigma': -1},
            'sweep': {'r_list': [8, 4]},
            'output': {'csv_precision': 'many', 'colour': 'blue'},
            'bogus': {},
        })
    paths = [msg.split(':')[0] for msg in info.value.errors]
    for expected in ('budget.epsilon', 'budget.sigma', 'sweep.r_list', 'output.csv_precision',
                     'output.colour', 'bogus'):
        assert expected in paths
    assert 'budget.epsilon' in str(info.value)


def test_cross_field_rules():
    with pytest.raises(ConfigError) as info:
        RunConfig.from_dict({
            'geometry': {'t_half': 2, 'margin': 1},
            'budget': {'epsilon': 0.2, 'sigma': 0.5},
        })
    paths = [msg.split(':')[0] for msg in info.value.errors]
    assert paths == ['geometry.margin', 'budget.sigma']


@pytest.mark.parametrize('data', [
    {'geometry': 'flat'},
    {'sweep': {'r_list': []}},
    {'sweep': {'max_workers': 0}},
    {'slepian': {'normalize': 'yes'}},
    {'verify': {'tolerance_scale': -1}},
    {'geometry': {'points_per_unit': True}},
    {'geometry': {'quadrature': 'simpson'}},
    [1, 2, 3],
])
def test_invalid_values(data):
    with pytest.raises(ConfigError):
        RunConfig.from_dict(data)


def test_scalar_r_list_is_accepted():
    assert RunConfig.from_dict({'sweep': {'r_list': 8}}).sweep.r_list == (8.0,)


def test_overrides_are_revalidated():
    config = RunConfig().with_overrides(epsilon=0.3, sigma='auto', r_list=[16], out='somewhere')
    assert config.budget.epsilon == 0.3
    assert config.sweep.r_list == (16.0,)
    assert config.output_dir() == 'somewhere'
    with pytest.raises(ConfigError):
        RunConfig().with_overrides(epsilon=1.5)


def test_budget_split_auto_and_fixed():
    auto = RunConfig().budget_split()
    assert auto.sigma_sq == pytest.approx(0.02)
    fixed = RunConfig().with_overrides(sigma=0.1).budget_split()
    assert fixed.sigma == 0.1


def test_geometry_for_uses_geometry_block():
    config = RunConfig.from_dict({'geometry': {'t_half': 1.0, 'margin': 2.0, 'points_per_unit': 8}})
    geom = config.geometry_for(4)
    assert geom.r == 4.0 and geom.margin == 2.0
    assert geom.grid_points == math.ceil(8 * 2 * (4 + 2)) + 1


def test_load_reports_unreadable_files(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig.load(tmp_path / 'missing.yaml')
    broken = tmp_path / 'broken.yaml'
    broken.write_text('budget: [epsilon: 0.2\n', encoding='utf-8')
    with pytest.raises(ConfigError):
        RunConfig.load(broken)
    empty = tmp_path / 'empty.yaml'
    empty.write_text('', encoding='utf-8')
    assert RunConfig.load(empty) == RunConfig()


def test_output_dir_precedence(monkeypatch):
    monkeypatch.delenv('PPSF_OUT_DIR', raising=False)
    assert Config.output_dir() == Config.DEFAULT_OUT_DIR
    monkeypatch.setenv('PPSF_OUT_DIR', '/tmp/from-env')
    assert Config.output_dir() == '/tmp/from-env'
    assert Config.output_dir('explicit') == 'explicit'


def test_geometry_for_passes_quadrature():
    assert RunConfig().geometry_for(2).quadrature == 'corrected'
    config = RunConfig.from_dict({'geometry': {'quadrature': 'midpoint'}})
    geom = config.geometry_for(2)
    assert geom.quadrature == 'midpoint'
    assert geom.correction_points == 0
    assert RunConfig.from_dict(config.to_dict()) == config
