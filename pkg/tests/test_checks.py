import pytest

from config import RunConfig
from src.checks import CHECK_MAP, CheckResult, Measurement, load_checks, run_checks
from src.checks.mixing import LambdaRowNormsCheck, MixingOrthogonalityCheck


@pytest.fixture(scope='module')
def config():
    return RunConfig().with_overrides(r_list=[4])


def test_registry_order():
    assert list(CHECK_MAP) == [
        'mixing_orthogonality',
        'lambda_row_norms',
        'spectrum_gram',
        'trace_identity',
        'pseudoprolate_gram',
        'backend_agreement',
    ]


def test_load_checks_shares_one_context(config):
    checks = load_checks(config)
    assert [c.name for c in checks] == list(CHECK_MAP)
    assert len({id(c.context) for c in checks}) == 1
    assert checks[0].context.geom.r == 4.0


def test_load_checks_skips_unknown_names(config):
    checks = load_checks(config, names=['trace_identity', 'no_such_check'])
    assert [c.name for c in checks] == ['trace_identity']


def test_spectral_checks_pass(config):
    names = ['spectrum_gram', 'trace_identity', 'pseudoprolate_gram', 'backend_agreement']
    results = run_checks(load_checks(config, names=names))
    assert all(res.passed for res in results), [res.first_failure for res in results]


def test_scaled_tolerance_fails_with_named_measurement():
    class SmallLadder(MixingOrthogonalityCheck):
        max_order = 16

    check = SmallLadder(None, tolerance_scale=0.0)
    result = check.run()
    assert not result.passed
    assert result.first_failure.startswith("max|X'ᵀX' - I|")


def test_small_row_norm_ladder_passes():
    class SmallRowNorms(LambdaRowNormsCheck):
        max_order = 32

    assert SmallRowNorms(None).run().passed


def test_check_result_with_error_fails():
    result = CheckResult('broken', error='boom')
    assert not result.passed
    assert result.first_failure == 'boom'
    assert CheckResult('empty').passed
    assert not Measurement('nan', float('nan'), 1.0).passed
