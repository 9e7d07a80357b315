import math

import numpy as np
import pytest
from scipy.signal.windows import dpss as scipy_dpss

from src import eigensolver
from src.eigensolver import (
    backend_agreement,
    compute_spectrum,
    count_above,
    dpss_family,
    dpss_oracle,
    dpss_sinc_matrix,
    matched_dpss_parameters,
    plunge_width,
    spectrum_diagnostics,
)
from src.exceptions import ArgumentError, GeometryError, NumericalError
from src.operators import Geometry, build_concentration_matrix, time_concentration
from tests.conftest import default_geometry


def test_spectrum_shape_and_order(spec8):
    geom = spec8.geom
    assert spec8.size == geom.inside_count == 255
    assert spec8.phis.shape == (255, geom.grid_points)
    assert np.all(np.diff(spec8.lambdas) <= 0.0)
    assert np.all(spec8.phis[:, ~geom.inside_mask] == 0.0)
    assert not spec8.truncated


def test_spectrum_invariants(spec8):
    diag = spectrum_diagnostics(spec8)
    assert diag['gram'] <= 1e-10
    assert diag['rayleigh'] <= 1e-9
    assert diag['range'] <= 1e-8
    assert diag['ordered']


def test_trace_identity(spec8):
    assert spec8.trace_error <= 1e-3
    trace = np.trace(build_concentration_matrix(spec8.geom))
    assert spec8.eigen_sum == pytest.approx(trace, abs=1e-9)


def test_trace_identity_at_1024_points():
    geom = Geometry(t_half=0.5, omega_half=math.pi, r=8.0, grid_points=1024)
    spec = compute_spectrum(geom)
    assert spec.trace_error <= 1e-3


def test_sign_convention(spec8):
    inside = spec8.phis[:, spec8.geom.inside_slice]
    mags = np.abs(inside)
    first = np.argmax(mags > 1e-12 * mags.max(axis=1, keepdims=True), axis=1)
    assert np.all(inside[np.arange(spec8.size), first] > 0.0)


def test_clamped_lambdas_stay_in_unit_interval(spec8):
    clamped = spec8.clamped()
    assert clamped.min() >= 0.0 and clamped.max() <= 1.0


def test_eigenfunctions_live_inside_rt(spec8):
    for k in (0, 5, 20):
        assert time_concentration(spec8.geom, spec8.phi(k)) == pytest.approx(1.0)


def test_count_above_half_is_close_to_shannon_number(spec8, spec32):
    assert abs(count_above(spec8, 0.5) - 8) <= 1
    assert abs(count_above(spec32, 0.5) - 32) <= 1


def test_count_above_is_monotone_in_gamma(spec8):
    counts = [count_above(spec8, g) for g in (0.1, 0.3, 0.5, 0.7, 0.9)]
    assert counts == sorted(counts, reverse=True)


@pytest.mark.parametrize('gamma', [0.0, 1.0, -0.5, 2.0])
def test_count_above_rejects_gamma_outside_unit_interval(spec8, gamma):
    with pytest.raises(ArgumentError):
        count_above(spec8, gamma)


def test_truncated_spectrum_matches_leading_pairs(spec8):
    truncated = compute_spectrum(spec8.geom, truncate=True)
    assert truncated.truncated
    assert truncated.size == min(255, math.ceil(4 * 8) + 64)
    assert np.allclose(truncated.lambdas, spec8.lambdas[:truncated.size], atol=1e-10)


def test_plunge_width_grows_slowly(spec8, spec32):
    narrow = plunge_width(spec8, 0.01)
    wide = plunge_width(spec32, 0.01)
    assert 1 <= narrow <= wide
    assert wide <= 32 // 2
    with pytest.raises(ArgumentError):
        plunge_width(spec8, 0.5)


def test_second_moment_defect_is_sublinear(spec8, spec32):
    small = spec8.second_moment_defect
    large = spec32.second_moment_defect
    assert 0.0 < small < large
    assert large / 32 < small / 8


# ==========================================
# DPSS 校验后端
# ==========================================

def test_dpss_family_against_scipy_windows():
    length, w, count = 128, 0.125, 12
    vectors, concentrations = dpss_family(length, w, count)
    windows, ratios = scipy_dpss(length, length * w, Kmax=count, return_ratios=True)

    assert np.allclose(vectors @ vectors.T, np.eye(count), atol=1e-10)
    assert np.allclose(np.abs(vectors), np.abs(windows), atol=1e-8)
    assert np.allclose(concentrations, ratios, atol=1e-9)
    assert np.all(np.diff(concentrations) <= 0.0)


def test_dpss_oracle_returns_kth_sequence():
    vector, lam = dpss_oracle(64, 0.1, 3)
    vectors, concentrations = dpss_family(64, 0.1, 4)
    assert np.array_equal(vector, vectors[3])
    assert lam == concentrations[3]
    sinc = dpss_sinc_matrix(64, 0.1)
    assert vector @ sinc @ vector == pytest.approx(lam, abs=1e-12)


@pytest.mark.parametrize('args', [(0, 0.1, 0), (16, 0.5, 0), (16, 0.0, 0), (16, 0.1, 16), (16, 0.1, -1)])
def test_dpss_oracle_validation(args):
    with pytest.raises(ArgumentError):
        dpss_oracle(*args)


def test_matched_dpss_parameters():
    geom = Geometry(t_half=0.5, omega_half=math.pi, r=32.0, margin=1.0, grid_points=138)
    length, w = matched_dpss_parameters(geom)
    assert length == 128
    assert w == pytest.approx(0.125)

    coarse = Geometry(t_half=2.0, omega_half=math.pi, r=1.0, margin=2.0, grid_points=10)
    with pytest.raises(GeometryError):
        matched_dpss_parameters(coarse)


def test_backend_agreement(spec8, spec16):
    # midpoint 时两个后端解的是同一个矩阵
    for r in (8, 16):
        plain = compute_spectrum(default_geometry(r, quadrature='midpoint'))
        assert backend_agreement(plain) <= 1e-8
    assert backend_agreement(spec8) <= 1e-3
    assert backend_agreement(spec16) <= 1e-3


@pytest.mark.parametrize('r, margin', [(1.0, 0.5), (1.0, None), (8.0, None)])
def test_nystrom_resolution_agreement(r, margin):
    """端点修正后 N = 512 与 1024 的前 10 个特征值相差不超过 1e-6"""
    tops = []
    for n in (512, 1024):
        geom = Geometry(t_half=0.5, omega_half=math.pi, r=r, margin=margin, grid_points=n)
        tops.append(compute_spectrum(geom).lambdas[:10])
    assert np.max(np.abs(tops[1] - tops[0])) <= 1e-6


def test_refinement_differences_shrink(spec8):
    """N = 81, 161, 321 (M = 63, 127, 255): 相邻两级的前 10 个特征值差逐级缩小"""
    tops = [compute_spectrum(default_geometry(8, points_per_unit=p)).lambdas[:10] for p in (8, 16)]
    tops.append(spec8.lambdas[:10])
    assert [len(t) for t in tops] == [10, 10, 10]

    coarse = np.max(np.abs(tops[1] - tops[0]))
    fine = np.max(np.abs(tops[2] - tops[1]))
    assert fine < coarse / 4.0
    assert fine <= 1e-6


def test_midpoint_rule_converges_more_slowly(spec8):
    midpoint = compute_spectrum(default_geometry(8, quadrature='midpoint')).lambdas[:10]
    finer = compute_spectrum(default_geometry(8, points_per_unit=64)).lambdas[:10]
    assert np.max(np.abs(spec8.lambdas[:10] - finer)) < np.max(np.abs(midpoint - finer))


def test_spectrum_is_bitwise_reproducible():
    geom = default_geometry(4)
    first, second = compute_spectrum(geom), compute_spectrum(geom)
    assert np.array_equal(first.lambdas, second.lambdas)
    assert np.array_equal(first.phis, second.phis)


def test_dpss_concentrations_are_nonincreasing():
    for length, w, count in [(128, 0.125, 40), (256, 0.0625, 40), (64, 0.25, 40)]:
        _, concentrations = dpss_family(length, w, count)
        assert np.all(np.diff(concentrations) <= 0.0)


def test_dpss_family_rejects_a_real_rise(monkeypatch):
    real = eigensolver.dpss_sinc_matrix
    monkeypatch.setattr(eigensolver, 'dpss_sinc_matrix', lambda length, w: -real(length, w))
    with pytest.raises(NumericalError):
        dpss_family(64, 0.1, 8)


def test_nystrom_agrees_with_long_dpss_at_same_shannon_number():
    """长度 L、2LW = r|T||Ω|/2π 的 DPSS 与 Nyström 在 1e-3 内一致"""
    spec = compute_spectrum(default_geometry(4, points_per_unit=64))
    length = 512
    w = 4.0 / (2 * length)
    _, concentrations = dpss_family(length, w, 6)
    assert np.allclose(concentrations, spec.lambdas[:6], atol=1e-3)
