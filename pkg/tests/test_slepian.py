import math

import numpy as np
import pytest

from src.exceptions import ArgumentError
from src.slepian import slepian_counts, slepian_dimension_slope, slepian_g
from tests.conftest import default_geometry


def test_g_samples_follow_the_formula(spec8):
    geom = spec8.geom
    seq = slepian_g(spec8, geom, 0.2, 8)
    assert seq.functions.shape == (len(seq.indices), geom.grid_points)
    assert len(seq.indices) + len(seq.excluded) == 9

    for j, g in zip(seq.indices, seq.functions):
        lam = spec8.lambdas[j]
        outer = math.sqrt(0.2 / (1 - lam))
        inner = math.sqrt(0.2 / (lam * (1 - lam)))
        phi = spec8.phis[j]
        outside = ~geom.inside_mask
        assert np.allclose(g[outside], outer * phi[outside], atol=1e-10)
        assert np.allclose(g[geom.inside_mask], (outer + inner) * phi[geom.inside_mask], rtol=1e-12)
        assert seq.prefactors[j] == pytest.approx((outer, inner))


def test_doubling_epsilon_scales_by_sqrt_two(spec8):
    geom = spec8.geom
    base = slepian_g(spec8, geom, 0.2, 8)
    doubled = slepian_g(spec8, geom, 0.4, 8)
    assert doubled.indices == base.indices
    assert np.allclose(doubled.functions, math.sqrt(2.0) * base.functions, rtol=1e-12, atol=0.0)


def test_normalized_sequence_has_unit_norm(spec8):
    geom = spec8.geom
    seq = slepian_g(spec8, geom, 0.2, 8, normalize=True)
    norms = geom.spacing * np.einsum('ij,ij->i', seq.functions, seq.functions)
    assert np.allclose(norms, 1.0)
    assert seq.normalized


def test_epsilon_prime_is_recorded_as_metadata(spec8):
    seq = slepian_g(spec8, spec8.geom, 0.2, 3, epsilon_prime=0.05)
    assert seq.epsilon_prime == 0.05
    assert seq.source is spec8


def test_near_unit_eigenvalues_are_excluded_at_large_r(spec32):
    seq = slepian_g(spec32, spec32.geom, 0.2, 8)
    excluded = [j for j, _ in seq.excluded]
    assert 0 in excluded
    assert all(lam >= 1 - 1e-12 or lam <= 1e-12 for _, lam in seq.excluded)
    assert set(excluded).isdisjoint(seq.indices)


def test_slepian_g_validation(spec8):
    geom = spec8.geom
    with pytest.raises(ArgumentError):
        slepian_g(spec8, geom, 0.0, 3)
    with pytest.raises(ArgumentError):
        slepian_g(spec8, geom, 0.2, spec8.size)
    with pytest.raises(ArgumentError):
        slepian_g(spec8, geom, 0.2, 2.5)
    with pytest.raises(ArgumentError):
        slepian_g(spec8, default_geometry(4), 0.2, 3)


def test_dimension_slope_is_close_to_nyquist_density(spec8, spec16, spec32):
    family = [spec8, spec16, spec32]
    counts = slepian_counts(family, 0.5)
    assert counts == sorted(counts)
    assert slepian_dimension_slope(family, 0.5) == pytest.approx(1.0, abs=0.15)


def test_dimension_slope_validation(spec8, spec16):
    with pytest.raises(ArgumentError):
        slepian_dimension_slope([spec8, spec16], 0.5)
    with pytest.raises(ArgumentError):
        slepian_dimension_slope([spec8, spec8, spec8], 0.5)
    with pytest.raises(ArgumentError):
        slepian_dimension_slope([spec8, spec16, spec16], 1.0)


def test_dimension_slope_is_nearly_independent_of_epsilon(spec8, spec16, spec32):
    family = [spec8, spec16, spec32]
    slopes = [slepian_dimension_slope(family, eps) for eps in (0.05, 0.1, 0.2)]
    assert max(slopes) / min(slopes) <= 1.1
    for slope in slopes:
        assert slope == pytest.approx(1.0, abs=0.15)
