"""Band-limited wavelet profiles, normalization, and spatial evaluation."""

from __future__ import annotations

import math

import numpy as np
import pytest

from conewave import (
    AnnulusSectorWindow,
    BandlimitedWavelet,
    BoxWindow,
    DiagonalBand,
    DiagonalGroup,
    ShearletBoxWindow,
    ShearletGroup,
    SimilitudeGroup,
    SphericalCap,
)
from conewave.wavelets import bump

NORMALIZE_TOL = 1e-3
BUMP_HALF = math.exp(-1.0 / 3.0)  # exp(1 - 1/(1 - 0.25))


def _pairs():
    return [
        (ShearletGroup(2, [0.5]), ShearletBoxWindow(2)),
        (SimilitudeGroup(2), AnnulusSectorWindow(1.0, 2.0, SphericalCap([1.0, 0.0], 2.0))),
        (DiagonalGroup(2), BoxWindow([1.0, 1.0], [2.0, 2.0])),
    ]


def test_bump_profile_values():
    assert bump(0.0) == 1.0
    assert bump(1.0) == 0.0
    assert bump(-1.0) == 0.0
    assert bump(2.0) == 0.0
    assert np.isclose(bump(0.5), BUMP_HALF, rtol=1e-12)
    ts = np.linspace(-1.2, 1.2, 401)
    vals = np.array([bump(t) for t in ts])
    assert np.all((vals >= 0.0) & (vals <= 1.0))
    assert np.sum(vals == 1.0) == 1  # peaks only at t = 0


def test_bump_vanishes_smoothly_at_the_edge():
    # flat contact: values collapse fast approaching |t| = 1
    assert bump(0.999) < 1e-200
    assert bump(0.99) < 1e-21


def test_hat_supported_exactly_in_window():
    rng = np.random.default_rng(5)
    for group, window in _pairs():
        wav = BandlimitedWavelet(window, group)
        inside = window.sample(200, rng)
        # strictly nonnegative inside; the bump underflows only at the rim
        vals = wav.hat(inside)
        assert np.all(vals >= 0.0)
        assert np.count_nonzero(vals) > 150
        lo, hi = window.bounding_box()
        span = hi - lo
        outside = rng.uniform(lo - 2 * span, hi + 2 * span, size=(3000, group.dim))
        outside = outside[~window.contains(outside, strict=False)]
        assert np.all(wav.hat(outside) == 0.0)


def test_dilated_hat_combines_dual_action_phase_and_jacobian():
    rng = np.random.default_rng(7)
    group, window = _pairs()[0]
    wav = BandlimitedWavelet(window, group)
    h = group.element((1, 0.7, (0.3,)))
    x = np.array([0.4, -1.3])
    xi = rng.uniform(-4, 4, size=(50, 2))
    expect = (
        math.sqrt(abs(h.det))
        * np.exp(-2j * math.pi * (xi @ x))
        * wav.hat(xi @ h.matrix)
    )
    assert np.allclose(wav.dilated_hat(x, h, xi), expect)
    at_origin = wav.dilated_hat(np.zeros(2), h, xi)
    assert np.allclose(at_origin.imag, 0.0)


def test_normalized_admissibility_at_base_point():
    for group, window in _pairs():
        rng = np.random.default_rng(11)
        wav = BandlimitedWavelet(window, group).normalized(rng=rng)
        val, err = wav.admissibility_integral(group.orbit().base_point, rng=np.random.default_rng(12))
        assert abs(val - 1.0) <= NORMALIZE_TOL + 3 * err


def test_normalized_admissibility_constant_on_orbit():
    group, window = _pairs()[0]
    wav = BandlimitedWavelet(window, group).normalized(rng=np.random.default_rng(13))
    vals = []
    for k, xi in enumerate(([3.0, 0.4], [-0.5, 1.0], [0.2, -2.0])):
        val, err = wav.admissibility_integral(np.array(xi), rng=np.random.default_rng(20 + k))
        vals.append(val)
        assert err < 0.02
    assert np.ptp(vals) / np.mean(vals) < 0.02


def test_spatial_eval_matches_batch():
    group, window = _pairs()[0]
    wav = BandlimitedWavelet(window, group)
    zs = np.random.default_rng(17).uniform(-2, 2, size=(10, 2))
    evals = [wav.spatial_eval(z) for z in zs]
    single = np.array([v for v, _ in evals])
    worst_err = max(e for _, e in evals)
    batch = wav.spatial_batch(zs)
    # default order: discrepancy bounded by the reported quadrature error
    assert np.abs(single - batch).max() <= 2 * worst_err
    # converged order: identical node sets, agreement to rounding
    fine = np.array([wav.spatial_eval(z, order=96)[0] for z in zs])
    assert np.abs(fine - wav.spatial_batch(zs, order=96)).max() < 1e-12


def test_spatial_eval_quadrature_converges():
    group, window = _pairs()[1]
    wav = BandlimitedWavelet(window, group)
    z = np.array([0.3, -1.1])
    coarse, err_c = wav.spatial_eval(z, order=32)
    fine, _err_f = wav.spatial_eval(z, order=96)
    assert abs(coarse - fine) < max(1e-8, 2 * err_c)


def test_spatial_value_at_origin_is_window_mass():
    # psi(0) = integral of the frequency profile
    group, window = _pairs()[2]
    wav = BandlimitedWavelet(window, group)
    lo, hi = window.bounding_box()
    g = (np.arange(256) + 0.5) / 256.0
    xs = lo[0] + (hi[0] - lo[0]) * g
    ys = lo[1] + (hi[1] - lo[1]) * g
    grid = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1).reshape(-1, 2)
    midpoint = wav.hat(grid).sum() * (hi[0] - lo[0]) * (hi[1] - lo[1]) / grid.shape[0]
    val, _err = wav.spatial_eval(np.zeros(2), order=64)
    assert abs(val.real - midpoint) < 1e-4 * abs(midpoint)
    assert abs(val.imag) < 1e-10


def test_far_bound_dominates_samples():
    rng = np.random.default_rng(23)
    for group, window in _pairs():
        wav = BandlimitedWavelet(window, group)
        for r in (5.0, 20.0, 80.0):
            z = rng.standard_normal(2)
            z *= r / np.linalg.norm(z)
            val, err = wav.spatial_eval(z, order=48)
            bound = wav.far_bound(z[None, :])[0]
            assert abs(val) <= bound + err + 1e-12


def test_far_bound_decays_rapidly():
    group, window = _pairs()[0]
    wav = BandlimitedWavelet(window, group)
    b10 = wav.far_bound(np.array([[10.0, 0.0]]))[0]
    b100 = wav.far_bound(np.array([[100.0, 0.0]]))[0]
    b1000 = wav.far_bound(np.array([[1000.0, 0.0]]))[0]
    assert b100 < b10 * 1e-3
    assert b1000 < b10 * 1e-7


def test_amplitude_scales_linearly():
    group, window = _pairs()[0]
    base = BandlimitedWavelet(window, group)
    double = BandlimitedWavelet(window, group, amplitude=2.0)
    xi = np.array([[1.4, 0.2]])
    assert np.isclose(double.hat(xi)[0], 2.0 * base.hat(xi)[0])
    val_b, _ = base.admissibility_integral(group.orbit().base_point, rng=np.random.default_rng(1))
    val_d, _ = double.admissibility_integral(group.orbit().base_point, rng=np.random.default_rng(1))
    assert np.isclose(val_d, 4.0 * val_b, rtol=1e-9)


def test_window_group_pairing_validated():
    # a window crossing the orbit complement is rejected at pairing time
    with pytest.raises(ValueError):
        BandlimitedWavelet(BoxWindow([-1.0, 1.0], [1.0, 2.0]), ShearletGroup(2, [0.5]))
