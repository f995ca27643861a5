"""Coefficient routes: analytic quadrature, FFT synthesis, grid multipliers."""

from __future__ import annotations

import math

import numpy as np
import pytest

from conewave import (
    BandlimitedWavelet,
    GaussianBlob,
    GridSignal,
    HyperplaneDelta,
    PointMass,
    ShearletBoxWindow,
    ShearletGroup,
    analytic_field_fft,
    coefficient,
    coefficient_field,
    coefficient_grid,
    synthesize_signal,
)
from conewave.transform import dilated_window_box


def _shearlet_setup():
    group = ShearletGroup(2, [0.5])
    wavelet = BandlimitedWavelet(ShearletBoxWindow(2), group)
    return group, wavelet


def _elements(group, n, seed=0):
    rng = np.random.default_rng(seed)
    a = np.exp(rng.uniform(-1.0, 0.2, size=n))
    b = rng.uniform(-0.4, 0.4, size=n)
    return [group.element(np.array([1.0, ai, bi])) for ai, bi in zip(a, b)]


def test_pointmass_spatial_matches_frequency_route():
    # two independent quadratures of the same integral
    group, wavelet = _shearlet_setup()
    obj = PointMass([0.2, -0.1])
    rng = np.random.default_rng(3)
    for h in _elements(group, 6, seed=11):
        y = rng.uniform(-0.5, 0.5, size=2)
        v_s, e_s = coefficient(obj, wavelet, y, h, method="spatial", order=64)
        v_f, e_f = coefficient(obj, wavelet, y, h, method="frequency", order=64)
        assert abs(v_s - v_f) <= max(1e-8, 3 * (e_s + e_f))


def test_pointmass_rejects_unknown_method():
    group, wavelet = _shearlet_setup()
    with pytest.raises(ValueError, match="method"):
        coefficient(PointMass([0.0, 0.0]), wavelet, np.zeros(2), group.identity(),
                    method="telepathy")


def test_plane_coefficient_invariant_along_the_plane():
    # W(y, h) depends on y only through the signed distance to the plane
    group, wavelet = _shearlet_setup()
    obj = HyperplaneDelta([1.0, 0.0], [0.5, 0.0])
    h = group.element(np.array([1.0, 0.4, 0.15]))
    base = np.array([0.5, 0.0])
    v0, e0 = coefficient(obj, wavelet, base, h)
    for t in (-2.0, -0.3, 1.7):
        v, e = coefficient(obj, wavelet, base + t * np.array([0.0, 1.0]), h)
        assert abs(v - v0) <= 1e-12 + 2 * (e + e0)


def test_plane_coefficient_modulates_off_the_plane():
    group, wavelet = _shearlet_setup()
    obj = HyperplaneDelta([1.0, 0.0], [0.0, 0.0])
    h = group.element(np.array([1.0, 0.5, 0.0]))
    on_plane, _ = coefficient(obj, wavelet, np.zeros(2), h)
    off_plane, _ = coefficient(obj, wavelet, np.array([3.0, 0.0]), h)
    assert abs(on_plane) > 0
    assert abs(off_plane) < abs(on_plane)


def test_gaussian_coefficient_matches_fft_field():
    group, wavelet = _shearlet_setup()
    obj = GaussianBlob([0.0, 0.0], 0.05 * np.eye(2))
    axes = [np.arange(-2.0, 2.0, 0.0625)] * 2
    rng = np.random.default_rng(7)
    for h in _elements(group, 4, seed=23):
        field, err_fft = analytic_field_fft(obj, wavelet, h, axes, pad=16)
        for _ in range(5):
            i, j = rng.integers(16, 48, size=2)
            y = np.array([axes[0][i], axes[1][j]])
            v, err_q = coefficient(obj, wavelet, y, h, order=48)
            denom = max(np.abs(field).max(), 1e-30)
            assert abs(field[i, j] - v) <= max(1e-6 * denom, 3 * (err_fft + err_q))


def test_coefficient_field_matches_scalar_route():
    group, wavelet = _shearlet_setup()
    h = group.element(np.array([1.0, 0.6, -0.2]))
    ys = np.random.default_rng(9).uniform(-1.0, 1.0, size=(12, 2))
    for obj in (
        PointMass([0.1, 0.3]),
        HyperplaneDelta([1.0, 0.0], [0.0, 0.0]),
        GaussianBlob([0.2, -0.1], 0.04 * np.eye(2)),
    ):
        vals, err = coefficient_field(obj, wavelet, h, ys)
        assert vals.shape == (12,)
        for k in (0, 5, 11):
            v, e = coefficient(obj, wavelet, ys[k], h)
            assert abs(vals[k] - v) <= 1e-12 + 2 * (err + e)


def test_coefficient_field_rejects_grid_signals():
    group, wavelet = _shearlet_setup()
    sig = GridSignal(np.zeros((8, 8)), 0.25)
    with pytest.raises(TypeError, match="vectorized"):
        coefficient_field(sig, wavelet, group.identity(), np.zeros((1, 2)))


def test_translation_covariance():
    # shifting the object shifts the coefficient field: W_{u(.-t)}(y) = W_u(y - t)
    group, wavelet = _shearlet_setup()
    h = group.element(np.array([1.0, 0.5, 0.1]))
    shift = np.array([0.35, -0.6])
    y = np.array([0.2, 0.4])
    pairs = [
        (PointMass([0.0, 0.1]), PointMass(shift + [0.0, 0.1])),
        (
            GaussianBlob([0.0, 0.0], 0.05 * np.eye(2)),
            GaussianBlob(shift, 0.05 * np.eye(2)),
        ),
        (
            HyperplaneDelta([1.0, 0.0], [0.0, 0.0]),
            HyperplaneDelta([1.0, 0.0], shift),
        ),
    ]
    for obj, moved in pairs:
        v0, e0 = coefficient(obj, wavelet, y, h)
        v1, e1 = coefficient(moved, wavelet, y + shift, h)
        assert abs(v0 - v1) <= 1e-10 + 2 * (e0 + e1)


def test_dilated_window_box_tracks_inverse_transpose():
    group, wavelet = _shearlet_setup()
    h = group.element(np.array([1.0, 0.25, 0.3]))
    lo, hi = dilated_window_box(wavelet, h)
    rng = np.random.default_rng(1)
    pts = wavelet.window.sample(500, rng) @ h.inv_transpose.T
    assert np.all(pts >= lo - 1e-9) and np.all(pts <= hi + 1e-9)


def test_grid_route_matches_analytic_gaussian():
    group, wavelet = _shearlet_setup()
    obj = GaussianBlob([4.0, 4.0], 0.05 * np.eye(2))
    sig = synthesize_signal(obj, (64, 64), 0.125)
    h = group.element(np.array([1.0, 0.5, 0.1]))
    field = coefficient_grid(sig, wavelet, h)
    assert field.values.shape == (64, 64)
    # compare at interior lattice points; rasterization adds O(spacing^2) bias
    ij = [(32, 32), (30, 36), (36, 28)]
    ys = np.array([[field.origin[0] + i * field.spacing,
                    field.origin[1] + j * field.spacing] for i, j in ij])
    vals, err = coefficient_field(obj, wavelet, h, ys)
    scale = np.abs(field.values).max()
    for (i, j), v in zip(ij, vals):
        assert abs(field.values[i, j] - v) <= 0.02 * scale + 3 * err


def test_coefficient_on_grid_signal_requires_lattice_point():
    group, wavelet = _shearlet_setup()
    sig = synthesize_signal(PointMass([4.0, 4.0]), (64, 64), 0.125)
    h = group.element(np.array([1.0, 0.5, 0.0]))
    v, _err = coefficient(sig, wavelet, np.array([4.0, 4.0]), h)
    assert isinstance(v, complex)
    with pytest.raises(ValueError, match="grid points"):
        coefficient(sig, wavelet, np.array([4.03, 4.0]), h)


def test_nyquist_guard_raises_then_force_warns():
    group, wavelet = _shearlet_setup()
    sig = GridSignal(np.zeros((16, 16)), 1.0)  # nyquist 0.5, window reaches |xi|=3
    h = group.identity()
    with pytest.raises(ValueError, match="Nyquist"):
        coefficient_grid(sig, wavelet, h)
    with pytest.warns(RuntimeWarning, match="Nyquist"):
        coefficient_grid(sig, wavelet, h, force=True)


def test_analytic_fft_field_requires_uniform_axes():
    group, wavelet = _shearlet_setup()
    obj = GaussianBlob([0.0, 0.0], 0.05 * np.eye(2))
    bad = [np.array([0.0, 0.1, 0.3]), np.arange(3) * 0.1]
    with pytest.raises(ValueError, match="uniform"):
        analytic_field_fft(obj, wavelet, group.identity(), bad)


def test_analytic_fft_field_enforces_nyquist():
    group, wavelet = _shearlet_setup()
    obj = GaussianBlob([0.0, 0.0], 0.05 * np.eye(2))
    axes = [np.arange(-2.0, 2.0, 1.0)] * 2  # nyquist 0.5 < window extent
    with pytest.raises(ValueError, match="Nyquist"):
        analytic_field_fft(obj, wavelet, group.identity(), axes)


def test_error_estimates_are_finite_and_nonnegative():
    group, wavelet = _shearlet_setup()
    y = np.array([0.3, -0.2])
    h = group.element(np.array([1.0, 0.7, 0.05]))
    for obj in (
        PointMass([0.0, 0.0]),
        HyperplaneDelta([0.0, 1.0], [0.0, 0.0]),
        GaussianBlob([0.0, 0.0], 0.1 * np.eye(2)),
    ):
        _v, err = coefficient(obj, wavelet, y, h)
        assert math.isfinite(err) and err >= 0.0
