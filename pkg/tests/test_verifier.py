"""Structural audits: envelopes, integrability, cone approximation, stays."""

from __future__ import annotations

import math

import numpy as np
import pytest

from conewave import (
    AnnulusSectorWindow,
    BallWindow,
    BoxWindow,
    DiagonalBand,
    DiagonalGroup,
    STRONG_BLOCKED,
    STRONG_PERMITTED,
    ShearletAxisBand,
    ShearletBoxWindow,
    ShearletGroup,
    SimilitudeGroup,
    SphericalCap,
    anisotropy_gate,
    check_cone_approx,
    check_geometric_equivalence,
    envelope_violations,
    fit_alpha1,
    haar_invariance_residual,
    k_i_contains,
    k_o_contains,
    norm_power_integral,
    stay_measure,
)
from conewave.geometry import ConeSpec

E1 = np.array([1.0, 0.0])
CAP_FULL = SphericalCap([1.0, 0.0], 2.0)


def test_anisotropy_gate_truth_table():
    assert anisotropy_gate(SimilitudeGroup(2)) == STRONG_BLOCKED
    assert anisotropy_gate(DiagonalGroup(2)) == STRONG_BLOCKED
    assert anisotropy_gate(ShearletGroup(2, [0.5])) == STRONG_PERMITTED
    assert anisotropy_gate(ShearletGroup(2, [1.0])) == STRONG_BLOCKED


def test_strong_shearlet_witness_is_the_dyadic_k3():
    group = ShearletGroup(2, [0.5])
    verdict = check_cone_approx(group, "strong", ShearletAxisBand(2, 0.3),
                                10.0, E1, budget=192, rng=2026)
    assert verdict.status == "holds"
    w = verdict.witness
    assert w.n is None
    assert w.eps_prime == pytest.approx(0.3 / 8)
    assert w.r_prime == pytest.approx(80.0)
    assert w.samples_checked > 0
    assert any("closed-form" in n for n in verdict.notes)


def test_weak_similitude_witness_satisfies_closed_form():
    group = SimilitudeGroup(2)
    verdict = check_cone_approx(group, "weak", SphericalCap(E1, 0.3),
                                10.0, E1, budget=192, rng=2026)
    assert verdict.status == "holds"
    w = verdict.witness
    assert w.n == 32
    assert w.eps_prime == pytest.approx(0.3 / 32)
    assert w.r_prime == pytest.approx(320.0)
    eps, r = 0.3, 10.0
    assert w.eps_prime < eps / 2
    assert 4.0 / (w.n - 1) < eps / 2
    assert (w.n - 1) * w.r_prime / (w.n + 1) > r


def test_weak_diagonal_witness_satisfies_closed_form():
    group = DiagonalGroup(2)
    verdict = check_cone_approx(group, "weak", DiagonalBand(2, 0.3),
                                10.0, np.array([1.0, 1.0]), budget=192, rng=2026)
    assert verdict.status == "holds"
    w = verdict.witness
    assert w.n == 64
    assert w.eps_prime == pytest.approx(0.3 / 64)
    assert w.r_prime == pytest.approx(640.0)
    ratio = (w.n + 1.0) / w.n
    assert (1 + w.eps_prime) ** 2 * ratio**8 < 1 + 0.3
    assert w.r_prime / ratio**4 > 10.0


@pytest.mark.parametrize(
    "group,patch,window",
    [
        (SimilitudeGroup(2), SphericalCap(E1, 0.3),
         AnnulusSectorWindow(1.0, 2.0, CAP_FULL)),
        (DiagonalGroup(2), DiagonalBand(2, 0.3),
         BoxWindow([1.0, 1.0], [2.0, 2.0])),
    ],
)
def test_scalar_dilations_defeat_strong_mode(group, patch, window):
    verdict = check_cone_approx(group, "strong", patch, 10.0,
                                patch_center(patch), budget=64, rng=1,
                                v0=window)
    assert verdict.status == "fails"
    ce = verdict.counterexample
    assert ce.alpha is not None
    assert ce.alpha < 1.0 / (1.0 + ce.ko_cone.R)
    assert ce.failed_test == "ki"
    # the counterexample certificate replays
    assert k_o_contains(ce.element, ce.window, ce.ko_cone).is_true()
    assert k_i_contains(ce.element, ce.window, ce.ki_cone).is_false()


def patch_center(patch):
    if isinstance(patch, SphericalCap):
        return np.asarray(patch.center, dtype=float)
    return np.ones(patch.dim) / math.sqrt(patch.dim)


def test_cone_approx_input_validation():
    group = ShearletGroup(2, [0.5])
    band = ShearletAxisBand(2, 0.3)
    with pytest.raises(ValueError, match="mode"):
        check_cone_approx(group, "medium", band, 10.0, E1, budget=16)
    with pytest.raises(ValueError, match="budget"):
        check_cone_approx(group, "strong", band, 10.0, E1, budget=0)
    with pytest.raises(ValueError, match="orbit"):
        check_cone_approx(group, "strong", band, 10.0, [0.0, 1.0], budget=16)
    with pytest.raises(ValueError, match="v_family"):
        check_cone_approx(group, "weak", band, 10.0, E1, budget=16)


def test_fit_alpha1_similitude_is_exactly_one():
    # |h^{-1}| = 1/|h| exactly, so the fitted exponent is 1 to rounding
    group = SimilitudeGroup(2)
    window = AnnulusSectorWindow(1.0, 2.0, CAP_FULL)
    fit = fit_alpha1(group, SphericalCap(E1, 0.3), window, 10.0, 500, rng=7)
    assert abs(fit.alpha1 - 1.0) < 1e-6
    assert fit.envelope_c == pytest.approx(1.0)
    viol, n = envelope_violations(fit, group, 500, rng=8)
    assert viol == 0 and n == 500


def test_fit_alpha1_shearlet_inner_set_near_two():
    group = ShearletGroup(2, [0.5])
    fit = fit_alpha1(group, ShearletAxisBand(2, 0.3), ShearletBoxWindow(2),
                     10.0, 2000, use_ki=True, rng=11)
    assert fit.used_ki
    assert abs(fit.alpha1 - 2.0) < 0.2
    viol, _n = envelope_violations(fit, group, 2000, rng=12)
    assert viol == 0


def test_fit_alpha1_attaches_integral_when_requested():
    group = SimilitudeGroup(2)
    window = AnnulusSectorWindow(1.0, 2.0, CAP_FULL)
    fit = fit_alpha1(group, SphericalCap(E1, 0.3), window, 10.0, 200,
                     rng=3, alpha2=2.0, integral_budget=512)
    assert fit.integral is not None
    assert fit.integral.value > 0
    assert fit.integral.stable
    with pytest.raises(ValueError, match="three samples"):
        fit_alpha1(group, SphericalCap(E1, 0.3), window, 10.0, 2, rng=3)


def test_norm_power_integral_validation():
    group = SimilitudeGroup(2)
    window = AnnulusSectorWindow(1.0, 2.0, CAP_FULL)
    with pytest.raises(ValueError, match="alpha2"):
        norm_power_integral(group, SphericalCap(E1, 0.3), window, 10.0, -1.0)
    with pytest.raises(ValueError, match="budget"):
        norm_power_integral(group, SphericalCap(E1, 0.3), window, 10.0, 2.0,
                            budget=8)


def test_stay_measure_full_annulus_is_log_two():
    # indicator is identically 1 over the exact chart box: the estimate is exact
    group = SimilitudeGroup(2)
    window = AnnulusSectorWindow(1.0, 2.0, CAP_FULL)
    est = stay_measure(group, E1, window, budget=512, rng=5)
    assert est.value == pytest.approx(math.log(2.0), abs=1e-12)
    assert est.stderr == pytest.approx(0.0, abs=1e-15)


def test_stay_measure_is_orbit_invariant():
    group = SimilitudeGroup(2)
    window = AnnulusSectorWindow(1.0, 2.0, SphericalCap([1.0, 0.0], 0.5))
    a = stay_measure(group, E1, window, budget=8192, rng=6)
    xi2 = group.element((1.7, 0.9)).matrix.T @ E1
    b = stay_measure(group, xi2, window, budget=8192, rng=7)
    comb = math.hypot(a.stderr, b.stderr)
    assert abs(a.value - b.value) <= 3.0 * comb


def test_stay_measure_shearlet_runs_and_rejects_bad_inputs():
    group = ShearletGroup(2, [0.5])
    est = stay_measure(group, E1, ShearletBoxWindow(2), budget=4096, rng=9)
    assert est.value > 0
    with pytest.raises(ValueError, match="orbit"):
        stay_measure(group, np.array([0.0, 1.0]), ShearletBoxWindow(2))
    with pytest.raises(RuntimeError, match="unbounded"):
        stay_measure(group, E1, BoxWindow([-1.0, -1.0], [2.0, 2.0]))


def test_stay_measure_unbounded_cases_raise():
    with pytest.raises(RuntimeError, match="origin"):
        stay_measure(SimilitudeGroup(2), E1, BallWindow([0.5, 0.0], 0.5))
    with pytest.raises(RuntimeError, match="unbounded"):
        stay_measure(DiagonalGroup(2), np.array([1.0, 1.0]),
                     BoxWindow([-1.0, 1.0], [2.0, 2.0]))


@pytest.mark.parametrize(
    "group,g_params",
    [
        (SimilitudeGroup(2), (1.5, 0.4)),
        (DiagonalGroup(2), np.array([1.2, 0.8])),
        (ShearletGroup(2, [0.5]), np.array([1.0, 1.3, 0.2])),
    ],
)
def test_haar_invariance_residual_small(group, g_params):
    g = group.element(g_params)
    check = haar_invariance_residual(group, g, budget=8192, rng=2026)
    assert check.sigmas <= 4.0
    assert check.direct > 0 and check.shifted > 0


def test_geometric_equivalence_clean_run():
    group = ShearletGroup(2, [0.5])
    report = check_geometric_equivalence(
        group, ShearletAxisBand(2, 0.3), ShearletAxisBand(2, 0.0375),
        ShearletBoxWindow(2), 10.0, 80.0, budget=100, rng=13)
    assert report.k_failures == 0
    assert report.c_failures == 0
    assert report.consistent
    assert report.k_samples == 100
