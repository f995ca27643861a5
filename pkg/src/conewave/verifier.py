"""Structural condition audits for cone-indexed dilation sets.

Given a dilation group, a frequency window V and a direction patch W, the
directional analysis machinery rests on a handful of measurable hypotheses:

    * an envelope bound ``|h^{-1}| <= C |h|^{-alpha1}`` over the outer (or
      inner) dilation set of (W, V, R),
    * finiteness of the Haar integral of ``|h|^{alpha2}`` over the outer set,
    * the cone approximation property: K_o(W', V, R') inside K_i(W, V, R) for
      a shrunken patch W' and an enlarged radius R' (strong form), or the same
      along a shrinking window family V_n (weak form),
    * equivalence of the dilation-set inclusion with the corresponding
      union-set inclusion,
    * a finite stay measure mu{h : h^T xi in V}, constant along the orbit.

Everything here is Monte Carlo over exact Haar-weighted chart boxes, combined
with closed-form sufficient inequalities where the group structure provides
them.  Verdicts carry replayable certificates: witness parameters with their
sample counts, or counterexample elements with the exact cone tests they fail.

Determinism: estimators derive child generators from the caller's rng by
spawning, evaluate batches in index order, and reduce in fixed order, so a
given seed reproduces every number exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .geometry import (
    AnnulusSectorWindow,
    BallWindow,
    ConeSpec,
    DiagonalBand,
    DirectionPatch,
    FrequencyWindow,
    ShearletAxisBand,
    ShearletBoxWindow,
    SphericalCap,
    c_set_contains,
    k_i_contains,
    k_o_contains,
    patch_angular_cap,
    region_chart_box,
    sample_k_i,
    sample_k_o,
    shearlet_band_threshold,
    window_direction_cap,
)
from .groups import DilationGroup, GroupElement

__all__ = [
    "MicrolocalFit",
    "IntegralEstimate",
    "ConeWitness",
    "ConeCounterexample",
    "ConeApproxVerdict",
    "EquivalenceReport",
    "HaarCheck",
    "STRONG_BLOCKED",
    "STRONG_PERMITTED",
    "fit_alpha1",
    "envelope_violations",
    "norm_power_integral",
    "check_cone_approx",
    "check_geometric_equivalence",
    "anisotropy_gate",
    "stay_measure",
    "haar_invariance_residual",
]

STRONG_BLOCKED = (
    "strong cone approximation impossible; single-wavelet characterization "
    "unavailable; use weak/multi-wavelet mode"
)
STRONG_PERMITTED = "strong mode permitted"


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


# ---------------------------------------------------------------------------
# result types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IntegralEstimate:
    """Haar-weighted Monte Carlo estimate with a budget-stability flag.

    ``stable`` means the estimate moved by less than three combined standard
    errors when the budget was quadrupled and when the sampled scale range was
    extended; it is a diagnostic, not a convergence proof.
    """

    value: float
    stderr: float
    sample_count: int
    stable: bool
    note: str = ""


@dataclass(frozen=True)
class MicrolocalFit:
    """Envelope fit of the inverse-norm decay over a dilation set.

    ``alpha1`` is the log-log regression exponent; ``envelope_c`` is the exact
    constant ``max |h^{-1}| |h|^{alpha1}`` over the fitted samples, so the
    envelope inequality holds on 100% of them by construction.
    """

    patch: DirectionPatch
    window: FrequencyWindow
    radius: float
    alpha1: float
    envelope_c: float
    sample_count: int
    used_ki: bool
    alpha2: Optional[float] = None
    integral: Optional[IntegralEstimate] = None


@dataclass(frozen=True)
class ConeWitness:
    """Parameters confirming K_o(W', V, R') inside K_i(W, V, R)."""

    eps_prime: float
    r_prime: float
    n: Optional[int]
    patch_prime: DirectionPatch
    window: FrequencyWindow
    samples_checked: int


@dataclass(frozen=True)
class ConeCounterexample:
    """Replayable inclusion violation.

    ``element`` lies in K_o of ``ko_cone`` for ``window`` but fails the inner
    test against ``ki_cone``; ``xi_prime`` is the violating window point and
    ``image`` its image under the inverse transpose.  ``alpha`` is set when
    the element comes from the scalar-dilation obstruction.
    """

    element: GroupElement
    xi_prime: np.ndarray
    image: np.ndarray
    failed_test: str
    ko_cone: ConeSpec
    ki_cone: ConeSpec
    window: FrequencyWindow
    alpha: Optional[float] = None


@dataclass(frozen=True)
class ConeApproxVerdict:
    """Outcome of a cone approximation search.

    ``status`` is one of ``"holds"`` (witness found and sample-confirmed),
    ``"fails"`` (certified counterexample) or ``"budget_exhausted"``.
    """

    mode: str
    status: str
    witness: Optional[ConeWitness]
    counterexample: Optional[ConeCounterexample]
    samples_tested: int
    notes: tuple = ()


@dataclass(frozen=True)
class EquivalenceReport:
    """Cross-validation of the dilation-set and union-set inclusions."""

    k_samples: int
    k_failures: int
    c_samples: int
    c_failures: int
    c_unconfirmed: int
    consistent: bool
    k_witness: Optional[GroupElement] = None
    c_witness: Optional[np.ndarray] = None


@dataclass(frozen=True)
class HaarCheck:
    """Left-invariance residual: one integral estimated directly and after
    composing the integrand with a fixed left translation."""

    direct: float
    direct_stderr: float
    shifted: float
    shifted_stderr: float
    sigmas: float


# ---------------------------------------------------------------------------
# envelope fit and integrability
# ---------------------------------------------------------------------------


def fit_alpha1(
    group: DilationGroup,
    patch: DirectionPatch,
    window: FrequencyWindow,
    radius: float,
    n_samples: int,
    use_ki: bool = False,
    rng=None,
    alpha2: Optional[float] = None,
    integral_budget: int = 4096,
    sample_kw: Optional[dict] = None,
) -> MicrolocalFit:
    """Fit the inverse-norm envelope over K_o (or K_i) of (patch, window, radius).

    Regresses ``log |h^{-1}|`` on ``log |h|`` over region samples, reports the
    negated slope as ``alpha1`` and the exact per-sample envelope constant.
    When ``alpha2`` is given, the norm-power integral is estimated as well.

    Raises ``ValueError`` when the sampled norms carry no spread or the fitted
    exponent is not positive.
    """
    if n_samples < 3:
        raise ValueError("envelope fit needs at least three samples")
    rng = _as_rng(rng)
    cone = ConeSpec(patch, radius)
    sampler = sample_k_i if use_ki else sample_k_o
    region = sampler(group, window, cone, n_samples, rng, **(sample_kw or {}))
    norms = np.array([h.op_norm for h in region.elements])
    inv_norms = np.array([h.inv_op_norm for h in region.elements])
    x = np.log(norms)
    y = np.log(inv_norms)
    if np.ptp(x) < 1e-9:
        raise ValueError("sampled norms carry no spread; cannot fit an exponent")
    slope = float(np.polyfit(x, y, 1)[0])
    alpha1 = -slope
    if alpha1 <= 0:
        raise ValueError(f"fitted exponent {alpha1:.3g} is not positive")
    envelope_c = float(np.max(inv_norms * norms**alpha1))
    integral = None
    if alpha2 is not None:
        integral = norm_power_integral(
            group, patch, window, radius, alpha2, budget=integral_budget, rng=rng
        )
    return MicrolocalFit(
        patch=patch,
        window=window,
        radius=radius,
        alpha1=alpha1,
        envelope_c=envelope_c,
        sample_count=len(region.elements),
        used_ki=use_ki,
        alpha2=alpha2,
        integral=integral,
    )


def envelope_violations(
    fit: MicrolocalFit,
    group: DilationGroup,
    n_samples: int,
    rng=None,
    slack: float = 1.01,
    sample_kw: Optional[dict] = None,
) -> tuple:
    """Out-of-sample envelope check on a fresh batch from the fitted region.

    Returns ``(violations, n_samples)`` where a violation is a sample with
    ``|h^{-1}| > slack * C * |h|^{-alpha1}``.
    """
    rng = _as_rng(rng)
    cone = ConeSpec(fit.patch, fit.radius)
    sampler = sample_k_i if fit.used_ki else sample_k_o
    region = sampler(group, fit.window, cone, n_samples, rng, **(sample_kw or {}))
    norms = np.array([h.op_norm for h in region.elements])
    inv_norms = np.array([h.inv_op_norm for h in region.elements])
    bound = slack * fit.envelope_c * norms ** (-fit.alpha1)
    return int(np.sum(inv_norms > bound)), len(region.elements)


def _indicator_power_mean(group, window, cone, box, count, alpha2, rng):
    """Mean and stderr of w * |h|^alpha2 * 1[h in K_o] over a chart box."""
    els, w = group.sample_chart(count, rng, box)
    vals = np.zeros(count)
    for i, (h, wi) in enumerate(zip(els, w)):
        if k_o_contains(h, window, cone, rng=rng).is_true():
            vals[i] = wi * h.op_norm**alpha2
    mean = float(np.mean(vals))
    stderr = float(np.std(vals) / math.sqrt(count))
    return mean, stderr


def norm_power_integral(
    group: DilationGroup,
    patch: DirectionPatch,
    window: FrequencyWindow,
    radius: float,
    alpha2: float,
    budget: int = 4096,
    rng=None,
    truncation_decades: int = 8,
) -> IntegralEstimate:
    """Haar integral of ``|h|^alpha2`` over K_o(patch, window, radius).

    Unbiased chart Monte Carlo: uniform draws over the covering chart box
    weighted by exact Haar chart volumes, with a certified-membership
    indicator.  Stability is probed by quadrupling the budget and by
    extending the sampled scale range; a moving estimate is reported as not
    integrable.  ``alpha2`` must be positive.
    """
    if alpha2 <= 0:
        raise ValueError("integrability exponent alpha2 must be positive")
    if budget < 16:
        raise ValueError("budget too small for a stability diagnostic")
    rng = _as_rng(rng)
    cone = ConeSpec(patch, radius)
    box = region_chart_box(group, window, cone, truncation_decades)
    box_ext = region_chart_box(group, window, cone, truncation_decades + 4)
    r1, r4, rx = rng.spawn(3)
    v1, s1 = _indicator_power_mean(group, window, cone, box, budget, alpha2, r1)
    v4, s4 = _indicator_power_mean(group, window, cone, box, 4 * budget, alpha2, r4)
    vx, sx = _indicator_power_mean(group, window, cone, box_ext, 4 * budget, alpha2, rx)
    budget_ok = abs(v4 - v1) <= 3.0 * math.hypot(s1, s4) + 1e-300
    range_ok = abs(vx - v4) <= 3.0 * math.hypot(s4, sx) + 1e-300
    stable = bool(budget_ok and range_ok)
    note = ""
    if not stable:
        parts = []
        if not budget_ok:
            parts.append("estimate moved under 4x budget")
        if not range_ok:
            parts.append("estimate moved under scale-range extension")
        note = "NotIntegrable: " + "; ".join(parts)
    return IntegralEstimate(
        value=v4, stderr=s4, sample_count=9 * budget, stable=stable, note=note
    )


# ---------------------------------------------------------------------------
# cone approximation search
# ---------------------------------------------------------------------------


def anisotropy_gate(group: DilationGroup) -> str:
    """Whether the group structure permits the strong cone approximation."""
    if group.contains_positive_scalar_dilations():
        return STRONG_BLOCKED
    return STRONG_PERMITTED


def _patch_family(patch: DirectionPatch):
    """(size parameter, constructor) of the shrinking patch family."""
    if isinstance(patch, SphericalCap):
        return patch.delta, lambda e: SphericalCap(patch.center, e)
    if isinstance(patch, ShearletAxisBand):
        return patch.eps, lambda e: ShearletAxisBand(patch.dim, e)
    if isinstance(patch, DiagonalBand):
        return patch.eps, lambda e: DiagonalBand(patch.dim, e)
    raise ValueError(
        f"cone search needs a cap or band patch family, got {type(patch).__name__}"
    )


def _builtin_weak_family(group: DilationGroup, patch: DirectionPatch):
    """Built-in shrinking window families for the weak-mode search."""
    if group.kind == "similitude" and isinstance(patch, SphericalCap):
        center = patch.center
        return lambda n: BallWindow(center, 1.0 / n)
    if group.kind == "diagonal" and isinstance(patch, DiagonalBand):
        d = group.dim
        return lambda n: AnnulusSectorWindow(
            n / (n + 1.0), (n + 1.0) / n, DiagonalBand(d, 1.0 / n)
        )
    return None


def _closed_form_ok(group, patch, mode, eps, eps_p, r, r_p, n):
    """Sufficient-inequality filter for a candidate; None when no form applies."""
    if mode == "strong" and group.kind == "shearlet" and isinstance(patch, ShearletAxisBand):
        c = float(np.max(group.anisotropy))
        if c >= 1.0:
            return None
        if not (eps_p < 0.5 and r_p > max(4.0, 4.0 * r)):
            return False
        lhs = 2.0 * shearlet_band_threshold(eps_p) + 2.0 * 4.0 ** (1.0 - c) * r_p ** (c - 1.0)
        return bool(lhs < shearlet_band_threshold(eps))
    if mode == "weak" and group.kind == "similitude" and isinstance(patch, SphericalCap):
        if n is None or n < 2:
            return False
        return bool(eps_p < eps / 2 and 4.0 / (n - 1) < eps / 2 and (n - 1) * r_p / (n + 1) > r)
    if mode == "weak" and group.kind == "diagonal" and isinstance(patch, DiagonalBand):
        if n is None or n < 1:
            return False
        ratio = (n + 1.0) / n
        return bool((1 + eps_p) ** 2 * ratio**8 < 1 + eps and r_p / ratio**4 > r)
    return None


def _confirm_inclusion(elements, window, target_cone, rng):
    """Test every element against the inner-inclusion predicate.

    Returns ``(passed, counterexample_or_None, tested)`` where a counterexample
    is a certified ``(element, window point, image)`` triple.
    """
    for idx, h in enumerate(elements):
        res = k_i_contains(h, window, target_cone, rng=rng)
        if res.truthy():
            continue
        if res.is_false():
            xi_p = np.asarray(res.witness, dtype=float)
            return False, (h, xi_p, h.inv_transpose @ xi_p), idx + 1
        return False, None, idx + 1
    return True, None, len(elements)


def _scalar_obstruction(group, patch, radius, xi_unit, v0, eps, family, max_k, rng, notes):
    """Counterexample from a nontrivial positive scalar dilation in the group.

    Transports the patch center direction onto a window certificate point,
    scales by a small alpha so the element certifies outer membership for any
    candidate (patch', R'), and certifies inner failure against a family patch
    smaller than the fixed angular spread of the window images.
    """
    certs = v0.certificate_points()
    eta = certs[0]
    anchor, _ = patch_angular_cap(patch)
    anchor = np.asarray(anchor, dtype=float)
    anchor = anchor / np.linalg.norm(anchor)
    if np.linalg.norm(anchor - xi_unit) > 1e-9:
        notes.append("obstruction anchored at the patch center direction")
    h_xi = group.transporter(anchor, eta)
    img = certs @ h_xi.inv_matrix
    norms = np.linalg.norm(img, axis=1)
    if np.any(norms == 0):
        raise ValueError("window certificate points must avoid the origin")
    dirs = img / norms[:, None]
    dists = np.linalg.norm(dirs - anchor, axis=1)
    spread = float(np.max(dists))
    k_obs = next((k for k in range(1, max_k + 1) if eps / 2**k < 0.9 * spread), None)
    if k_obs is None:
        notes.append(
            "obstruction found no family patch below the image spread "
            f"{spread:.3g}; cannot certify"
        )
        return ConeApproxVerdict("strong", "budget_exhausted", None, None, 0, tuple(notes))
    r_p = 2.0 * radius if radius > 0 else 1.0
    w_p = family(eps / 2.0)
    w_obs = family(eps / 2**k_obs)
    alpha = 0.5 / (1.0 + r_p)
    element = group.from_matrix(alpha * h_xi.matrix)
    ko_cone = ConeSpec(w_p, r_p)
    ki_cone = ConeSpec(w_obs, radius)
    ko = k_o_contains(element, v0, ko_cone, rng=rng)
    ki = k_i_contains(element, v0, ki_cone, rng=rng)
    if not (ko.is_true() and ki.is_false()):
        notes.append("obstruction construction could not be certified on this window")
        return ConeApproxVerdict("strong", "budget_exhausted", None, None, 2, tuple(notes))
    worst = int(np.argmax(dists))
    xi_p = certs[worst]
    ce = ConeCounterexample(
        element=element,
        xi_prime=xi_p,
        image=element.inv_transpose @ xi_p,
        failed_test="ki",
        ko_cone=ko_cone,
        ki_cone=ki_cone,
        window=v0,
        alpha=alpha,
    )
    notes.append(
        "scalar dilations defeat every candidate: alpha * h_xi stays in the outer "
        "set for any (patch', R') while its window images keep angular spread "
        f"{spread:.3g}; certified against the family patch of size {eps / 2**k_obs:g}"
    )
    return ConeApproxVerdict("strong", "fails", None, ce, 2, tuple(notes))


def check_cone_approx(
    group: DilationGroup,
    mode: str,
    patch: DirectionPatch,
    radius: float,
    xi,
    budget: int,
    v0: Optional[FrequencyWindow] = None,
    v_family: Optional[Callable[[int], FrequencyWindow]] = None,
    rng=None,
    max_k: int = 12,
    sample_kw: Optional[dict] = None,
) -> ConeApproxVerdict:
    """Search dyadic candidates for the cone approximation property.

    Candidates are ``eps' = eps / 2^k``, ``R' = R * 2^k`` and (weak mode)
    ``n = 2^k`` for ``k <= max_k``.  Each candidate passing the closed-form
    sufficient inequality (where one exists) is confirmed by sampling the
    outer set of (patch', window, R') and testing the inner inclusion against
    (patch, window, radius).  Strong mode with a scalar-dilation group skips
    the search and replays the generic obstruction instead.

    ``v0`` is the fixed reference window (strong mode); ``v_family`` maps n to
    the shrinking windows (weak mode, built-ins for the similitude cap and
    diagonal band families).
    """
    mode = str(mode).lower()
    if mode not in ("strong", "weak"):
        raise ValueError("mode must be 'strong' or 'weak'")
    if budget <= 0:
        raise ValueError("search budget must be positive")
    xi = np.asarray(xi, dtype=float)
    if not group.in_open_orbit(xi):
        raise ValueError("probe direction xi lies outside the open dual orbit")
    xi_unit = xi / np.linalg.norm(xi)
    rng = _as_rng(rng)
    eps, family = _patch_family(patch)
    notes: list = []
    sample_kw = dict(sample_kw or {})

    if mode == "strong":
        if v0 is None and group.kind == "shearlet":
            v0 = ShearletBoxWindow(group.dim)
        if v0 is None:
            raise ValueError("strong mode needs a reference window v0")
        if group.contains_positive_scalar_dilations():
            return _scalar_obstruction(
                group, patch, radius, xi_unit, v0, eps, family, max_k, rng, notes
            )

    if mode == "weak" and v_family is None:
        v_family = _builtin_weak_family(group, patch)
        if v_family is None:
            raise ValueError(
                "no built-in shrinking window family for this group and patch; "
                "pass v_family explicitly"
            )

    target_cone = ConeSpec(patch, radius)
    samples_tested = 0
    best_ce = None
    for k in range(1, max_k + 1):
        eps_p = eps / 2**k
        r_p = radius * 2**k
        n = 2**k if mode == "weak" else None
        form = _closed_form_ok(group, patch, mode, eps, eps_p, radius, r_p, n)
        if form is False:
            continue
        remaining = budget - samples_tested
        if remaining <= 0:
            notes.append("sampling budget exhausted before a confirmed candidate")
            break
        # known-good candidates get the full remaining budget; blind probes a slice
        count = remaining if form is True else max(16, min(remaining, budget // 4))
        window = v0 if mode == "strong" else v_family(n)
        patch_p = family(eps_p)
        try:
            region = sample_k_o(group, window, ConeSpec(patch_p, r_p), count, rng, **sample_kw)
        except RuntimeError as exc:
            notes.append(f"candidate eps'={eps_p:g} R'={r_p:g}: sampling failed ({exc})")
            continue
        passed, ce_raw, tested = _confirm_inclusion(region.elements, window, target_cone, rng)
        samples_tested += tested
        if passed:
            if form is True:
                notes.append(
                    f"candidate eps'={eps_p:g} R'={r_p:g}"
                    + (f" n={n}" if n else "")
                    + ": closed-form inequality satisfied and sample-confirmed"
                )
            witness = ConeWitness(
                eps_prime=eps_p,
                r_prime=r_p,
                n=n,
                patch_prime=patch_p,
                window=window,
                samples_checked=tested,
            )
            return ConeApproxVerdict(mode, "holds", witness, None, samples_tested, tuple(notes))
        if ce_raw is not None:
            h, xi_p, image = ce_raw
            best_ce = ConeCounterexample(
                element=h,
                xi_prime=xi_p,
                image=image,
                failed_test="ki",
                ko_cone=ConeSpec(patch_p, r_p),
                ki_cone=target_cone,
                window=window,
            )
            if form is True:
                notes.append(
                    "WARNING: closed-form witness contradicted by a certified "
                    f"counterexample at eps'={eps_p:g} R'={r_p:g}"
                )
        else:
            notes.append(
                f"candidate eps'={eps_p:g} R'={r_p:g}: inclusion unconfirmed "
                "(no certificate either way)"
            )
    if best_ce is not None:
        return ConeApproxVerdict(mode, "fails", None, best_ce, samples_tested, tuple(notes))
    return ConeApproxVerdict(mode, "budget_exhausted", None, None, samples_tested, tuple(notes))


# ---------------------------------------------------------------------------
# geometric equivalence
# ---------------------------------------------------------------------------


def check_geometric_equivalence(
    group: DilationGroup,
    patch: DirectionPatch,
    patch_prime: DirectionPatch,
    window: FrequencyWindow,
    radius: float,
    radius_prime: float,
    budget: int,
    rng=None,
    sample_kw: Optional[dict] = None,
) -> EquivalenceReport:
    """Cross-validate the dilation-set inclusion against the union-set one.

    Samples the outer set of (patch', window, radius'), tests each element
    against the inner set of (patch, window, radius), and independently tests
    one union-set point per element for membership in the inner union.  The
    two violation counts must agree in emptiness; a mismatch indicates an
    implementation bug rather than a property failure.
    """
    rng = _as_rng(rng)
    outer_cone = ConeSpec(patch_prime, radius_prime)
    inner_cone = ConeSpec(patch, radius)
    region = sample_k_o(group, window, outer_cone, budget, rng, **(sample_kw or {}))
    vs = window.sample(len(region.elements), rng)
    k_failures = 0
    c_failures = 0
    c_unconfirmed = 0
    k_witness = None
    c_witness = None
    for h, v in zip(region.elements, vs):
        res = k_i_contains(h, window, inner_cone, rng=rng)
        if not res.truthy():
            k_failures += 1
            if k_witness is None and res.is_false():
                k_witness = h
        point = h.inv_transpose @ v
        cres = c_set_contains(
            point, group, window, inner_cone, mode="inner", budget=64, rng=rng, hint_targets=v
        )
        if cres.is_false():
            c_failures += 1
            if c_witness is None:
                c_witness = point
        elif not cres.truthy():
            c_unconfirmed += 1
    consistent = (k_failures == 0) == (c_failures == 0)
    return EquivalenceReport(
        k_samples=len(region.elements),
        k_failures=k_failures,
        c_samples=len(region.elements),
        c_failures=c_failures,
        c_unconfirmed=c_unconfirmed,
        consistent=consistent,
        k_witness=k_witness,
        c_witness=c_witness,
    )


# ---------------------------------------------------------------------------
# stay measure
# ---------------------------------------------------------------------------


def _stay_chart_box(group: DilationGroup, xi: np.ndarray, window: FrequencyWindow):
    """Chart box covering {h : h^T xi in window}; raises when unbounded."""
    kind = group.kind
    lo, hi = window.bounding_box()
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if kind == "similitude":
        mn = window.min_norm()
        if mn <= 0:
            raise RuntimeError("stay region is unbounded: window reaches the origin")
        nx = float(np.linalg.norm(xi))
        t_lo, t_hi = math.log(mn / nx), math.log(window.max_norm() / nx)
        try:
            w_c, w_ang = window_direction_cap(window)
        except NotImplementedError:
            return (t_lo, t_hi)
        if w_ang >= math.pi:
            return (t_lo, t_hi)
        # h^T xi direction in the window cap iff the rotation maps the cap
        # center anchor within the same angle of the probe direction
        return (t_lo, t_hi, (w_c, xi / nx, w_ang))
    if kind == "diagonal":
        ends = np.stack([lo / xi, hi / xi])
        a_lo = ends.min(axis=0)
        a_hi = ends.max(axis=0)
        if np.any((a_lo <= 0) & (a_hi >= 0)):
            raise RuntimeError(
                "stay region has unbounded Haar measure: a window axis range "
                "spans zero"
            )
        signs = tuple(1 if v > 0 else -1 for v in a_hi)
        log_lo = np.log(np.minimum(np.abs(a_lo), np.abs(a_hi)))
        log_hi = np.log(np.maximum(np.abs(a_lo), np.abs(a_hi)))
        return (log_lo, log_hi, [signs])
    if kind == "shearlet":
        if lo[0] <= 0 <= hi[0]:
            raise RuntimeError(
                "stay region has unbounded Haar measure: the window's first "
                "axis range spans zero"
            )
        if xi[0] == 0:
            raise ValueError("probe direction must have a nonzero first component")
        if lo[0] > 0:
            sign = 1 if xi[0] > 0 else -1
            rng1 = (lo[0], hi[0])
        else:
            sign = -1 if xi[0] > 0 else 1
            rng1 = (-hi[0], -lo[0])
        a_lo = rng1[0] / abs(xi[0])
        a_hi = rng1[1] / abs(xi[0])
        c = np.asarray(group.anisotropy, dtype=float)
        low_pow = np.minimum(a_lo**c, a_hi**c)
        high_pow = np.maximum(a_lo**c, a_hi**c)
        mx = np.maximum(np.abs(lo[1:]), np.abs(hi[1:]))
        bw = (mx + high_pow * np.abs(xi[1:])) / (abs(xi[0]) * low_pow)
        return (math.log(a_lo), math.log(a_hi), bw, (sign,))
    raise NotImplementedError(f"no stay chart box for group kind {kind!r}")


def stay_measure(
    group: DilationGroup,
    xi,
    window: FrequencyWindow,
    budget: int = 8192,
    rng=None,
) -> IntegralEstimate:
    """Haar measure of the stay region {h : h^T xi in window}.

    Chart Monte Carlo over a covering box derived from the window's bounding
    box.  Raises ``RuntimeError`` when the region provably has unbounded Haar
    measure and ``ValueError`` when xi is outside the open orbit.
    """
    xi = np.asarray(xi, dtype=float)
    if not group.in_open_orbit(xi):
        raise ValueError("probe direction xi lies outside the open dual orbit")
    rng = _as_rng(rng)
    box = _stay_chart_box(group, xi, window)
    els, w = group.sample_chart(budget, rng, box)
    imgs = np.array([h.matrix.T @ xi for h in els])
    inside = window.contains(imgs)
    vals = w * inside
    mean = float(np.mean(vals))
    stderr = float(np.std(vals) / math.sqrt(budget))
    return IntegralEstimate(value=mean, stderr=stderr, sample_count=budget, stable=True)


# ---------------------------------------------------------------------------
# Haar invariance residual
# ---------------------------------------------------------------------------


def _bump(t: float) -> float:
    """Smooth bump on (-1, 1), equal to 1 at 0."""
    if abs(t) >= 1.0:
        return 0.0
    return math.exp(1.0 - 1.0 / (1.0 - t * t))


def _chart_mean(group, box, count, rng, f):
    els, w = group.sample_chart(count, rng, box)
    vals = np.array([wi * f(h) for h, wi in zip(els, w)])
    return float(np.mean(vals)), float(np.std(vals) / math.sqrt(count))


def haar_invariance_residual(
    group: DilationGroup,
    g: GroupElement,
    budget: int = 8192,
    rng=None,
) -> HaarCheck:
    """Left-invariance check: integrate a smooth bump directly and as f(g h).

    Both estimates target the same Haar integral; the second samples the
    pulled-back chart box so the translated support is fully covered.  The
    returned ``sigmas`` is |difference| in combined standard errors.
    """
    rng = _as_rng(rng)
    r1, r2 = rng.spawn(2)
    kind = group.kind
    if kind == "similitude":
        log_ag = math.log(g.params[0])

        def f(h):
            return _bump(math.log(h.params[0]))

        def f_shift(h):
            return _bump(log_ag + math.log(h.params[0]))

        box1 = (-1.0, 1.0)
        box2 = (-1.0 - log_ag, 1.0 - log_ag)
    elif kind == "diagonal":
        ag = np.asarray(g.params, dtype=float)
        if np.any(ag <= 0):
            raise ValueError("translation element must have positive entries")
        log_ag = np.log(ag)
        d = group.dim

        def f(h):
            a = np.asarray(h.params, dtype=float)
            if np.any(a <= 0):
                return 0.0
            return float(np.prod([_bump(t) for t in np.log(a)]))

        def f_shift(h):
            a = np.asarray(h.params, dtype=float)
            if np.any(a <= 0):
                return 0.0
            return float(np.prod([_bump(t) for t in np.log(a) + log_ag]))

        box1 = (np.full(d, -1.0), np.full(d, 1.0), [(1,) * d])
        box2 = (-1.0 - log_ag, 1.0 - log_ag, [(1,) * d])
    elif kind == "shearlet":
        s_g, a_g, b_g = g.params[0], float(g.params[1]), np.atleast_1d(g.params[2])
        c = np.asarray(group.anisotropy, dtype=float)
        w_b = 1.0

        def f(h):
            s, a, b = h.params[0], float(h.params[1]), np.atleast_1d(h.params[2])
            if s != 1:
                return 0.0
            out = _bump(math.log(a))
            for bi in b:
                out *= _bump(bi / w_b)
            return out

        def f_shift(h):
            s, a, b = h.params[0], float(h.params[1]), np.atleast_1d(h.params[2])
            bp = a_g * b + b_g * a**c
            if s_g * s != 1:
                return 0.0
            out = _bump(math.log(a_g * a))
            for bi in bp:
                out *= _bump(bi / w_b)
            return out

        lo2, hi2 = -1.0 - math.log(a_g), 1.0 - math.log(a_g)
        bw1 = w_b / np.minimum(math.exp(-1.0) ** c, math.exp(1.0) ** c)
        u2 = np.maximum(math.exp(lo2) ** c, math.exp(hi2) ** c)
        l2 = np.minimum(math.exp(lo2) ** c, math.exp(hi2) ** c)
        bw2 = (w_b + np.abs(b_g) * u2) / (a_g * l2)
        box1 = (-1.0, 1.0, bw1, (1,))
        box2 = (lo2, hi2, bw2, (int(s_g),))
    else:
        raise ValueError(f"no invariance chart for group kind {kind!r}")
    v1, s1 = _chart_mean(group, box1, budget, r1, f)
    v2, s2 = _chart_mean(group, box2, budget, r2, f_shift)
    comb = math.hypot(s1, s2)
    sigmas = abs(v1 - v2) / comb if comb > 0 else (0.0 if v1 == v2 else math.inf)
    return HaarCheck(direct=v1, direct_stderr=s1, shifted=v2, shifted_stderr=s2, sigmas=sigmas)
