"""Directional regularity detection from wavelet-coefficient decay.

A probe at (x, xi) builds a ladder of group elements whose dual windows sit
inside a frequency cone around xi, with operator norms descending
geometrically.  The maximal coefficient magnitude over a small spatial
neighborhood of x is measured per rung; the log-log slope against ||h||
separates rapid decay (regular) from saturation or growth (singular).

Magnitudes that cannot be resolved above the numerical floor are never
extrapolated: a point whose fine-scale coefficients all fall below the floor
is regular by the floor rule, everything else without a usable fit is
Inconclusive.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import maximum_filter

from . import transform
from .geometry import ConeSpec, SphericalCap, k_i_contains, k_o_contains
from .objects import GaussianBlob, GridSignal, HyperplaneDelta, PointMass
from .wavelets import BandlimitedWavelet, SpatialTable

__all__ = [
    "DetectorConfig",
    "ProbeLadder",
    "DecayReport",
    "ScanResult",
    "build_probe_ladder",
    "decay_exponent",
    "classify_point",
    "wavefront_scan",
    "REGULAR",
    "SINGULAR",
    "INCONCLUSIVE",
    "UNRESOLVABLE",
]

REGULAR = "Regular"
SINGULAR = "Singular"
INCONCLUSIVE = "Inconclusive"
UNRESOLVABLE = "Unresolvable"

# integer codes for dense verdict arrays (exported maps use the names)
VERDICT_CODES = {UNRESOLVABLE: 0, REGULAR: 1, SINGULAR: 2, INCONCLUSIVE: 3}
VERDICT_NAMES = {v: k for k, v in VERDICT_CODES.items()}


@dataclass
class DetectorConfig:
    """Thresholds and ladder geometry; defaults match the validated fixtures."""

    n_regular: float = 4.0
    n_singular: float = 1.0
    res_max: float = 0.5
    rho: float = 0.5
    depth: int = 12
    aperture: float = 0.1
    cutoff: float = 10.0
    base_norm: float = 1.0
    floor_multiplier: float = 1e3
    offset_extent: float = 0.05

    def validate(self):
        if not 0.0 < self.rho < 1.0:
            raise ValueError("ladder ratio must lie in (0, 1)")
        if self.depth < 4:
            raise ValueError("ladder depth must be at least 4")
        if self.aperture <= 0 or self.cutoff <= 0:
            raise ValueError("aperture and cutoff must be positive")
        return self


@dataclass
class ProbeLadder:
    direction: np.ndarray
    window: object
    patch: object
    cutoff: float
    elements: list
    tiers: list
    y_offsets: np.ndarray
    warnings: list = field(default_factory=list)

    @property
    def norms(self):
        return np.array([e.op_norm for e in self.elements])


@dataclass
class DecayReport:
    point: np.ndarray
    direction: np.ndarray
    samples: list
    fitted_slope: float | None
    residual: float | None
    floor_hit: bool
    verdict: str
    floor: float = 0.0
    warnings: list = field(default_factory=list)


def _offset_cube(extent, d):
    """5^d offsets spanning [-extent, extent] per axis."""
    one = np.linspace(-extent, extent, 5)
    mesh = np.meshgrid(*([one] * d), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def build_probe_ladder(group, xi, window, patch, R, rho=0.5, depth=12,
                       y_offsets=None, base_norm=1.0) -> ProbeLadder:
    """Geometric descent of aligned elements, tiered by the cone predicates.

    Elements are targeted at operator norms base_norm * rho^k, so the ladder
    ratio invariant holds for every group regardless of its norm-vs-scale
    relation.  Rungs failing the outer predicate are dropped with a warning.
    """
    xi = np.asarray(xi, dtype=float)
    xi = xi / np.linalg.norm(xi)
    if depth < 4:
        raise ValueError("depth must be at least 4")
    if not group.in_open_orbit(xi):
        raise ValueError(f"direction {xi} lies outside the open dual orbit")
    if y_offsets is None:
        y_offsets = _offset_cube(0.05, group.dim)
    cone = ConeSpec(patch, R)
    elements, tiers, notes = [], [], []
    for k in range(depth):
        h = group.aligned_element_with_norm(xi, base_norm * rho**k)
        if k_i_contains(h, window, cone).truthy():
            tier = "Ki"
        elif k_o_contains(h, window, cone).truthy():
            tier = "Ko"
        else:
            notes.append(f"rung {k} (norm {h.op_norm:.3g}) outside K_o; dropped")
            continue
        elements.append(h)
        tiers.append(tier)
    if not elements:
        raise ValueError("no ladder rung passes the outer cone predicate; "
                         "geometry misconfigured")
    return ProbeLadder(xi, window, patch, R, elements, tiers,
                       np.asarray(y_offsets, dtype=float), notes)


def decay_exponent(samples, floor=0.0):
    """Least-squares slope of log|W| against log||h|| above the floor.

    ``samples`` is a sequence of (log_norm, log_magnitude); entries at or
    below log(floor) are excluded.  Returns (slope, max abs residual).
    """
    pts = np.asarray([(x, y) for x, y in samples], dtype=float)
    log_floor = math.log(floor) if floor > 0 else -math.inf
    usable = pts[:, 1] > log_floor
    if usable.sum() < 3:
        raise ValueError("fewer than 3 samples above the numeric floor")
    x, y = pts[usable, 0], pts[usable, 1]
    A = np.stack([x, np.ones_like(x)], axis=1)
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    residual = float(np.max(np.abs(A @ (slope, intercept) - y)))
    return float(slope), residual


def _verdict_from_mags(mags, norms, floor, cfg):
    """Apply the verdict rules to one magnitude ladder.

    Returns (verdict, slope, residual, floor_hit).  The fine-scale half of
    the ladder falling entirely below floor is conclusive regularity; slope
    gates otherwise.
    """
    mags = np.asarray(mags, dtype=float)
    fine = np.arange(len(mags)) >= (len(mags) + 1) // 2
    # an exact zero is below any floor (the dilated band misses the signal)
    below = (mags < floor) | (mags == 0.0)
    floor_regular = bool(np.all(below[fine]))
    floor_hit = bool(np.any(below))
    usable = mags > floor
    if usable.sum() < 3:
        return (REGULAR if floor_regular else INCONCLUSIVE), None, None, floor_hit
    with np.errstate(divide="ignore"):
        logm = np.log(mags)
    slope, residual = decay_exponent(
        list(zip(np.log(norms), logm)), floor=floor)
    if (slope >= cfg.n_regular and residual <= cfg.res_max) or floor_regular:
        return REGULAR, slope, residual, floor_hit
    if slope <= cfg.n_singular:
        return SINGULAR, slope, residual, floor_hit
    return INCONCLUSIVE, slope, residual, floor_hit


def _spatial_table(wavelet):
    if wavelet.dim != 2:
        return None
    if not hasattr(wavelet, "_spatial_table_cache"):
        wavelet._spatial_table_cache = SpatialTable(wavelet)
    return wavelet._spatial_table_cache


def _rung_field(obj, wavelet, h, ys, table, fft_axes=None):
    """Coefficient magnitudes at probe points for one rung: (|W|, err)."""
    if isinstance(obj, GridSignal):
        fld = transform.coefficient_grid(obj, wavelet, h)
        # snap to the (periodic) signal lattice
        idx = np.round((ys - fld.origin) / fld.spacing).astype(int)
        idx %= np.array(obj.samples.shape)
        vals = fld.values[tuple(idx.T)]
        return np.abs(vals), fld.abs_err
    if isinstance(obj, GaussianBlob) and fft_axes is not None:
        try:
            vals, err = transform.analytic_field_fft(obj, wavelet, h, fft_axes)
            return np.abs(vals), err
        except ValueError:
            pass
    vals, err = transform.coefficient_field(obj, wavelet, h, ys, table=table)
    return np.abs(vals), err


def _gaussian_envelope(obj, wavelet, h):
    """Certified magnitude bound, used to skip hopeless fine rungs."""
    img = wavelet.window.image(h.inv_transpose)
    lo, hi = wavelet.window.bounding_box()
    lam = float(np.linalg.eigvalsh(obj.cov).min())
    r = img.norm_min_lb()
    return (abs(wavelet.amplitude) * float(np.prod(hi - lo))
            * math.exp(-2.0 * math.pi**2 * lam * r * r)
            / math.sqrt(abs(h.det)))


def _ladder_magnitudes(obj, wavelet, ladder, x):
    """(max-over-U magnitude, error) per rung at probe point x.

    Grid signals whose lattice cannot resolve a fine rung yield NaN there,
    which the verdict rules treat as unusable (never as below-floor).
    """
    ys = x[None, :] + ladder.y_offsets
    table = _spatial_table(wavelet) if isinstance(obj, PointMass) else None
    mags, errs = [], []
    for h in ladder.elements:
        if isinstance(obj, GaussianBlob) and errs:
            env = _gaussian_envelope(obj, wavelet, h)
            if env < 1e-3 * max(errs):
                mags.append(0.0)
                errs.append(env)
                continue
        try:
            vals, err = _rung_field(obj, wavelet, h, ys, table)
        except ValueError:
            mags.append(math.nan)
            errs.append(0.0)
            continue
        mags.append(float(np.max(vals)))
        errs.append(float(err))
    return np.array(mags), np.array(errs)


def classify_point(obj, wavelet: BandlimitedWavelet, x, xi,
                   config: DetectorConfig | None = None, tier=None) -> DecayReport:
    """Decay verdict for a single (position, direction) pair.

    ``tier`` restricts the ladder to "Ki" or "Ko"-tagged rungs (default: all
    rungs, every one of which passed the outer predicate).
    """
    cfg = (config or DetectorConfig()).validate()
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    group = wavelet.group
    patch = SphericalCap(xi / np.linalg.norm(xi), cfg.aperture)
    ladder = build_probe_ladder(
        group, xi, wavelet.window, patch, cfg.cutoff, cfg.rho, cfg.depth,
        _offset_cube(cfg.offset_extent, group.dim), cfg.base_norm)
    keep = ([i for i, t in enumerate(ladder.tiers) if t == tier]
            if tier else list(range(len(ladder.elements))))
    ladder.elements = [ladder.elements[i] for i in keep]
    ladder.tiers = [ladder.tiers[i] for i in keep]
    mags, errs = _ladder_magnitudes(obj, wavelet, ladder, x)
    floor = cfg.floor_multiplier * float(errs.max()) if len(errs) else 0.0
    verdict, slope, residual, floor_hit = _verdict_from_mags(
        mags, ladder.norms, floor, cfg)
    with np.errstate(divide="ignore"):
        samples = list(zip(np.log(ladder.norms), np.log(mags)))
    return DecayReport(x, ladder.direction, samples, slope, residual,
                       floor_hit, verdict, floor, list(ladder.warnings))


# ---------------------------------------------------------------------------
# dense scans


@dataclass
class ScanResult:
    axes: list
    directions: np.ndarray
    verdicts: np.ndarray          # int codes, shape grid + (n_directions,)
    slopes: np.ndarray
    residuals: np.ndarray
    warnings: list = field(default_factory=list)

    def verdict_name(self, *index):
        return VERDICT_NAMES[int(self.verdicts[index])]

    def counts(self):
        out = {}
        for name, code in VERDICT_CODES.items():
            out[name] = int(np.sum(self.verdicts == code))
        return out


def _fine_axes(axes):
    """Axes refined 2x and extended one cell, so the 5-point neighborhood of
    every cell center exists on the fine lattice."""
    fine = []
    for a in axes:
        step = a[1] - a[0]
        m = np.arange(-2, 2 * (len(a) - 1) + 3)
        fine.append(a[0] + m * (step / 2.0))
    return fine


def _grid_mags(field_mag, d):
    """Max filter over the 5^d fine neighborhood, subsampled to cell centers."""
    filt = maximum_filter(field_mag, size=5, mode="nearest")
    sl = tuple(slice(2, -2, 2) for _ in range(d))
    return filt[sl]


def _scan_direction(obj, wavelet, axes, xi, cfg, table):
    """Verdict/slope/residual grids for one probe direction."""
    group = wavelet.group
    d = group.dim
    shape = tuple(len(a) for a in axes)
    patch = SphericalCap(xi, cfg.aperture)
    ladder = build_probe_ladder(
        group, xi, wavelet.window, patch, cfg.cutoff, cfg.rho, cfg.depth,
        np.zeros((1, d)), cfg.base_norm)
    if isinstance(obj, GridSignal):
        return _scan_direction_grid(obj, wavelet, axes, ladder, cfg)
    fine = _fine_axes(axes)
    mesh = np.meshgrid(*fine, indexing="ij")
    ys = np.stack([m.ravel() for m in mesh], axis=1)
    mags, errs = [], []
    for h in ladder.elements:
        if isinstance(obj, GaussianBlob) and errs:
            env = _gaussian_envelope(obj, wavelet, h)
            if env < 1e-3 * max(errs):
                mags.append(np.zeros(shape))
                errs.append(env)
                continue
        vals, err = _rung_field(obj, wavelet, h, ys, table, fft_axes=fine)
        fmag = np.abs(vals).reshape(tuple(len(f) for f in fine))
        mags.append(_grid_mags(fmag, d))
        errs.append(float(err))
    mags = np.stack(mags)                      # (n_rungs, *shape)
    floor = cfg.floor_multiplier * max(errs)
    return _verdict_grids(mags, ladder.norms, floor, cfg) + (ladder.warnings,)


def _scan_direction_grid(signal, wavelet, axes, ladder, cfg):
    """Scan rungs through the FFT multiplier; probes stay on the signal grid.

    The spatial neighborhood is the 5^d box of signal cells around each scan
    cell; rungs whose dilated window exceeds the signal Nyquist box are
    dropped with a warning.
    """
    idx_axes = []
    for i, a in enumerate(axes):
        idx = np.round((a - signal.origin[i]) / signal.spacing).astype(int)
        if np.max(np.abs(signal.origin[i] + idx * signal.spacing - a)) > \
                1e-9 * signal.spacing:
            raise ValueError("scan cells must lie on the signal lattice")
        idx_axes.append(idx % signal.samples.shape[i])
    mags, errs, norms, notes = [], [], [], list(ladder.warnings)
    for h in ladder.elements:
        try:
            fld = transform.coefficient_grid(signal, wavelet, h)
        except ValueError:
            notes.append(f"rung at norm {h.op_norm:.3g} exceeds the grid "
                         "Nyquist box; dropped")
            continue
        filt = maximum_filter(np.abs(fld.values), size=5, mode="wrap")
        mags.append(filt[np.ix_(*idx_axes)])
        errs.append(fld.abs_err)
        norms.append(h.op_norm)
    if len(mags) < 3:
        raise ValueError("grid resolves fewer than 3 ladder rungs")
    floor = cfg.floor_multiplier * max(errs)
    grids = _verdict_grids(np.stack(mags), np.array(norms), floor, cfg)
    return grids + (notes,)


def _verdict_grids(mags, norms, floor, cfg):
    """Vectorized verdict rules over a stack of magnitude grids."""
    n = len(norms)
    fine = (np.arange(n) >= (n + 1) // 2).reshape((n,) + (1,) * (mags.ndim - 1))
    # an exact zero is below any floor (the dilated band misses the signal)
    below = (mags < floor) | (mags == 0.0)
    floor_regular = np.all(np.where(fine, below, True), axis=0)
    usable = mags > floor
    n_u = usable.sum(axis=0)
    x = np.log(norms).reshape((n,) + (1,) * (mags.ndim - 1))
    with np.errstate(divide="ignore"):
        y = np.where(usable, np.log(np.maximum(mags, 1e-300)), 0.0)
    xs = np.where(usable, x, 0.0)
    sx, sy = xs.sum(0), y.sum(0)
    sxx, sxy = (xs * xs).sum(0), (xs * y).sum(0)
    with np.errstate(divide="ignore", invalid="ignore"):
        denom = n_u * sxx - sx * sx
        slope = (n_u * sxy - sx * sy) / denom
        intercept = (sy - slope * sx) / n_u
        resid = np.max(
            np.where(usable, np.abs(slope * x + intercept - y), 0.0), axis=0)
        fit_ok = n_u >= 3
        regular = fit_ok & (((slope >= cfg.n_regular) & (resid <= cfg.res_max))
                            | floor_regular)
        regular |= ~fit_ok & floor_regular
        singular = fit_ok & ~regular & (slope <= cfg.n_singular)
    codes = np.full(mags.shape[1:], VERDICT_CODES[INCONCLUSIVE], dtype=np.int8)
    codes[regular] = VERDICT_CODES[REGULAR]
    codes[singular] = VERDICT_CODES[SINGULAR]
    slope = np.where(fit_ok, slope, np.nan)
    resid = np.where(fit_ok, resid, np.nan)
    return codes, slope, resid


def _snap_unit(xi):
    xi = np.asarray(xi, dtype=float).copy()
    xi[np.abs(xi) < 1e-12] = 0.0
    return xi / np.linalg.norm(xi)


def _permute_object(obj, perm):
    p = np.asarray(perm)
    if isinstance(obj, PointMass):
        return PointMass(obj.location[p])
    if isinstance(obj, HyperplaneDelta):
        return HyperplaneDelta(obj.normal[p], obj.point[p])
    if isinstance(obj, GaussianBlob):
        return GaussianBlob(obj.center[p], obj.cov[np.ix_(p, p)])
    raise TypeError(f"cannot permute coordinates of {type(obj).__name__}")


def _single_pass(obj, wavelet, axes, directions, cfg, workers):
    d = wavelet.dim
    shape = tuple(len(a) for a in axes)
    n_dir = len(directions)
    verdicts = np.full(shape + (n_dir,), VERDICT_CODES[UNRESOLVABLE], np.int8)
    slopes = np.full(shape + (n_dir,), np.nan)
    residuals = np.full(shape + (n_dir,), np.nan)
    notes = []
    table = _spatial_table(wavelet) if isinstance(obj, PointMass) else None

    def run(j):
        xi = _snap_unit(directions[j])
        if not wavelet.group.in_open_orbit(xi):
            return j, None, f"direction {j} outside the open orbit; unresolved"
        try:
            out = _scan_direction(obj, wavelet, axes, xi, cfg, table)
        except ValueError as exc:
            return j, None, f"direction {j}: {exc}"
        return j, out, None

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, range(n_dir)))
    else:
        results = [run(j) for j in range(n_dir)]
    for j, out, note in results:
        if note:
            notes.append(note)
        if out is None:
            continue
        codes, slope, resid, warns = out
        verdicts[..., j] = codes
        slopes[..., j] = slope
        residuals[..., j] = resid
        notes.extend(f"direction {j}: {w}" for w in warns)
    return verdicts, slopes, residuals, notes


# merge precedence: a singular finding anywhere dominates; a resolved verdict
# beats an unresolved one
_PRECEDENCE = {SINGULAR: 3, REGULAR: 2, INCONCLUSIVE: 1, UNRESOLVABLE: 0}


def _merge(codes_a, codes_b):
    rank = np.zeros(max(VERDICT_CODES.values()) + 1, dtype=np.int8)
    for name, code in VERDICT_CODES.items():
        rank[code] = _PRECEDENCE[name]
    return np.where(rank[codes_b] > rank[codes_a], codes_b, codes_a)


def wavefront_scan(obj, wavelet: BandlimitedWavelet, axes, directions,
                   config: DetectorConfig | None = None, permuted_pass=False,
                   workers=1) -> ScanResult:
    """Classify every (cell, direction) pair on a dense lattice.

    ``axes`` are per-dimension cell-center coordinates (uniform spacing);
    ``directions`` is an (m, d) array of unit vectors.  With
    ``permuted_pass`` the scan is repeated with cyclically permuted
    coordinates to cover directions outside the primary orbit, and verdicts
    are merged with singular findings dominating.
    """
    cfg = (config or DetectorConfig()).validate()
    axes = [np.asarray(a, dtype=float) for a in axes]
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    if any(len(a) == 0 for a in axes) or len(directions) == 0:
        raise ValueError("empty scan grid")
    d = wavelet.dim
    verdicts, slopes, residuals, notes = _single_pass(
        obj, wavelet, axes, directions, cfg, workers)
    if permuted_pass:
        perm = np.arange(d)
        for _ in range(d - 1):
            perm = np.roll(perm, 1)
            inv = np.argsort(perm)
            try:
                p_obj = _permute_object(obj, perm)
            except TypeError:
                notes.append("permuted pass unavailable for this object type")
                break
            p_axes = [axes[i] for i in perm]
            p_dirs = directions[:, perm]
            v2, s2, r2, n2 = _single_pass(obj=p_obj, wavelet=wavelet,
                                          axes=p_axes, directions=p_dirs,
                                          cfg=cfg, workers=workers)
            back = tuple(inv) + (d,)
            v2 = np.transpose(v2, back)
            s2 = np.transpose(s2, back)
            r2 = np.transpose(r2, back)
            improved = _merge(verdicts, v2)
            take = improved != verdicts
            slopes = np.where(take, s2, slopes)
            residuals = np.where(take, r2, residuals)
            verdicts = improved
            notes.extend(f"permuted pass: {n}" for n in n2)
    return ScanResult(axes, directions, verdicts, slopes, residuals, notes)
