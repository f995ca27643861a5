"""Run configuration: TOML schema, validation, hashing and seeding.

Schema (all sections optional unless a command needs them; notes mark
per-kind fields):

    [group]
    kind = "shearlet"          # "similitude" | "diagonal" | "shearlet"
    dim = 2
    anisotropy = [0.5]         # shearlet only; length dim-1, entries in (0, 1]

    [wavelet]
    window = "auto"            # "auto" | "shearlet-box" | "annulus" | "box" | "ball"
    normalize = true           # rescale to admissibility integral 1
    r_lo = 1.0                 # annulus
    r_hi = 2.0                 # annulus
    cap_center = [1.0, 0.0]    # annulus (aperture defaults to the full sphere)
    cap_delta = 2.0            # annulus
    lo = [1.0, 1.0]            # box
    hi = [2.0, 2.0]            # box
    center = [2.0, 0.0]        # ball
    radius = 0.5               # ball

    [signal]
    kind = "hyperplane"        # "pointmass" | "hyperplane" | "gaussian"
    location = [0.0, 0.0]      # pointmass
    normal = [1.0, 0.0]        # hyperplane
    point = [0.0, 0.0]         # hyperplane
    center = [0.0, 0.0]        # gaussian
    cov = 0.02                 # gaussian: scalar, diagonal list, or matrix

    [detector]
    n_regular = 4.0
    n_singular = 1.0
    res_max = 0.5
    rho = 0.5
    depth = 12
    aperture = 0.1
    cutoff = 10.0
    base_norm = 1.0
    offset_extent = 0.05

    [scan]
    lo = [-4.0, -4.0]
    hi = [4.0, 4.0]
    n = 64                     # cells per axis
    directions = 32            # unit directions (angle grid for dim 2)
    assert_none = false        # exit 1 when any Singular verdict appears
    probes = [[0.0, 0.0, 1.0, 0.0]]   # optional x ++ xi rows for decay reports

    [verify]
    mode = "strong"            # "strong" | "weak"
    eps = 0.3
    radius = 10.0
    budget = 512               # cone-search confirmation samples
    samples = 2048             # envelope fit samples
    use_ki = true              # fit the envelope over K_i instead of K_o
    alpha2 = 2.0               # optional; enables the integrability check
    stay_points = 4            # orbit points for the stay-measure comparison

    [synthesize]
    shape = [64, 64]           # per-axis extents, each a power of two
    spacing = 0.125
    origin = [-4.0, -4.0]

    [run]
    seed = 2026
    out = "out"

Every artifact written from a config embeds ``sha256`` of the canonical
config encoding, the effective seed, and the library version, so outputs are
traceable and reruns are byte-comparable.
"""

from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import dataclass, field

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import __version__
from .detector import DetectorConfig
from .geometry import (
    AnnulusSectorWindow,
    BallWindow,
    BoxWindow,
    DiagonalBand,
    ShearletAxisBand,
    ShearletBoxWindow,
    SphericalCap,
)
from .groups import DiagonalGroup, DilationGroup, ShearletGroup, SimilitudeGroup
from .objects import GaussianBlob, HyperplaneDelta, PointMass
from .wavelets import BandlimitedWavelet

__all__ = ["ConfigError", "RunConfig", "load_config", "config_from_dict"]


class ConfigError(Exception):
    """Configuration parse or validation failure; message names the field."""


def _need(table: dict, section: str, key: str):
    if key not in table:
        raise ConfigError(f"{section}: missing required key '{key}'")
    return table[key]


def _positive(section: str, key: str, value) -> float:
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{section}.{key}: expected a number") from None
    if not out > 0:
        raise ConfigError(f"{section}.{key}: must be positive, got {value!r}")
    return out


def _vector(section: str, key: str, value, dim=None) -> np.ndarray:
    try:
        out = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{section}.{key}: expected a list of numbers") from None
    if out.ndim != 1:
        raise ConfigError(f"{section}.{key}: expected a flat list of numbers")
    if dim is not None and out.size != dim:
        raise ConfigError(f"{section}.{key}: expected {dim} entries, got {out.size}")
    return out


def _canonical(value):
    """JSON-stable form of parsed TOML values for hashing."""
    if isinstance(value, dict):
        return {k: _canonical(value[k]) for k in sorted(value)}
    if isinstance(value, list):
        return [_canonical(v) for v in value]
    return value


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration plus provenance stamp fields."""

    raw: dict
    seed: int
    out_dir: str
    sha256: str

    # -- stamping ----------------------------------------------------------

    def stamp(self) -> dict:
        return {"config_sha256": self.sha256, "seed": self.seed, "version": __version__}

    def with_overrides(self, seed=None, out_dir=None) -> "RunConfig":
        return RunConfig(
            raw=self.raw,
            seed=self.seed if seed is None else int(seed),
            out_dir=self.out_dir if out_dir is None else str(out_dir),
            sha256=self.sha256,
        )

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(self.seed))

    # -- section accessors ---------------------------------------------------

    def section(self, name: str) -> dict:
        value = self.raw.get(name, {})
        if not isinstance(value, dict):
            raise ConfigError(f"{name}: expected a table")
        return value

    # -- builders ------------------------------------------------------------

    def build_group(self) -> DilationGroup:
        sec = self.section("group")
        kind = _need(sec, "group", "kind")
        dim = sec.get("dim", 2)
        if not isinstance(dim, int) or dim < 2:
            raise ConfigError("group.dim: expected an integer >= 2")
        if kind == "similitude":
            return SimilitudeGroup(dim)
        if kind == "diagonal":
            return DiagonalGroup(dim)
        if kind == "shearlet":
            c = _vector("group", "anisotropy", sec.get("anisotropy", [0.5] * (dim - 1)), dim - 1)
            if np.any(c <= 0) or np.any(c > 1):
                raise ConfigError("group.anisotropy: entries must lie in (0, 1]")
            return ShearletGroup(dim, c)
        raise ConfigError(f"group.kind: unknown kind {kind!r}")

    def build_window(self, group: DilationGroup):
        sec = self.section("wavelet")
        name = sec.get("window", "auto")
        d = group.dim
        if name == "auto":
            name = {
                "shearlet": "shearlet-box",
                "similitude": "annulus",
                "diagonal": "box",
            }[group.kind]
        if name == "shearlet-box":
            return ShearletBoxWindow(d)
        if name == "annulus":
            r_lo = _positive("wavelet", "r_lo", sec.get("r_lo", 1.0))
            r_hi = _positive("wavelet", "r_hi", sec.get("r_hi", 2.0))
            center = _vector("wavelet", "cap_center", sec.get("cap_center", [1.0] + [0.0] * (d - 1)), d)
            delta = _positive("wavelet", "cap_delta", sec.get("cap_delta", 2.0))
            return AnnulusSectorWindow(r_lo, r_hi, SphericalCap(center, delta))
        if name == "box":
            lo = _vector("wavelet", "lo", sec.get("lo", [1.0] * d), d)
            hi = _vector("wavelet", "hi", sec.get("hi", [2.0] * d), d)
            return BoxWindow(lo, hi)
        if name == "ball":
            center = _vector("wavelet", "center", sec.get("center", [2.0] + [0.0] * (d - 1)), d)
            radius = _positive("wavelet", "radius", sec.get("radius", 0.5))
            return BallWindow(center, radius)
        raise ConfigError(f"wavelet.window: unknown window {name!r}")

    def build_wavelet(self, group: DilationGroup, rng=None) -> BandlimitedWavelet:
        sec = self.section("wavelet")
        wavelet = BandlimitedWavelet(self.build_window(group), group)
        if sec.get("normalize", True):
            wavelet = wavelet.normalized(rng=rng)
        return wavelet

    def build_signal(self, dim: int):
        sec = self.section("signal")
        kind = _need(sec, "signal", "kind")
        try:
            if kind == "pointmass":
                return PointMass(_vector("signal", "location", sec.get("location", [0.0] * dim), dim))
            if kind == "hyperplane":
                return HyperplaneDelta(
                    _vector("signal", "normal", _need(sec, "signal", "normal"), dim),
                    _vector("signal", "point", sec.get("point", [0.0] * dim), dim),
                )
            if kind == "gaussian":
                return GaussianBlob(
                    _vector("signal", "center", sec.get("center", [0.0] * dim), dim),
                    np.asarray(sec.get("cov", 1.0), dtype=float),
                )
        except ValueError as exc:
            raise ConfigError(f"signal: {exc}") from None
        raise ConfigError(f"signal.kind: unknown kind {kind!r}")

    def detector_config(self) -> DetectorConfig:
        sec = self.section("detector")
        cfg = DetectorConfig()
        for key in vars(cfg):
            if key in sec:
                setattr(cfg, key, type(getattr(cfg, key))(sec[key]))
        unknown = set(sec) - set(vars(cfg))
        if unknown:
            raise ConfigError(f"detector: unknown keys {sorted(unknown)}")
        try:
            cfg.validate()
        except ValueError as exc:
            raise ConfigError(f"detector: {exc}") from None
        return cfg

    def verify_params(self, group: DilationGroup) -> dict:
        sec = self.section("verify")
        mode = sec.get("mode", "strong")
        if mode not in ("strong", "weak"):
            raise ConfigError("verify.mode: expected 'strong' or 'weak'")
        eps = _positive("verify", "eps", sec.get("eps", 0.3))
        radius = _positive("verify", "radius", sec.get("radius", 10.0))
        patch = {
            "shearlet": lambda: ShearletAxisBand(group.dim, eps),
            "similitude": lambda: SphericalCap([1.0] + [0.0] * (group.dim - 1), eps),
            "diagonal": lambda: DiagonalBand(group.dim, eps),
        }[group.kind]()
        alpha2 = sec.get("alpha2")
        if alpha2 is not None:
            alpha2 = _positive("verify", "alpha2", alpha2)
        return {
            "mode": mode,
            "eps": eps,
            "radius": radius,
            "patch": patch,
            "budget": int(sec.get("budget", 512)),
            "samples": int(sec.get("samples", 2048)),
            "use_ki": bool(sec.get("use_ki", True)),
            "alpha2": alpha2,
            "stay_points": int(sec.get("stay_points", 4)),
        }

    def scan_params(self, dim: int) -> dict:
        sec = self.section("scan")
        lo = _vector("scan", "lo", sec.get("lo", [-4.0] * dim), dim)
        hi = _vector("scan", "hi", sec.get("hi", [4.0] * dim), dim)
        if np.any(hi <= lo):
            raise ConfigError("scan: hi must exceed lo on every axis")
        n = sec.get("n", 64)
        if not isinstance(n, int) or n < 2:
            raise ConfigError("scan.n: expected an integer >= 2")
        m = sec.get("directions", 32)
        if not isinstance(m, int) or m < 1:
            raise ConfigError("scan.directions: expected a positive integer")
        probes = sec.get("probes", [])
        rows = []
        for i, row in enumerate(probes):
            vec = _vector("scan", f"probes[{i}]", row, 2 * dim)
            rows.append((vec[:dim], vec[dim:]))
        return {
            "lo": lo,
            "hi": hi,
            "n": n,
            "directions": m,
            "assert_none": bool(sec.get("assert_none", False)),
            "probes": rows,
        }

    def synthesize_params(self, dim: int) -> dict:
        sec = self.section("synthesize")
        shape = sec.get("shape", [64] * dim)
        shape = tuple(int(s) for s in np.asarray(shape).reshape(-1))
        if len(shape) != dim or any(s < 2 or (s & (s - 1)) for s in shape):
            raise ConfigError("synthesize.shape: expected powers of two, one per axis")
        spacing = _positive("synthesize", "spacing", sec.get("spacing", 0.125))
        origin = sec.get("origin")
        if origin is not None:
            origin = _vector("synthesize", "origin", origin, dim)
        return {"shape": shape, "spacing": spacing, "origin": origin}


def config_from_dict(data: dict, seed=None, out_dir=None) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("top level: expected a table of sections")
    canon = _canonical(data)
    digest = hashlib.sha256(
        json.dumps(canon, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()
    run = data.get("run", {})
    if not isinstance(run, dict):
        raise ConfigError("run: expected a table")
    eff_seed = run.get("seed", 0) if seed is None else seed
    if not isinstance(eff_seed, int):
        raise ConfigError("run.seed: expected an integer")
    eff_out = run.get("out", "out") if out_dir is None else out_dir
    return RunConfig(raw=data, seed=int(eff_seed), out_dir=str(eff_out), sha256=digest)


def load_config(path: str, seed=None, out_dir=None) -> RunConfig:
    """Parse and validate a TOML run configuration.

    Raises ``ConfigError`` with a field-path diagnostic on malformed input.
    """
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_dict(data, seed=seed, out_dir=out_dir)
