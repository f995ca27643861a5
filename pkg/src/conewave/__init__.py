"""Directional multiscale analysis with matrix dilation groups.

The package builds continuous wavelet transforms whose dilations range over a
matrix group (similitude, diagonal, or shearlet-type), measures coefficient
decay along group-adapted scale ladders, and turns the decay into verdicts
about where a signal is singular and in which directions.  A verification
layer audits the structural conditions the verdicts rely on, and a CLI wires
the pieces into reproducible runs.
"""

__version__ = "0.1.0"

from .detector import (
    INCONCLUSIVE,
    REGULAR,
    SINGULAR,
    UNRESOLVABLE,
    DecayReport,
    DetectorConfig,
    ProbeLadder,
    ScanResult,
    build_probe_ladder,
    classify_point,
    decay_exponent,
    wavefront_scan,
)
from .geometry import (
    AnnulusSectorWindow,
    BallWindow,
    BoxWindow,
    ConeSpec,
    DiagonalBand,
    PredicateResult,
    ShearletAxisBand,
    ShearletBoxWindow,
    SphericalCap,
    c_set_contains,
    k_i_contains,
    k_o_contains,
    sample_k_i,
    sample_k_o,
)
from .groups import DiagonalGroup, DilationGroup, GroupElement, ShearletGroup, SimilitudeGroup
from .objects import GaussianBlob, GridSignal, HyperplaneDelta, PointMass, synthesize_signal
from .transform import analytic_field_fft, coefficient, coefficient_field, coefficient_grid
from .wavelets import BandlimitedWavelet, SpatialTable
from .verifier import (
    STRONG_BLOCKED,
    STRONG_PERMITTED,
    ConeApproxVerdict,
    MicrolocalFit,
    anisotropy_gate,
    check_cone_approx,
    check_geometric_equivalence,
    envelope_violations,
    fit_alpha1,
    haar_invariance_residual,
    norm_power_integral,
    stay_measure,
)
from .config import ConfigError, RunConfig, load_config

__all__ = [
    "__version__",
    "DilationGroup",
    "GroupElement",
    "SimilitudeGroup",
    "DiagonalGroup",
    "ShearletGroup",
    "SphericalCap",
    "ShearletAxisBand",
    "DiagonalBand",
    "ConeSpec",
    "BallWindow",
    "BoxWindow",
    "ShearletBoxWindow",
    "AnnulusSectorWindow",
    "PredicateResult",
    "k_i_contains",
    "k_o_contains",
    "c_set_contains",
    "sample_k_i",
    "sample_k_o",
    "BandlimitedWavelet",
    "SpatialTable",
    "PointMass",
    "HyperplaneDelta",
    "GaussianBlob",
    "GridSignal",
    "synthesize_signal",
    "coefficient",
    "coefficient_field",
    "coefficient_grid",
    "analytic_field_fft",
    "DetectorConfig",
    "DecayReport",
    "ProbeLadder",
    "ScanResult",
    "build_probe_ladder",
    "decay_exponent",
    "classify_point",
    "wavefront_scan",
    "REGULAR",
    "SINGULAR",
    "INCONCLUSIVE",
    "UNRESOLVABLE",
    "MicrolocalFit",
    "ConeApproxVerdict",
    "STRONG_BLOCKED",
    "STRONG_PERMITTED",
    "anisotropy_gate",
    "fit_alpha1",
    "envelope_violations",
    "norm_power_integral",
    "check_cone_approx",
    "check_geometric_equivalence",
    "stay_measure",
    "haar_invariance_residual",
    "ConfigError",
    "RunConfig",
    "load_config",
]
