"""Analysed objects: the distributions and signals the transform accepts.

Three analytic fixtures with exact Fourier data (point mass, hyperplane
delta, Gaussian) plus sampled signals on regular power-of-two grids.  The
Fourier convention throughout is

    u_hat(xi) = integral u(x) e^{-2 pi i <x, xi>} dx.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PointMass",
    "HyperplaneDelta",
    "GaussianBlob",
    "GridSignal",
    "synthesize_signal",
]


@dataclass(frozen=True)
class PointMass:
    """Dirac mass at ``location``; u_hat(xi) = e^{-2 pi i <location, xi>}."""

    location: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "location", np.asarray(self.location, dtype=float))

    @property
    def dim(self):
        return self.location.size

    def hat(self, xi):
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        return np.exp(-2j * math.pi * (xi @ self.location))


@dataclass(frozen=True)
class HyperplaneDelta:
    """Surface measure (constant 1) on the hyperplane through ``point``
    with unit normal ``normal``."""

    normal: np.ndarray
    point: np.ndarray

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        nn = np.linalg.norm(n)
        if nn == 0:
            raise ValueError("normal must be nonzero")
        object.__setattr__(self, "normal", n / nn)
        object.__setattr__(self, "point", np.asarray(self.point, dtype=float))

    @property
    def dim(self):
        return self.normal.size


@dataclass(frozen=True)
class GaussianBlob:
    """Gaussian density with mean ``center`` and covariance ``cov`` (SPD)."""

    center: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        c = np.asarray(self.cov, dtype=float)
        if c.ndim == 0:
            c = float(c) * np.eye(self.center.size)
        if c.ndim == 1:
            c = np.diag(c)
        evals = np.linalg.eigvalsh(c)
        if evals.min() <= 0:
            raise ValueError("covariance must be positive definite")
        object.__setattr__(self, "cov", c)

    @property
    def dim(self):
        return self.center.size

    def hat(self, xi):
        """u_hat(xi) = e^{-2 pi i <mu, xi>} e^{-2 pi^2 xi^T Sigma xi}."""
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        q = np.einsum("ni,ij,nj->n", xi, self.cov, xi)
        return np.exp(-2j * math.pi * (xi @ self.center) - 2.0 * math.pi**2 * q)


@dataclass
class GridSignal:
    """Samples on a regular grid: x_n = origin + n * spacing (power-of-two extents)."""

    samples: np.ndarray
    spacing: float
    origin: np.ndarray = field(default=None)

    def __post_init__(self):
        self.samples = np.asarray(self.samples)
        for n in self.samples.shape:
            if n & (n - 1) != 0:
                raise ValueError("grid extents must be powers of two")
        if self.origin is None:
            self.origin = np.zeros(self.samples.ndim)
        self.origin = np.asarray(self.origin, dtype=float)
        self.spacing = float(self.spacing)
        if self.spacing <= 0:
            raise ValueError("spacing must be positive")

    @property
    def dim(self):
        return self.samples.ndim

    def axes(self):
        return [
            self.origin[i] + self.spacing * np.arange(self.samples.shape[i])
            for i in range(self.dim)
        ]

    def freq_axes(self):
        return [
            np.fft.fftfreq(n, d=self.spacing) for n in self.samples.shape
        ]

    def nyquist(self) -> float:
        return 0.5 / self.spacing

    def cell_volume(self) -> float:
        return self.spacing**self.dim


def synthesize_signal(obj, shape, spacing, origin=None) -> GridSignal:
    """Rasterize an analytic object onto a grid.

    Point masses become a single cell of mass one; hyperplane deltas a
    one-cell-wide ridge whose crossing integral is one; Gaussians are sampled
    densities.
    """
    shape = tuple(int(s) for s in shape)
    d = len(shape)
    if origin is None:
        origin = np.zeros(d)
    origin = np.asarray(origin, dtype=float)
    spacing = float(spacing)
    axes = [origin[i] + spacing * np.arange(shape[i]) for i in range(d)]
    if isinstance(obj, GaussianBlob):
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1) - obj.center
        inv = np.linalg.inv(obj.cov)
        q = np.einsum("ni,ij,nj->n", pts, inv, pts)
        norm = 1.0 / (math.sqrt((2 * math.pi) ** d * np.linalg.det(obj.cov)))
        return GridSignal((norm * np.exp(-0.5 * q)).reshape(shape), spacing, origin)
    if isinstance(obj, PointMass):
        samples = np.zeros(shape)
        idx = tuple(
            int(np.clip(round((obj.location[i] - origin[i]) / spacing), 0, shape[i] - 1))
            for i in range(d)
        )
        samples[idx] = 1.0 / spacing**d
        return GridSignal(samples, spacing, origin)
    if isinstance(obj, HyperplaneDelta):
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        t = (pts - obj.point) @ obj.normal
        vals = np.maximum(0.0, 1.0 - np.abs(t) / spacing) / spacing
        return GridSignal(vals.reshape(shape), spacing, origin)
    raise TypeError(f"cannot synthesize object of type {type(obj).__name__}")
