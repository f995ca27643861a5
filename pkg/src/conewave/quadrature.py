"""Phase-aware panel quadrature for compactly supported oscillatory integrands.

Gauss-Legendre panels sized so no panel holds more than ``CYCLES_PER_PANEL``
cycles of the fastest phase factor; this keeps a fixed modest order spectrally
accurate.  Error estimates come from re-evaluating with doubled panel counts,
oscillatory tails beyond a caller's cycle budget are handled by the
integration-by-parts envelope in :func:`ibp_tail_bound`.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.integrate import trapezoid

CYCLES_PER_PANEL = 4.0
DEFAULT_ORDER = 24


@lru_cache(maxsize=64)
def _leggauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def panel_rule(lo: float, hi: float, cycles: float, order: int = DEFAULT_ORDER, refine: int = 1):
    """Nodes/weights on [lo, hi] resolving ``cycles`` oscillations."""
    if hi <= lo:
        return np.empty(0), np.empty(0)
    npan = max(1, math.ceil(abs(cycles) / CYCLES_PER_PANEL)) * max(1, refine)
    x, w = _leggauss(order)
    edges = np.linspace(lo, hi, npan + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def integrate_1d(f, lo, hi, cycles, order=DEFAULT_ORDER):
    """Integral of f over [lo, hi] with a doubled-panel error estimate."""
    x1, w1 = panel_rule(lo, hi, cycles, order)
    v1 = np.sum(f(x1) * w1)
    x2, w2 = panel_rule(lo, hi, cycles, order, refine=2)
    v2 = np.sum(f(x2) * w2)
    return v2, abs(v2 - v1)


def tensor_rule(lo, hi, cycles, order=DEFAULT_ORDER, refine=1):
    """Tensor-product panel rule over a box; returns (nodes (n,d), weights (n,))."""
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    cycles = np.broadcast_to(np.asarray(cycles, dtype=float), lo.shape)
    axes = [panel_rule(lo[i], hi[i], cycles[i], order, refine) for i in range(lo.size)]
    grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=-1)
    wgrids = np.meshgrid(*[a[1] for a in axes], indexing="ij")
    weights = np.prod(np.stack([wg.ravel() for wg in wgrids]), axis=0)
    return nodes, weights


def integrate_nd(f, lo, hi, cycles, order=DEFAULT_ORDER):
    """Tensor-panel integral over a box with doubled-panel error estimate.

    ``f`` maps an (n, d) node array to (n,) values.
    """
    x1, w1 = tensor_rule(lo, hi, cycles, order)
    v1 = np.sum(f(x1) * w1)
    x2, w2 = tensor_rule(lo, hi, cycles, order, refine=2)
    v2 = np.sum(f(x2) * w2)
    return v2, abs(v2 - v1)


def derivative_l1_norm(f, lo, hi, k=4, n=4097):
    """Numeric L1 norm of the k-th derivative of f on [lo, hi] (central FD)."""
    t = np.linspace(lo, hi, n)
    v = np.asarray(f(t), dtype=complex)
    h = t[1] - t[0]
    d = v
    for _ in range(k):
        d = np.gradient(d, h)
    return float(trapezoid(np.abs(d), t))


def ibp_tail_bound(deriv_l1, omega, k=4):
    """|int g(t) e^{2 pi i omega t} dt| <= ||g^(k)||_1 / (2 pi |omega|)^k."""
    if omega == 0:
        raise ValueError("tail bound needs a nonzero phase rate")
    return deriv_l1 / (2.0 * math.pi * abs(omega)) ** k
