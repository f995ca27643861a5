"""Frequency-cone geometry for the dual action xi -> h^T xi.

The objects here answer one recurring question: where does the inverse
transpose of a group element send a compact frequency window, relative to a
truncated open cone

    C(W, R) = {r * w : w in W, r > 0, |r w| > R}

spanned by a direction patch W on the unit sphere?  Two set predicates drive
everything downstream:

    * ``k_i_contains``: the whole image h^{-T} V lies inside C(W, R),
    * ``k_o_contains``: the image meets C(W, R).

Both return three-valued results: certified True, certified False, or
Approximate with a sampled confidence.  Certification never lies; when the
convex bounds cannot decide, the result is an honest Approximate.

Direction membership for every patch family is expressed through constraints
of the form  <q, v> + kappa * |P v| > 0,  which are concave for kappa <= 0 and
hence certifiable at polytope vertices, and boundable through support
estimates on ellipsoids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .groups import DilationGroup, GroupElement, ShearletGroup

__all__ = [
    "SphericalCap",
    "ShearletAxisBand",
    "DiagonalBand",
    "ConeSpec",
    "BallWindow",
    "BoxWindow",
    "ShearletBoxWindow",
    "AnnulusSectorWindow",
    "Cert",
    "PredicateResult",
    "cone_contains",
    "k_i_contains",
    "k_o_contains",
    "sample_region",
    "sample_k_o",
    "sample_k_i",
    "c_set_contains",
    "shearlet_band_threshold",
]


def shearlet_band_threshold(eps: float) -> float:
    """Max ratio |v_perp| / v_1 inside the axis band of half-width eps."""
    if not 0 < eps < 1:
        raise ValueError("band half-width must lie in (0, 1)")
    return math.sqrt(2 * eps - eps * eps) / (1 - eps)


# ---------------------------------------------------------------------------
# direction patches
# ---------------------------------------------------------------------------


class DirectionPatch:
    """Open subset of the unit sphere with a homogeneous cone description."""

    dim: int

    def contains_unit(self, w, strict=True):
        """Membership of unit vectors; (d,) or (n, d)."""
        w = np.asarray(w, dtype=float)
        single = w.ndim == 1
        out = self._contains_unit(np.atleast_2d(w), strict)
        return bool(out[0]) if single else out

    def cone_margins(self, v) -> np.ndarray:
        """Stacked constraint values g_k(v); all > 0 iff direction of v in patch.

        Each row of the result is one constraint evaluated on the (n, d) input.
        The constraints are positively homogeneous, so scaling v scales the
        margins without changing their signs.
        """
        v = np.atleast_2d(np.asarray(v, dtype=float))
        out = []
        for q, kappa, P in self.constraints():
            term = v @ q
            if kappa != 0.0:
                pv = v if P is None else v @ P.T
                term = term + kappa * np.linalg.norm(pv, axis=1)
            out.append(term)
        return np.stack(out)

    def constraints(self):
        """List of (q, kappa, P) with g(v) = <q, v> + kappa |P v| (P None = identity)."""
        raise NotImplementedError

    def max_perp_ratio(self) -> float:
        """sup |w_perp| / w_1 over the patch closure; inf w_1 must be positive."""
        raise NotImplementedError


class SphericalCap(DirectionPatch):
    """Directions w with |w - center| < delta (chordal radius)."""

    def __init__(self, center, delta: float):
        center = np.asarray(center, dtype=float)
        n = np.linalg.norm(center)
        if abs(n - 1.0) > 1e-10:
            raise ValueError("cap center must be a unit vector")
        if not 0 < delta <= 2:
            raise ValueError("cap radius must lie in (0, 2]")
        self.center = center / n
        self.delta = float(delta)
        self.dim = center.size

    def _contains_unit(self, w, strict):
        d2 = np.sum((w - self.center) ** 2, axis=1)
        return d2 < self.delta**2 if strict else d2 <= self.delta**2

    def constraints(self):
        # |v/|v| - u0| < delta  <=>  <v, u0> > (1 - delta^2/2) |v|
        cos_t = 1.0 - self.delta**2 / 2.0
        if cos_t >= 0.0:
            # within a hemisphere the cap cone is the exact second-order cone
            # sin(t) <u0, v> - cos(t) |v - <u0,v> u0| > 0, which the image
            # bounds handle without coupling the full norm to the axis part
            sin_t = 0.5 * self.delta * math.sqrt(4.0 - self.delta**2)
            P = np.eye(self.dim) - np.outer(self.center, self.center)
            return [(sin_t * self.center, -cos_t, P)]
        return [(self.center, -cos_t, None)]

    def max_perp_ratio(self):
        u = self.center
        w1_min = u[0] - self.delta
        if w1_min <= 0:
            raise ValueError("cap is not contained in the w_1 > 0 half-space")
        perp_max = min(1.0, np.linalg.norm(u[1:]) + self.delta)
        return perp_max / w1_min


class ShearletAxisBand(DirectionPatch):
    """Directions w with |w_1 - 1| < eps; equivalently the cap of radius sqrt(2 eps)."""

    def __init__(self, dim: int, eps: float):
        if not 0 < eps < 1:
            raise ValueError("band half-width must lie in (0, 1)")
        self.dim = int(dim)
        self.eps = float(eps)
        self.threshold = shearlet_band_threshold(eps)

    def _contains_unit(self, w, strict):
        t = np.abs(w[:, 0] - 1.0)
        return t < self.eps if strict else t <= self.eps

    def constraints(self):
        e1 = np.zeros(self.dim)
        e1[0] = 1.0
        P = np.eye(self.dim)[1:]  # projection onto the shear coordinates
        # v_1 > 0  and  threshold * v_1 - |v_perp| > 0
        return [(e1, 0.0, None), (self.threshold * e1, -1.0, P)]

    def max_perp_ratio(self):
        return self.threshold


class DiagonalBand(DirectionPatch):
    """Directions w with 1/(1+eps) < sqrt(d) w_i < 1+eps for every coordinate."""

    def __init__(self, dim: int, eps: float):
        if eps <= 0:
            raise ValueError("band parameter must be positive")
        self.dim = int(dim)
        self.eps = float(eps)

    def _contains_unit(self, w, strict):
        s = math.sqrt(self.dim) * w
        lo, hi = 1.0 / (1.0 + self.eps), 1.0 + self.eps
        if strict:
            return np.all((s > lo) & (s < hi), axis=1)
        return np.all((s >= lo) & (s <= hi), axis=1)

    def constraints(self):
        rd = math.sqrt(self.dim)
        cons = []
        for i in range(self.dim):
            e = np.zeros(self.dim)
            e[i] = 1.0
            # sqrt(d) v_i (1+eps) - |v| > 0   (lower side, concave)
            cons.append((rd * (1.0 + self.eps) * e, -1.0, None))
            # (1+eps) |v| - sqrt(d) v_i > 0   (upper side, convex)
            cons.append((-rd * e, (1.0 + self.eps), None))
        return cons

    def component_bounds(self):
        """Per-unit-vector coordinate range implied by the band."""
        rd = math.sqrt(self.dim)
        return 1.0 / ((1.0 + self.eps) * rd), (1.0 + self.eps) / rd

    def max_perp_ratio(self):
        lo, hi = self.component_bounds()
        return math.sqrt(self.dim - 1) * hi / lo


@dataclass(frozen=True)
class ConeSpec:
    """Truncated open cone C(W, R); R = 0 encodes the full cone over W."""

    patch: DirectionPatch
    R: float = 0.0

    def __post_init__(self):
        if self.R < 0:
            raise ValueError("cone truncation radius must be >= 0")

    def contains(self, v):
        v = np.asarray(v, dtype=float)
        single = v.ndim == 1
        v2 = np.atleast_2d(v)
        norms = np.linalg.norm(v2, axis=1)
        ok = norms > self.R
        ok &= norms > 0
        margins = self.patch.cone_margins(v2)
        ok &= np.all(margins > 0, axis=0)
        return bool(ok[0]) if single else ok

    def strictly_outside(self, v, rel_margin=0.0):
        """True where v fails the cone conditions by a strict margin."""
        v2 = np.atleast_2d(np.asarray(v, dtype=float))
        norms = np.linalg.norm(v2, axis=1)
        scale = np.maximum(norms, 1e-300)
        fail = norms <= self.R * (1.0 - rel_margin) if self.R > 0 else norms <= 0
        margins = self.patch.cone_margins(v2)
        fail |= np.any(margins < -rel_margin * scale[None, :], axis=0)
        return fail


def cone_contains(cone: ConeSpec, v):
    """Exact membership of a frequency vector in the truncated cone."""
    return cone.contains(v)


# ---------------------------------------------------------------------------
# convex images of windows under a linear map
# ---------------------------------------------------------------------------


class _ConvexImage:
    def linear_min(self, q):
        raise NotImplementedError

    def linear_max(self, q):
        return -self.linear_min(-np.asarray(q, dtype=float))

    def seminorm_max(self, P):
        raise NotImplementedError

    def seminorm_min_lb(self, P):
        return 0.0

    def norm_min_lb(self):
        raise NotImplementedError

    def norm_max(self):
        return self.seminorm_max(None)


class _Polytope(_ConvexImage):
    def __init__(self, vertices):
        self.v = np.atleast_2d(np.asarray(vertices, dtype=float))

    def linear_min(self, q):
        return float(np.min(self.v @ np.asarray(q, dtype=float)))

    def seminorm_max(self, P):
        pv = self.v if P is None else self.v @ P.T
        return float(np.max(np.linalg.norm(pv, axis=1)))

    def seminorm_min_lb(self, P):
        pv = self.v if P is None else self.v @ P.T
        if pv.shape[1] == 2:
            return _polygon_norm_min(pv)
        center = pv.mean(axis=0)
        n = np.linalg.norm(center)
        if n == 0:
            return 0.0
        return max(0.0, float(np.min(pv @ (center / n))))

    def norm_min_lb(self):
        if self.v.shape[1] == 2:
            return _polygon_norm_min(self.v)
        best = 0.0
        center = self.v.mean(axis=0)
        n = np.linalg.norm(center)
        if n > 0:
            best = max(best, self.linear_min(center / n))
        for vert in self.v:
            n = np.linalg.norm(vert)
            if n > 0:
                best = max(best, self.linear_min(vert / n))
        return max(best, 0.0)


def _polygon_norm_min(verts):
    """Exact min |v| over the convex hull of 2-d points (edge projections)."""
    from scipy.spatial import ConvexHull

    if len(verts) <= 2:
        hull_pts = verts
    else:
        try:
            hull_pts = verts[ConvexHull(verts).vertices]
        except Exception:  # degenerate hull (collinear points)
            hull_pts = verts
    best = math.inf
    m = len(hull_pts)
    for i in range(m):
        a = hull_pts[i]
        b = hull_pts[(i + 1) % m] if m > 1 else a
        ab = b - a
        denom = float(ab @ ab)
        t = 0.0 if denom == 0 else float(np.clip(-(a @ ab) / denom, 0.0, 1.0))
        best = min(best, float(np.linalg.norm(a + t * ab)))
    # containment of the origin means the true minimum is zero
    if m >= 3:
        inside = True
        for i in range(m):
            a, b = hull_pts[i], hull_pts[(i + 1) % m]
            cross = (b[0] - a[0]) * (-a[1]) - (b[1] - a[1]) * (-a[0])
            if cross < 0:
                inside = False
                break
        if inside:
            return 0.0
    return best


class _Ellipsoid(_ConvexImage):
    """Image {c + A u : |u| <= 1}; A may be rectangular."""

    def __init__(self, center, A):
        self.c = np.asarray(center, dtype=float)
        self.A = np.atleast_2d(np.asarray(A, dtype=float))

    def linear_min(self, q):
        q = np.asarray(q, dtype=float)
        return float(self.c @ q - np.linalg.norm(self.A.T @ q))

    def seminorm_max(self, P):
        c = self.c if P is None else P @ self.c
        A = self.A if P is None else P @ self.A
        return float(np.linalg.norm(c) + np.linalg.norm(A, 2))

    def seminorm_min_lb(self, P):
        c = self.c if P is None else P @ self.c
        A = self.A if P is None else P @ self.A
        return max(0.0, float(np.linalg.norm(c) - np.linalg.norm(A, 2)))

    def norm_min_lb(self):
        lb = float(np.linalg.norm(self.c) - np.linalg.norm(self.A, 2))
        n = np.linalg.norm(self.c)
        if n > 0:
            lb = max(lb, self.linear_min(self.c / n))
        return max(lb, 0.0)


class _MinkowskiSum(_ConvexImage):
    def __init__(self, parts: Sequence[_ConvexImage]):
        self.parts = list(parts)

    def linear_min(self, q):
        return sum(p.linear_min(q) for p in self.parts)

    def seminorm_max(self, P):
        return sum(p.seminorm_max(P) for p in self.parts)

    def norm_min_lb(self):
        # |v| >= <v, u> summed across parts, probing the total-center direction
        center = sum(
            p.c if isinstance(p, _Ellipsoid) else p.v.mean(axis=0) for p in self.parts
        )
        n = np.linalg.norm(center)
        if n == 0:
            return 0.0
        return max(0.0, self.linear_min(center / n))


# ---------------------------------------------------------------------------
# frequency windows
# ---------------------------------------------------------------------------


class FrequencyWindow:
    """Compact frequency window V with certified geometry hooks.

    ``image(M)`` returns a convex enclosure of M V-bar; for convex windows the
    enclosure is exact, for annulus sectors it is the enclosing component box,
    which keeps k_i certification sound (never complete).
    """

    dim: int
    sample_budget: int = 256

    def contains(self, xi, strict=True):
        xi = np.asarray(xi, dtype=float)
        single = xi.ndim == 1
        out = self._contains(np.atleast_2d(xi), strict)
        return bool(out[0]) if single else out

    def certificate_points(self) -> np.ndarray:
        """Deterministic points of the window closure (used to falsify k_i)."""
        raise NotImplementedError

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def image(self, M: np.ndarray) -> _ConvexImage:
        raise NotImplementedError

    def image_is_hull_exact(self) -> bool:
        return True

    def bounding_box(self):
        raise NotImplementedError

    def min_norm(self) -> float:
        raise NotImplementedError

    def max_norm(self) -> float:
        raise NotImplementedError


class BallWindow(FrequencyWindow):
    def __init__(self, center, radius: float):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        self.dim = self.center.size

    def _contains(self, xi, strict):
        d = np.linalg.norm(xi - self.center, axis=1)
        return d < self.radius if strict else d <= self.radius

    def certificate_points(self):
        pts = [self.center]
        for i in range(self.dim):
            e = np.zeros(self.dim)
            e[i] = self.radius
            pts.append(self.center + e)
            pts.append(self.center - e)
        return np.array(pts)

    def sample(self, n, rng):
        u = rng.standard_normal((n, self.dim))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        r = self.radius * rng.uniform(0.0, 1.0, size=n) ** (1.0 / self.dim)
        return self.center + u * r[:, None]

    def image(self, M):
        return _Ellipsoid(M @ self.center, self.radius * M)

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius

    def min_norm(self):
        return max(0.0, float(np.linalg.norm(self.center)) - self.radius)

    def max_norm(self):
        return float(np.linalg.norm(self.center)) + self.radius


class BoxWindow(FrequencyWindow):
    def __init__(self, lo, hi):
        self.lo = np.asarray(lo, dtype=float)
        self.hi = np.asarray(hi, dtype=float)
        if np.any(self.hi <= self.lo):
            raise ValueError("box must have positive extent")
        self.dim = self.lo.size

    def _contains(self, xi, strict):
        if strict:
            return np.all((xi > self.lo) & (xi < self.hi), axis=1)
        return np.all((xi >= self.lo) & (xi <= self.hi), axis=1)

    def corners(self):
        d = self.dim
        out = np.empty((2**d, d))
        for k in range(2**d):
            for i in range(d):
                out[k, i] = self.hi[i] if (k >> i) & 1 else self.lo[i]
        return out

    def certificate_points(self):
        mid = 0.5 * (self.lo + self.hi)
        pts = [mid]
        for i in range(self.dim):
            for val in (self.lo[i], self.hi[i]):
                p = mid.copy()
                p[i] = val
                pts.append(p)
        return np.vstack([np.array(pts), self.corners()])

    def sample(self, n, rng):
        return rng.uniform(self.lo, self.hi, size=(n, self.dim))

    def image(self, M):
        return _Polytope(self.corners() @ M.T)

    def bounding_box(self):
        return self.lo.copy(), self.hi.copy()

    def min_norm(self):
        nearest = np.clip(np.zeros(self.dim), self.lo, self.hi)
        return float(np.linalg.norm(nearest))

    def max_norm(self):
        return float(np.max(np.linalg.norm(self.corners(), axis=1)))


class ShearletBoxWindow(FrequencyWindow):
    """The window (1, 2) x B_1(0) in the remaining d-1 coordinates."""

    def __init__(self, dim: int):
        self.dim = int(dim)
        self.lo1, self.hi1 = 1.0, 2.0
        self.perp_radius = 1.0

    def _contains(self, xi, strict):
        p = np.linalg.norm(xi[:, 1:], axis=1)
        if strict:
            return (xi[:, 0] > self.lo1) & (xi[:, 0] < self.hi1) & (p < self.perp_radius)
        return (xi[:, 0] >= self.lo1) & (xi[:, 0] <= self.hi1) & (p <= self.perp_radius)

    def certificate_points(self):
        pts = []
        mids = (self.lo1, 0.5 * (self.lo1 + self.hi1), self.hi1)
        for x1 in mids:
            p = np.zeros(self.dim)
            p[0] = x1
            pts.append(p.copy())
            for j in range(1, self.dim):
                for s in (-1.0, 1.0):
                    q = p.copy()
                    q[j] = s * self.perp_radius
                    pts.append(q)
        return np.array(pts)

    def sample(self, n, rng):
        out = np.empty((n, self.dim))
        out[:, 0] = rng.uniform(self.lo1, self.hi1, size=n)
        if self.dim == 2:
            out[:, 1] = rng.uniform(-self.perp_radius, self.perp_radius, size=n)
        else:
            u = rng.standard_normal((n, self.dim - 1))
            u /= np.linalg.norm(u, axis=1, keepdims=True)
            r = self.perp_radius * rng.uniform(0, 1, size=n) ** (1.0 / (self.dim - 1))
            out[:, 1:] = u * r[:, None]
        return out

    def image(self, M):
        if self.dim == 2:
            corners = np.array(
                [
                    [self.lo1, -self.perp_radius],
                    [self.lo1, self.perp_radius],
                    [self.hi1, -self.perp_radius],
                    [self.hi1, self.perp_radius],
                ]
            )
            return _Polytope(corners @ M.T)
        seg = np.zeros((2, self.dim))
        seg[0, 0], seg[1, 0] = self.lo1, self.hi1
        return _MinkowskiSum(
            [_Polytope(seg @ M.T), _Ellipsoid(np.zeros(M.shape[0]), self.perp_radius * M[:, 1:])]
        )

    def bounding_box(self):
        lo = np.full(self.dim, -self.perp_radius)
        hi = np.full(self.dim, self.perp_radius)
        lo[0], hi[0] = self.lo1, self.hi1
        return lo, hi

    def min_norm(self):
        return self.lo1

    def max_norm(self):
        return math.hypot(self.hi1, self.perp_radius)


class AnnulusSectorWindow(FrequencyWindow):
    """{xi : r_lo < |xi| < r_hi, xi/|xi| in patch} for a direction patch."""

    def __init__(self, r_lo: float, r_hi: float, patch: DirectionPatch):
        if not 0 < r_lo < r_hi:
            raise ValueError("need 0 < r_lo < r_hi")
        self.r_lo = float(r_lo)
        self.r_hi = float(r_hi)
        self.patch = patch
        self.dim = patch.dim

    def _contains(self, xi, strict):
        n = np.linalg.norm(xi, axis=1)
        ok = (n > self.r_lo) & (n < self.r_hi) if strict else (n >= self.r_lo) & (n <= self.r_hi)
        good = n > 0
        out = np.zeros(len(xi), dtype=bool)
        if np.any(good):
            unit = xi[good] / n[good, None]
            out[good] = ok[good] & self.patch.contains_unit(unit, strict=strict)
        return out

    def _center_direction(self):
        if isinstance(self.patch, DiagonalBand):
            return np.full(self.dim, 1.0 / math.sqrt(self.dim))
        if isinstance(self.patch, SphericalCap):
            return self.patch.center
        if isinstance(self.patch, ShearletAxisBand):
            e = np.zeros(self.dim)
            e[0] = 1.0
            return e
        raise NotImplementedError

    def certificate_points(self):
        u = self._center_direction()
        mid = 0.5 * (self.r_lo + self.r_hi)
        pts = [mid * u, self.r_lo * u, self.r_hi * u]
        if isinstance(self.patch, DiagonalBand):
            lo, hi = self.patch.component_bounds()
            for k in range(2**self.dim):
                w = np.array([hi if (k >> i) & 1 else lo for i in range(self.dim)])
                w = w / np.linalg.norm(w)
                if self.patch.contains_unit(w, strict=False):
                    pts.append(self.r_lo * w)
                    pts.append(self.r_hi * w)
        elif isinstance(self.patch, SphericalCap):
            # witness the angular extent: chordal radius delta/2 stays strictly inside
            t = math.sqrt(1.0 / (1.0 - self.patch.delta**2 / 8.0) ** 2 - 1.0)
            for i in range(self.dim):
                tang = np.zeros(self.dim)
                tang[i] = 1.0
                tang -= (tang @ u) * u
                nt = np.linalg.norm(tang)
                if nt < 1e-12:
                    continue
                tang /= nt
                for s in (1.0, -1.0):
                    w = u + s * t * tang
                    pts.append(mid * w / np.linalg.norm(w))
        elif isinstance(self.patch, ShearletAxisBand):
            # half-width extent: unit vectors with first component 1 - eps/2
            eps = self.patch.eps
            tang = math.sqrt(eps - eps**2 / 4.0)
            for i in range(1, self.dim):
                for s in (1.0, -1.0):
                    w = np.zeros(self.dim)
                    w[0] = 1.0 - 0.5 * eps
                    w[i] = s * tang
                    pts.append(mid * w)
        return np.array(pts)

    def sample(self, n, rng):
        lo, hi = self.bounding_box()
        out = np.empty((n, self.dim))
        got = 0
        tries = 0
        while got < n:
            tries += 1
            if tries > 4000:
                raise RuntimeError("annulus sector sampling acceptance too low")
            cand = rng.uniform(lo, hi, size=(4 * n, self.dim))
            keep = cand[self._contains(cand, True)]
            take = min(n - got, len(keep))
            out[got : got + take] = keep[:take]
            got += take
        return out

    def image(self, M):
        lo, hi = self.bounding_box()
        box = BoxWindow(lo - 1e-300, hi + 1e-300)
        return box.image(M)

    def image_is_hull_exact(self):
        return False

    def bounding_box(self):
        if isinstance(self.patch, DiagonalBand):
            lo_u, hi_u = self.patch.component_bounds()
            return np.full(self.dim, self.r_lo * lo_u), np.full(self.dim, self.r_hi * hi_u)
        if isinstance(self.patch, (SphericalCap, ShearletAxisBand)):
            if isinstance(self.patch, SphericalCap):
                c, dl = self.patch.center, self.patch.delta
            else:
                # the axis band is the chordal cap sqrt(2 eps) around e1
                c = np.zeros(self.dim)
                c[0] = 1.0
                dl = math.sqrt(2.0 * self.patch.eps)
            w_lo = np.clip(c - dl, -1.0, 1.0)
            w_hi = np.clip(c + dl, -1.0, 1.0)
            ext = np.stack(
                [self.r_lo * w_lo, self.r_lo * w_hi, self.r_hi * w_lo, self.r_hi * w_hi]
            )
            return ext.min(axis=0), ext.max(axis=0)
        raise NotImplementedError

    def min_norm(self):
        return self.r_lo

    def max_norm(self):
        return self.r_hi


# ---------------------------------------------------------------------------
# three-valued predicates
# ---------------------------------------------------------------------------


class Cert(Enum):
    TRUE = "true"
    FALSE = "false"
    APPROX = "approx"


@dataclass(frozen=True)
class PredicateResult:
    """Outcome of a set predicate.

    ``confidence`` is the fraction of sampled window points consistent with
    membership of their image in the cone; certified results carry 1.0 / 0.0.
    ``witness`` is a frequency point exhibiting the certification when one
    exists (a failing point for k_i False, a hitting point for k_o True).
    """

    cert: Cert
    confidence: float
    witness: np.ndarray | None = None

    def is_true(self):
        return self.cert is Cert.TRUE

    def is_false(self):
        return self.cert is Cert.FALSE

    def truthy(self, min_confidence: float = 0.99) -> bool:
        if self.cert is Cert.APPROX:
            return self.confidence >= min_confidence
        return self.cert is Cert.TRUE


def _certify_subset(image: _ConvexImage, cone: ConeSpec) -> bool:
    """Certified: every point of the convex image lies in the open cone."""
    if not image.norm_min_lb() > cone.R:
        return False
    if cone.R == 0.0 and image.norm_min_lb() <= 0.0:
        return False
    for q, kappa, P in cone.patch.constraints():
        if kappa <= 0.0:
            lb = image.linear_min(q) + kappa * image.seminorm_max(P)
        else:
            lb = image.linear_min(q) + kappa * (
                image.norm_min_lb() if P is None else image.seminorm_min_lb(P)
            )
        if not lb > 0.0:
            return False
    return True


def _certify_disjoint(image: _ConvexImage, cone: ConeSpec) -> bool:
    """Certified: the convex image misses the open cone entirely."""
    if image.norm_max() <= cone.R:
        return True
    for q, kappa, P in cone.patch.constraints():
        if kappa <= 0.0:
            ub = image.linear_max(q) + kappa * (
                image.norm_min_lb() if P is None else image.seminorm_min_lb(P)
            )
        else:
            ub = image.linear_max(q) + kappa * image.seminorm_max(P)
        if ub <= 0.0:
            return True
    return False


def _predicate_rng(rng):
    # deterministic default keeps predicate outcomes reproducible run to run
    return rng if rng is not None else np.random.default_rng(0x5EED)


def k_i_contains(h: GroupElement, window: FrequencyWindow, cone: ConeSpec, rng=None) -> PredicateResult:
    """Does h^{-T} map the whole window into the truncated cone?"""
    M = h.inv_transpose
    certs = window.certificate_points()
    img_pts = certs @ M.T
    bad = cone.strictly_outside(img_pts)
    if np.any(bad):
        i = int(np.argmax(bad))
        return PredicateResult(Cert.FALSE, 0.0, witness=certs[i])
    if _certify_subset(window.image(M), cone):
        return PredicateResult(Cert.TRUE, 1.0)
    rng = _predicate_rng(rng)
    pts = window.sample(window.sample_budget, rng)
    inside = cone.contains(pts @ M.T)
    frac = float(np.mean(inside))
    if frac < 1.0:
        i = int(np.argmax(~inside))
        # sampled points are true window members, so a miss certifies False
        return PredicateResult(Cert.FALSE, frac, witness=pts[i])
    return PredicateResult(Cert.APPROX, frac)


def k_o_contains(h: GroupElement, window: FrequencyWindow, cone: ConeSpec, rng=None) -> PredicateResult:
    """Does h^{-T} map some window point into the truncated cone?"""
    M = h.inv_transpose
    certs = window.certificate_points()
    inside = cone.contains(certs @ M.T)
    if np.any(inside):
        i = int(np.argmax(inside))
        return PredicateResult(Cert.TRUE, 1.0, witness=certs[i])
    if _certify_disjoint(window.image(M), cone):
        return PredicateResult(Cert.FALSE, 0.0)
    rng = _predicate_rng(rng)
    pts = window.sample(window.sample_budget, rng)
    hit = cone.contains(pts @ M.T)
    if np.any(hit):
        i = int(np.argmax(hit))
        return PredicateResult(Cert.TRUE, 1.0, witness=pts[i])
    return PredicateResult(Cert.APPROX, 0.0)


# ---------------------------------------------------------------------------
# region sampling
# ---------------------------------------------------------------------------


@dataclass
class RegionSample:
    """Haar-weighted sample of a chart region.

    ``weights`` are importance weights over the *whole* drawn batch; the Haar
    integral of f over the region is estimated by
    sum(w_i f(h_i)) / n_drawn over accepted samples.
    """

    elements: list
    weights: np.ndarray
    n_drawn: int
    box: object
    acceptance: float


def patch_angular_cap(patch):
    """(center, angular radius) of a cap covering the direction patch."""
    if isinstance(patch, SphericalCap):
        return patch.center, 2.0 * math.asin(min(1.0, patch.delta / 2.0))
    if isinstance(patch, ShearletAxisBand):
        e = np.zeros(patch.dim)
        e[0] = 1.0
        return e, 2.0 * math.asin(min(1.0, math.sqrt(2.0 * patch.eps) / 2.0))
    if isinstance(patch, DiagonalBand):
        c = np.full(patch.dim, 1.0 / math.sqrt(patch.dim))
        return c, math.acos(max(-1.0, min(1.0, 1.0 / (1.0 + patch.eps))))
    raise NotImplementedError(f"no angular cap for patch type {type(patch).__name__}")


def window_direction_cap(window):
    """(center direction, angular radius) covering {v/|v| : v in the window}.

    Directions of a convex set are extreme at its extreme points, so the
    bounding-box corners give a sound (if loose) cap for box-like windows.
    """
    if isinstance(window, BallWindow):
        nc = float(np.linalg.norm(window.center))
        if window.radius >= nc:
            e = np.zeros(window.dim)
            e[0] = 1.0
            return e, math.pi
        return window.center / nc, math.asin(window.radius / nc)
    lo, hi = window.bounding_box()
    mid = (np.asarray(lo) + np.asarray(hi)) / 2.0
    nm = float(np.linalg.norm(mid))
    if np.all(lo <= 0) and np.all(hi >= 0) or nm == 0:
        e = np.zeros(len(lo))
        e[0] = 1.0
        return e, math.pi
    center = mid / nm
    corners = np.array(
        [[lo[i] if (k >> i) & 1 else hi[i] for i in range(len(lo))] for k in range(2 ** len(lo))]
    )
    norms = np.linalg.norm(corners, axis=1)
    if np.any(norms == 0):
        return center, math.pi
    cosang = np.clip(corners @ center / norms, -1.0, 1.0)
    return center, float(np.max(np.arccos(cosang)))


def _ko_chart_box(group: DilationGroup, window, cone, truncation_decades):
    """Chart box provably containing K_o(W, V, R) up to the scale truncation."""
    R = cone.R
    if R <= 0:
        raise ValueError("chart box derivation needs a positive truncation radius R")
    span = truncation_decades * math.log(10.0)
    kind = group.kind
    if kind == "similitude":
        a_max = window.max_norm() / R
        lo, hi = math.log(a_max) - span, math.log(a_max)
        try:
            w_c, w_ang = window_direction_cap(window)
            p_c, p_ang = patch_angular_cap(cone.patch)
        except NotImplementedError:
            return (lo, hi)
        ang = w_ang + p_ang
        if ang >= math.pi:
            return (lo, hi)
        # a rotation in K_o carries the window center to within the summed cap
        return (lo, hi, (w_c, p_c, ang))
    if kind == "diagonal":
        patch = cone.patch
        lo, hi = window.bounding_box()
        if isinstance(patch, DiagonalBand) and np.all(lo > 0):
            # Inside the band, component ratios of w = a^{-1} v are pinned to
            # within (1+eps)^{+-2}, so log a_i - log a_0 lives in a narrow
            # window-ratio slab and only the common scale spans the decades.
            eps = patch.eps
            a0_hi = math.log(hi[0] * (1.0 + eps) * math.sqrt(group.dim) / R)
            pad = 2.0 * math.log1p(eps)
            rel_lo = np.log(lo[1:] / hi[0]) - pad
            rel_hi = np.log(hi[1:] / lo[0]) + pad
            return ((a0_hi - span, a0_hi), rel_lo, rel_hi, [(1,) * group.dim])
        if isinstance(patch, DiagonalBand):
            comp_hi = (1.0 + patch.eps) * math.sqrt(group.dim)
        else:
            comp_hi = 1.0 / max(1e-12, _patch_min_component(patch))
        comp_abs = np.maximum(np.abs(lo), np.abs(hi))
        a_hi = comp_abs * comp_hi / R
        patterns = _sign_patterns(group.dim)
        return (np.log(a_hi) - span, np.log(a_hi), patterns)
    if kind == "shearlet":
        tau = cone.patch.max_perp_ratio()
        lo, hi = window.bounding_box()
        xi1_max = hi[0]
        if xi1_max <= 0:
            raise ValueError("shearlet chart box needs a window with positive xi_1")
        # |v| <= v_1 sqrt(1+tau^2) inside the cone forces a <= xi1_max sqrt(1+tau^2) / R
        a_max = xi1_max * math.sqrt(1.0 + tau * tau) / R
        c = group.anisotropy
        a_min = a_max * 10.0 ** (-truncation_decades)
        perp_over_lo1 = float(np.max(np.abs(np.stack([lo[1:], hi[1:]])))) / max(lo[0], 1e-12)
        # beta = b / a^c units; a^{1-c} is monotone, so bound it at the ends
        m = np.maximum(a_max ** (1.0 - c), a_min ** (1.0 - c))
        bw = tau + m * perp_over_lo1
        # both sign components sampled; rejection keeps whichever meets the cone
        return (math.log(a_max) - span, math.log(a_max), bw, (1, -1))
    raise NotImplementedError(f"no chart box derivation for group kind {kind!r}")


def region_chart_box(group, window, cone, truncation_decades=8):
    """Public handle on the K_o-covering chart box used by the region sampler."""
    return _ko_chart_box(group, window, cone, truncation_decades)


def _patch_min_component(patch):
    if isinstance(patch, SphericalCap):
        return max(1e-12, float(np.min(np.abs(patch.center)) - patch.delta))
    raise NotImplementedError


def _sign_patterns(d):
    return [tuple(1 if (k >> i) & 1 == 0 else -1 for i in range(d)) for k in range(2**d)]


def sample_region(
    group,
    window,
    cone,
    count,
    rng,
    mode="ko",
    truncation_decades=8,
    batch=4096,
    max_batches=400,
    min_acceptance=1e-4,
) -> RegionSample:
    """Rejection sampling of K_o or K_i with exact Haar importance weights.

    Accepts only certified members (k_o: witness found, k_i: certified True),
    so the sample is sound but may miss borderline elements.  Raises when the
    acceptance rate stays below ``min_acceptance``.
    """
    box = _ko_chart_box(group, window, cone, truncation_decades)
    keep_els = []
    keep_w = []
    n_drawn = 0
    pred = k_i_contains if mode == "ki" else k_o_contains
    for _ in range(max_batches):
        els, w = group.sample_chart(batch, rng, box)
        n_drawn += batch
        for e, wi in zip(els, w):
            res = pred(e, window, cone, rng=rng)
            if res.is_true():
                keep_els.append(e)
                keep_w.append(wi)
                if len(keep_els) >= count:
                    break
        if len(keep_els) >= count:
            break
        if n_drawn >= max_batches * batch // 2 and len(keep_els) / n_drawn < min_acceptance:
            raise RuntimeError(
                f"region appears empty: acceptance {len(keep_els)}/{n_drawn} "
                f"in chart box {box!r}"
            )
    if len(keep_els) < count:
        raise RuntimeError(
            f"could not draw {count} samples (got {len(keep_els)} from {n_drawn})"
        )
    return RegionSample(
        elements=keep_els[:count],
        weights=np.asarray(keep_w[:count]),
        n_drawn=n_drawn,
        box=box,
        acceptance=len(keep_els) / n_drawn,
    )


def sample_k_o(group, window, cone, count, rng, **kw) -> RegionSample:
    return sample_region(group, window, cone, count, rng, mode="ko", **kw)


def sample_k_i(group, window, cone, count, rng, **kw) -> RegionSample:
    return sample_region(group, window, cone, count, rng, mode="ki", **kw)


def c_set_contains(
    point,
    group: DilationGroup,
    window: FrequencyWindow,
    cone: ConeSpec,
    mode="outer",
    budget=512,
    rng=None,
    hint_targets=None,
) -> PredicateResult:
    """Membership of a frequency point in the geometric union set.

    The outer set unions h^{-T} V over K_o, the inner set over K_i.  Search
    strategy: draw targets inside V, transport ``point`` onto them and test
    the resulting element.  A hit certifies membership; exhausting the budget
    returns Approximate(0).  ``hint_targets`` are tried first; callers that
    know which window point generated ``point`` can certify in one step.
    """
    if budget <= 0:
        raise ValueError("search budget must be positive")
    point = np.asarray(point, dtype=float)
    rng = _predicate_rng(rng)
    if mode == "inner" and not cone.contains(point):
        # the inner union is contained in the cone itself
        return PredicateResult(Cert.FALSE, 0.0)
    if not group.in_open_orbit(point):
        return PredicateResult(Cert.FALSE, 0.0)
    pred = k_i_contains if mode == "inner" else k_o_contains
    targets = window.sample(budget, rng)
    if hint_targets is not None:
        targets = np.concatenate([np.atleast_2d(hint_targets), targets])
    for t in targets:
        try:
            h = group.transporter(point, t)
        except (ValueError, ZeroDivisionError):
            continue
        res = pred(h, window, cone, rng=rng)
        if res.is_true():
            return PredicateResult(Cert.TRUE, 1.0, witness=t)
    return PredicateResult(Cert.APPROX, 0.0)
