"""Matrix dilation groups acting on R^d.

Provides the three built-in group families used throughout the package

    * similitude group: positive scalings times rotations, a * theta,
    * diagonal group: invertible diagonal matrices diag(a_1, ..., a_d),
    * shearlet-type group: +/- h(a, b) with parabolic-type scaling exponents,

plus a thin escape hatch for custom matrix groups.  Every group exposes the
same interface: canonical chart parameters, cached matrices and inverses, a
left Haar density with respect to chart Lebesgue measure, orbit predicates for
the dual action xi -> h^T xi, and Haar-weighted Monte Carlo sampling over
chart boxes.

Example::

    >>> g = build_group("shearlet", dim=2, anisotropy=(0.5,))
    >>> h = g.element((1, 0.25, 0.1))       # sign, scale, shear
    >>> h.matrix
    array([[0.25, 0.1 ],
           [0.  , 0.5 ]])
"""

from __future__ import annotations

import math
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = [
    "GroupElement",
    "DilationGroup",
    "SimilitudeGroup",
    "DiagonalGroup",
    "ShearletGroup",
    "CustomGroup",
    "OrbitDescriptor",
    "build_group",
    "random_rotation",
    "rotation_onto",
    "cap_area_fraction",
    "sample_cap_directions",
    "rotation_with_image",
]

# Relative tolerance for the matrix * inverse == identity self-check.
_INV_CHECK_RTOL = 1e-12


def random_rotation(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-uniform rotation from SO(d) via QR with sign-fixed diagonal."""
    A = rng.standard_normal((d, d))
    Q, R = np.linalg.qr(A)
    L = np.diagonal(R).copy()
    L[L == 0.0] = 1.0
    Q = Q * (L / np.abs(L))
    if np.linalg.det(Q) < 0:
        Q[:, -1] = -Q[:, -1]
    return Q


def rotation_onto(v: np.ndarray) -> np.ndarray:
    """A rotation in SO(d) mapping the first basis vector onto v/|v|.

    Deterministic: completes v to a basis with the identity columns and
    orthonormalizes.  Any such rotation works for ladder construction; this
    one is continuous away from the -e1 axis.
    """
    v = np.asarray(v, dtype=float)
    d = v.size
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("cannot orient onto the zero vector")
    cols = [v / n]
    for k in range(d):
        e = np.zeros(d)
        e[k] = 1.0
        w = e - sum(np.dot(e, c) * c for c in cols)
        wn = np.linalg.norm(w)
        if wn > 1e-6:
            # second projection pass clears the cancellation residue
            w = w - sum(np.dot(w, c) * c for c in cols)
            cols.append(w / np.linalg.norm(w))
        if len(cols) == d:
            break
    R = np.column_stack(cols)
    if np.linalg.det(R) < 0:
        R[:, -1] = -R[:, -1]
    return R


def cap_area_fraction(d: int, ang: float) -> float:
    """Area fraction of the angular cap {x : angle(x, u) < ang} on S^{d-1}."""
    if ang >= math.pi:
        return 1.0
    if ang <= 0:
        return 0.0
    if d == 2:
        return ang / math.pi
    if d == 3:
        return 0.5 * (1.0 - math.cos(ang))
    th = np.linspace(0.0, math.pi, 8193)
    dens = np.sin(th) ** (d - 2)
    total = np.trapezoid(dens, th)
    part = np.trapezoid(np.where(th <= ang, dens, 0.0), th)
    return float(part / total)


def sample_cap_directions(center, ang: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """Area-uniform points of the angular cap around ``center`` on S^{d-1}."""
    center = np.asarray(center, dtype=float)
    center = center / np.linalg.norm(center)
    d = center.size
    if ang >= math.pi:
        x = rng.standard_normal((n, d))
        return x / np.linalg.norm(x, axis=1, keepdims=True)
    if d == 2:
        base = math.atan2(center[1], center[0])
        phi = base + rng.uniform(-ang, ang, size=n)
        return np.column_stack([np.cos(phi), np.sin(phi)])
    if d == 3:
        z = rng.uniform(math.cos(ang), 1.0, size=n)
        th = np.arccos(z)
    else:
        # inverse cdf of the colatitude density sin^{d-2} on [0, ang]
        grid = np.linspace(0.0, ang, 4097)
        dens = np.sin(grid) ** (d - 2)
        cdf = np.concatenate([[0.0], np.cumsum((dens[1:] + dens[:-1]) * np.diff(grid) / 2)])
        cdf /= cdf[-1]
        th = np.interp(rng.uniform(0.0, 1.0, size=n), cdf, grid)
    frame = rotation_onto(center)
    perp = rng.standard_normal((n, d - 1))
    perp /= np.linalg.norm(perp, axis=1, keepdims=True)
    local = np.concatenate([np.cos(th)[:, None], np.sin(th)[:, None] * perp], axis=1)
    return local @ frame.T


def rotation_with_image(anchor, x, rng: np.random.Generator) -> np.ndarray:
    """Haar-conditional rotation mapping ``anchor`` onto the unit vector ``x``.

    Decomposes SO(d) over the sphere: a fixed section moving anchor to x,
    composed with a Haar-uniform stabilizer rotation of anchor.
    """
    anchor = np.asarray(anchor, dtype=float)
    anchor = anchor / np.linalg.norm(anchor)
    d = anchor.size
    section = rotation_onto(x) @ rotation_onto(anchor).T
    if d == 2:
        return section
    B = rotation_onto(anchor)  # first column = anchor
    S = np.eye(d)
    S[1:, 1:] = random_rotation(d - 1, rng)
    return section @ B @ S @ B.T


class GroupElement:
    """A single group element with cached matrix data.

    ``params`` is the group-specific chart tuple.  ``inv_transpose`` is the
    transpose of ``inv_matrix`` by construction, so both derive from one
    computation path.
    """

    __slots__ = ("group", "params", "matrix", "inv_matrix", "det")

    def __init__(self, group, params, matrix, inv_matrix):
        matrix = np.asarray(matrix, dtype=float)
        inv_matrix = np.asarray(inv_matrix, dtype=float)
        resid = np.abs(matrix @ inv_matrix - np.eye(matrix.shape[0])).max()
        scale = max(np.abs(matrix).max(), 1.0) * max(np.abs(inv_matrix).max(), 1.0)
        if resid > _INV_CHECK_RTOL * scale:
            raise ValueError(f"inverse self-check failed: residual {resid:.3e}")
        self.group = group
        self.params = params
        self.matrix = matrix
        self.inv_matrix = inv_matrix
        self.det = float(np.linalg.det(matrix))

    @property
    def inv_transpose(self) -> np.ndarray:
        return self.inv_matrix.T

    @property
    def op_norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))

    @property
    def inv_op_norm(self) -> float:
        return float(np.linalg.norm(self.inv_matrix, 2))

    def __repr__(self):
        return f"GroupElement({self.group.kind}, params={self.params})"


class OrbitDescriptor:
    """Open dual orbit of a group: membership predicate plus base point."""

    def __init__(self, contains: Callable[[np.ndarray], np.ndarray], base_point: np.ndarray, label: str):
        self._contains = contains
        self.base_point = np.asarray(base_point, dtype=float)
        self.label = label

    def contains(self, xi) -> np.ndarray:
        """Vectorized membership; accepts (d,) or (n, d) arrays."""
        xi = np.asarray(xi, dtype=float)
        single = xi.ndim == 1
        out = self._contains(np.atleast_2d(xi))
        return bool(out[0]) if single else out


class DilationGroup:
    """Common interface of all dilation groups."""

    kind = "abstract"

    def __init__(self, dim: int):
        if dim < 2:
            raise ValueError("dimension must be >= 2")
        self.dim = int(dim)

    # -- element construction ------------------------------------------------

    def element(self, params) -> GroupElement:
        raise NotImplementedError

    def params_from_matrix(self, M: np.ndarray):
        raise NotImplementedError

    def from_matrix(self, M: np.ndarray) -> GroupElement:
        return self.element(self.params_from_matrix(np.asarray(M, dtype=float)))

    def identity(self) -> GroupElement:
        return self.from_matrix(np.eye(self.dim))

    def compose(self, g: GroupElement, h: GroupElement) -> GroupElement:
        return self.from_matrix(g.matrix @ h.matrix)

    def inverse(self, g: GroupElement) -> GroupElement:
        return self.from_matrix(g.inv_matrix)

    # -- Haar measure ----------------------------------------------------

    def haar_density(self, params_array: np.ndarray) -> np.ndarray:
        """Left Haar density w.r.t. Lebesgue measure in chart coordinates.

        ``params_array`` has shape (n, chart_dim); rotation-valued factors of
        the chart carry their own normalized measure and do not appear here.
        """
        raise NotImplementedError

    def sample_chart(self, n: int, rng: np.random.Generator, box):
        """Uniform samples over a chart box with exact Haar importance weights.

        Returns ``(elements, weights)`` such that ``mean(w_i * f(h_i))``
        estimates the Haar integral of f over the box.  ``box`` is the
        group-specific chart-box structure (see each subclass).
        """
        raise NotImplementedError

    # -- dual action -------------------------------------------------------

    def orbit(self) -> OrbitDescriptor:
        raise NotImplementedError

    def in_open_orbit(self, xi) -> np.ndarray:
        return self.orbit().contains(xi)

    def contains_positive_scalar_dilations(self) -> bool:
        """Whether some alpha * identity with alpha != 1 belongs to the group."""
        raise NotImplementedError

    def transporter(self, point: np.ndarray, target: np.ndarray) -> GroupElement:
        """An element h with h^T point == target (both in the open orbit)."""
        raise NotImplementedError

    def aligned_element(self, direction: np.ndarray, scale: float) -> GroupElement:
        """Canonical probe element whose dual window axis points along ``direction``."""
        raise NotImplementedError

    def aligned_element_with_norm(self, direction, op_norm, bracket=(1e-12, 1e6)):
        """Aligned element whose operator norm hits ``op_norm`` (bisection on scale)."""
        direction = np.asarray(direction, dtype=float)
        lo, hi = bracket
        f = lambda a: self.aligned_element(direction, a).op_norm - op_norm
        flo, fhi = f(lo), f(hi)
        if flo > 0 or fhi < 0:
            raise ValueError("operator norm target outside bracket")
        for _ in range(200):
            mid = math.sqrt(lo * hi)
            if f(mid) < 0:
                lo = mid
            else:
                hi = mid
        return self.aligned_element(direction, math.sqrt(lo * hi))

    def spec_dict(self) -> dict:
        return {"kind": self.kind, "dimension": self.dim}


class SimilitudeGroup(DilationGroup):
    """Positive multiples of rotations: h = a * theta, a > 0, theta in SO(d).

    Chart: ``params = (a, theta)`` with theta stored as a matrix.  In d = 2,
    ``element((a, angle))`` with a float angle is also accepted.  The Haar
    density below is taken w.r.t. da (times the normalized SO(d) measure), so
    it equals 1/a.
    """

    kind = "similitude"

    def element(self, params) -> GroupElement:
        a, rot = params
        a = float(a)
        if a <= 0:
            raise ValueError("scale must be positive")
        if np.isscalar(rot):
            if self.dim != 2:
                raise ValueError("angle chart only available in dimension 2")
            t = float(rot)
            rot = np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])
        rot = np.asarray(rot, dtype=float)
        if np.abs(rot.T @ rot - np.eye(self.dim)).max() > 1e-10:
            raise ValueError("rotation factor is not orthogonal to 1e-10")
        if np.linalg.det(rot) < 0:
            raise ValueError("rotation factor must have determinant +1")
        return GroupElement(self, (a, rot), a * rot, rot.T / a)

    def params_from_matrix(self, M):
        a = float(np.linalg.norm(M[:, 0]))
        return (a, M / a)

    def haar_density(self, params_array):
        a = np.asarray(params_array, dtype=float).reshape(-1)
        return 1.0 / a

    def sample_chart(self, n, rng, box):
        """Haar-uniform draws over a scale range, optionally rotation-restricted.

        Box layouts:

        * ``(log_a_lo, log_a_hi)`` — rotations Haar-uniform over SO(d);
        * ``(log_a_lo, log_a_hi, (anchor, target, ang))`` — only rotations
          mapping ``anchor`` within angle ``ang`` of ``target``, drawn from
          the conditional Haar measure; weights carry the cap area fraction.
        """
        lo, hi = box[0], box[1]
        s = rng.uniform(lo, hi, size=n)
        if len(box) == 3:
            anchor, target, ang = box[2]
            frac = cap_area_fraction(self.dim, ang)
            if frac >= 1.0:
                rots = [random_rotation(self.dim, rng) for _ in range(n)]
                frac = 1.0
            else:
                xs = sample_cap_directions(target, ang, n, rng)
                rots = [rotation_with_image(anchor, x, rng) for x in xs]
        else:
            rots = [random_rotation(self.dim, rng) for _ in range(n)]
            frac = 1.0
        els = [self.element((math.exp(si), rot)) for si, rot in zip(s, rots)]
        w = np.full(n, (hi - lo) * frac)  # d(log a) is the Haar-natural coordinate
        return els, w

    def orbit(self):
        base = np.zeros(self.dim)
        base[0] = 1.0
        return OrbitDescriptor(lambda xi: np.linalg.norm(xi, axis=1) > 0, base, "nonzero")

    def contains_positive_scalar_dilations(self):
        return True

    def transporter(self, point, target):
        point = np.asarray(point, dtype=float)
        target = np.asarray(target, dtype=float)
        a = np.linalg.norm(target) / np.linalg.norm(point)
        R = rotation_onto(point) @ rotation_onto(target).T
        return self.element((a, R))

    def aligned_element(self, direction, scale):
        return self.element((float(scale), rotation_onto(direction)))


class DiagonalGroup(DilationGroup):
    """Invertible diagonal matrices diag(a_1, ..., a_d), all entries nonzero.

    Chart: ``params = (a_1, ..., a_d)``.  Left Haar density: prod 1/|a_i|.
    """

    kind = "diagonal"

    def element(self, params) -> GroupElement:
        a = np.asarray(params, dtype=float).reshape(self.dim)
        if np.any(a == 0):
            raise ValueError("diagonal entries must be nonzero")
        return GroupElement(self, tuple(a), np.diag(a), np.diag(1.0 / a))

    def params_from_matrix(self, M):
        off = M - np.diag(np.diagonal(M))
        if np.abs(off).max() > 1e-10 * max(1.0, np.abs(M).max()):
            raise ValueError("matrix is not diagonal")
        return tuple(np.diagonal(M))

    def haar_density(self, params_array):
        a = np.atleast_2d(np.asarray(params_array, dtype=float))
        return 1.0 / np.prod(np.abs(a), axis=1)

    def sample_chart(self, n, rng, box):
        """Haar-uniform draws from a log-coordinate box.

        Two box layouts (log coordinates are Haar-natural, so weights are the
        box volume in them):

        * ``(log_lo[d], log_hi[d], patterns)`` — independent axis ranges;
        * ``((t_lo, t_hi), rel_lo[d-1], rel_hi[d-1], patterns)`` — first axis
          absolute, remaining axes offset from it.  The shear to offset
          coordinates is unimodular, so weights are unchanged in form.
        """
        if len(box) == 4:
            (t_lo, t_hi), rel_lo, rel_hi, patterns = box
            rel_lo = np.asarray(rel_lo, dtype=float)
            rel_hi = np.asarray(rel_hi, dtype=float)
            t = rng.uniform(t_lo, t_hi, size=n)
            r = rng.uniform(rel_lo, rel_hi, size=(n, self.dim - 1))
            s = np.concatenate([t[:, None], t[:, None] + r], axis=1)
            vol = (t_hi - t_lo) * float(np.prod(rel_hi - rel_lo)) * len(patterns)
        else:
            log_lo, log_hi, patterns = box
            log_lo = np.asarray(log_lo, dtype=float)
            log_hi = np.asarray(log_hi, dtype=float)
            s = rng.uniform(log_lo, log_hi, size=(n, self.dim))
            vol = float(np.prod(log_hi - log_lo)) * len(patterns)
        idx = rng.integers(0, len(patterns), size=n)
        signs = np.asarray(patterns, dtype=float)[idx]
        a = signs * np.exp(s)
        els = [self.element(tuple(row)) for row in a]
        return els, np.full(n, vol)

    def orbit(self):
        base = np.full(self.dim, 1.0 / math.sqrt(self.dim))
        return OrbitDescriptor(
            lambda xi: np.all(xi != 0, axis=1), base, "all components nonzero"
        )

    def contains_positive_scalar_dilations(self):
        return True

    def transporter(self, point, target):
        point = np.asarray(point, dtype=float)
        target = np.asarray(target, dtype=float)
        return self.element(tuple(target / point))

    def aligned_element(self, direction, scale):
        # Dual image of the base direction is a_i^{-1} xi0_i; align it with
        # ``direction`` and fix the largest |a_i| to ``scale``.
        direction = np.asarray(direction, dtype=float)
        if np.any(direction == 0):
            raise ValueError("direction outside the open orbit")
        raw = 1.0 / direction  # up to scale, a_i proportional to xi0_i / xi_i
        a = raw / np.abs(raw).max() * float(scale)
        return self.element(tuple(a))


class ShearletGroup(DilationGroup):
    """Shearlet-type group: elements s * h(a, b) with s = +/-1, a > 0.

    h(a, b) has first row (a, b_2, ..., b_d) and diagonal tail
    (a^{c_2}, ..., a^{c_d}) with anisotropy exponents c_i in (0, 1].

    Chart: ``params = (s, a, b)`` with b of length d-1.  Left Haar density
    w.r.t. da db: a^{-d} (counting measure on the sign).
    """

    kind = "shearlet"

    def __init__(self, dim: int, anisotropy: Sequence[float]):
        super().__init__(dim)
        c = np.asarray(anisotropy, dtype=float).reshape(dim - 1)
        if np.any(c <= 0) or np.any(c > 1):
            raise ValueError("anisotropy exponents must lie in (0, 1]")
        self.anisotropy = c

    def element(self, params) -> GroupElement:
        s, a, b = params
        s = int(s)
        a = float(a)
        b = np.asarray(b, dtype=float).reshape(self.dim - 1)
        if s not in (1, -1):
            raise ValueError("sign component must be +1 or -1")
        if a <= 0:
            raise ValueError("scale must be positive")
        c = self.anisotropy
        M = np.zeros((self.dim, self.dim))
        M[0, 0] = a
        M[0, 1:] = b
        M[np.arange(1, self.dim), np.arange(1, self.dim)] = a**c
        # h(a,b)^{-1} = h(1/a, -b_j a^{-1-c_j}); the sign passes through.
        Minv = np.zeros((self.dim, self.dim))
        Minv[0, 0] = 1.0 / a
        Minv[0, 1:] = -b * a ** (-1.0 - c)
        Minv[np.arange(1, self.dim), np.arange(1, self.dim)] = a**-c
        return GroupElement(self, (s, a, tuple(b)), s * M, s * Minv)

    def params_from_matrix(self, M):
        s = 1 if M[0, 0] > 0 else -1
        a = s * M[0, 0]
        if a <= 0:
            raise ValueError("matrix is not in the group")
        b = s * M[0, 1:]
        return (s, float(a), tuple(b))

    def compose(self, g, h):
        # Closed-form law: (a,b)(a',b') = (aa', a b' + b a'^{c}); signs multiply.
        sg, ag, bg = g.params
        sh, ah, bh = h.params
        bg = np.asarray(bg)
        bh = np.asarray(bh)
        b = ag * bh + bg * ah**self.anisotropy
        return self.element((sg * sh, ag * ah, tuple(b)))

    def haar_density(self, params_array):
        a = np.atleast_2d(np.asarray(params_array, dtype=float))[:, 0]
        return a ** (-float(self.dim))

    def sample_chart(self, n, rng, box):
        """box = (log_a_lo, log_a_hi, beta_halfwidths[d-1], signs tuple).

        Shears are drawn in rescaled coordinates beta_i = b_i / a^{c_i},
        uniform over ``[-bw_i, bw_i]``.  Shear-to-frequency alignment scales
        like a^{c_i}, so a beta box keeps acceptance rates flat across the
        sampled scale range instead of collapsing at small a.
        """
        lo, hi, bw, signs = box
        bw = np.asarray(bw, dtype=float).reshape(self.dim - 1)
        s = rng.uniform(lo, hi, size=n)
        a = np.exp(s)
        beta = rng.uniform(-bw, bw, size=(n, self.dim - 1))
        b = beta * a[:, None] ** self.anisotropy
        sgn = np.asarray(signs)[rng.integers(0, len(signs), size=n)]
        els = [self.element((int(sgn[i]), a[i], tuple(b[i]))) for i in range(n)]
        # density a^{-d} da db = a^{1-d+sum(c)} d(log a) dbeta over the box
        w = (
            a ** (1.0 - self.dim + float(np.sum(self.anisotropy)))
            * (hi - lo)
            * float(np.prod(2 * bw))
            * len(signs)
        )
        return els, w

    def orbit(self):
        base = np.zeros(self.dim)
        base[0] = 1.0
        return OrbitDescriptor(lambda xi: xi[:, 0] != 0, base, "first component nonzero")

    def contains_positive_scalar_dilations(self):
        # alpha*id = s*h(a,b) forces b = 0, s = +1, a = alpha and
        # alpha^{c_i} = alpha, i.e. alpha = 1 unless every c_i equals 1.
        return bool(np.all(self.anisotropy == 1.0))

    def transporter(self, point, target):
        point = np.asarray(point, dtype=float)
        target = np.asarray(target, dtype=float)
        if point[0] == 0 or target[0] == 0:
            raise ValueError("transporter requires points in the open orbit")
        s = 1 if (target[0] / point[0]) > 0 else -1
        a = target[0] / (s * point[0])
        b = (target[1:] / s - a**self.anisotropy * point[1:]) / point[0]
        return self.element((s, a, tuple(b)))

    def aligned_element(self, direction, scale):
        # Shear chosen so h^{-T} maps the base ray onto ``direction``; the
        # sign component matches sign(direction[0]).
        direction = np.asarray(direction, dtype=float)
        if direction[0] == 0:
            raise ValueError("direction outside the open orbit")
        a = float(scale)
        s = 1 if direction[0] > 0 else -1
        b = -(a**self.anisotropy) * direction[1:] / direction[0]
        return self.element((s, a, tuple(b)))

    def spec_dict(self):
        return {
            "kind": self.kind,
            "dimension": self.dim,
            "anisotropy": list(map(float, self.anisotropy)),
        }


class CustomGroup(DilationGroup):
    """User-supplied matrix group.

    Caller provides the chart-to-matrix map, Haar density, orbit data and,
    when known, a scalar-dilation flag.  Predicates that cannot be decided
    without that flag raise.
    """

    kind = "custom"

    def __init__(
        self,
        dim: int,
        matrix_fn: Callable,
        density_fn: Callable,
        orbit_contains: Callable,
        base_point,
        scalar_dilations: bool | None = None,
        inv_fn: Callable | None = None,
        label: str = "custom",
    ):
        super().__init__(dim)
        self._matrix_fn = matrix_fn
        self._density_fn = density_fn
        self._orbit_contains = orbit_contains
        self._base_point = np.asarray(base_point, dtype=float)
        self._scalar_dilations = scalar_dilations
        self._inv_fn = inv_fn
        self.label = label

    def element(self, params):
        M = np.asarray(self._matrix_fn(params), dtype=float)
        Minv = (
            np.asarray(self._inv_fn(params), dtype=float)
            if self._inv_fn is not None
            else np.linalg.inv(M)
        )
        return GroupElement(self, params, M, Minv)

    def haar_density(self, params_array):
        return np.asarray(self._density_fn(params_array), dtype=float)

    def orbit(self):
        return OrbitDescriptor(self._orbit_contains, self._base_point, self.label)

    def contains_positive_scalar_dilations(self):
        if self._scalar_dilations is None:
            raise NotImplementedError(
                "custom group did not declare whether it contains scalar dilations"
            )
        return self._scalar_dilations


def build_group(kind: str, dim: int = 2, anisotropy: Iterable[float] | None = None, **kw) -> DilationGroup:
    """Build one of the named groups from plain config data.

    ``anisotropy`` is required for (and only used by) the shearlet family; a
    single float is broadcast across the d-1 tail exponents.
    """
    kind = kind.lower().replace("-", "").replace("_", "")
    if kind == "similitude":
        return SimilitudeGroup(dim)
    if kind == "diagonal":
        return DiagonalGroup(dim)
    if kind == "shearlet":
        if anisotropy is None:
            anisotropy = [0.5] * (dim - 1)
        if np.isscalar(anisotropy):
            anisotropy = [float(anisotropy)] * (dim - 1)
        return ShearletGroup(dim, anisotropy)
    if kind == "custom":
        return CustomGroup(dim, **kw)
    raise ValueError(f"unknown group kind: {kind!r}")
