"""Polyline 1-currents.

Curves are oriented polylines with an integer multiplicity.  The module
provides mass, circulation against a vector field, the meridian projection
``q(x, y, z) = (sqrt(x^2 + y^2), z)``, planar Stokes fluxes on the meridian
half-plane and a two-sided estimate of the dual-norm distance between
curves.

Dual-norm convention: a test field ``B`` has ``||B|| = max(sup|B|, Lip B)``
and vanishing tangential part on the boundary.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .domain import Domain
from .errors import FieldEvaluationError, OpenCurve, OutsideDomain, ZeroLength

MIN_SEGMENT = 1e-12

Field = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class Polyline3:
    """Oriented polyline in R^3.

    Parameters
    ----------
    vertices : (n, 3) array, n >= 2
    closed : bool
        If true a closing segment joins the last vertex to the first.
    multiplicity : int
        Nonzero integer weight.
    """

    vertices: np.ndarray
    closed: bool = False
    multiplicity: int = 1

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 3 or len(v) < 2:
            raise ValueError("vertices must have shape (n, 3) with n >= 2")
        if not np.all(np.isfinite(v)):
            raise ValueError("vertices must be finite")
        if int(self.multiplicity) != self.multiplicity or self.multiplicity == 0:
            raise ValueError("multiplicity must be a nonzero integer")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "multiplicity", int(self.multiplicity))
        if np.any(self.segment_lengths() <= MIN_SEGMENT):
            raise ZeroLength("consecutive vertices must be distinct")

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def start(self) -> np.ndarray:
        return self.vertices[0]

    @property
    def end(self) -> np.ndarray:
        return self.vertices[-1]

    def segments(self):
        """Start and end points of every segment, including the closing one."""
        v = self.vertices
        if self.closed:
            return v, np.roll(v, -1, axis=0)
        return v[:-1], v[1:]

    def segment_lengths(self) -> np.ndarray:
        a, b = self.segments()
        return np.linalg.norm(b - a, axis=1)

    def reversed(self) -> "Polyline3":
        return Polyline3(self.vertices[::-1].copy(), self.closed, self.multiplicity)

    def with_multiplicity(self, k: int) -> "Polyline3":
        return Polyline3(self.vertices, self.closed, k)

    def translated(self, d) -> "Polyline3":
        return Polyline3(self.vertices + np.asarray(d, dtype=float), self.closed, self.multiplicity)

    def refine(self, k: int) -> "Polyline3":
        """Split every segment into ``k`` equal pieces (same trace)."""
        a, b = self.segments()
        t = np.arange(k)[None, :, None] / k
        pts = (a[:, None, :] + t * (b - a)[:, None, :]).reshape(-1, 3)
        if not self.closed:
            pts = np.vstack([pts, self.vertices[-1]])
        return Polyline3(pts, self.closed, self.multiplicity)

    def resample(self, n: int) -> "Polyline3":
        """``n`` vertices equally spaced in arclength along the current trace."""
        a, b = self.segments()
        seg = np.linalg.norm(b - a, axis=1)
        s = np.concatenate([[0.0], np.cumsum(seg)])
        pts = np.vstack([a, b[-1]])
        if self.closed:
            t = np.linspace(0.0, s[-1], n, endpoint=False)
        else:
            t = np.linspace(0.0, s[-1], n)
        out = np.stack([np.interp(t, s, pts[:, i]) for i in range(3)], axis=-1)
        return Polyline3(out, self.closed, self.multiplicity)

    def point_at(self, t):
        """Points at arclength fractions ``t`` in [0, 1]."""
        a, b = self.segments()
        seg = np.linalg.norm(b - a, axis=1)
        s = np.concatenate([[0.0], np.cumsum(seg)]) / seg.sum()
        pts = np.vstack([a, b[-1]])
        t = np.asarray(t, dtype=float)
        return np.stack([np.interp(t, s, pts[:, i]) for i in range(3)], axis=-1)


def length(c: Polyline3) -> float:
    """Mass of the current: ``|multiplicity| * sum of segment lengths``."""
    return float(abs(c.multiplicity) * c.segment_lengths().sum())


def _gauss(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


def quadrature_nodes(c: Polyline3, quad_order: int = 8):
    """Quadrature points and weighted tangents for integrating ``B . dx`` along ``c``.

    Returns
    -------
    pts : (m, 3) array
    tw : (m, 3) array
        ``multiplicity * weight * (b - a)``, so ``sum(B(pts) * tw)`` is the
        circulation.
    """
    t, w = _gauss(quad_order)
    a, b = c.segments()
    d = b - a
    pts = a[:, None, :] + t[None, :, None] * d[:, None, :]
    tw = c.multiplicity * w[None, :, None] * d[:, None, :]
    tw = np.broadcast_to(tw, pts.shape)
    return pts.reshape(-1, 3), tw.reshape(-1, 3)


def _evaluate(field: Field, pts: np.ndarray, per_segment: int) -> np.ndarray:
    try:
        vals = np.asarray(field(pts), dtype=float)
        ok = vals.shape == pts.shape and np.all(np.isfinite(vals))
    except FieldEvaluationError:
        raise
    except Exception:
        ok = False
    if ok:
        return vals
    # locate the first failing segment
    for k in range(len(pts) // per_segment):
        chunk = pts[k * per_segment:(k + 1) * per_segment]
        try:
            v = np.asarray(field(chunk), dtype=float)
        except Exception as exc:
            raise FieldEvaluationError(f"field evaluation failed: {exc}", segment=k) from exc
        if v.shape != chunk.shape or not np.all(np.isfinite(v)):
            raise FieldEvaluationError("field returned non-finite values", segment=k)
    raise FieldEvaluationError("field evaluation failed", segment=None)


def circulation(field: Field, c: Polyline3, quad_order: int = 8,
                domain: Domain | None = None) -> float:
    """``<B, c>``: Gauss-Legendre integral of ``B . dx`` over each segment.

    If ``domain`` is given, vertices outside its closure raise
    :class:`OutsideDomain`.
    """
    if domain is not None:
        sd = domain.signed_distance(c.vertices)
        if np.any(sd > 1e-9 * domain.diameter):
            raise OutsideDomain("curve leaves the domain")
    pts, tw = quadrature_nodes(c, quad_order)
    vals = _evaluate(field, pts, quad_order)
    return float(np.sum(vals * tw))


def ratio(field: Field, c: Polyline3, quad_order: int = 8) -> float:
    """Flux-to-length ratio ``<B, c> / |c|``."""
    L = length(c)
    if L <= MIN_SEGMENT:
        raise ZeroLength("curve has zero length")
    return circulation(field, c, quad_order) / L


# ---------------------------------------------------------------------------
# meridian half-plane


@dataclass(frozen=True, eq=False)
class MeridianCurve:
    """Polyline in the meridian half-plane, vertices ``(x >= 0, z)``."""

    vertices: np.ndarray
    endpoint_on_boundary: tuple = (False, False)
    closed: bool = False
    multiplicity: int = 1

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 1:
            raise ValueError("vertices must have shape (n, 2)")
        if np.any(v[:, 0] < -1e-12):
            raise ValueError("meridian vertices need x >= 0")
        v[:, 0] = np.maximum(v[:, 0], 0.0)
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "endpoint_on_boundary", tuple(bool(e) for e in self.endpoint_on_boundary))

    def length(self) -> float:
        v = self.vertices
        if self.closed:
            v = np.vstack([v, v[:1]])
        return float(abs(self.multiplicity) * np.linalg.norm(np.diff(v, axis=0), axis=1).sum())


def project_meridian(c: Polyline3, domain: Domain | None = None) -> MeridianCurve:
    """Vertexwise image under ``q``.

    Consecutive vertices with the same image are merged, so a horizontal
    circle about the axis maps to a single point of zero length.
    """
    v = c.vertices
    q = np.stack([np.hypot(v[:, 0], v[:, 1]), v[:, 2]], axis=-1)
    keep = np.ones(len(q), dtype=bool)
    keep[1:] = np.linalg.norm(np.diff(q, axis=0), axis=1) > MIN_SEGMENT
    q = q[keep]
    closed = c.closed
    if closed and len(q) > 1 and np.linalg.norm(q[-1] - q[0]) <= MIN_SEGMENT:
        q = q[:-1]
    on = (False, False)
    if domain is not None and not c.closed:
        tol = 1e-9 * domain.diameter
        d = domain.meridian_section().distance_to_boundary(q[[0, -1], 0], q[[0, -1], 1])
        on = (bool(d[0] <= tol), bool(d[1] <= tol))
    return MeridianCurve(q, on, closed, c.multiplicity)


def lift(m: MeridianCurve, azimuth: float = 0.0) -> Polyline3:
    """Place a meridian curve in the half-plane at the given azimuth."""
    x, z = m.vertices[:, 0], m.vertices[:, 1]
    v = np.stack([x * np.cos(azimuth), x * np.sin(azimuth), z], axis=-1)
    return Polyline3(v, m.closed, m.multiplicity)


def _triangle_rule(order: int):
    """Duffy-collapsed Gauss rule on the reference triangle (0, e1, e2)."""
    t, w = _gauss(order)
    U, V = np.meshgrid(t, t, indexing="ij")
    W = np.outer(w, w) * U
    # x = u (1 - v), y = u v maps the unit square onto the triangle
    return (U * (1 - V)).ravel(), (U * V).ravel(), W.ravel()


def _fan_integral(w, origin, a, b, order):
    """Sum of ccw-signed integrals of ``w`` over triangles ``(origin, a_k, b_k)``."""
    if len(a) == 0:
        return 0.0
    s, t, wt = _triangle_rule(order)
    ea, eb = a - origin, b - origin
    det = ea[:, 0] * eb[:, 1] - ea[:, 1] * eb[:, 0]
    pts = origin + s[None, :, None] * ea[:, None, :] + t[None, :, None] * eb[:, None, :]
    vals = np.asarray(w(pts[..., 0].ravel(), pts[..., 1].ravel()), dtype=float).reshape(pts.shape[:2])
    return float(np.sum(det * (vals @ wt)))


def _sector_integral(w, center, radius, phi_a, phi_b, order):
    """ccw-signed integral over the circular sector swept from polar angle ``phi_a`` to ``phi_b``.

    Angles are measured from +z toward +x, so increasing ``phi`` is
    clockwise in the (x, z) plane.
    """
    if phi_a == phi_b:
        return 0.0
    n_pieces = max(1, int(np.ceil(abs(phi_b - phi_a) / (np.pi / 8))))
    t, wq = _gauss(order)
    edges = np.linspace(phi_a, phi_b, n_pieces + 1)
    total = 0.0
    for p0, p1 in zip(edges[:-1], edges[1:]):
        phi = p0 + t * (p1 - p0)
        rho = radius * t
        P, Rr = np.meshgrid(phi, rho, indexing="ij")
        x = center[0] + Rr * np.sin(P)
        z = center[1] + Rr * np.cos(P)
        vals = np.asarray(w(x.ravel(), z.ravel()), dtype=float).reshape(P.shape)
        total += np.sum(vals * Rr * np.outer(wq, wq)) * (p1 - p0) * radius
    return -float(total)


def stokes_flux(w: Callable, c: MeridianCurve, domain: Domain, quad_order: int = 12,
                boundary_tol: float | None = None) -> float:
    """Integral of ``w`` over the region bounded by ``c`` and the section boundary.

    Open curves are closed by the outer boundary arc of the meridian
    section, from the last vertex back to the first.  The region integral
    is signed so that the vertical diameter oriented toward +z encloses the
    half-section with positive sign (clockwise in the (x, z) plane).  The
    integral is evaluated exactly for the polygon by a fan of triangles
    around a fixed origin, each integrated with a collapsed Gauss rule; a
    circular boundary arc is integrated as a polar sector.

    Raises
    ------
    OpenCurve
        If an endpoint of an open curve is not on the section boundary.
    """
    sec = domain.meridian_section()
    v = np.asarray(c.vertices, dtype=float)
    origin = np.array(sec.arc_center if sec.arc_center is not None else (0.0, domain.z_center))
    total = 0.0
    if c.closed:
        a, b = v, np.roll(v, -1, axis=0)
        total = _fan_integral(w, origin, a, b, quad_order)
    else:
        tol = boundary_tol if boundary_tol is not None else 1e-7 * domain.diameter
        d = sec.distance_to_boundary(v[[0, -1], 0], v[[0, -1], 1])
        if np.any(d > tol):
            raise OpenCurve("curve endpoints must lie on the section boundary")
        total = _fan_integral(w, origin, v[:-1], v[1:], quad_order)
        if sec.arc_radius is not None:
            phi_end = np.arctan2(max(v[-1, 0] - origin[0], 0.0), v[-1, 1] - origin[1])
            phi_start = np.arctan2(max(v[0, 0] - origin[0], 0.0), v[0, 1] - origin[1])
            # endpoints lie on the arc, so the radial connectors have zero area
            total += _sector_integral(w, origin, sec.arc_radius, phi_end, phi_start, quad_order)
        else:
            path = sec.boundary_path(v[-1], v[0])
            total += _fan_integral(w, origin, path[:-1], path[1:], 4)
    return -c.multiplicity * total


# ---------------------------------------------------------------------------
# dual-norm estimates


@dataclass(frozen=True)
class StarNormEstimate:
    """Two-sided bound on ``||c1 - c2||_*``."""

    lower: float
    upper: float
    lower_method: str = "dictionary"
    upper_method: str = "mass"

    def __post_init__(self):
        if self.lower < 0 or self.upper < self.lower * (1 - 1e-12) - 1e-15:
            raise ValueError(f"invalid bounds {self.lower} > {self.upper}")


@dataclass(frozen=True, eq=False)
class BumpDictionary:
    """Normalized scalar Gaussian bumps times the coordinate directions.

    Each test field is ``e_k * g(x - c) * cut(x) / norm`` where
    ``cut = min(1, decay * dist(x, boundary))`` vanishes on the boundary.
    ``norm = max(1, 1/(sigma sqrt(e)) + decay)`` bounds both the sup norm
    and the Lipschitz constant by 1.
    """

    centers: np.ndarray
    sigma: float
    decay: float
    domain: Domain

    @classmethod
    def for_domain(cls, domain: Domain, size: int = 600, decay: float | None = None):
        lo, hi = domain.z_range
        rmax = float(np.max(domain.meridian_section().boundary[:, 0]))
        box = np.array([2 * rmax, 2 * rmax, hi - lo])
        n_centers = max(1, size // 3)
        # lattice spacing chosen so roughly n_centers points fall inside
        vol_frac = domain.meridian_section().area * 2 * np.pi * rmax / (3 * np.prod(box)) * 1.5
        h = (np.prod(box) * max(vol_frac, 0.3) / n_centers) ** (1 / 3)
        axes = [np.arange(-rmax + h / 2, rmax, h), np.arange(-rmax + h / 2, rmax, h),
                np.arange(lo + h / 2, hi, h)]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
        centers = grid[domain.contains(grid)]
        if decay is None:
            decay = 2.0 / h
        return cls(centers=centers, sigma=float(h), decay=float(decay), domain=domain)

    @property
    def norm(self) -> float:
        return max(1.0, 1.0 / (self.sigma * np.sqrt(np.e)) + self.decay)

    @property
    def size(self) -> int:
        return 3 * len(self.centers)

    def pairings(self, c: Polyline3, quad_order: int = 6) -> np.ndarray:
        """``<B_j, c>`` for every dictionary element, shape ``(n_centers * 3,)``."""
        pts, tw = quadrature_nodes(c, quad_order)
        dist = np.clip(-self.domain.signed_distance(pts), 0.0, None)
        cut = np.minimum(1.0, self.decay * dist)
        out = np.empty((len(self.centers), 3))
        chunk = max(1, 2_000_000 // max(1, len(pts)))
        for i in range(0, len(self.centers), chunk):
            cc = self.centers[i:i + chunk]
            d2 = np.sum((pts[None, :, :] - cc[:, None, :]) ** 2, axis=-1)
            g = np.exp(-d2 / (2 * self.sigma**2)) * cut[None, :]
            out[i:i + chunk] = g @ tw
        return (out / self.norm).ravel()


def _same_curve(c1: Polyline3, c2: Polyline3) -> bool:
    return (c1.closed == c2.closed and c1.multiplicity == c2.multiplicity
            and c1.vertices.shape == c2.vertices.shape and np.array_equal(c1.vertices, c2.vertices))


def _weighted_median(x, w):
    order = np.argsort(x)
    cw = np.cumsum(w[order])
    k = int(np.searchsorted(cw, 0.5 * cw[-1]))
    return float(x[order][min(k, len(x) - 1)])


def _azimuth_samples(c: Polyline3, per_segment: int = 16):
    """Dense samples along ``c`` with unwrapped azimuth and ``rho |dx|`` weights."""
    a, b = c.segments()
    t = (np.arange(per_segment) + 0.5) / per_segment
    pts = (a[:, None, :] + t[None, :, None] * (b - a)[:, None, :]).reshape(-1, 3)
    ds = np.repeat(np.linalg.norm(b - a, axis=1) / per_segment, per_segment)
    rho = np.hypot(pts[:, 0], pts[:, 1])
    theta = np.unwrap(np.arctan2(pts[:, 1], pts[:, 0]))
    return theta, rho * ds * abs(c.multiplicity)


def swept_area(curves, theta0: float | None = None):
    """Area swept rotating each curve into the half-plane at ``theta0``.

    Returns ``(area, theta0)``; when ``theta0`` is None the weighted median
    of the azimuths is used, which minimizes the total.
    """
    samples = [_azimuth_samples(c) for c in curves]
    if theta0 is None:
        th0 = _weighted_median(samples[0][0], samples[0][1] + 1e-300)
        for _ in range(3):
            shifted = []
            for th, w in samples:
                k = np.round((th0 - _weighted_median(th, w + 1e-300)) / (2 * np.pi))
                shifted.append(th + 2 * np.pi * k)
            th0 = _weighted_median(np.concatenate(shifted),
                                   np.concatenate([w for _, w in samples]) + 1e-300)
        theta0 = th0
    total = 0.0
    for th, w in samples:
        k = np.round((theta0 - _weighted_median(th, w + 1e-300)) / (2 * np.pi))
        total += float(np.sum(w * np.abs(th + 2 * np.pi * k - theta0)))
    return total, float(theta0)


def _closed_ring(m: MeridianCurve, domain: Domain) -> np.ndarray:
    v = np.asarray(m.vertices)
    if m.closed:
        return np.vstack([v, v[:1]])
    path = domain.meridian_section().boundary_path(v[-1], v[0])
    return np.vstack([v, path[1:]])


def _winding(ring: np.ndarray, pts: np.ndarray) -> np.ndarray:
    a = ring[:-1][None, :, :] - pts[:, None, :]
    b = ring[1:][None, :, :] - pts[:, None, :]
    cross = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
    dot = np.sum(a * b, axis=-1)
    return np.rint(np.sum(np.arctan2(cross, dot), axis=1) / (2 * np.pi))


def enclosed_abs_area(rings, weights) -> float:
    """``int |sum_k weights_k * winding(ring_k, .)| dA`` over the plane."""
    from shapely.geometry import LineString
    from shapely.ops import polygonize, unary_union

    lines = unary_union([LineString(r) for r in rings])
    faces = list(polygonize(lines))
    if not faces:
        return 0.0
    reps = np.array([f.representative_point().coords[0] for f in faces])
    wind = sum(wk * _winding(np.asarray(r), reps) for r, wk in zip(rings, weights))
    return float(sum(abs(wi) * f.area for wi, f in zip(wind, faces)))


def meridian_area_between(c1: Polyline3, c2: Polyline3, domain: Domain) -> float | None:
    """``int |winding|`` of ``q(c1) - q(c2)`` closed along the section boundary.

    Returns None when an open curve does not end on the boundary.
    """
    rings, weights = [], []
    for c, sgn in ((c1, 1), (c2, -1)):
        m = project_meridian(c, domain)
        if not m.closed and not all(m.endpoint_on_boundary):
            return None
        if len(m.vertices) < 2:
            continue
        ring = _closed_ring(m, domain)
        if len(ring) < 4:
            continue
        rings.append(ring)
        weights.append(sgn * m.multiplicity)
    if not rings:
        return 0.0
    return enclosed_abs_area(rings, weights)


def star_distance(c1: Polyline3, c2: Polyline3, domain: Domain, dictionary_size: int = 600,
                  dictionary: BumpDictionary | None = None) -> StarNormEstimate:
    """Lower and upper bounds on ``||c1 - c2||_*``.

    The lower bound is the largest pairing with a normalized bump field
    from a fixed dictionary.  The upper bound is the smaller of the mass
    ``|c1| + |c2|`` and twice the area of a surface spanning
    ``c1 - c2`` modulo pieces lying in the boundary (the curl of a test
    field is bounded by twice its Lipschitz constant).  The spanning
    surface is the area swept rotating both curves into a common meridian
    half-plane plus the area enclosed there between their projections.
    """
    if _same_curve(c1, c2):
        return StarNormEstimate(0.0, 0.0, "identical", "identical")
    d = dictionary if dictionary is not None else BumpDictionary.for_domain(domain, dictionary_size)
    lower = float(np.max(np.abs(d.pairings(c1) - d.pairings(c2))))
    upper = length(c1) + length(c2)
    method = "mass"
    mer = meridian_area_between(c1, c2, domain)
    if mer is not None:
        sw, _ = swept_area([c1, c2])
        area_bound = 2.0 * (mer + sw)
        if area_bound < upper:
            upper, method = area_bound, "area"
    return StarNormEstimate(lower, upper, "dictionary", method)


# ---------------------------------------------------------------------------
# geometry helpers and IO


def _point_segment_distance(p, a, b):
    d = b - a
    L2 = np.maximum(np.sum(d * d, axis=1), 1e-300)
    out = np.full(len(p), np.inf)
    for i in range(0, len(p), 4096):
        q = p[i:i + 4096]
        t = np.clip(np.einsum("mkj,kj->mk", q[:, None, :] - a[None], d) / L2, 0.0, 1.0)
        near = a[None] + t[..., None] * d[None]
        out[i:i + 4096] = np.min(np.linalg.norm(q[:, None, :] - near, axis=-1), axis=1)
    return out


def max_distance_to(c: Polyline3, ref: Polyline3, per_segment: int = 8) -> float:
    """Largest distance from points of ``c`` to the trace of ``ref``."""
    a, b = c.segments()
    t = np.linspace(0.0, 1.0, per_segment + 1)
    pts = (a[:, None, :] + t[None, :, None] * (b - a)[:, None, :]).reshape(-1, 3)
    ra, rb = ref.segments()
    return float(np.max(_point_segment_distance(pts, ra, rb)))


def hausdorff(c1: Polyline3, c2: Polyline3, per_segment: int = 8) -> float:
    """Hausdorff distance between traces (curves sampled, the other side exact)."""
    return max(max_distance_to(c1, c2, per_segment), max_distance_to(c2, c1, per_segment))


def write_curve_csv(path, c: Polyline3 | MeridianCurve, comment: str | None = None):
    """Vertex CSV plus ``<path>.json`` sidecar holding ``closed`` and ``multiplicity``."""
    meridian = isinstance(c, MeridianCurve)
    with open(path, "w", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh)
        w.writerow(["x", "z"] if meridian else ["x", "y", "z"])
        for row in c.vertices:
            w.writerow([repr(float(x)) for x in row])
    with open(str(path) + ".json", "w") as fh:
        json.dump({"closed": bool(c.closed), "multiplicity": int(c.multiplicity)}, fh, sort_keys=True)
        fh.write("\n")


def read_curve_csv(path):
    """Inverse of :func:`write_curve_csv`; header decides the curve type."""
    with open(path) as fh:
        rows = [r for r in csv.reader(line for line in fh if not line.startswith("#"))]
    header, data = rows[0], np.array(rows[1:], dtype=float)
    meta = {"closed": False, "multiplicity": 1}
    try:
        with open(str(path) + ".json") as fh:
            meta.update(json.load(fh))
    except FileNotFoundError:
        pass
    if header == ["x", "z"]:
        return MeridianCurve(data, closed=meta["closed"], multiplicity=meta["multiplicity"])
    if header == ["x", "y", "z"]:
        return Polyline3(data, meta["closed"], meta["multiplicity"])
    raise ValueError(f"unknown curve header {header}")
