"""Superconducting samples: balls and solids of revolution about the z axis.

Points are Cartesian ``(x, y, z)``.  Every query accepts a single point of
shape ``(3,)`` or a stack of shape ``(n, 3)``.  Boundary points are *not*
interior.

The meridian section of a domain is the half-plane region
``{(x, z) : 0 <= x < r(z)}``; its *outer boundary* is the part of the section
boundary lying on the surface of the domain (it excludes the axis segment).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import AmbiguousProjection

# Points closer than this (times the diameter) to the surface count as on it.
BOUNDARY_TOL = 1e-9


def _as_points(p):
    p = np.asarray(p, dtype=float)
    return p, p.ndim == 1


def _segment_nearest(pts, a, b):
    """Nearest points on segments ``a[k]->b[k]`` for each point in ``pts``.

    Returns (distance, nearest, t) with shapes (n, m), (n, m, 2), (n, m).
    """
    d = b - a
    dd = np.einsum("ij,ij->i", d, d)
    dd = np.where(dd > 0, dd, 1.0)
    rel = pts[:, None, :] - a[None, :, :]
    t = np.clip(np.einsum("nmj,mj->nm", rel, d) / dd, 0.0, 1.0)
    near = a[None, :, :] + t[..., None] * d[None, :, :]
    dist = np.linalg.norm(pts[:, None, :] - near, axis=-1)
    return dist, near, t


@dataclass(frozen=True, eq=False)
class MeridianSection:
    """Planar region ``{(x, z): 0 <= x < r(z)}`` with its outer boundary.

    ``boundary`` runs from the bottom axis point to the top axis point.  For a
    ball, ``arc_center``/``arc_radius`` describe the boundary exactly and the
    polyline is only a dense sampling of it.
    """

    boundary: np.ndarray
    profile: Optional[tuple] = None
    arc_center: Optional[tuple] = None
    arc_radius: Optional[float] = None
    _arclen: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        seg = np.linalg.norm(np.diff(self.boundary, axis=0), axis=1)
        object.__setattr__(self, "_arclen", np.concatenate([[0.0], np.cumsum(seg)]))

    @property
    def z_range(self):
        return float(self.boundary[0, 1]), float(self.boundary[-1, 1])

    @property
    def area(self) -> float:
        if self.arc_radius is not None:
            return 0.5 * np.pi * self.arc_radius**2
        x, z = self.boundary[:, 0], self.boundary[:, 1]
        # the closing edge runs down the axis where x = 0
        return 0.5 * abs(np.sum(x[:-1] * z[1:] - x[1:] * z[:-1]))

    def radius_at(self, z):
        """Profile radius r(z); zero outside the z range."""
        z = np.asarray(z, dtype=float)
        if self.arc_radius is not None:
            zc = self.arc_center[1]
            return np.sqrt(np.clip(self.arc_radius**2 - (z - zc) ** 2, 0.0, None))
        pz, pr = self.profile
        return np.where((z > pz[0]) & (z < pz[-1]), np.interp(z, pz, pr), 0.0)

    def contains(self, x, z):
        x = np.asarray(x, dtype=float)
        return (x >= 0) & (x < self.radius_at(z))

    def boundary_param(self, pts):
        """Arclength coordinate (from the bottom pole) of the nearest outer-boundary point."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if self.arc_radius is not None:
            c = np.asarray(self.arc_center, dtype=float)
            phi = np.arctan2(np.clip(pts[:, 0] - c[0], 0.0, None), pts[:, 1] - c[1])
            return self.arc_radius * (np.pi - phi)
        b = self.boundary
        dist, _, t = _segment_nearest(pts, b[:-1], b[1:])
        k = np.argmin(dist, axis=1)
        seg = np.diff(self._arclen)
        return self._arclen[k] + t[np.arange(len(pts)), k] * seg[k]

    def point_at(self, s):
        s = np.asarray(s, dtype=float)
        if self.arc_radius is not None:
            c = np.asarray(self.arc_center, dtype=float)
            phi = np.pi - s / self.arc_radius
            return np.stack([c[0] + self.arc_radius * np.sin(phi),
                             c[1] + self.arc_radius * np.cos(phi)], axis=-1)
        return np.stack([np.interp(s, self._arclen, self.boundary[:, 0]),
                         np.interp(s, self._arclen, self.boundary[:, 1])], axis=-1)

    def boundary_path(self, p, q, n_arc: int = 4096):
        """Polyline along the outer boundary from ``p`` to ``q`` (endpoints included)."""
        sp_, sq = self.boundary_param(np.array([p, q]))
        if self.arc_radius is not None:
            # nodes on a fixed global grid so overlapping paths share vertices
            ds = np.pi * self.arc_radius / n_arc
            k = np.arange(np.floor(min(sp_, sq) / ds) + 1, np.ceil(max(sp_, sq) / ds))
            grid = k * ds
            grid = grid[(grid > min(sp_, sq)) & (grid < max(sp_, sq))]
            if sq < sp_:
                grid = grid[::-1]
            path = self.point_at(np.concatenate([[sp_], grid, [sq]]))
        else:
            inner = (self._arclen > min(sp_, sq)) & (self._arclen < max(sp_, sq))
            mid = self.boundary[inner]
            if sq < sp_:
                mid = mid[::-1]
            path = np.vstack([self.point_at(sp_), mid, self.point_at(sq)])
        path[0], path[-1] = p, q
        return path

    def distance_to_boundary(self, x, z):
        pts = np.stack([np.ravel(x), np.ravel(z)], axis=-1).astype(float)
        if self.arc_radius is not None:
            c = np.asarray(self.arc_center, dtype=float)
            d = np.abs(self.arc_radius - np.hypot(pts[:, 0] - c[0], pts[:, 1] - c[1]))
        else:
            b = self.boundary
            d = np.empty(len(pts))
            for i in range(0, len(pts), 2048):
                dist, _, _ = _segment_nearest(pts[i:i + 2048], b[:-1], b[1:])
                d[i:i + 2048] = dist.min(axis=1)
        return d.reshape(np.shape(x))


class Domain:
    """Common interface of :class:`Ball` and :class:`SolidOfRevolution`."""

    diameter: float

    def meridian_section(self) -> MeridianSection:
        raise NotImplementedError

    @property
    def z_range(self):
        return self.meridian_section().z_range

    @property
    def z_center(self) -> float:
        lo, hi = self.z_range
        return 0.5 * (lo + hi)

    def contains(self, p):
        p, single = _as_points(p)
        pts = np.atleast_2d(p)
        inside = self.meridian_section().contains(np.hypot(pts[:, 0], pts[:, 1]), pts[:, 2])
        return bool(inside[0]) if single else inside

    def signed_distance(self, p):
        """Distance to the surface, negative inside."""
        p, single = _as_points(p)
        pts = np.atleast_2d(p)
        x = np.hypot(pts[:, 0], pts[:, 1])
        d = self.meridian_section().distance_to_boundary(x, pts[:, 2])
        d = np.where(self.contains(pts), -d, d)
        return float(d[0]) if single else d

    def project_to_boundary(self, p, hint=None):
        """Nearest point of the surface.

        ``hint`` is a direction used when the nearest point is not unique
        (a point on the symmetry axis facing a circle of nearest points).
        """
        p, single = _as_points(p)
        pts = np.atleast_2d(p)
        out = np.array([self._project_one(q, hint) for q in pts])
        return out[0] if single else out

    def _project_one(self, p, hint):
        sec = self.meridian_section()
        tol = BOUNDARY_TOL * self.diameter
        rho = float(np.hypot(p[0], p[1]))
        b = sec.boundary
        dist, near, _ = _segment_nearest(np.array([[rho, p[2]]]), b[:-1], b[1:])
        dist, near = dist[0], near[0]
        k = int(np.argmin(dist))
        best = near[k]
        rivals = ((dist <= dist[k] + 10 * tol)
                  & (np.linalg.norm(near - best, axis=1) > 1e-3 * self.diameter))
        if rho < tol:
            azim = self._hint_azimuth(hint, best[0] > tol)
        else:
            azim = np.array([p[0], p[1]]) / rho
            if rivals.any():
                if hint is None:
                    raise AmbiguousProjection(f"nearest boundary point of {p} is not unique")
                # pick the candidate lying furthest along the hint direction
                h = np.asarray(hint, dtype=float)
                d = np.array([h[0] * azim[0] + h[1] * azim[1], h[2]])
                cand = np.vstack([best, near[rivals]])
                best = cand[int(np.argmax((cand - [rho, p[2]]) @ d))]
        return np.array([best[0] * azim[0], best[0] * azim[1], best[1]])

    def _hint_azimuth(self, hint, needed):
        if hint is None or np.hypot(hint[0], hint[1]) == 0:
            if needed:
                raise AmbiguousProjection("point on the axis: nearest boundary points form a circle")
            return np.array([1.0, 0.0])
        h = np.asarray(hint, dtype=float)
        return h[:2] / np.hypot(h[0], h[1])

    def outward_normal(self, p):
        """Outward unit normal at (or near) a boundary point."""
        pts = np.atleast_2d(np.asarray(p, dtype=float))
        sec = self.meridian_section()
        rho = np.hypot(pts[:, 0], pts[:, 1])
        h = 1e-6 * self.diameter
        s = sec.boundary_param(np.stack([rho, pts[:, 2]], axis=-1))
        t = sec.point_at(s + h) - sec.point_at(s - h)
        n2 = np.stack([t[:, 1], -t[:, 0]], axis=-1)
        n2 /= np.linalg.norm(n2, axis=1, keepdims=True)
        safe = np.where(rho > 0, rho, 1.0)
        cx = np.where(rho > 0, pts[:, 0] / safe, 0.0)
        cy = np.where(rho > 0, pts[:, 1] / safe, 0.0)
        out = np.stack([n2[:, 0] * cx, n2[:, 0] * cy, n2[:, 1]], axis=-1)
        out /= np.linalg.norm(out, axis=1, keepdims=True)
        return out[0] if np.ndim(p) == 1 else out


@dataclass(frozen=True, eq=False)
class Ball(Domain):
    """Open ball of the given radius centred at the origin."""

    radius: float = 1.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius

    @property
    def z_range(self):
        return -self.radius, self.radius

    def meridian_section(self) -> MeridianSection:
        sec = self.__dict__.get("_section")
        if sec is None:
            phi = np.linspace(np.pi, 0.0, 4097)
            arc = self.radius * np.stack([np.sin(phi), np.cos(phi)], axis=-1)
            arc[[0, -1], 0] = 0.0
            sec = MeridianSection(arc, arc_center=(0.0, 0.0), arc_radius=self.radius)
            object.__setattr__(self, "_section", sec)
        return sec

    def contains(self, p):
        p, single = _as_points(p)
        inside = np.linalg.norm(np.atleast_2d(p), axis=1) < self.radius
        return bool(inside[0]) if single else inside

    def signed_distance(self, p):
        p, single = _as_points(p)
        d = np.linalg.norm(np.atleast_2d(p), axis=1) - self.radius
        return float(d[0]) if single else d

    def _project_one(self, p, hint):
        n = np.linalg.norm(p)
        if n < BOUNDARY_TOL * self.diameter:
            if hint is None or np.linalg.norm(hint) == 0:
                raise AmbiguousProjection("the centre of a ball is equidistant from its surface")
            p, n = np.asarray(hint, dtype=float), np.linalg.norm(hint)
        return self.radius * p / n

    def outward_normal(self, p):
        p = np.asarray(p, dtype=float)
        return p / np.linalg.norm(p, axis=-1, keepdims=True)


@dataclass(frozen=True, eq=False)
class SolidOfRevolution(Domain):
    """Solid ``{(x, y, z): sqrt(x^2 + y^2) < r(z), z_min < z < z_max}``.

    ``z`` and ``r`` sample a piecewise-linear profile; at least 64 samples
    are required and ``r`` must be positive strictly inside the z range.
    """

    z: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        r = np.asarray(self.r, dtype=float)
        if z.ndim != 1 or z.shape != r.shape:
            raise ValueError("profile arrays must be 1-D and of equal length")
        if len(z) < 64:
            raise ValueError("profile needs at least 64 samples")
        if np.any(np.diff(z) <= 0):
            raise ValueError("profile z must be strictly increasing")
        if np.any(r < 0) or np.any(r[1:-1] <= 0):
            raise ValueError("profile radius must be positive inside the z range")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "r", r)
        pts = [(0.0, z[0])] if r[0] > 0 else []
        pts += list(zip(r, z))
        if r[-1] > 0:
            pts.append((0.0, z[-1]))
        bnd = np.array(pts, dtype=float)
        object.__setattr__(self, "_section", MeridianSection(bnd, profile=(z, r)))

    def meridian_section(self) -> MeridianSection:
        return self._section

    @property
    def z_range(self):
        return float(self.z[0]), float(self.z[-1])

    @property
    def diameter(self) -> float:
        b = self._section.boundary
        dx = b[:, None, 0] + b[None, :, 0]
        dz = b[:, None, 1] - b[None, :, 1]
        return float(np.sqrt(np.max(dx**2 + dz**2)))

    @classmethod
    def from_function(cls, func, z_min, z_max, n=257):
        """Sample a smooth profile ``func(z)`` on ``n`` points."""
        z = np.linspace(z_min, z_max, n)
        r = np.clip(np.asarray(func(z), dtype=float), 0.0, None)
        return cls(z, r)

    @classmethod
    def spheroid(cls, equatorial: float, polar: float, n=257):
        """Spheroid with semi-axes ``equatorial`` (in xy) and ``polar`` (along z)."""
        return cls.from_function(
            lambda z: equatorial * np.sqrt(np.clip(1 - (z / polar) ** 2, 0, None)),
            -polar, polar, n)

    @classmethod
    def cylinder(cls, radius: float, z_min: float, z_max: float, n=65):
        return cls(np.linspace(z_min, z_max, n), np.full(n, float(radius)))


def read_profile_csv(path) -> SolidOfRevolution:
    """Load a ``z,r`` profile file (header required, z strictly increasing)."""
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row and not row[0].startswith("#")]
    if not rows or [c.strip() for c in rows[0]] != ["z", "r"]:
        raise ValueError(f"{path}: expected header 'z,r'")
    data = np.array([[float(a), float(b)] for a, b in rows[1:]])
    return SolidOfRevolution(data[:, 0], data[:, 1])


def write_profile_csv(path, domain: SolidOfRevolution):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["z", "r"])
        for a, b in zip(domain.z, domain.r):
            w.writerow([repr(float(a)), repr(float(b))])


def parse_domain(spec: str) -> Domain:
    """Parse ``ball:R``, ``spheroid:a,c``, ``cylinder:r,h`` or ``profile:PATH``."""
    kind, _, arg = spec.partition(":")
    kind = kind.strip().lower()
    if kind == "ball":
        return Ball(float(arg or 1.0))
    if kind == "spheroid":
        a, c = (float(v) for v in arg.split(","))
        return SolidOfRevolution.spheroid(a, c)
    if kind == "cylinder":
        rad, h = (float(v) for v in arg.split(","))
        return SolidOfRevolution.cylinder(rad, -h / 2, h / 2)
    if kind == "profile":
        return read_profile_csv(arg)
    raise ValueError(f"unknown domain spec {spec!r}")
