"""Maximization of the flux-to-length ratio over polylines.

Open curves keep their endpoints on the boundary of the domain; loops are
handled separately by :func:`loop_supremum_probe`.  The ascent is a
projected gradient method with a Sobolev-smoothed search direction and
backtracking.
"""
from __future__ import annotations

import enum
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import solve_banded

from .currents import Polyline3, circulation, length
from .domain import Ball, Domain
from .errors import DegenerateCurve, InvalidAngles, ZeroLength


class Provenance(str, enum.Enum):
    GENERATOR = "Generator"
    ASCENT = "Ascent"
    ANNEALING = "Annealing"


@dataclass(frozen=True, eq=False)
class CurveCandidate:
    curve: Polyline3
    flux: float
    len: float
    ratio: float
    provenance: Provenance = Provenance.ASCENT

    @classmethod
    def evaluate(cls, field, curve: Polyline3, provenance=Provenance.ASCENT, quad_order: int = 8):
        flux = circulation(field, curve, quad_order)
        L = length(curve)
        if L <= 0:
            raise ZeroLength("candidate has zero length")
        return cls(curve, flux, L, flux / L, Provenance(provenance))

    def to_dict(self) -> dict:
        return {
            "vertices": self.curve.vertices.tolist(),
            "closed": bool(self.curve.closed),
            "multiplicity": int(self.curve.multiplicity),
            "flux": self.flux,
            "len": self.len,
            "ratio": self.ratio,
            "provenance": self.provenance.value,
        }


@dataclass(frozen=True)
class OptimizerConfig:
    """Settings for :func:`ratio_ascent` and the multistart driver.

    ``step`` is the initial largest vertex displacement as a fraction of the
    domain diameter.  ``anneal_rounds`` perturb-and-reascend rounds are run
    on the best curve with amplitude shrinking by ``anneal_schedule``.
    """

    n_vertices: int = 64
    step: float = 0.05
    max_iters: int = 400
    tol_rel: float = 1e-11
    n_starts: int = 32
    seed: int = 0
    anneal_schedule: float = 0.5
    anneal_rounds: int = 0
    resample_every: int = 25
    smoothing: float = 4.0
    quad_order: int = 6
    fd_step: float = 1e-5

    def __post_init__(self):
        if self.n_vertices < 3:
            raise ValueError("n_vertices must be at least 3")
        if not 0 < self.anneal_schedule < 1:
            raise ValueError("anneal_schedule must lie in (0, 1)")
        if self.n_starts < 0 or self.max_iters < 1:
            raise ValueError("n_starts >= 0 and max_iters >= 1 required")


# ---------------------------------------------------------------------------
# generators


def diameter_curve(domain: Ball) -> Polyline3:
    """Vertical diameter oriented toward +z."""
    R = domain.radius
    return Polyline3(np.array([[0.0, 0.0, -R], [0.0, 0.0, R]]))


def axis_curve(domain: Domain) -> Polyline3:
    """Symmetry-axis segment through the domain, oriented toward +z."""
    lo, hi = domain.z_range
    return Polyline3(np.array([[0.0, 0.0, lo], [0.0, 0.0, hi]]))


def sector_competitors(domain: Ball, phi1: float, phi2: float):
    """Two-radii path and chord between polar angles ``phi1 <= phi2``.

    Angles are measured from +z in the half-plane ``y = 0, x >= 0``.  The
    path runs from the point at ``phi2`` to the centre and out to ``phi1``;
    the chord joins the same two points directly.

    Raises
    ------
    InvalidAngles
        Unless ``0 <= phi1 <= phi2 <= pi``.
    ZeroLength
        When ``phi1 == phi2`` (the chord degenerates).
    """
    if not (0 <= phi1 <= phi2 <= np.pi):
        raise InvalidAngles(f"need 0 <= phi1 <= phi2 <= pi, got {phi1}, {phi2}")
    R = domain.radius

    def pt(phi):
        return np.array([R * np.sin(phi), 0.0, R * np.cos(phi)])

    sector = Polyline3(np.array([pt(phi2), np.zeros(3), pt(phi1)]))
    chord = Polyline3(np.array([pt(phi2), pt(phi1)]))
    return sector, chord


# ---------------------------------------------------------------------------
# gradients


def field_jacobian(field, pts: np.ndarray, fd_step: float = 1e-5) -> np.ndarray:
    """Central-difference Jacobian ``J[m, i, j] = dB_i / dx_j``."""
    n = len(pts)
    shifted = np.concatenate([pts + fd_step * e for e in np.eye(3)]
                             + [pts - fd_step * e for e in np.eye(3)])
    vals = np.asarray(field(shifted), dtype=float)
    plus, minus = vals[:3 * n].reshape(3, n, 3), vals[3 * n:].reshape(3, n, 3)
    return np.transpose((plus - minus) / (2 * fd_step), (1, 2, 0))


def flux_gradient(field, c: Polyline3, fd_step: float = 1e-5, quad_order: int = 8) -> np.ndarray:
    """Gradient of the quadrature circulation with respect to each vertex.

    For a segment ``a -> b`` with nodes ``x = a + t (b - a)``,
    ``d/da = sum w [(1 - t) J^T d - B]`` and ``d/db = sum w [t J^T d + B]``
    with ``d = b - a``; only the field Jacobian is approximated.
    """
    t, w = np.polynomial.legendre.leggauss(quad_order)
    t, w = 0.5 * (t + 1), 0.5 * w
    a, b = c.segments()
    d = b - a
    pts = (a[:, None, :] + t[None, :, None] * d[:, None, :]).reshape(-1, 3)
    B = np.asarray(field(pts), dtype=float).reshape(len(a), quad_order, 3)
    J = field_jacobian(field, pts, fd_step).reshape(len(a), quad_order, 3, 3)
    JTd = np.einsum("sqij,si->sqj", J, d)
    ga = np.einsum("q,sqj->sj", w * (1 - t), JTd) - np.einsum("q,sqj->sj", w, B)
    gb = np.einsum("q,sqj->sj", w * t, JTd) + np.einsum("q,sqj->sj", w, B)
    n = c.n
    ia = np.arange(len(a))
    ib = (ia + 1) % n
    g = np.zeros((n, 3))
    np.add.at(g, ia, ga)
    np.add.at(g, ib, gb)
    return c.multiplicity * g


def length_gradient(c: Polyline3) -> np.ndarray:
    a, b = c.segments()
    u = (b - a) / np.linalg.norm(b - a, axis=1)[:, None]
    n = c.n
    ia = np.arange(len(a))
    g = np.zeros((n, 3))
    np.add.at(g, ia, -u)
    np.add.at(g, (ia + 1) % n, u)
    return abs(c.multiplicity) * g


def ratio_gradient(field, c: Polyline3, fd_step: float = 1e-5, quad_order: int = 8):
    """``(grad flux - R grad length) / length`` and the ratio ``R``."""
    F = circulation(field, c, quad_order)
    L = length(c)
    R = F / L
    g = (flux_gradient(field, c, fd_step, quad_order) - R * length_gradient(c)) / L
    return g, R


# ---------------------------------------------------------------------------
# ascent


def _smooth(g: np.ndarray, mu: float, closed: bool) -> np.ndarray:
    """Apply ``(I - mu D^2)^{-1}`` along the vertex index (H^1 gradient)."""
    n = len(g)
    if mu <= 0 or n < 3:
        return g
    if closed:
        from scipy.linalg import solve_circulant
        col = np.zeros(n)
        col[0], col[1], col[-1] = 1 + 2 * mu, -mu, -mu
        return solve_circulant(col, g)
    ab = np.zeros((3, n))
    ab[0, 1:] = -mu
    ab[1, :] = 1 + 2 * mu
    ab[2, :-1] = -mu
    # free (Neumann) ends
    ab[1, 0] = ab[1, -1] = 1 + mu
    return solve_banded((1, 1), ab, g)


def _clamp_inside(domain: Domain, v: np.ndarray, idx: np.ndarray) -> np.ndarray:
    if len(idx) == 0:
        return v
    sd = domain.signed_distance(v[idx])
    out = idx[sd > 0]
    if len(out):
        v = v.copy()
        v[out] = [domain.project_to_boundary(p, hint=p) for p in v[out]]
    return v


def _project_endpoints(domain: Domain, v: np.ndarray) -> np.ndarray:
    v = v.copy()
    for k, nb in ((0, 1), (-1, -2)):
        v[k] = domain.project_to_boundary(v[k], hint=v[k] - v[nb] if np.hypot(*v[k, :2]) == 0 else v[k])
    return v


def _direction(g: np.ndarray, v: np.ndarray, closed: bool, domain: Domain, mu: float) -> np.ndarray:
    d = _smooth(g, mu, closed)
    if closed:
        tang = np.roll(v, -1, axis=0) - np.roll(v, 1, axis=0)
        sl = slice(None)
    else:
        tang = np.zeros_like(v)
        tang[1:-1] = v[2:] - v[:-2]
        sl = slice(1, -1)
    tn = np.linalg.norm(tang, axis=1, keepdims=True)
    tang = np.divide(tang, tn, out=np.zeros_like(tang), where=tn > 0)
    d[sl] -= np.sum(d[sl] * tang[sl], axis=1, keepdims=True) * tang[sl]
    if not closed:
        nu = domain.outward_normal(v[[0, -1]])
        d[[0, -1]] -= np.sum(d[[0, -1]] * nu, axis=1, keepdims=True) * nu
    m = np.max(np.linalg.norm(d, axis=1))
    return d / m if m > 0 else d


def _uniform_enough(c: Polyline3) -> bool:
    s = c.segment_lengths()
    return s.max() <= 2 * s.min()


def ratio_ascent(field, domain: Domain, init: Polyline3, config: OptimizerConfig,
                 history: list | None = None) -> CurveCandidate:
    """Projected gradient ascent of the ratio from ``init``.

    Open curves have their endpoints projected onto the boundary first and
    after every step; interior vertices are kept in the closed domain.
    ``history`` (if given) receives the ratio after each accepted step.

    Raises
    ------
    DegenerateCurve
        If the curve length falls below ``1e-6 * diameter``.
    """
    diam = domain.diameter
    if length(init) < 1e-6 * diam:
        raise DegenerateCurve("initial curve is shorter than 1e-6 x diameter")
    q = config.quad_order
    closed = init.closed
    c = init
    if not closed:
        c = Polyline3(_project_endpoints(domain, np.array(c.vertices)), False, c.multiplicity)
    c = c.resample(config.n_vertices) if c.n != config.n_vertices or not _uniform_enough(c) else c
    c = Polyline3(_clamp_inside(domain, np.array(c.vertices), _interior(c)), closed, c.multiplicity)
    start = CurveCandidate.evaluate(field, init, quad_order=q) if _inside(domain, init) else None

    best = CurveCandidate.evaluate(field, c, quad_order=q)
    if start is not None and start.ratio > best.ratio:
        best = replace(start, provenance=Provenance.ASCENT)
    cur = best.curve
    R = best.ratio
    step = config.step * diam
    floor = 1e-12 * diam
    mu = config.smoothing * (config.n_vertices / 16.0) ** 2
    stall = 0
    for it in range(1, config.max_iters + 1):
        g, _ = ratio_gradient(field, cur, config.fd_step, q)
        d = _direction(g, np.array(cur.vertices), closed, domain, mu)
        if not np.any(d):
            break
        accepted = False
        while step >= floor:
            v = np.array(cur.vertices) + step * d
            if not closed:
                v = _project_endpoints(domain, v)
            v = _clamp_inside(domain, v, _interior(cur))
            try:
                trial = Polyline3(v, closed, cur.multiplicity)
            except ZeroLength:
                step *= 0.5
                continue
            if length(trial) < 1e-6 * diam:
                raise DegenerateCurve("curve length collapsed")
            Rt = circulation(field, trial, q) / length(trial)
            if Rt > R:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        gain = Rt - R
        cur, R = trial, Rt
        step = min(step * 1.5, 0.25 * diam)
        if history is not None:
            history.append(R)
        stall = stall + 1 if gain <= config.tol_rel * abs(R) else 0
        if it % config.resample_every == 0 or not _uniform_enough(cur):
            rs = cur.resample(config.n_vertices)
            if not closed:
                rs = Polyline3(_project_endpoints(domain, np.array(rs.vertices)), False, rs.multiplicity)
            Rr = circulation(field, rs, q) / length(rs)
            if Rr >= R:
                cur, R = rs, Rr
                if history is not None:
                    history.append(R)
        if R > best.ratio:
            best = CurveCandidate(cur, R * length(cur), length(cur), R, Provenance.ASCENT)
        if stall >= 10:
            break
    # recompute flux directly so ratio * len = flux holds to rounding
    return CurveCandidate.evaluate(field, best.curve, Provenance.ASCENT, q)


def _interior(c: Polyline3) -> np.ndarray:
    return np.arange(c.n) if c.closed else np.arange(1, c.n - 1)


def _inside(domain: Domain, c: Polyline3) -> bool:
    return bool(np.all(domain.signed_distance(c.vertices) <= 1e-9 * domain.diameter))


# ---------------------------------------------------------------------------
# multistart


def _workers() -> int:
    try:
        cap = int(os.environ.get("ISOFLUX_THREADS", "0"))
    except ValueError:
        cap = 0
    n = os.cpu_count() or 1
    return max(1, min(n, cap) if cap > 0 else n)


def random_boundary_points(domain: Domain, rng: np.random.Generator, n: int) -> np.ndarray:
    """Points on the boundary, uniform in azimuth and in boundary arclength."""
    sec = domain.meridian_section()
    s = rng.uniform(0.0, sec.boundary_param(sec.boundary[-1:])[0], n)
    xz = sec.point_at(s)
    az = rng.uniform(0.0, 2 * np.pi, n)
    return np.stack([xz[:, 0] * np.cos(az), xz[:, 0] * np.sin(az), xz[:, 1]], axis=-1)


def random_chord(field, domain: Domain, rng: np.random.Generator, n_vertices: int) -> Polyline3:
    """Straight boundary-to-boundary chord oriented to carry nonnegative flux."""
    diam = domain.diameter
    while True:
        p, q = random_boundary_points(domain, rng, 2)
        if np.linalg.norm(q - p) > 0.2 * diam:
            break
    t = np.linspace(0.0, 1.0, n_vertices)[:, None]
    c = Polyline3(p + t * (q - p))
    return c.reversed() if circulation(field, c) < 0 else c


def _pick_best(cands: list) -> CurveCandidate:
    top = max(c.ratio for c in cands)
    ties = [c for c in cands if c.ratio >= top - 1e-12 * abs(top)]
    return min(ties, key=lambda c: (c.len, tuple(c.curve.vertices[0])))


def _perturb(c: Polyline3, rng, amplitude: float, modes: int = 4) -> np.ndarray:
    n = c.n
    s = np.linspace(0.0, 1.0, n)
    bump = np.zeros((n, 3))
    for k in range(1, modes + 1):
        bump += rng.normal(size=3)[None, :] * np.sin(k * np.pi * s)[:, None] / k
    return np.array(c.vertices) + amplitude * bump


def multistart_maximize(field, domain: Domain, config: OptimizerConfig,
                        generators: list | None = None):
    """Best curve over random chords and generator curves.

    Returns ``(best, R0, all_starts)``; ``all_starts`` lists the ascent
    result of every start, generators first.  Results depend only on
    ``config`` (including its seed), not on the worker count.
    """
    gens = list(generators) if generators is not None else default_generators(domain)
    inits = [(g, Provenance.GENERATOR) for g in gens]
    for i in range(config.n_starts):
        rng = np.random.default_rng([config.seed, i])
        inits.append((random_chord(field, domain, rng, config.n_vertices), Provenance.ASCENT))

    def run(item):
        init, prov = item
        cand = ratio_ascent(field, domain, init, config)
        return replace(cand, provenance=prov)

    with ThreadPoolExecutor(max_workers=_workers()) as pool:
        results = list(pool.map(run, inits))
    best = _pick_best(results)
    rng = np.random.default_rng([config.seed, config.n_starts, 1])
    amp = 0.1 * domain.diameter
    for _ in range(config.anneal_rounds):
        v = _perturb(best.curve, rng, amp)
        v = _project_endpoints(domain, v)
        v = _clamp_inside(domain, v, np.arange(1, len(v) - 1))
        try:
            cand = ratio_ascent(field, domain, Polyline3(v), config)
        except (ZeroLength, DegenerateCurve):
            cand = None
        if cand is not None and cand.ratio > best.ratio:
            best = replace(cand, provenance=Provenance.ANNEALING)
        amp *= config.anneal_schedule
    return best, best.ratio, results


def default_generators(domain: Domain) -> list:
    if isinstance(domain, Ball):
        return [diameter_curve(domain)]
    return [axis_curve(domain)]


def meridian_circles(domain: Domain, n_vertices: int, counts: int = 3) -> list:
    """Circles in the half-plane ``y = 0`` at several sizes, both orientations."""
    sec = domain.meridian_section()
    lo, hi = domain.z_range
    zc = 0.5 * (lo + hi)
    width = float(sec.radius_at(np.array([zc]))[0])
    half = 0.5 * (hi - lo)
    out = []
    th = np.linspace(0.0, 2 * np.pi, n_vertices, endpoint=False)
    for frac in np.linspace(0.3, 0.9, counts):
        r = frac * 0.5 * min(width, half)
        cx = 0.5 * width
        v = np.stack([cx + r * np.cos(th), np.zeros_like(th), zc + r * np.sin(th)], axis=-1)
        loop = Polyline3(v, closed=True)
        out += [loop, loop.reversed()]
    return out


def loop_supremum_probe(field, domain: Domain, config: OptimizerConfig,
                        generators: list | None = None) -> CurveCandidate:
    """Best closed polyline reachable by ascent from meridian circles and ``generators``.

    Both orientations of every start are tried.
    """
    inits = meridian_circles(domain, config.n_vertices)
    for g in generators or []:
        inits += [g, g.reversed()]

    def run(loop):
        try:
            return ratio_ascent(field, domain, loop, config)
        except DegenerateCurve:
            return None

    with ThreadPoolExecutor(max_workers=_workers()) as pool:
        results = [r for r in pool.map(run, inits) if r is not None]
    return _pick_best(results)


# ---------------------------------------------------------------------------
# torus stress field


GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class TorusField:
    """Field tangent to the tori ``rho_c = const`` around a horizontal core circle.

    ``rho_c`` is the distance to the core circle of radius ``major``.  On
    each torus the field lines wind with constant slope ``winding`` (poloidal
    turns per toroidal turn).  The magnitude ``exp(-decay (rho_c - minor)^2)``
    equals one exactly on the torus ``rho_c = minor``, where an irrational
    slope makes every field line dense, and is below one elsewhere.
    """

    major: float = 2.0
    minor: float = 0.5
    winding: float = GOLDEN
    decay: float = 4.0

    def __call__(self, p):
        p = np.asarray(p, dtype=float)
        pts = np.atleast_2d(p)
        x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
        rho = np.hypot(x, y)
        safe = np.where(rho > 0, rho, 1.0)
        cx, cy = np.where(rho > 0, x / safe, 0.0), np.where(rho > 0, y / safe, 0.0)
        # toroidal part rho * phi_hat, poloidal part rho_c * theta_hat
        pol_r, pol_z = -z, rho - self.major
        T = np.stack([-y + self.winding * pol_r * cx,
                      x + self.winding * pol_r * cy,
                      self.winding * pol_z], axis=-1)
        tn = np.linalg.norm(T, axis=1, keepdims=True)
        rc = np.hypot(rho - self.major, z)
        mag = np.exp(-self.decay * (rc - self.minor) ** 2)[:, None]
        out = mag * np.divide(T, tn, out=np.zeros_like(T), where=tn > 0)
        return out[0] if p.ndim == 1 else out

    def domain(self) -> Ball:
        return Ball(self.major + self.minor + 1.0)

    def helix(self, p: int, q: int, n_vertices: int) -> Polyline3:
        """Closed curve on the unit-field torus: ``q`` toroidal and ``p`` poloidal turns."""
        t = np.linspace(0.0, 1.0, n_vertices, endpoint=False)
        phi, th = 2 * np.pi * q * t, 2 * np.pi * p * t
        rho = self.major + self.minor * np.cos(th)
        v = np.stack([rho * np.cos(phi), rho * np.sin(phi), self.minor * np.sin(th)], axis=-1)
        return Polyline3(v, closed=True)

    def generators(self, n_vertices: int, max_q: int = 64) -> list:
        """Helices along continued-fraction convergents of the winding slope."""
        out = []
        for p, q in convergents(self.winding, max_q):
            if n_vertices >= 8 * q:
                out.append(self.helix(p, q, n_vertices))
        return out


def torus_field(major: float, minor: float, winding: float = GOLDEN, decay: float = 4.0) -> TorusField:
    if not 0 < minor < major:
        raise ValueError("need 0 < minor < major")
    return TorusField(major, minor, winding, decay)


def convergents(x: float, max_q: int):
    """Continued-fraction convergents ``p/q`` of ``x`` with ``q <= max_q``."""
    out = []
    h0, h1, k0, k1 = 0, 1, 1, 0
    r = x
    for _ in range(40):
        a = int(np.floor(r))
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        if k1 > max_q:
            break
        if k1 > 0 and h1 > 0:
            out.append((h1, k1))
        frac = r - a
        if frac < 1e-14:
            break
        r = 1.0 / frac
    return out


# ---------------------------------------------------------------------------
# reports


def run_report(best: CurveCandidate, R0: float, starts: list, loop: CurveCandidate | None,
               config: OptimizerConfig) -> dict:
    rep = {
        "R0": R0,
        "best_curve": best.curve.vertices.tolist(),
        "best_len": best.len,
        "best_flux": best.flux,
        "best_provenance": best.provenance.value,
        "n_starts": config.n_starts,
        "seed": config.seed,
        "per_start_ratios": [c.ratio for c in starts],
    }
    if loop is not None:
        rep["loop_ratio"] = loop.ratio
        rep["margin_loops_vs_open"] = R0 - loop.ratio
    return rep


def write_report(path, report: dict):
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
