"""Meissner field data.

Two sources are provided:

* :class:`BallField` -- the closed-form field ``B0`` of a ball in a uniform
  vertical applied field, together with ``curl B0``;
* :func:`solve_axisym_meissner` -- a finite-difference solve for the
  azimuthal component ``u = A0 . theta_hat`` of the Meissner gauge field of
  any solid of revolution.  Inside the sample ``curl B0 . theta_hat = u``.

Lengths are in units of the penetration depth.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.special import lpmv, shichi

from .domain import Ball, Domain
from .errors import BoxTooSmall, OutsideDomain, SolverDiverged

_SERIES_CUTOFF = 0.5
_N_SERIES = 14


def _f_over_r2(r):
    """(cosh r - sinh r / r) / r**2, smooth at r = 0."""
    r = np.asarray(r, dtype=float)
    out = np.empty_like(r)
    small = r < _SERIES_CUTOFF
    rs = r[small]
    # cosh r - sinh r / r = sum_k 2k r^{2k} / (2k+1)!
    acc = np.zeros_like(rs)
    fact = 6.0  # (2k+1)! for k = 1
    for k in range(1, _N_SERIES):
        acc += 2 * k * rs ** (2 * k - 2) / fact
        fact *= (2 * k + 2) * (2 * k + 3)
    out[small] = acc
    rb = r[~small]
    out[~small] = (np.cosh(rb) - np.sinh(rb) / rb) / rb**2
    return out


def _k_term(r):
    """(g - 2 f) / r**4 with g = (1 + r^2) sinh r / r - cosh r, f = cosh r - sinh r / r."""
    r = np.asarray(r, dtype=float)
    out = np.empty_like(r)
    small = r < _SERIES_CUTOFF
    rs = r[small]
    acc = np.zeros_like(rs)
    for k in range(2, _N_SERIES + 2):
        c = (1.0 / _fact(2 * k + 1) + 1.0 / _fact(2 * k - 1) - 1.0 / _fact(2 * k)
             - 4.0 * k / _fact(2 * k + 1))
        acc += c * rs ** (2 * k - 4)
    out[small] = acc
    rb = r[~small]
    g = (1 + rb**2) * np.sinh(rb) / rb - np.cosh(rb)
    f = np.cosh(rb) - np.sinh(rb) / rb
    out[~small] = (g - 2 * f) / rb**4
    return out


def _fact(n):
    return float(np.prod(np.arange(1, n + 1, dtype=float))) if n > 0 else 1.0


def ball_constant(R: float) -> float:
    """C(R) = 3/(2 R sinh R) * ((1 + R^2)/R sinh R - cosh R)."""
    return 3.0 / (2 * R * np.sinh(R)) * ((1 + R**2) / R * np.sinh(R) - np.cosh(R))


@dataclass(frozen=True)
class BallField:
    """Closed-form ``B0`` for the ball ``B(0, R)`` and applied field ``z_hat``.

    Instances are callable on point stacks of shape ``(n, 3)`` and return
    Cartesian vectors; no domain check is made on that path so the field can
    be differentiated across the boundary.  :meth:`b0` is the checked entry.
    """

    R: float = 1.0
    C_R: float = field(init=False)

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError("R must be positive")
        object.__setattr__(self, "C_R", ball_constant(self.R))

    @property
    def domain(self) -> Ball:
        return Ball(self.R)

    def __call__(self, p):
        p = np.asarray(p, dtype=float)
        pts = np.atleast_2d(p)
        x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
        r = np.linalg.norm(pts, axis=1)
        s = 3 * self.R / np.sinh(self.R)
        k = 0.5 * s * _k_term(r)
        out = np.empty_like(pts)
        out[:, 0] = k * z * x
        out[:, 1] = k * z * y
        out[:, 2] = self.C_R - s * _f_over_r2(r) - k * (x**2 + y**2)
        return out[0] if p.ndim == 1 else out

    def b0(self, p):
        """``B0(p)``; raises :class:`OutsideDomain` beyond ``R (1 + 1e-9)``."""
        pts = np.atleast_2d(np.asarray(p, dtype=float))
        if np.any(np.linalg.norm(pts, axis=1) > self.R * (1 + 1e-9)):
            raise OutsideDomain(f"point outside B(0, {self.R})")
        return self(p)

    def curl(self, p):
        """``curl B0``, purely azimuthal."""
        p = np.asarray(p, dtype=float)
        pts = np.atleast_2d(p)
        w = 1.5 * self.R / np.sinh(self.R) * _f_over_r2(np.linalg.norm(pts, axis=1))
        out = np.stack([-w * pts[:, 1], w * pts[:, 0], np.zeros(len(pts))], axis=-1)
        return out[0] if p.ndim == 1 else out

    def curl_meridian(self, x, z):
        """``curl B0 . y_hat`` on the meridian half-plane ``y = 0``, ``x >= 0``."""
        x = np.asarray(x, dtype=float)
        z = np.asarray(z, dtype=float)
        return 1.5 * self.R / np.sinh(self.R) * _f_over_r2(np.hypot(x, z)) * x

    def axis_flux(self) -> float:
        """Circulation of ``B0`` along the vertical diameter (closed form)."""
        R = self.R
        return float(3 * R / np.sinh(R) * (np.sinh(R) - shichi(R)[0]))

    def axis_ratio(self) -> float:
        return self.axis_flux() / (2 * self.R)


def b0_ball(field: BallField, p):
    return field.b0(p)


def curl_b0_ball_meridian(field: BallField, x, z):
    """``curl B0 . y_hat`` at meridian points; zero on the axis and nonnegative."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if np.any(np.hypot(x, z) > field.R * (1 + 1e-9)):
        raise OutsideDomain(f"meridian point outside radius {field.R}")
    return field.curl_meridian(x, z)


# ---------------------------------------------------------------------------
# axisymmetric solver


@dataclass(frozen=True, eq=False)
class AxisymField:
    """Azimuthal Meissner component ``u(r, z)`` on a node grid.

    ``u[i, j]`` is the value at ``(r[i], z[j])``; the first column is the
    axis and the outer ring of nodes carries the far-field data.
    """

    r: np.ndarray
    z: np.ndarray
    u: np.ndarray
    domain: Domain
    R_box: float
    tol: float
    residual: float
    multipoles: np.ndarray
    z_center: float
    outer_iterations: int
    rho_ref: float = 1.0

    @property
    def h_r(self) -> float:
        return float(self.r[1] - self.r[0])

    @property
    def h_z(self) -> float:
        return float(self.z[1] - self.z[0])

    @property
    def n_r(self) -> int:
        return len(self.r) - 1

    @property
    def n_z(self) -> int:
        return len(self.z) - 1

    @property
    def inside(self) -> np.ndarray:
        R, Z = np.meshgrid(self.r, self.z, indexing="ij")
        return self.domain.meridian_section().contains(R, Z)

    def interp(self, x, z):
        """Bilinear interpolation of ``u``; zero-extension is not attempted."""
        x = np.asarray(x, dtype=float)
        z = np.asarray(z, dtype=float)
        fi = np.clip(x / self.h_r, 0, self.n_r - 1e-12)
        fj = np.clip((z - self.z[0]) / self.h_z, 0, self.n_z - 1e-12)
        i = np.floor(fi).astype(int)
        j = np.floor(fj).astype(int)
        a, b = fi - i, fj - j
        u = self.u
        return ((1 - a) * (1 - b) * u[i, j] + a * (1 - b) * u[i + 1, j]
                + (1 - a) * b * u[i, j + 1] + a * b * u[i + 1, j + 1])

    def dipole_moment(self) -> float:
        """Coefficient ``D`` of the far field ``u ~ r/2 + D r / |x|^3``."""
        if not len(self.multipoles):
            return 0.0
        # basis functions are scaled by rho_ref**(l+1); P_1^1 = -sin(theta)
        return -float(self.multipoles[0]) * self.rho_ref**2


def _volume_fraction(section, rc, zc, hr, hz, sub=8):
    """r-weighted fraction of each cell ``[rc +- hr/2] x [zc +- hz/2]`` inside the section."""
    R, Z = np.meshgrid(rc, zc, indexing="ij")
    corner = [section.contains(np.clip(R + a * hr, 0, None), Z + b * hz)
              for a in (-0.5, 0.5) for b in (-0.5, 0.5)]
    allin = np.logical_and.reduce(corner)
    anyin = np.logical_or.reduce(corner)
    frac = allin.astype(float)
    mixed = anyin & ~allin
    if mixed.any():
        rm, zm = R[mixed], Z[mixed]
        off = (np.arange(sub) + 0.5) / sub - 0.5
        num = np.zeros(rm.shape)
        den = np.zeros(rm.shape)
        for a in off:
            rr = np.clip(rm + a * hr, 0, None)
            for b in off:
                num += section.contains(rr, zm + b * hz) * rr
                den += rr
        frac[mixed] = num / den
    return frac


def _far_basis(rr, zz, zc, L, rho_ref):
    """Decaying exterior solutions ``(rho_ref/rho)^(l+1) P_l^1(cos theta)``, l = 1..L."""
    rho = np.hypot(rr, zz - zc)
    c = (zz - zc) / rho
    return np.stack([(rho_ref / rho) ** (l + 1) * lpmv(1, l, c) for l in range(1, L + 1)], axis=-1)


def _growing_basis(rr, zz, zc, L, rho_ref):
    rho = np.hypot(rr, zz - zc)
    c = (zz - zc) / rho
    return np.stack([(rho / rho_ref) ** l * lpmv(1, l, c) for l in range(1, L + 1)], axis=-1)


def _assemble(r, z, frac):
    """Symmetric positive-definite system for ``psi = r u`` on interior nodes.

    Discretizes ``-d_r((1/r) d_r psi) - (1/r) d_zz psi + (chi/r) psi = 0``.
    """
    hr, hz = r[1] - r[0], z[1] - z[0]
    ri = r[1:-1]
    Ni, Nj = len(ri), len(z) - 2
    Rg = np.broadcast_to(ri[:, None], (Ni, Nj))
    rp, rm = ri + hr / 2, ri - hr / 2
    idx = np.arange(Ni * Nj).reshape(Ni, Nj)
    cp = np.broadcast_to((-1 / (rp * hr**2))[:, None], (Ni, Nj))
    cm = np.broadcast_to((-1 / (rm * hr**2))[:, None], (Ni, Nj))
    cz = -1 / (Rg * hz**2)
    diag = -(cp + cm) - 2 * cz + frac / Rg
    rows = [idx.ravel(), idx[:-1].ravel(), idx[1:].ravel(), idx[:, :-1].ravel(), idx[:, 1:].ravel()]
    cols = [idx.ravel(), idx[1:].ravel(), idx[:-1].ravel(), idx[:, 1:].ravel(), idx[:, :-1].ravel()]
    vals = [diag.ravel(), cp[:-1].ravel(), cm[1:].ravel(), cz[:, :-1].ravel(), cz[:, 1:].ravel()]
    A = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(Ni * Nj, Ni * Nj))
    return A, cp[-1, :], cz[:, 0]


def solve_axisym_meissner(domain: Domain, R_box: float, n_r: int, n_z: int,
                          tol: float = 1e-10, max_iter: int = 1000,
                          n_multipoles: int = 8, max_outer: int = 30) -> AxisymField:
    """Solve for ``u = A0 . theta_hat`` around a solid of revolution.

    The grid covers ``[0, R_box] x [z_c - R_box, z_c + R_box]`` with
    ``z_c`` the middle of the domain's z range.  ``u = 0`` on the axis; on
    the outer box ``u`` is set to ``r/2`` plus decaying exterior multipoles
    fitted to the solution in a shell around the sample, iterated to a fixed
    point.  Each linear solve is AMG-preconditioned CG to relative residual
    ``tol``.

    Raises
    ------
    BoxTooSmall
        If ``R_box`` is less than twice the domain diameter.
    SolverDiverged
        If a linear solve misses ``tol`` within ``max_iter`` iterations.
    """
    import pyamg

    if R_box < 2 * domain.diameter:
        raise BoxTooSmall(f"R_box={R_box} < 2 x diameter={2 * domain.diameter}")
    if n_r < 16 or n_z < 16:
        raise ValueError("grid too coarse")
    zc = domain.z_center
    section = domain.meridian_section()
    r = np.linspace(0.0, R_box, n_r + 1)
    z = np.linspace(zc - R_box, zc + R_box, n_z + 1)
    hr, hz = r[1] - r[0], z[1] - z[0]
    ri, zi = r[1:-1], z[1:-1]

    frac = _volume_fraction(section, ri, zi, hr, hz)
    A, c_right, c_bottom = _assemble(r, z, frac)
    # the hierarchy setup estimates spectral radii from np.random draws
    state = np.random.get_state()
    try:
        np.random.seed(0)
        ml = pyamg.smoothed_aggregation_solver(A, symmetry="symmetric")
    finally:
        np.random.set_state(state)

    # shell between the sample and the box where the exterior expansion is fitted
    bnd = section.boundary
    extent = float(np.max(np.hypot(bnd[:, 0], bnd[:, 1] - zc)))
    rho_in, rho_out = 1.25 * extent, 0.9 * R_box
    Rg, Zg = np.meshgrid(ri, zi, indexing="ij")
    rho = np.hypot(Rg, Zg - zc)
    shell = (rho > rho_in) & (rho < rho_out)
    step = max(1, int(shell.sum() // 40000))
    sr, sz = Rg[shell][::step], Zg[shell][::step]
    L = n_multipoles
    fit = np.hstack([_far_basis(sr, sz, zc, L, rho_in), _growing_basis(sr, sz, zc, L, rho_out)])

    right_far = _far_basis(np.full_like(zi, R_box), zi, zc, L, rho_in)
    bot_far = _far_basis(ri, np.full_like(ri, z[0]), zc, L, rho_in)
    top_far = _far_basis(ri, np.full_like(ri, z[-1]), zc, L, rho_in)

    coef = np.zeros(L)
    psi = None
    outer = 0
    for outer in range(1, max_outer + 1):
        u_right = R_box / 2 + right_far @ coef
        u_bot = ri / 2 + bot_far @ coef
        u_top = ri / 2 + top_far @ coef
        b = np.zeros((len(ri), len(zi)))
        b[-1, :] -= c_right * R_box * u_right
        b[:, 0] -= c_bottom * ri * u_bot
        b[:, -1] -= c_bottom * ri * u_top
        b = b.ravel()
        res = []
        psi = ml.solve(b, x0=psi, tol=tol, maxiter=max_iter, accel="cg", residuals=res)
        rel = np.linalg.norm(b - A @ psi) / np.linalg.norm(b)
        if not rel <= tol * 1.0001:
            raise SolverDiverged(f"relative residual {rel:.3e} > tol {tol:.1e} after {len(res)} iterations")
        u_in = psi.reshape(len(ri), len(zi)) / ri[:, None]
        target = (u_in - Rg / 2)[shell][::step]
        new = np.linalg.lstsq(fit, target, rcond=None)[0][:L]
        delta = np.max(np.abs(new - coef))
        coef = new
        if delta <= max(tol, 1e-12) * max(1.0, np.max(np.abs(coef))):
            break

    # final solve is consistent with the last fitted boundary data up to ``delta``
    u = np.empty((n_r + 1, n_z + 1))
    u[0, :] = 0.0
    u[1:-1, 1:-1] = u_in
    u[-1, 1:-1] = u_right
    u[1:-1, 0] = u_bot
    u[1:-1, -1] = u_top
    u[-1, [0, -1]] = R_box / 2 + _far_basis(np.array([R_box] * 2), z[[0, -1]], zc, L, rho_in) @ coef
    return AxisymField(r=r, z=z, u=u, domain=domain, R_box=float(R_box), tol=float(tol),
                       residual=float(rel), multipoles=coef, z_center=float(zc),
                       outer_iterations=outer, rho_ref=float(rho_in))


def curl_b0_axisym(field: AxisymField, x, z):
    """``curl B0 . theta_hat`` at meridian points inside the domain (equal to ``u``)."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    inside = field.domain.meridian_section().contains(x, z)
    if not np.all(inside):
        raise OutsideDomain("meridian point outside the domain")
    return field.interp(x, z)


def curl_h0_theta(field: AxisymField) -> np.ndarray:
    """``curl H0 . theta_hat = -(Delta u - u / r^2)`` at interior nodes (discrete)."""
    r, u = field.r, field.u
    hr, hz = field.h_r, field.h_z
    psi = r[:, None] * u
    ri = r[1:-1, None]
    rp, rm = ri + hr / 2, ri - hr / 2
    lap_r = ((psi[2:, 1:-1] - psi[1:-1, 1:-1]) / rp - (psi[1:-1, 1:-1] - psi[:-2, 1:-1]) / rm) / hr**2
    lap_z = (u[1:-1, 2:] - 2 * u[1:-1, 1:-1] + u[1:-1, :-2]) / hz**2
    return -(lap_r + lap_z)


def j0(field: AxisymField) -> float:
    """Meissner energy coefficient on the box.

    ``(1/2) int_Omega |curl B0|^2 + (1/2) int |H0 - z_hat|^2`` by the
    midpoint rule on grid cells with ``2 pi r`` weights and volume-fraction
    weighting of the first term.  See :func:`j0_tail_estimate` for the part
    outside the box.
    """
    r, z, u = field.r, field.z, field.u
    hr, hz = field.h_r, field.h_z
    rc = 0.5 * (r[1:] + r[:-1])
    zc = 0.5 * (z[1:] + z[:-1])
    psi = r[:, None] * u
    uc = 0.25 * (u[1:, 1:] + u[1:, :-1] + u[:-1, 1:] + u[:-1, :-1])
    dpsi_dr = 0.5 * ((psi[1:, 1:] + psi[1:, :-1]) - (psi[:-1, 1:] + psi[:-1, :-1])) / hr
    du_dz = 0.5 * ((u[1:, 1:] + u[:-1, 1:]) - (u[1:, :-1] + u[:-1, :-1])) / hz
    h_r = -du_dz
    h_z = dpsi_dr / rc[:, None]
    w = 2 * np.pi * rc[:, None] * hr * hz
    frac = _volume_fraction(field.domain.meridian_section(), rc, zc, hr, hz)
    inner = 0.5 * np.sum(uc**2 * frac * w)
    outer = 0.5 * np.sum((h_r**2 + (h_z - 1.0) ** 2) * w)
    return float(inner + outer)


def j0_tail_estimate(field: AxisymField) -> float:
    """Dipole energy outside the sphere inscribed in the box."""
    D = field.dipole_moment()
    return float(4 * np.pi * D**2 / (3 * field.R_box**3))


@dataclass(frozen=True)
class MeissnerSummary:
    J0: float
    R0_hint: float


def summarize(field: AxisymField) -> MeissnerSummary:
    """J0 and the flux-to-length ratio of the axis segment through the sample."""
    from .currents import MeridianCurve, stokes_flux

    lo, hi = field.domain.z_range
    axis = MeridianCurve(np.array([[0.0, lo], [0.0, hi]]))
    flux = stokes_flux(field.interp, axis, field.domain)
    return MeissnerSummary(J0=j0(field), R0_hint=flux / (hi - lo))


def export_field_csv(path, field: AxisymField, header_comment: str | None = None):
    """Write ``r,z,u,inside`` rows, z-major (all r for the first z, then the next)."""
    inside = field.inside
    with open(path, "w", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        w = csv.writer(fh)
        w.writerow(["r", "z", "u", "inside"])
        for j, zj in enumerate(field.z):
            for i, ri in enumerate(field.r):
                w.writerow([repr(float(ri)), repr(float(zj)), repr(float(field.u[i, j])),
                            int(inside[i, j])])


def field_summary(field: AxisymField) -> dict:
    return {
        "R_box": field.R_box,
        "n_r": field.n_r,
        "n_z": field.n_z,
        "tol": field.tol,
        "residual": field.residual,
        "J0": j0(field),
        "J0_tail_estimate": j0_tail_estimate(field),
    }


def export_summary_json(path, field: AxisymField, extra: dict | None = None):
    data = field_summary(field)
    if extra:
        data.update(extra)
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")
