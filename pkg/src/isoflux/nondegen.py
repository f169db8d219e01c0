"""Quantitative checks around a ratio maximizer.

Perturbed curves are sampled in four families and compared with the
maximizer ``G0``: ratio deficit ``alpha = R(G0) - R(G)``, dual-norm distance
bounds, length control, tubular confinement, plus a sign scan of the
Meissner current on solids of revolution.
"""
from __future__ import annotations

import csv
import enum
import json
from dataclasses import dataclass, field

import numpy as np

from .currents import BumpDictionary, Polyline3, circulation, length, max_distance_to, star_distance
from .domain import Domain
from .errors import MaximalityViolated
from .meissner import AxisymField, BallField, curl_h0_theta
from .optimize import CurveCandidate, Provenance, field_jacobian


class Family(str, enum.Enum):
    PLANAR_ARC = "PlanarArc"
    FOURIER_NORMAL = "FourierNormal"
    TILTED_CHORD = "TiltedChord"
    LOOP = "Loop"


@dataclass(frozen=True)
class PerturbationSpec:
    """Recipe for a batch of perturbed curves.

    Each amplitude in ``amplitude_grid`` yields ``per_amplitude`` curves.
    ``mode_count`` is the number of sine modes of a Fourier perturbation
    (ignored by the other families).  Amplitudes are sagittas for arcs,
    displacement scales for Fourier perturbations, tilt angles (radians)
    for chords and loop radii for loops.
    """

    family: Family
    amplitude_grid: tuple
    mode_count: int = 4
    per_amplitude: int = 1
    seed: int = 0
    n_vertices: int = 64

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "amplitude_grid", tuple(float(a) for a in self.amplitude_grid))
        if any(a < 0 for a in self.amplitude_grid):
            raise ValueError("amplitudes must be nonnegative")


def default_specs(domain: Domain, total: int = 500, seed: int = 0) -> list:
    """Four families sized to give at least ``total`` samples."""
    R = 0.5 * domain.diameter
    n = max(1, int(np.ceil(total / 4)))
    k = max(1, int(np.ceil(n / 25)))
    return [
        PerturbationSpec(Family.PLANAR_ARC, tuple(R * np.geomspace(0.003, 0.6, 25)), per_amplitude=k, seed=seed),
        PerturbationSpec(Family.FOURIER_NORMAL, tuple(R * np.geomspace(0.003, 0.4, 25)), mode_count=5,
                         per_amplitude=k, seed=seed + 1),
        PerturbationSpec(Family.TILTED_CHORD, tuple(np.geomspace(0.003, 1.2, 25)), per_amplitude=k, seed=seed + 2),
        PerturbationSpec(Family.LOOP, tuple(R * np.geomspace(0.05, 0.6, 25)), per_amplitude=k, seed=seed + 3),
    ]


def _frame(p, q):
    """Unit chord direction and two unit normals."""
    e = (q - p) / np.linalg.norm(q - p)
    a = np.array([1.0, 0.0, 0.0]) if abs(e[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    n1 = a - (a @ e) * e
    n1 /= np.linalg.norm(n1)
    return e, n1, np.cross(e, n1)


def planar_arc(p, q, sagitta: float, direction, n_vertices: int = 64) -> Polyline3:
    """Circular arc from ``p`` to ``q`` bulging by ``sagitta`` toward ``direction``."""
    p, q = np.asarray(p, float), np.asarray(q, float)
    if sagitta == 0:
        t = np.linspace(0.0, 1.0, n_vertices)[:, None]
        return Polyline3(p + t * (q - p))
    half = 0.5 * np.linalg.norm(q - p)
    e = (q - p) / (2 * half)
    n = np.asarray(direction, float) - (np.asarray(direction, float) @ e) * e
    n /= np.linalg.norm(n)
    rad = (half**2 + sagitta**2) / (2 * sagitta)
    center = 0.5 * (p + q) - (rad - sagitta) * n
    beta = np.arctan2(half, rad - sagitta)
    ang = np.linspace(-beta, beta, n_vertices)
    pts = center + rad * (np.sin(ang)[:, None] * e + np.cos(ang)[:, None] * n)
    pts[0], pts[-1] = p, q
    return Polyline3(pts)


def arc_length(chord: float, sagitta: float) -> float:
    """Length of the circular arc with the given chord and sagitta."""
    half = 0.5 * chord
    rad = (half**2 + sagitta**2) / (2 * sagitta)
    return 2 * rad * np.arctan2(half, rad - sagitta)


def _line_exit(domain: Domain, o, d, tmax):
    """Largest ``t`` in [0, tmax] with ``o + t d`` inside (bisection)."""
    lo, hi = 0.0, tmax
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if domain.signed_distance(o + mid * d) <= 0:
            lo = mid
        else:
            hi = mid
    return lo


def _chord_through(domain: Domain, o, d, n_vertices):
    tmax = 2 * domain.diameter
    t1 = _line_exit(domain, o, d, tmax)
    t0 = -_line_exit(domain, o, -d, tmax)
    a, b = o + t0 * d, o + t1 * d
    a = domain.project_to_boundary(a, hint=a if np.hypot(*a[:2]) > 0 else d)
    b = domain.project_to_boundary(b, hint=b if np.hypot(*b[:2]) > 0 else d)
    t = np.linspace(0.0, 1.0, n_vertices)[:, None]
    return Polyline3(a + t * (b - a))


def _shrink_inside(domain: Domain, base: np.ndarray, bump: np.ndarray) -> np.ndarray:
    scale = 1.0
    for _ in range(60):
        v = base + scale * bump
        if np.all(domain.signed_distance(v[1:-1]) <= 0):
            return v
        scale *= 0.8
    return base


def sample_perturbations(field, domain: Domain, gamma0: Polyline3, spec: PerturbationSpec) -> list:
    """Curves near ``gamma0`` of one family; endpoints of open curves stay on the boundary."""
    rng = np.random.default_rng([spec.seed, list(Family).index(spec.family)])
    p, q = np.array(gamma0.start), np.array(gamma0.end)
    e, n1, n2 = _frame(p, q)
    base = gamma0.resample(spec.n_vertices)
    s = np.linspace(0.0, 1.0, spec.n_vertices)
    mid = 0.5 * (p + q)
    out = []
    for amp in spec.amplitude_grid:
        for _ in range(spec.per_amplitude):
            psi = rng.uniform(0.0, 2 * np.pi)
            direction = np.cos(psi) * n1 + np.sin(psi) * n2
            if spec.family is Family.PLANAR_ARC:
                if amp == 0:
                    out.append(gamma0)
                    continue
                sag = min(amp, 0.95 * 0.5 * np.linalg.norm(q - p))
                out.append(planar_arc(p, q, sag, direction, spec.n_vertices))
            elif spec.family is Family.FOURIER_NORMAL:
                if amp == 0:
                    out.append(gamma0)
                    continue
                coef = rng.normal(size=(spec.mode_count, 2)) / np.arange(1, spec.mode_count + 1)[:, None]
                modes = np.sin(np.outer(s, np.arange(1, spec.mode_count + 1)) * np.pi)
                disp = modes @ coef
                disp *= amp / max(np.max(np.linalg.norm(disp, axis=1)), 1e-300)
                bump = disp[:, :1] * n1 + disp[:, 1:] * n2
                v = _shrink_inside(domain, np.array(base.vertices), bump)
                out.append(Polyline3(v))
            elif spec.family is Family.TILTED_CHORD:
                tilt = amp
                axis = np.cos(tilt) * e + np.sin(tilt) * direction
                # offset the chord sideways, out of the tilt plane for skew chords
                psi2 = rng.uniform(0.0, 2 * np.pi)
                off_dir = np.cos(psi2) * n1 + np.sin(psi2) * n2
                off = rng.uniform(0.0, min(tilt, 0.5)) * 0.5 * domain.diameter
                c = _chord_through(domain, mid + off * off_dir, axis, spec.n_vertices)
                if circulation(field, c) < 0:
                    c = c.reversed()
                out.append(c)
            elif spec.family is Family.LOOP:
                out.append(_random_loop(domain, rng, amp, spec.n_vertices, mid, e, direction))
    return out


def _random_loop(domain, rng, radius, n_vertices, mid, e, direction):
    th = np.linspace(0.0, 2 * np.pi, n_vertices, endpoint=False)
    R = 0.5 * domain.diameter
    if rng.uniform() < 0.5:
        # circle or ellipse in a plane containing the chord direction
        aspect = rng.uniform(0.5, 1.5)
        center = mid + rng.uniform(0.0, R - radius) * direction * 0.9
        u, w = direction, e
    else:
        normal = rng.normal(size=3)
        normal /= np.linalg.norm(normal)
        u = np.cross(normal, [0.3, 0.5, 0.8])
        u /= np.linalg.norm(u)
        w = np.cross(normal, u)
        aspect = 1.0
        center = mid + rng.uniform(-1, 1, 3) * 0.3 * (R - radius)
    v = center + radius * (np.cos(th)[:, None] * u + aspect * np.sin(th)[:, None] * w)
    sd = domain.signed_distance(v)
    if np.any(sd > 0):
        shift = np.max(np.linalg.norm(v - mid, axis=1))
        v = mid + (v - mid) * (0.95 * R / shift)
    loop = Polyline3(v, closed=True)
    return loop if rng.uniform() < 0.5 else loop.reversed()


def generate_samples(field, domain: Domain, gamma0: Polyline3, specs: list) -> dict:
    """``{family name: [curves]}`` for every spec."""
    out: dict = {}
    for spec in specs:
        out.setdefault(spec.family.value, []).extend(sample_perturbations(field, domain, gamma0, spec))
    return out


# ---------------------------------------------------------------------------
# nondegeneracy


@dataclass
class NondegenReport:
    samples: int
    empirical_C0: float
    worst_curve: CurveCandidate | None
    N_used: float
    R_gamma0: float
    per_family: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)
    slope: float | None = None

    def to_dict(self) -> dict:
        return {
            "samples": self.samples,
            "empirical_C0": self.empirical_C0,
            "N_used": self.N_used,
            "R_gamma0": self.R_gamma0,
            "planar_arc_slope": self.slope,
            "violations": len(self.violations),
            "worst_curve": None if self.worst_curve is None else self.worst_curve.to_dict(),
            "families": self.per_family,
        }


def verify_nondegeneracy(field, domain: Domain, gamma0: Polyline3, samples, N: float = 2.0,
                         dictionary: BumpDictionary | None = None, strict: bool = True,
                         quad_order: int = 8) -> NondegenReport:
    """Empirical constant in ``R(G0) - R(G) >= C0 min(d*^N, 1)``.

    ``samples`` is a list of curves or a ``{family: curves}`` mapping.  The
    denominator uses the upper dual-norm bound.  Samples at distance zero
    are skipped.  With ``strict`` a sample beating ``G0`` by more than 1e-9
    raises :class:`MaximalityViolated`; otherwise it is recorded.
    """
    if not isinstance(samples, dict):
        samples = {"samples": list(samples)}
    if dictionary is None:
        dictionary = BumpDictionary.for_domain(domain)
    R0 = circulation(field, gamma0, quad_order) / length(gamma0)
    per_family = {}
    best_c0, worst, count, violations = np.inf, None, 0, []
    for fam, curves in samples.items():
        rec = {k: [] for k in ("alpha", "d_star_lower", "d_star_upper", "length", "max_tube_dist")}
        for c in curves:
            cand = CurveCandidate.evaluate(field, c, Provenance.ASCENT, quad_order)
            alpha = R0 - cand.ratio
            est = star_distance(c, gamma0, domain, dictionary=dictionary)
            rec["alpha"].append(alpha)
            rec["d_star_lower"].append(est.lower)
            rec["d_star_upper"].append(est.upper)
            rec["length"].append(cand.len)
            rec["max_tube_dist"].append(max_distance_to(c, gamma0))
            count += 1
            if alpha < -1e-9:
                violations.append((fam, cand, alpha))
                if strict:
                    raise MaximalityViolated(f"{fam} sample beats the maximizer by {-alpha:.3e}",
                                             curve=c, alpha=alpha)
            if est.upper > 0:
                c0 = alpha / min(est.upper**N, 1.0)
                if c0 < best_c0:
                    best_c0, worst = c0, cand
        per_family[fam] = rec
    slope = None
    if Family.PLANAR_ARC.value in per_family:
        slope = loglog_slope(per_family[Family.PLANAR_ARC.value]["d_star_upper"],
                             per_family[Family.PLANAR_ARC.value]["alpha"])
    return NondegenReport(samples=count, empirical_C0=float(best_c0), worst_curve=worst, N_used=N,
                          R_gamma0=R0, per_family=per_family, violations=violations, slope=slope)


def loglog_slope(d, alpha, d_max: float = 1.0) -> float | None:
    """Least-squares slope of ``log alpha`` against ``log d`` over positive pairs with ``d <= d_max``."""
    d, alpha = np.asarray(d, float), np.asarray(alpha, float)
    ok = (d > 0) & (alpha > 0) & (d <= d_max)
    if ok.sum() < 3:
        return None
    return float(np.polyfit(np.log(d[ok]), np.log(alpha[ok]), 1)[0])


# ---------------------------------------------------------------------------
# length and tube control


def field_norm(field, domain: Domain, n: int = 24, fd_step: float = 1e-5) -> float:
    """``max(sup |B|, Lip B)`` estimated on a lattice inside the domain."""
    lo, hi = domain.z_range
    rmax = float(np.max(domain.meridian_section().boundary[:, 0]))
    axes = [np.linspace(-rmax, rmax, n), np.linspace(-rmax, rmax, n), np.linspace(lo, hi, n)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    pts = pts[domain.signed_distance(pts) < -2 * fd_step]
    sup = float(np.max(np.linalg.norm(field(pts), axis=1)))
    J = field_jacobian(field, pts, fd_step)
    lip = float(np.max(np.linalg.norm(J, ord=2, axis=(1, 2))))
    return max(sup, lip)


@dataclass
class LengthControlReport:
    checked: int
    violations: int
    max_slack: float
    min_slack: float
    B_norm: float


def check_length_control(report: NondegenReport, length0: float, B_norm: float) -> LengthControlReport:
    """``| |G| - |G0| | <= (alpha |G| + ||B|| d*) / R(G0)`` for every recorded sample.

    Slack is right side minus left side; a violation is negative slack.
    """
    R0 = report.R_gamma0
    slacks = []
    for rec in report.per_family.values():
        a = np.asarray(rec["alpha"])
        L = np.asarray(rec["length"])
        d = np.asarray(rec["d_star_upper"])
        slacks.append((a * L + B_norm * d) / R0 - np.abs(L - length0))
    s = np.concatenate(slacks) if slacks else np.zeros(0)
    return LengthControlReport(checked=len(s), violations=int(np.sum(s < -1e-12)),
                               max_slack=float(s.max()) if len(s) else 0.0,
                               min_slack=float(s.min()) if len(s) else 0.0, B_norm=B_norm)


@dataclass
class TubularReport:
    delta: list
    C: list
    n_valid: list
    delta0: float

    @property
    def stable(self) -> bool:
        """Fitted constant does not grow by more than 2x from each delta to the next smaller one."""
        pairs = sorted(zip(self.delta, self.C), reverse=True)
        return all(c2 <= 2 * c1 for (_, c1), (_, c2) in zip(pairs, pairs[1:])) and all(n > 0 for n in self.n_valid)


def check_tubular(report: NondegenReport, length0: float, delta_grid) -> TubularReport:
    """Smallest ``C`` with max distance to ``G0`` at most ``C sqrt(delta)``.

    For each ``delta < |G0| / 4`` only samples with ``d* <= delta`` and
    ``| |G| - |G0| | <= delta`` count; others are excluded.
    """
    delta0 = length0 / 4
    d = np.concatenate([np.asarray(r["d_star_upper"]) for r in report.per_family.values()])
    L = np.concatenate([np.asarray(r["length"]) for r in report.per_family.values()])
    dist = np.concatenate([np.asarray(r["max_tube_dist"]) for r in report.per_family.values()])
    deltas, Cs, counts = [], [], []
    for delta in delta_grid:
        if not delta < delta0:
            raise ValueError(f"delta={delta} must be below delta0={delta0}")
        ok = (d <= delta) & (np.abs(L - length0) <= delta)
        deltas.append(float(delta))
        counts.append(int(ok.sum()))
        Cs.append(float(np.max(dist[ok]) / np.sqrt(delta)) if ok.any() else 0.0)
    return TubularReport(delta=deltas, C=Cs, n_valid=counts, delta0=delta0)


def hypothesis_scan(report: NondegenReport, flux0: float, length_key: str = "length", delta: float = 0.05) -> dict:
    """Fraction of samples within ``delta`` whose flux does not exceed that of ``G0`` (informational)."""
    R0 = report.R_gamma0
    tot = ok = 0
    for rec in report.per_family.values():
        for a, L, d in zip(rec["alpha"], rec[length_key], rec["d_star_upper"]):
            if d <= delta:
                tot += 1
                ok += (R0 - a) * L <= flux0 + 1e-12
    return {"delta": delta, "samples": tot, "holds": ok}


# ---------------------------------------------------------------------------
# positivity


@dataclass
class PositivityReport:
    min_curl_b0: float
    max_curl_h0: float
    nodes: int
    axis_max_abs: float
    min_off_axis: float

    @property
    def passed(self) -> bool:
        return self.min_curl_b0 >= -1e-8 and self.max_curl_h0 <= 1e-8


def positivity_scan(field, domain: Domain | None = None, n: int = 201) -> PositivityReport:
    """Sign scan of ``curl B0 . theta_hat`` in the sample and ``curl H0 . theta_hat`` everywhere.

    For :class:`BallField` the closed form is sampled on an ``n x 2n``
    meridian grid (``curl H0 = -curl B0`` inside, zero outside).  For an
    :class:`AxisymField` the grid nodes are scanned; ``curl B0 . theta_hat``
    is ``u`` inside and ``curl H0 . theta_hat`` is the discrete operator.
    """
    if isinstance(field, BallField):
        R = field.R
        x = np.linspace(0.0, R, n)
        z = np.linspace(-R, R, 2 * n - 1)
        X, Z = np.meshgrid(x, z, indexing="ij")
        ins = np.hypot(X, Z) <= R
        w = np.where(ins, field.curl_meridian(X, Z), 0.0)
        axis = w[0][ins[0]]
        off = w[1:][ins[1:]]
        return PositivityReport(min_curl_b0=float(w[ins].min()), max_curl_h0=float((-w[ins]).max()),
                                nodes=int(ins.sum()), axis_max_abs=float(np.abs(axis).max()),
                                min_off_axis=float(off.min()))
    if isinstance(field, AxisymField):
        ins = field.inside
        u = field.u
        ch = curl_h0_theta(field)
        axis = u[0][ins[0]]
        off = u[1:][ins[1:]]
        return PositivityReport(min_curl_b0=float(u[ins].min()), max_curl_h0=float(ch.max()),
                                nodes=int(ins.sum()),
                                axis_max_abs=float(np.abs(axis).max()) if len(axis) else 0.0,
                                min_off_axis=float(off.min()))
    raise TypeError("positivity_scan needs a BallField or AxisymField")


# ---------------------------------------------------------------------------
# export


def write_report_json(path, report: NondegenReport, extra: dict | None = None):
    data = report.to_dict()
    if extra:
        data.update(extra)
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_report_csv(path, report: NondegenReport, comment: str | None = None):
    keys = ("alpha", "d_star_lower", "d_star_upper", "length", "max_tube_dist")
    with open(path, "w", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh)
        w.writerow(["family", "index", *keys])
        for fam, rec in report.per_family.items():
            for i in range(len(rec["alpha"])):
                w.writerow([fam, i, *(repr(float(rec[k][i])) for k in keys)])
