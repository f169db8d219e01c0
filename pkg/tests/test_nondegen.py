import csv
import json

import numpy as np
import pytest

from isoflux.currents import Polyline3, length
from isoflux.domain import SolidOfRevolution
from isoflux.errors import MaximalityViolated
from isoflux.meissner import solve_axisym_meissner
from isoflux.nondegen import (Family, PerturbationSpec, arc_length, check_length_control,
                              check_tubular, default_specs, field_norm, hypothesis_scan,
                              loglog_slope, planar_arc, positivity_scan, sample_perturbations,
                              verify_nondegeneracy, write_report_csv, write_report_json)
from isoflux.optimize import diameter_curve


class Scaled:
    def __init__(self, f, lam):
        self.f, self.lam = f, lam

    def __call__(self, p):
        return self.lam * self.f(p)


# -- sampling ---------------------------------------------------------------------

def test_zero_amplitude_is_identity(ball, bfield):
    g0 = diameter_curve(ball).resample(64)
    for fam in (Family.PLANAR_ARC, Family.FOURIER_NORMAL):
        out = sample_perturbations(bfield, ball, g0, PerturbationSpec(fam, (0.0,)))
        assert np.array_equal(out[0].vertices, g0.vertices)


def test_negative_amplitude_rejected():
    with pytest.raises(ValueError):
        PerturbationSpec(Family.LOOP, (-0.1,))


@pytest.mark.parametrize("s", [0.01, 0.1, 0.5])
def test_planar_arc_length(s):
    arc = planar_arc([0, 0, -1.0], [0, 0, 1.0], s, [1, 0, 0], n_vertices=4001)
    exact = arc_length(2.0, s)
    # closed form of the circular-arc length, independent of the helper
    rho = (1 + s**2) / (2 * s)
    assert exact == pytest.approx(2 * rho * np.arcsin(1 / rho) if s <= 1 else exact, rel=1e-14)
    assert exact > 2.0
    assert length(arc) == pytest.approx(exact, rel=1e-6)
    assert np.max(arc.vertices[:, 0]) == pytest.approx(s, rel=1e-6)


def test_samples_are_valid(ball, nondegen_500):
    _, samples, _ = nondegen_500
    assert set(samples) == {f.value for f in Family}
    assert sum(len(v) for v in samples.values()) >= 500
    for fam, curves in samples.items():
        for c in curves:
            assert np.all(ball.signed_distance(c.vertices) <= 1e-9 * ball.diameter)
            if not c.closed:
                ends = c.vertices[[0, -1]]
                assert np.max(np.abs(np.linalg.norm(ends, axis=1) - 1)) <= 1e-9
        assert all(c.closed for c in curves) == (fam == Family.LOOP.value)


def test_sampling_is_deterministic(ball, bfield):
    g0 = diameter_curve(ball).resample(64)
    a = [sample_perturbations(bfield, ball, g0, s) for s in default_specs(ball, 40, seed=3)]
    b = [sample_perturbations(bfield, ball, g0, s) for s in default_specs(ball, 40, seed=3)]
    for xs, ys in zip(a, b):
        for x, y in zip(xs, ys):
            assert np.array_equal(x.vertices, y.vertices)


# -- nondegeneracy --------------------------------------------------------------------

def test_nondegeneracy_ball(nondegen_500):
    _, _, rep = nondegen_500
    assert rep.samples >= 500
    assert rep.violations == []
    assert rep.empirical_C0 > 0
    assert rep.slope is not None and rep.slope >= 1.8
    for rec in rep.per_family.values():
        assert min(rec["alpha"]) >= -1e-9


def test_identical_sample_is_excluded(ball, bfield, ball_dictionary):
    g0 = diameter_curve(ball).resample(64)
    arc = planar_arc(g0.start, g0.end, 0.1, [1, 0, 0])
    rep = verify_nondegeneracy(bfield, ball, g0, [g0, arc], dictionary=ball_dictionary)
    assert rep.per_family["samples"]["alpha"][0] == 0.0
    assert rep.per_family["samples"]["d_star_upper"][0] == 0.0
    assert np.isfinite(rep.empirical_C0) and rep.empirical_C0 > 0


def test_field_scaling_doubles_alpha(ball, bfield, ball_dictionary):
    g0 = diameter_curve(ball).resample(64)
    curves = [planar_arc(g0.start, g0.end, s, [0, 1, 0]) for s in (0.05, 0.2)]
    a = verify_nondegeneracy(bfield, ball, g0, curves, dictionary=ball_dictionary)
    b = verify_nondegeneracy(Scaled(bfield, 2.0), ball, g0, curves, dictionary=ball_dictionary)
    assert np.allclose(b.per_family["samples"]["alpha"], 2 * np.array(a.per_family["samples"]["alpha"]),
                       rtol=1e-12)
    assert b.empirical_C0 == pytest.approx(2 * a.empirical_C0, rel=1e-12)
    assert b.violations == []


def test_maximality_violation_raises(ball, bfield, ball_dictionary):
    # a tilted chord posing as the maximizer is beaten by the true diameter
    fake = Polyline3(np.array([[np.sin(0.5), 0, np.cos(0.5)], [-np.sin(0.5), 0, -np.cos(0.5)]])[::-1])
    with pytest.raises(MaximalityViolated) as err:
        verify_nondegeneracy(bfield, ball, fake, [diameter_curve(ball)], dictionary=ball_dictionary)
    assert err.value.alpha < 0 and err.value.curve is not None
    rep = verify_nondegeneracy(bfield, ball, fake, [diameter_curve(ball)], strict=False,
                               dictionary=ball_dictionary)
    assert len(rep.violations) == 1


def test_loglog_slope():
    d = np.geomspace(1e-3, 1e-1, 20)
    assert loglog_slope(d, 3 * d**2) == pytest.approx(2.0, rel=1e-12)
    assert loglog_slope([1e-2, 1e-1], [1, 2]) is None


# -- length and tube control---------------------------------------------------------------------

def test_field_norm(ball, bfield):
    n = field_norm(bfield, ball)
    assert 0.3 < n < 1.0
    # sup |B0| is at least its value at the centre
    assert n >= 0.1795


def test_length_control(ball, bfield, nondegen_500):
    g0, _, rep = nondegen_500
    lc = check_length_control(rep, length(g0), field_norm(bfield, ball))
    assert lc.checked == rep.samples
    assert lc.violations == 0
    assert lc.min_slack >= 0


def test_length_control_trivial_case(ball, bfield, ball_dictionary):
    g0 = diameter_curve(ball).resample(64)
    rep = verify_nondegeneracy(bfield, ball, g0, [g0], dictionary=ball_dictionary)
    lc = check_length_control(rep, length(g0), 1.0)
    assert lc.max_slack == 0.0 and lc.violations == 0


def test_length_control_arc(ball, bfield, ball_dictionary):
    g0 = diameter_curve(ball).resample(64)
    arc = planar_arc(g0.start, g0.end, 0.1, [1, 0, 0])
    rep = verify_nondegeneracy(bfield, ball, g0, [arc], dictionary=ball_dictionary)
    lc = check_length_control(rep, length(g0), field_norm(bfield, ball))
    assert lc.violations == 0 and lc.min_slack > 0


def test_tubular(nondegen_500):
    g0, _, rep = nondegen_500
    L0 = length(g0)
    tub = check_tubular(rep, L0, [L0 / 5, L0 / 20, L0 / 80])
    assert all(n > 0 for n in tub.n_valid)
    assert tub.stable
    with pytest.raises(ValueError):
        check_tubular(rep, L0, [L0 / 2])


def test_tubular_gamma0_distance_zero(ball, bfield, ball_dictionary):
    g0 = diameter_curve(ball).resample(64)
    rep = verify_nondegeneracy(bfield, ball, g0, [g0], dictionary=ball_dictionary)
    tub = check_tubular(rep, length(g0), [0.1, 0.01])
    assert tub.C == [0.0, 0.0] and tub.n_valid == [1, 1]


def test_hypothesis_scan_is_informational(nondegen_500):
    g0, _, rep = nondegen_500
    out = hypothesis_scan(rep, rep.R_gamma0 * length(g0), delta=0.05)
    assert 0 <= out["holds"] <= out["samples"]


# -- positivity -----------------------------------------------------------------------------

def test_positivity_ball(bfield):
    rep = positivity_scan(bfield)
    assert rep.passed
    assert rep.min_curl_b0 >= 0.0
    assert rep.axis_max_abs == 0.0
    assert rep.min_off_axis > 0


@pytest.mark.parametrize("a,c", [(1.0, 1.5), (1.5, 1.0)])
def test_positivity_spheroids(a, c):
    dom = SolidOfRevolution.spheroid(a, c)
    f = solve_axisym_meissner(dom, 3 * dom.diameter, 256, 512, tol=1e-13)
    rep = positivity_scan(f)
    assert rep.min_curl_b0 >= -1e-8
    assert rep.max_curl_h0 <= 1e-8
    assert rep.passed


def test_positivity_rejects_other_fields():
    with pytest.raises(TypeError):
        positivity_scan(lambda p: p)


# -- export ------------------------------------------------------------------------------------

def test_report_export(tmp_path, nondegen_500):
    _, _, rep = nondegen_500
    write_report_json(tmp_path / "r.json", rep, extra={"seed": 0})
    data = json.loads((tmp_path / "r.json").read_text())
    assert data["samples"] == rep.samples and data["seed"] == 0
    for fam in data["families"].values():
        assert set(fam) == {"alpha", "d_star_lower", "d_star_upper", "length", "max_tube_dist"}
    write_report_csv(tmp_path / "r.csv", rep)
    rows = list(csv.reader((tmp_path / "r.csv").open()))
    assert rows[0][:2] == ["family", "index"]
    assert len(rows) == rep.samples + 1
