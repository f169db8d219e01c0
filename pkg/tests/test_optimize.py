import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from isoflux.currents import (MeridianCurve, Polyline3, circulation, hausdorff, length,
                              project_meridian, stokes_flux)
from isoflux.errors import DegenerateCurve, InvalidAngles, ZeroLength
from isoflux.optimize import (GOLDEN, CurveCandidate, OptimizerConfig, Provenance,
                              convergents, diameter_curve, flux_gradient, length_gradient,
                              loop_supremum_probe, meridian_circles, multistart_maximize,
                              random_chord, ratio_ascent, ratio_gradient, run_report,
                              sector_competitors, torus_field)

from conftest import R0


def tilted_chord(angle, n=64, R=1.0):
    e = np.array([np.sin(angle), 0.0, np.cos(angle)])
    t = np.linspace(-1, 1, n)[:, None]
    return Polyline3(R * t * e)


class Scaled:
    def __init__(self, f, lam):
        self.f, self.lam = f, lam

    def __call__(self, p):
        return self.lam * self.f(p)


class ConstZ:
    def __call__(self, p):
        p = np.atleast_2d(p)
        out = np.zeros_like(p)
        out[:, 2] = 1.0
        return out


# -- generators ------------------------------------------------------------------

def test_diameter_generator(ball, bfield):
    d = diameter_curve(ball)
    assert length(d) == 2.0
    c = CurveCandidate.evaluate(bfield, d.refine(8), Provenance.GENERATOR, quad_order=12)
    assert c.flux > 0
    assert c.ratio == pytest.approx(R0, rel=1e-12)


def test_sector_examples(ball, bfield):
    sector, chord = sector_competitors(ball, 0.0, np.pi)
    assert hausdorff(chord, diameter_curve(ball).reversed()) < 1e-15
    flux = circulation(bfield, sector.refine(16), 12)
    assert flux / length(chord) == pytest.approx(R0, rel=1e-10)
    sector, chord = sector_competitors(ball, np.pi / 6, 5 * np.pi / 6)
    assert circulation(bfield, sector.refine(16), 12) / length(chord) == pytest.approx(R0, rel=1e-3)
    with pytest.raises(ZeroLength):
        sector_competitors(ball, np.pi / 2, np.pi / 2)
    for bad in ((-0.1, 1.0), (2.0, 1.0), (1.0, 3.5)):
        with pytest.raises(InvalidAngles):
            sector_competitors(ball, *bad)


def test_sector_identity_random(ball, bfield):
    rng = np.random.default_rng(0)
    for _ in range(20):
        p1, p2 = np.sort(rng.uniform(0, np.pi, 2))
        sector, chord = sector_competitors(ball, p1, p2)
        got = circulation(bfield, sector.refine(16), 12) / length(chord)
        assert abs(got - np.sin((p1 + p2) / 2) * R0) <= 1e-3 * R0


def test_config_validation():
    with pytest.raises(ValueError):
        OptimizerConfig(n_vertices=2)
    with pytest.raises(ValueError):
        OptimizerConfig(anneal_schedule=1.0)


# -- gradients -------------------------------------------------------------------

def fd_circulation_gradient(field, c, h=1e-5, q=8):
    g = np.zeros((c.n, 3))
    for i in range(c.n):
        for k in range(3):
            vp, vm = np.array(c.vertices), np.array(c.vertices)
            vp[i, k] += h
            vm[i, k] -= h
            g[i, k] = (circulation(field, Polyline3(vp, c.closed), q)
                       - circulation(field, Polyline3(vm, c.closed), q)) / (2 * h)
    return g


@pytest.mark.parametrize("closed", [False, True])
def test_flux_gradient_matches_finite_differences(bfield, closed):
    rng = np.random.default_rng(1)
    v = rng.uniform(-0.5, 0.5, (9, 3))
    c = Polyline3(v, closed)
    assert np.max(np.abs(flux_gradient(bfield, c) - fd_circulation_gradient(bfield, c))) <= 1e-6


def test_length_gradient_matches_finite_differences():
    rng = np.random.default_rng(2)
    c = Polyline3(rng.normal(size=(7, 3)))
    h = 1e-6
    g = np.zeros((7, 3))
    for i in range(7):
        for k in range(3):
            vp, vm = np.array(c.vertices), np.array(c.vertices)
            vp[i, k] += h
            vm[i, k] -= h
            g[i, k] = (length(Polyline3(vp)) - length(Polyline3(vm))) / (2 * h)
    assert np.allclose(length_gradient(c), g, atol=1e-8)


def test_constant_field_gradient():
    rng = np.random.default_rng(3)
    c = Polyline3(rng.normal(size=(10, 3)))
    g = flux_gradient(ConstZ(), c)
    assert np.max(np.abs(g[1:-1])) <= 1e-12
    assert np.allclose(g[0], [0, 0, -1]) and np.allclose(g[-1], [0, 0, 1])


def test_z_translation_invariance():
    # a field independent of z: moving every vertex up leaves the flux unchanged
    def field(p):
        p = np.atleast_2d(p)
        return np.stack([np.sin(p[:, 1]), p[:, 0] ** 2, np.cos(p[:, 0] * p[:, 1])], -1)

    rng = np.random.default_rng(4)
    c = Polyline3(rng.normal(size=(12, 3)))
    assert abs(flux_gradient(field, c)[:, 2].sum()) <= 1e-9


def test_ratio_gradient_shape_and_value(bfield):
    c = tilted_chord(0.3, 16)
    g, R = ratio_gradient(bfield, c)
    assert g.shape == (16, 3)
    assert R == pytest.approx(circulation(bfield, c) / length(c))


# -- ascent ----------------------------------------------------------------------

FAST = OptimizerConfig(n_starts=4, max_iters=150)


def test_diameter_is_fixed_point(ball, bfield):
    d = diameter_curve(ball)
    start = CurveCandidate.evaluate(bfield, d.resample(64), quad_order=FAST.quad_order)
    out = ratio_ascent(bfield, ball, d, FAST)
    assert hausdorff(out.curve, d) <= 1e-4
    assert abs(out.ratio - start.ratio) <= 1e-8


def test_tilted_chord_converges_to_diameter(ball, bfield):
    hist = []
    init = tilted_chord(np.pi / 6)
    out = ratio_ascent(bfield, ball, init, OptimizerConfig(), history=hist)
    assert out.ratio == pytest.approx(R0, rel=5e-3)
    assert hausdorff(out.curve, diameter_curve(ball)) <= 0.05
    assert np.all(np.diff(hist) >= 0)
    assert out.ratio >= CurveCandidate.evaluate(bfield, init, quad_order=6).ratio - 1e-12


@given(st.integers(0, 1000))
@settings(max_examples=8, deadline=None)
def test_ascent_keeps_endpoints_on_boundary(seed):
    from isoflux.domain import Ball
    from isoflux.meissner import BallField
    ball, f = Ball(1.0), BallField(1.0)
    init = random_chord(f, ball, np.random.default_rng(seed), 32)
    out = ratio_ascent(f, ball, init, OptimizerConfig(n_vertices=32, max_iters=40))
    ends = out.curve.vertices[[0, -1]]
    assert np.max(np.abs(np.linalg.norm(ends, axis=1) - 1.0)) <= 1e-9 * ball.diameter
    assert np.all(ball.signed_distance(out.curve.vertices) <= 1e-9 * ball.diameter)
    assert out.ratio >= CurveCandidate.evaluate(f, init, quad_order=6).ratio - 1e-12
    assert out.ratio * out.len == pytest.approx(out.flux, rel=1e-10)


def test_degenerate_loop_raises(ball, bfield):
    t = np.linspace(0, 2 * np.pi, 16, endpoint=False)
    tiny = Polyline3(np.stack([0.5 + 1e-7 * np.cos(t), 0 * t, 1e-7 * np.sin(t)], -1), closed=True)
    with pytest.raises(DegenerateCurve):
        ratio_ascent(bfield, ball, tiny, OptimizerConfig(n_vertices=16))


def test_scaling_field_scales_ratio_keeps_curve(ball, bfield):
    init = tilted_chord(0.4)
    a = ratio_ascent(bfield, ball, init, FAST)
    b = ratio_ascent(Scaled(bfield, 2.0), ball, init, FAST)
    assert b.ratio == pytest.approx(2 * a.ratio, rel=1e-12)
    assert hausdorff(a.curve, b.curve) <= 1e-6


# -- multistart and loops ----------------------------------------------------------

def test_multistart_finds_diameter(ball, ball_multistart):
    best, R, starts = ball_multistart
    assert R == pytest.approx(R0, rel=0.01)
    assert hausdorff(best.curve, diameter_curve(ball)) <= 0.05
    assert len(starts) == 33
    assert best.ratio >= max(s.ratio for s in starts) - 1e-15
    for c in starts + [best]:
        assert c.ratio * c.len == pytest.approx(c.flux, rel=1e-10)
    m = project_meridian(best.curve)
    assert abs(m.length() - length(best.curve)) <= 1e-6


def test_multistart_beats_generators(ball, bfield):
    gens = [tilted_chord(0.7), tilted_chord(1.2)]
    best, _, starts = multistart_maximize(bfield, ball, OptimizerConfig(n_starts=0, max_iters=5),
                                          generators=gens)
    for g in gens:
        assert best.ratio >= CurveCandidate.evaluate(bfield, g, quad_order=6).ratio


def test_multistart_deterministic(ball, bfield, monkeypatch):
    cfg = OptimizerConfig(n_starts=4, max_iters=30, n_vertices=24, seed=7, anneal_rounds=2)
    r1 = run_report(*multistart_maximize(bfield, ball, cfg), None, cfg)
    monkeypatch.setenv("ISOFLUX_THREADS", "1")
    r2 = run_report(*multistart_maximize(bfield, ball, cfg), None, cfg)
    assert r1 == r2
    cfg8 = OptimizerConfig(n_starts=4, max_iters=30, n_vertices=24, seed=8, anneal_rounds=2)
    r3 = run_report(*multistart_maximize(bfield, ball, cfg8), None, cfg8)
    assert r3["per_start_ratios"] != r1["per_start_ratios"]


def test_loop_probe_margin(ball, bfield):
    loop = loop_supremum_probe(bfield, ball, OptimizerConfig(n_vertices=32, max_iters=150))
    assert loop.curve.closed
    assert R0 - loop.ratio > 0


def test_meridian_circle_flux_by_stokes(ball, bfield):
    for loop in meridian_circles(ball, 128):
        v = loop.vertices
        m = MeridianCurve(v[:, [0, 2]], closed=True)
        assert circulation(bfield, loop) == pytest.approx(stokes_flux(bfield.curl_meridian, m, ball),
                                                          rel=1e-10)
        assert abs(circulation(bfield, loop)) / length(loop) < R0


def test_horizontal_circle_carries_no_flux(bfield):
    t = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    for rho in (0.05, 0.3, 0.8):
        c = Polyline3(np.stack([rho * np.cos(t), rho * np.sin(t), 0 * t], -1), closed=True)
        assert abs(circulation(bfield, c)) <= 1e-14


# -- torus stress field --------------------------------------------------------------

def test_convergents_of_golden_ratio():
    assert convergents(GOLDEN, 60)[:6] == [(1, 1), (1, 2), (2, 3), (3, 5), (5, 8), (8, 13)]


def test_torus_field_magnitude_and_tangency():
    f = torus_field(2.0, 0.5)
    rng = np.random.default_rng(5)
    phi, th = rng.uniform(0, 2 * np.pi, (2, 500))
    on = np.stack([(2 + 0.5 * np.cos(th)) * np.cos(phi), (2 + 0.5 * np.cos(th)) * np.sin(phi),
                   0.5 * np.sin(th)], -1)
    assert np.allclose(np.linalg.norm(f(on), axis=1), 1.0, atol=1e-14)
    p = rng.uniform(-3.5, 3.5, (5000, 3))
    rho = np.hypot(p[:, 0], p[:, 1])
    rc = np.hypot(rho - 2, p[:, 2])
    off = np.abs(rc - 0.5) > 1e-3
    assert np.all(np.linalg.norm(f(p[off]), axis=1) < 1.0)
    # tangent to every torus rho_c = const
    grad = np.stack([(rho - 2) * p[:, 0] / rho, (rho - 2) * p[:, 1] / rho, p[:, 2]], -1) / rc[:, None]
    assert np.max(np.abs(np.sum(f(p) * grad, axis=1))) <= 1e-12
    with pytest.raises(ValueError):
        torus_field(1.0, 2.0)


def test_torus_helices_have_ratio_below_one():
    f = torus_field(2.0, 0.5)
    ratios = [circulation(f, h) / length(h) for h in f.generators(128)]
    assert ratios and all(0 < r < 1 for r in ratios)
    assert f.domain().contains(f.helix(3, 5, 80).vertices).all()
