import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from isoflux.critfield import (PHASE_HEADER, EnergyModel, hc1_band, hc1_zero,
                               line_excess_energy, optimal_line_count, parse_key_values,
                               phase_table, read_model_config, vertex_line_count,
                               vortexless_threshold, write_phase_csv)
from isoflux.errors import InvalidEpsilon
from isoflux.optimize import CurveCandidate, Provenance

from conftest import R0

EPS = [1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9, 1e-10, 1e-11, 1e-12]
LEN0 = 2.0


def gamma0_candidate(R=R0, L=LEN0):
    return CurveCandidate(curve=None, flux=R * L, len=L, ratio=R, provenance=Provenance.GENERATOR)


def model(eps=1e-6, h=0.0, c_log=1.0, c_rep=1.0, R=R0, L=LEN0):
    return EnergyModel(eps, h, 0.19, R, L, c_log=c_log, c_rep=c_rep)


# -- leading-order field ---------------------------------------------------------------

def test_hc1_examples():
    assert hc1_zero(math.exp(-10), 0.5) == pytest.approx(10.0, rel=1e-15)
    assert hc1_zero(4.54e-5, 0.5) == pytest.approx(10.0, rel=1e-5)
    assert hc1_zero(1e-4 / 2, R0) > hc1_zero(1e-4, R0)


@pytest.mark.parametrize("eps", [0.0, 1.0, -1e-3, 2.0])
def test_invalid_epsilon(eps):
    with pytest.raises(InvalidEpsilon):
        hc1_zero(eps, 1.0)
    with pytest.raises(InvalidEpsilon):
        model(eps)


def test_loglog_needs_small_epsilon():
    m = model(0.5)
    with pytest.raises(InvalidEpsilon):
        m.loglog
    assert m.log_eps == pytest.approx(math.log(2))


def test_model_validation():
    with pytest.raises(ValueError):
        EnergyModel(1e-3, 0.0, 0.1, R0, LEN0, flux_gamma0=1.0)
    with pytest.raises(ValueError):
        EnergyModel(1e-3, -1.0, 0.1, R0, LEN0)
    with pytest.raises(ValueError):
        EnergyModel(1e-3, 0.0, 0.1, 0.0, LEN0)
    assert model().flux_gamma0 == pytest.approx(R0 * LEN0, rel=1e-15)


def test_ball_table():
    table = {eps: hc1_zero(eps, R0) for eps in (1e-2, 1e-4, 1e-6, 1e-8)}
    assert table[1e-6] == pytest.approx(math.log(1e6) / (2 * R0), rel=1e-15)
    assert list(table.values()) == sorted(table.values())


# -- single-line excess ------------------------------------------------------------------

def test_empty_curve_list():
    assert line_excess_energy(model(), []) == 0.0


@pytest.mark.parametrize("eps", EPS)
def test_threshold_exactness(eps):
    base = model(eps, c_log=0.0, c_rep=0.0)
    H = base.hc1_zero
    g = [gamma0_candidate()]
    scale = math.pi * LEN0 * base.log_eps
    assert abs(line_excess_energy(base.with_field(H), g)) <= 1e-12 * scale
    assert line_excess_energy(base.with_field(H * (1 - 1e-12)), g) > 0
    assert line_excess_energy(base.with_field(H * (1 + 1e-12)), g) < 0


def test_one_above_threshold():
    base = model(1e-6, c_log=0.0, c_rep=0.0)
    got = line_excess_energy(base.with_field(base.hc1_zero + 1), [gamma0_candidate()])
    assert got == pytest.approx(-2 * math.pi * R0 * LEN0, rel=1e-9)


# -- line count ---------------------------------------------------------------------------

def test_deep_subcritical_has_no_lines():
    for eps in (1e-2, 1e-4, 1e-8, 1e-12):
        m = model(eps, c_log=0.0)
        assert optimal_line_count(m.with_field(max(m.hc1_zero - 10, 0)), 64)[0] == 0


def test_energy_is_quadratic():
    m = model(1e-6, h=30.0, c_rep=2.0)
    _, E = optimal_line_count(m, 10)
    assert np.allclose(np.diff(E, 2), 2 * 2.0 * m.loglog, rtol=1e-9)
    assert E[0] == 0.0


def test_brute_force_matches_vertex_rounding():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        eps = 10 ** rng.uniform(-12, -1)
        m = EnergyModel(eps, rng.uniform(0, 200), 0.1, rng.uniform(0.05, 2), rng.uniform(0.5, 4),
                        c_log=rng.uniform(0, 3), c_rep=rng.uniform(0.01, 5))
        n_max = int(rng.integers(1, 200))
        assert optimal_line_count(m, n_max)[0] == vertex_line_count(m, n_max)


def test_tie_break_smallest_n():
    # choose h so that E(0) = E(1): lin + rep = 0
    m = model(1e-6, c_log=0.0, c_rep=1.0)
    lin_target = -m.loglog
    h = (m.line_cost() - lin_target) / (2 * math.pi * m.flux_gamma0)
    n, E = optimal_line_count(m.with_field(h), 5)
    assert abs(E[1] - E[0]) < 1e-9
    assert n == int(np.argmin(E))


@given(st.floats(-12, -1.5), st.floats(0, 300), st.floats(0, 300))
@settings(max_examples=200, deadline=None)
def test_line_count_monotone_in_field(log_eps, h1, h2):
    m = model(10**log_eps)
    lo, hi = sorted((h1, h2))
    assert optimal_line_count(m.with_field(lo), 64)[0] <= optimal_line_count(m.with_field(hi), 64)[0]


@pytest.mark.parametrize("K", [1, 3, 10])
def test_bounded_vorticity(K):
    counts = []
    for eps in EPS:
        m = model(eps)
        counts.append(optimal_line_count(m.with_field(m.hc1_zero + K * m.loglog), 10_000)[0])
    assert len(set(counts)) == 1
    assert max(counts) == counts[0]
    bound = (2 * math.pi * R0 * LEN0 * K + math.pi * LEN0) / 1.0
    assert counts[0] <= bound


def test_vortexless_threshold():
    base = model(1e-3)
    K0 = vortexless_threshold(base, EPS)
    assert K0 > 0
    for eps in EPS:
        m = model(eps)
        for extra in (0.0, 0.5, 5.0):
            h = max(m.hc1_zero - K0 - extra, 0.0)
            assert optimal_line_count(m.with_field(h), 64)[0] == 0
    # the threshold is sharp for the smallest epsilon (largest log log)
    m = model(EPS[-1])
    h = m.hc1_zero - 0.99 * K0
    assert optimal_line_count(m.with_field(h), 64)[0] >= 1


def test_vortexless_threshold_zero_without_log_cost():
    assert vortexless_threshold(model(1e-3, c_log=0.0), EPS) == 0.0


def test_hc1_band():
    for eps in (1e-3, 1e-6, 1e-12):
        m = model(eps)
        (lo, hi), ceiling = hc1_band(m, 5.0, 3.0)
        assert hi - lo == pytest.approx(10.0, rel=1e-12)
        assert lo < m.hc1_zero < hi
        assert ceiling == pytest.approx(m.hc1_zero + 3.0 * m.loglog)


# -- phase table --------------------------------------------------------------------------

MULTS = [-3, -1, 0, 1, 3, 10]


def test_phase_subcritical_rows_without_log_cost():
    for row in phase_table(EPS, MULTS, R0, LEN0, c_log=0.0):
        if row[2] < 0:
            assert row[3] == 0


def test_phase_log_cost_allows_lines_just_below_threshold():
    # with c_log > 0 a line becomes favourable slightly below the leading-order field
    rows = phase_table([1e-6], [-0.1], R0, LEN0, c_log=1.0)
    assert rows[0][2] < 0 and rows[0][3] >= 1


def test_phase_bounded_over_epsilon():
    rows = phase_table(EPS, MULTS, R0, LEN0)
    grid = np.array([r[3] for r in rows]).reshape(len(EPS), len(MULTS))
    assert np.all(grid == grid[0])


def test_phase_repulsion_doubling():
    a = phase_table(EPS, MULTS, R0, LEN0, c_rep=1.0)
    b = phase_table(EPS, MULTS, R0, LEN0, c_rep=2.0)
    assert all(rb[3] <= ra[3] for ra, rb in zip(a, b))


def test_phase_deterministic_and_csv(tmp_path):
    a = phase_table(EPS, MULTS, R0, LEN0)
    assert a == phase_table(EPS, MULTS, R0, LEN0)
    assert len(a) == len(EPS) * len(MULTS)
    write_phase_csv(tmp_path / "p.csv", a, comment="c")
    lines = (tmp_path / "p.csv").read_text().splitlines()
    assert lines[0] == "# c"
    assert lines[1] == ",".join(PHASE_HEADER)
    eps, h = lines[2].split(",")[:2]
    assert float(eps) == a[0][0] and float(h) == a[0][1]


# -- config parsing -----------------------------------------------------------------------

def test_parse_key_values():
    text = "# comment\nepsilon = 1e-6  # trailing\n\nc_rep=2\n"
    assert parse_key_values(text) == {"epsilon": "1e-6", "c_rep": "2"}
    with pytest.raises(ValueError):
        parse_key_values("novalue\n")
    with pytest.raises(ValueError):
        parse_key_values("=3\n")


def test_read_model_config(tmp_path):
    p = tmp_path / "m.cfg"
    p.write_text("epsilon=1e-6\nh_ex=10\nc_log=0.5\nc_rep=2\nN_max=32\n")
    cfg = read_model_config(p)
    assert cfg == {"epsilon": 1e-6, "h_ex": 10.0, "c_log": 0.5, "c_rep": 2.0, "N_max": 32}
    p.write_text("colour=blue\n")
    with pytest.raises(ValueError):
        read_model_config(p)
