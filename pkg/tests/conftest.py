import numpy as np
import pytest

from isoflux.domain import Ball
from isoflux.meissner import BallField, solve_axisym_meissner

# Frozen oracle values for the unit ball, evaluated independently of the
# package with mpmath at 40 digits: closed-form constants, and adaptive
# quadrature of the on-axis field and of the radial energy integrands.
C1 = 1.030447071751003044545758129603728250632
B0_CENTER_Z = 0.1795289435116814994119153663165529664503
CURL_AT_HALF = 0.2180954750921938532616109247402835517785
I0 = 0.301098192137702647965845697632922478762
R0 = 0.150549096068851323982922848816461239381
J0_BALL = 0.191304593872544974350628027908866453119
DIPOLE_BALL = -0.03044707175100304454575812960372825063199


def ball_u_exact(x, z, R=1.0):
    """Azimuthal component inside and outside the ball (independent closed form)."""
    x = np.asarray(x, float)
    z = np.asarray(z, float)
    rho = np.hypot(x, z)
    s = 1.5 * R / np.sinh(R)
    safe = np.where(rho > 1e-3, rho, 1.0)
    f_over = (np.cosh(safe) - np.sinh(safe) / safe) / safe**2
    f_over = np.where(rho > 1e-3, f_over, 1.0 / 3.0 + rho**2 / 30.0)
    inside = s * f_over * x
    uR = s * (np.cosh(R) - np.sinh(R) / R) / R
    D = R**2 * (uR - R / 2)
    outside = x / 2 + D * x / np.where(rho > 0, rho, 1.0) ** 3
    return np.where(rho < R, inside, outside)


@pytest.fixture(scope="session")
def ball():
    return Ball(1.0)


@pytest.fixture(scope="session")
def bfield():
    return BallField(1.0)


@pytest.fixture(scope="session")
def ball_solve_256(ball):
    return solve_axisym_meissner(ball, 6.0, 256, 512)


@pytest.fixture(scope="session")
def ball_solve_512(ball):
    return solve_axisym_meissner(ball, 6.0, 512, 1024)


def rel_l2_inside(fld, R=1.0):
    Rg, Zg = np.meshgrid(fld.r, fld.z, indexing="ij")
    ins = np.hypot(Rg, Zg) < R
    ue = ball_u_exact(Rg, Zg, R)
    w = Rg[ins]
    return float(np.sqrt(np.sum((fld.u[ins] - ue[ins]) ** 2 * w) / np.sum(ue[ins] ** 2 * w)))


@pytest.fixture(scope="session")
def ball_multistart(ball, bfield):
    from isoflux.optimize import OptimizerConfig, multistart_maximize
    cfg = OptimizerConfig(n_starts=32, seed=0)
    return multistart_maximize(bfield, ball, cfg)


@pytest.fixture(scope="session")
def ball_dictionary(ball):
    from isoflux.currents import BumpDictionary
    return BumpDictionary.for_domain(ball, 600)


@pytest.fixture(scope="session")
def nondegen_500(ball, bfield, ball_dictionary):
    from isoflux.nondegen import default_specs, generate_samples, verify_nondegeneracy
    from isoflux.optimize import diameter_curve
    g0 = diameter_curve(ball).resample(64)
    samples = generate_samples(bfield, ball, g0, default_specs(ball, 500, seed=0))
    return g0, samples, verify_nondegeneracy(bfield, ball, g0, samples, N=2,
                                             dictionary=ball_dictionary)
