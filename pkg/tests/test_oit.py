import numpy as np
import pytest
from scipy.optimize import brentq

from densgeo import Density, PeriodicGrid
from densgeo import density as D
from densgeo import oit
from densgeo.errors import ConfigError, NonDiffeomorphic


def warp1d(g, a=0.1):
    return oit.Diffeo(g, a * np.sin(2 * np.pi * g.x))


def test_inverse_matches_root_finding():
    g = PeriodicGrid(128)
    phi = warp1d(g)
    ref = np.array([brentq(lambda y: y + 0.1 * np.sin(2 * np.pi * y) - xj, xj - 0.2, xj + 0.2, xtol=1e-15)
                    for xj in g.x])
    assert np.max(np.abs(oit.inverse(phi).points()[0] - ref)) < 1e-10


def test_compose_with_inverse_is_identity_2d():
    g = PeriodicGrid(32, 2)
    X, Y = g.coords()
    phi = oit.Diffeo(g, np.array([0.04 * np.sin(2 * np.pi * Y), 0.03 * np.cos(2 * np.pi * X)]))
    ident = oit.compose(phi, oit.inverse(phi))
    assert oit.max_node_distance(ident, oit.Diffeo.identity(g)) < 1e-5


def test_jacobian_checks():
    g = PeriodicGrid(64)
    with pytest.raises(NonDiffeomorphic):
        oit.jacobian(warp1d(g, 0.3))
    assert np.min(oit.jacobian(warp1d(g, 0.1))) > 0
    with pytest.raises(ConfigError):
        oit.sample(g, g.x, g.x[None], method="linear")


def test_pullback_and_pushforward_are_inverse():
    g = PeriodicGrid(128)
    phi = warp1d(g)
    nu = Density.normalized(g, 1 + 0.3 * np.cos(2 * np.pi * g.x))
    back = oit.pullback_density(phi, oit.pushforward_density(phi, nu))
    # the intermediate density is not band-limited, so trig resampling loses a few digits
    assert np.max(np.abs(back.rho - nu.rho)) < 1e-7


def test_w0_source_mean_zero():
    g = PeriodicGrid(64)
    nu = Density.normalized(g, 1 + 0.3 * np.sin(2 * np.pi * g.x))
    src, theta = oit.w0_source(nu)
    assert abs(g.mean(src)) < 1e-12
    assert theta == pytest.approx(D.fisher_rao_distance(Density.uniform(g), nu), abs=1e-15)


def test_lift_reaches_target_1d():
    g = PeriodicGrid(64)
    nu = Density.normalized(g, 1 + 0.3 * np.sin(2 * np.pi * g.x))
    r = oit.lift_horizontal(nu, 1 / 50)
    assert oit.target_error(r.psi, nu) < 1e-9
    assert r.inverse_check < 1e-9


def test_lift_descends_to_the_geodesic():
    """``zeta(t)^* mu`` follows the Fisher-Rao geodesic, at constant speed."""
    g = PeriodicGrid(64)
    u = Density.uniform(g)
    nu = Density.normalized(g, 1 + 0.3 * np.sin(2 * np.pi * g.x) + 0.1 * np.cos(4 * np.pi * g.x))
    r = oit.lift_horizontal(nu, 1 / 50)
    for k in (10, 25, 40):
        t = r.times[k]
        pb = Density.normalized(g, oit.jacobian(r.zeta[k]))
        assert np.max(np.abs(pb.rho - D.fisher_rao_geodesic(u, nu, t).rho)) < 1e-8
    d = D.fisher_rao_distance(u, nu)
    steps = [D.fisher_rao_distance(Density.normalized(g, oit.jacobian(r.zeta[k])),
                                   Density.normalized(g, oit.jacobian(r.zeta[k + 5])))
             for k in range(0, 50, 5)]
    assert np.max(np.abs(np.array(steps) / 0.1 - d)) < 1e-4


def test_lift_of_uniform_is_identity():
    g = PeriodicGrid(32)
    r = oit.lift_horizontal(Density.uniform(g), 1 / 10)
    assert np.max(np.abs(r.psi.disp)) < 1e-14


def test_factorize_small_2d():
    g = PeriodicGrid(32, 2)
    X, Y = g.coords()
    phi = oit.Diffeo(g, np.array([0.04 * np.sin(2 * np.pi * X) * np.cos(2 * np.pi * Y),
                                  0.03 * np.sin(2 * np.pi * Y)]))
    fr = oit.factorize(phi, dt=1 / 25)
    assert fr.target_error < 1e-3
    assert fr.jac_eta_error < 5e-3
    assert fr.recompose_error < 1e-4
    assert fr.lift.velocity_divfree < 1e-6
