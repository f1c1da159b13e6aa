import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from densgeo import PeriodicGrid
from densgeo import euler_arnold as E
from densgeo.errors import BlowupDetected, ConfigError, MeanNotZero, WrongDimension

from conftest import trig_poly

G = PeriodicGrid(64)
coeff_lists = st.lists(st.tuples(st.floats(-1, 1), st.floats(-1, 1)), min_size=1, max_size=5)


def test_tag_parsing():
    assert E.InertiaTag.parse("l2") == E.L2
    assert E.InertiaTag.parse("H1") == E.H1
    assert E.InertiaTag.parse("hdot") == E.HDOT
    assert E.InertiaTag.parse("h1ext:0.5") == E.H1_extended(0.5)
    for bad in ("foo", "h1ext:x"):
        with pytest.raises(ConfigError):
            E.InertiaTag.parse(bad)
    with pytest.raises(ConfigError):
        E.InertiaTag("H1_extended", float("nan"))


@given(coeff_lists, coeff_lists, coeff_lists)
@settings(max_examples=30, deadline=None)
def test_coadjoint_is_dual_to_ad(cu, cm, cv):
    x = G.x
    u, m, v = trig_poly(x, cu), trig_poly(x, cm), trig_poly(x, cv)
    lhs = G.integrate(E.coadjoint_1d(G, u, m) * v)
    rhs = G.integrate(m * E.ad_1d(G, u, v))
    assert lhs == pytest.approx(rhs, abs=1e-9)


@given(coeff_lists)
@settings(max_examples=20, deadline=None)
def test_inertia_round_trip(c):
    u = trig_poly(G.x, c)
    for tag in (E.L2, E.H1, E.H1_extended(2.0)):
        assert np.max(np.abs(E.invert_inertia(tag, G, E.apply_inertia(tag, G, u)) - u)) < 1e-12
    s = E.make_state(E.HDOT, G, u)
    assert s.u[0] == pytest.approx(0.0, abs=1e-14)
    assert np.max(np.abs(E.invert_inertia(E.HDOT, G, s.m) - s.u)) < 1e-10


def test_hdot_requires_mean_zero():
    with pytest.raises(MeanNotZero):
        E.invert_inertia(E.HDOT, G, np.ones(64))


def test_one_dimensional_only():
    with pytest.raises(WrongDimension):
        E.apply_inertia(E.L2, PeriodicGrid(8, 2), np.zeros((8, 8)))


def test_zero_data_is_stationary():
    s, _ = E.solve(E.H1, E.make_state(E.H1, G, np.zeros(64)), 1e-2, 0.1)
    assert np.array_equal(s.u, np.zeros(64))


def test_burgers_matches_characteristics():
    g = PeriodicGrid(256)
    u0f = lambda s: 0.2 * np.sin(2 * np.pi * s)
    T = 0.5 / (3 * 0.2 * 2 * np.pi)
    s, _ = E.solve(E.L2, E.make_state(E.L2, g, u0f(g.x)), 1e-3, T)
    assert np.max(np.abs(s.u - E.burgers_characteristics(g, u0f, T))) < 1e-5


def test_ch_conserves_energy_and_momentum():
    u0 = 0.1 * np.cos(2 * np.pi * G.x) + 0.05 * np.sin(4 * np.pi * G.x)
    s0 = E.make_state(E.H1, G, u0)
    s, _ = E.solve(E.H1, s0, 1e-3, 0.5)
    assert abs(E.energy(E.H1, s) - E.energy(E.H1, s0)) / E.energy(E.H1, s0) < 1e-7
    assert abs(G.integrate(s.m) - G.integrate(s0.m)) < 1e-12


def test_extension_constant_and_reduction():
    u0 = 0.1 * np.cos(2 * np.pi * G.x)
    s0 = E.make_state(E.H1, G, u0)
    a, _ = E.solve(E.H1, s0, 1e-3, 0.2)
    b, _ = E.solve(E.H1_extended(0.0), s0, 1e-3, 0.2)
    assert np.max(np.abs(a.u - b.u)) == 0.0
    tag = E.H1_extended(1.5)
    c, snaps = E.solve(tag, E.make_state(tag, G, u0), 1e-3, 0.2, record_every=20)
    assert all(s.kappa_component == 1.5 for s in snaps + [c])
    assert c.t == pytest.approx(0.2)


def test_blowup_detected():
    with pytest.raises(BlowupDetected):
        E.solve(E.L2, E.make_state(E.L2, G, 2e3 * np.sin(2 * np.pi * G.x)), 1e-6, 1e-3)
