import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from densgeo import PeriodicGrid
from densgeo import alpha as A
from densgeo import density as D
from densgeo import madelung as M
from densgeo.errors import (ConfigError, ConstraintViolated, NotInNonvanishingClass, WindingDetected,
                            WrongDimension, ZeroCurvature, ZeroNode)

from conftest import trig_poly

G = PeriodicGrid(128)
X = G.x
coeff_lists = st.lists(st.tuples(st.floats(-0.3, 0.3), st.floats(-0.3, 0.3)), min_size=1, max_size=4)


def state_from(cr, ct):
    return M.CotangentDensity.from_fields(G, np.exp(trig_poly(X, cr)), trig_poly(X, ct))


def test_uniform_state_maps_to_one():
    s = M.CotangentDensity.from_fields(G, np.ones(128), np.zeros(128))
    assert np.max(np.abs(M.madelung_fwd(s).values - 1.0)) < 1e-15


@given(coeff_lists, coeff_lists)
@settings(max_examples=25, deadline=None)
def test_round_trip(cr, ct):
    s = state_from(cr, ct)
    psi = M.madelung_fwd(s)
    assert psi.norm2() == pytest.approx(1.0, abs=1e-12)
    back = M.madelung_inv(psi)
    assert np.max(np.abs(back.rho.rho - s.rho.rho)) < 1e-12
    assert np.max(np.abs(back.theta - s.theta)) < 1e-10


@given(coeff_lists, coeff_lists, st.floats(-10, 10))
@settings(max_examples=20, deadline=None)
def test_gauge_shift_gives_same_ray(cr, ct, c):
    s = state_from(cr, ct)
    shifted = M.CotangentDensity.from_fields(G, s.rho.rho, s.theta + c)
    assert np.max(np.abs(shifted.theta - s.theta)) < 1e-12
    psi = M.madelung_fwd(s)
    rotated = M.WaveFunction(G, psi.values * np.exp(0.5j * c))
    assert M.same_ray(rotated, psi) < 1e-12


@given(coeff_lists, coeff_lists, coeff_lists, coeff_lists, coeff_lists, coeff_lists)
@settings(max_examples=25, deadline=None)
def test_isometry_and_symplectic(cr, ct, a1, b1, a2, b2):
    s = state_from(cr, ct)
    d1 = M.project_tangent(s, trig_poly(X, a1), trig_poly(X, b1))
    d2 = M.project_tangent(s, trig_poly(X, a2), trig_poly(X, b2))
    assert M.isometry_residual(s, d1, d2) < 1e-12
    assert M.symplectic_residual(s, d1, d2) < 1e-12


def test_restriction_to_real_is_fisher_rao():
    s = state_from([(0.2, 0.1)], [])
    rd, _ = M.project_tangent(s, np.cos(2 * np.pi * X), np.zeros(128))
    # with theta' = 0 the form is one quarter of int rho'^2 / rho
    fr = 0.25 * D.fisher_rao_metric(s.rho, rd, rd)
    assert M.sfr_metric(s, (rd, 0 * rd), (rd, 0 * rd)) == pytest.approx(fr, abs=1e-14)


def test_fubini_study_kills_the_ray():
    psi = M.madelung_fwd(state_from([(0.2, 0.1)], [(0.3, 0.0)]))
    p = psi.values
    assert abs(M.fs_hermitian(psi, p, p)) < 1e-14
    assert abs(M.fs_hermitian(psi, 1j * p, 1j * p)) < 1e-14
    a = np.cos(2 * np.pi * X) + 0.5j * np.sin(4 * np.pi * X)
    b = np.sin(2 * np.pi * X) * (1 + 0j)
    c = 0.7 - 0.3j
    assert M.fs_metric(psi, a + c * p, b) == pytest.approx(M.fs_metric(psi, a, b), abs=1e-14)
    # projective invariance in psi itself
    psi2 = M.WaveFunction(G, 2.5j * p)
    assert M.fs_metric(psi2, 2.5j * a, 2.5j * b) == pytest.approx(M.fs_metric(psi, a, b), abs=1e-14)


def test_constraint_violations():
    s = state_from([(0.2, 0.0)], [])
    with pytest.raises(ConstraintViolated):
        M.sfr_metric(s, (np.ones(128), np.zeros(128)), (np.ones(128), np.zeros(128)))
    with pytest.raises(ConstraintViolated):
        M.CotangentDensity(s.rho, np.ones(128))
    with pytest.raises(ConfigError):
        M.WaveFunction(G, 2 * np.ones(128), normalized=True)


def test_zero_node_and_winding():
    with pytest.raises(ZeroNode):
        M.WaveFunction(G, np.cos(np.pi * X))
    with pytest.raises(WindingDetected):
        M.madelung_inv(M.WaveFunction(G, np.exp(2j * np.pi * X)))
    g2 = PeriodicGrid(32, 2)
    xx, yy = g2.coords()
    with pytest.raises(WindingDetected):
        M.madelung_inv(M.WaveFunction(g2, np.exp(2j * np.pi * yy)))
    ok = M.madelung_inv(M.WaveFunction(g2, np.exp(0.3j * np.sin(2 * np.pi * xx) * np.cos(2 * np.pi * yy))))
    assert np.max(np.abs(ok.rho.rho - 1.0)) < 1e-14


def test_hasimoto():
    assert np.max(np.abs(M.hasimoto(G, np.ones(128), np.zeros(128)).values - 1.0)) == 0.0
    k = 1 + 0.2 * np.cos(2 * np.pi * X)
    psi = M.hasimoto(G, k, 2 * np.pi * np.ones(128))
    assert np.max(np.abs(psi.values - k * np.exp(2j * np.pi * X))) < 1e-12
    with pytest.raises(ZeroCurvature):
        M.hasimoto(G, np.cos(2 * np.pi * X), np.zeros(128))
    with pytest.raises(WrongDimension):
        M.hasimoto(PeriodicGrid(8, 2), np.ones((8, 8)), np.zeros((8, 8)))


def test_nls_plane_wave_and_norm():
    psi0 = M.WaveFunction(G, np.exp(2j * np.pi * X))
    tr = M.nls_solve(psi0, None, "none", dt=1e-4, t_end=0.05, record_every=500)
    t = tr.times[-1]
    exact = np.exp(1j * (2 * np.pi * X - (2 * np.pi) ** 2 * t))
    assert np.max(np.abs(tr.psi[-1].values - exact)) < 1e-10
    p0 = M.WaveFunction(G, (1 + 0.3 * np.cos(2 * np.pi * X)) * np.exp(0.2j * np.sin(2 * np.pi * X)))
    tr = M.nls_solve(p0, 5 * np.cos(2 * np.pi * X), "cubic", dt=1e-4, t_end=0.1, record_every=1000)
    assert tr.norm_drift < 1e-10
    with pytest.raises(ConfigError):
        M.nonlinearity("quartic", np.ones(3))


@pytest.mark.parametrize("tag", ["none", "cubic", "barotropic"])
def test_hydrodynamic_form(tag):
    p0 = M.WaveFunction(G, (1 + 0.3 * np.cos(2 * np.pi * X)) * np.exp(0.2j * np.sin(2 * np.pi * X)))
    tr = M.nls_solve(p0, np.cos(2 * np.pi * X), tag, dt=1e-4, t_end=0.005)
    rv, rr = M.hydrodynamic_residual(tr, stride=5)
    # splitting error in time dominates
    assert rv < 1e-3 and rr < 1e-5


def test_vacuum_detected():
    with pytest.raises(NotInNonvanishingClass):
        M._hydro_fields(G, np.cos(np.pi * X) + 0j)


def test_2hs_zero_data():
    tr = M.solve_2hs(G, np.zeros(128), np.zeros(128), 1e-2, 0.1)
    assert all(np.all(u == 0) for u in tr.u) and all(np.all(s == 0) for s in tr.sigma)


def test_2hs_reduces_to_hunter_saxton():
    V0 = 0.1 * np.sin(2 * np.pi * X) + 0.05 * (1 - np.cos(4 * np.pi * X))
    tr = M.solve_2hs(G, V0, np.zeros(128), 1e-3, 0.3)
    geo = A.geodesic_alpha(0.0, A.BasepointDiffeo1D.identity(G), V0, 1e-3, 0.3, record_every=300)
    assert np.max(np.abs(A.eulerian_velocity(geo[-1].xi, geo[-1].V) - tr.u[-1])) < 1e-7


def test_2hs_conservation_and_speed():
    u0 = 0.1 * np.sin(2 * np.pi * X)
    s0 = 0.2 * np.cos(2 * np.pi * X)
    tr = M.solve_2hs(G, u0, s0, 1e-3, 0.3, record_every=1, track=True)
    e = [tr.energy(k) for k in range(len(tr.times))]
    assert max(e) - min(e) < 1e-7 * e[0]
    assert max(abs(G.integrate(s)) for s in tr.sigma) < 1e-12
    sp = M.sfr_speeds(tr)
    assert np.max(np.abs(sp - np.sqrt(e[0]))) < 1e-4
    with pytest.raises(ConfigError):
        M.solve_2hs(G, u0, 1 + s0, 1e-3, 0.1)
    with pytest.raises(ConfigError):
        M.sfr_speeds(M.solve_2hs(G, u0, s0, 1e-3, 0.01))
