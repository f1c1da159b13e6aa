import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from densgeo import Density, PeriodicGrid
from densgeo import alpha as A
from densgeo import density as D
from densgeo import euler_arnold as E
from densgeo.errors import ConfigError, DegenerateTriple, MonotonicityLost, WrongDimension

G = PeriodicGrid(128)
X = G.x


def rf(rng, k=4, amp=0.02):
    c = rng.standard_normal((2, k))
    return sum(amp * (c[0, j] * (np.cos(2 * np.pi * (j + 1) * X) - 1) + c[1, j] * np.sin(2 * np.pi * (j + 1) * X))
               / (j + 1) for j in range(k))


def test_basepoint_diffeo_validation():
    with pytest.raises(MonotonicityLost):
        A.BasepointDiffeo1D(G, X[::-1].copy())
    with pytest.raises(WrongDimension):
        A.BasepointDiffeo1D.identity(PeriodicGrid(8, 2))
    with pytest.raises(ConfigError):
        A.christoffel_alpha(1.5, A.BasepointDiffeo1D.identity(G), X, X)


def test_density_round_trip():
    nu = Density.normalized(G, 1 + 0.3 * np.sin(2 * np.pi * X))
    xi = A.from_density(nu)
    assert np.max(np.abs(A.density_of(xi).rho - nu.rho)) < 1e-12


@given(st.integers(0, 10 ** 6), st.floats(-1, 1))
@settings(max_examples=20, deadline=None)
def test_christoffel_symmetric_and_minus_one_flat(seed, alpha):
    rng = np.random.default_rng(seed)
    xi = A.BasepointDiffeo1D.from_disp(G, rf(rng))
    V, W = rf(rng), rf(rng)
    a = A.christoffel_alpha(alpha, xi, V, W)
    assert np.max(np.abs(a - A.christoffel_alpha(alpha, xi, W, V))) < 1e-14
    assert a[0] == pytest.approx(0.0, abs=1e-15)
    assert np.all(A.christoffel_alpha(-1.0, xi, V, W) == 0.0)


@given(st.integers(0, 10 ** 6), st.floats(-0.99, 0.99))
@settings(max_examples=20, deadline=None)
def test_divergence_properties(seed, alpha):
    rng = np.random.default_rng(seed)
    a = A.BasepointDiffeo1D.from_disp(G, rf(rng))
    b = A.BasepointDiffeo1D.from_disp(G, rf(rng))
    assert A.divergence_alpha(alpha, a, a) == pytest.approx(0.0, abs=1e-14)
    assert A.divergence_alpha(alpha, a, b) >= -1e-15
    assert A.divergence_alpha(alpha, a, b) == pytest.approx(A.divergence_alpha(-alpha, b, a), abs=1e-14)


def test_divergence_second_order_is_the_metric():
    rng = np.random.default_rng(3)
    xi = A.BasepointDiffeo1D.from_disp(G, rf(rng))
    V = rf(rng)
    h = 1e-3
    for alpha in (-1.0, 0.4, 1.0):
        d = A.divergence_alpha(alpha, xi, A.BasepointDiffeo1D.from_disp(G, xi.disp + h * V))
        # D(xi, xi + h V) = (1/2) h^2 g(V, V) with g = (1/4) int V_x^2 / xi_x
        assert d / h ** 2 == pytest.approx(0.5 * A.hdot_metric(xi, V, V), rel=1e-2)


def test_alpha0_geodesic_is_hunter_saxton():
    V0 = 0.1 * np.sin(2 * np.pi * X) + 0.05 * (1 - np.cos(4 * np.pi * X))
    tr = A.geodesic_alpha(0.0, A.BasepointDiffeo1D.identity(G), V0, 1e-3, 0.3, record_every=300)
    st_, _ = E.solve(E.HDOT, E.make_state(E.HDOT, G, V0), 1e-3, 0.3)
    assert np.max(np.abs(A.eulerian_velocity(tr[-1].xi, tr[-1].V) - st_.u)) < 1e-7
    e = [A.hdot_metric(s.xi, s.V, s.V) for s in tr]
    assert max(e) - min(e) < 1e-10


@pytest.mark.parametrize("alpha", [0.0, 0.5, -1.0])
def test_geodesics_satisfy_proudman_johnson(alpha):
    V0 = 0.1 * np.sin(2 * np.pi * X) + 0.05 * (1 - np.cos(4 * np.pi * X))
    tr = A.geodesic_alpha(alpha, A.BasepointDiffeo1D.identity(G), V0, 1e-3, 0.1)
    assert A.pj_residual(alpha, tr) < 1e-5


def test_explicit_alpha1_solution():
    a = np.sin(2 * np.pi * X)
    assert A.explicit_alpha1_residual(G, a, 0 * a, 0.4) < 1e-5
    xi = A.explicit_alpha1_geodesic(G, a, 0 * a, 0.4)
    phi = A.affine_chart(xi)
    # the affine coordinate moves linearly: phi = a t - mean
    assert np.max(np.abs(phi - 0.4 * (a - G.mean(a)))) < 1e-12
    assert np.max(np.abs(A.affine_chart_inverse(G, phi).xi - xi.xi)) < 1e-12


def test_duality_and_curvature():
    rng = np.random.default_rng(0)
    xi = A.BasepointDiffeo1D.from_disp(G, rf(rng))
    V, W, Z = rf(rng), rf(rng), rf(rng)
    assert A.duality_defect(0.3, xi, V, W, Z) < 1e-5
    assert A.alpha_curvature_check(0.5, xi, V, W, Z) == pytest.approx(0.75, abs=1e-3)
    with pytest.raises(DegenerateTriple):
        A.alpha_curvature_check(0.5, xi, V, V, Z)


def test_pth_root_geodesic():
    a = Density.normalized(G, np.exp(0.3 * np.sin(2 * np.pi * X + 1)))
    b = Density.normalized(G, np.exp(0.5 * np.cos(4 * np.pi * X)))
    assert A.pth_root_geodesic(0.5, a, b, 0.0) is a
    assert A.pth_root_geodesic(0.5, a, b, 1.0) is b
    for t in (0.1, 0.5, 0.8):
        assert np.max(np.abs(A.pth_root_geodesic(0.0, a, b, t).rho - D.fisher_rao_geodesic(a, b, t).rho)) < 1e-12
    with pytest.raises(ConfigError):
        A.pth_root_geodesic(1.0, a, b, 0.5)


def test_pth_root_matches_ode():
    V0 = 0.1 * np.sin(2 * np.pi * X) + 0.05 * (1 - np.cos(4 * np.pi * X))
    tr = A.geodesic_alpha(0.5, A.BasepointDiffeo1D.identity(G), V0, 1e-3, 1.0, record_every=250)
    nu0, nu1 = A.density_of(tr[0].xi), A.density_of(tr[-1].xi)
    for s in tr[1:-1]:
        r = A.pth_root_geodesic(0.5, nu0, nu1, s.t)
        assert np.max(np.abs(A.from_density(r).xi - s.xi.xi)) < 1e-4


def test_monotonicity_loss():
    with pytest.raises(MonotonicityLost):
        A.geodesic_alpha(-1.0, A.BasepointDiffeo1D.identity(G), 0.3 * np.sin(2 * np.pi * X), 1e-2, 2.0)
