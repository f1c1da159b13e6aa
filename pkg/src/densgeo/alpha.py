"""Amari-Chentsov alpha-connections on circle densities.

Densities on the unit circle are represented by basepoint-fixed maps
``xi`` with ``xi(0) = 0`` (``Jac xi = xi_x``). The Christoffel map

    Gamma_xi(W, V) = -((1 + alpha) / 2) {A^{-1} d_x ((V o xi^{-1})_x (W o xi^{-1})_x)} o xi,

with ``A^{-1}`` the basepoint-gauged inverse of ``-d^2``, is evaluated in
the Lagrangian frame: after the change of variables ``y = xi(s)`` it reads
``beta (int_0^x g - xi(x) int_0^1 g)`` with ``g = V_x W_x / xi_x`` and
``beta = (1 + alpha) / 2``, which needs no inverse map.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .density import Density
from .errors import ConfigError, DegenerateTriple, MonotonicityLost, WrongDimension
from .grid import PeriodicGrid
from .oit import Diffeo, inverse

MONO_FLOOR = 1e-6


def _check_alpha(alpha, closed=True):
    a = float(alpha)
    if not (-1.0 <= a <= 1.0) or (not closed and abs(a) == 1.0):
        raise ConfigError(f"alpha = {alpha} out of range")
    return a


def _check_grid(grid):
    if grid.dim != 1 or grid.length != 1.0:
        raise WrongDimension("alpha-connections live on the unit circle")


@dataclass(frozen=True, eq=False)
class BasepointDiffeo1D:
    """Monotone map of the unit circle with ``xi(0) = 0``, stored by node values."""
    grid: PeriodicGrid
    xi: np.ndarray

    def __post_init__(self):
        _check_grid(self.grid)
        xi = np.array(self.xi, dtype=float)
        if xi.shape != self.grid.shape:
            raise ConfigError("node values do not match the grid")
        xi[0] = 0.0
        if np.any(np.diff(np.append(xi, 1.0)) <= 0):
            raise MonotonicityLost("node values are not strictly increasing")
        object.__setattr__(self, "xi", xi)

    @classmethod
    def from_disp(cls, grid, d):
        d = np.asarray(d, dtype=float)
        return cls(grid, grid.x + d - d[0])

    @classmethod
    def identity(cls, grid):
        return cls(grid, grid.x.copy())

    @property
    def disp(self):
        return self.xi - self.grid.x

    def jac(self):
        return 1.0 + self.grid.derivative(self.disp)

    def as_diffeo(self):
        return Diffeo(self.grid, self.disp)


def density_of(xi: BasepointDiffeo1D):
    return Density.normalized(xi.grid, xi.jac())


def from_density(nu: Density):
    """Basepoint-fixed map with ``Jac = rho``: the cumulative distribution."""
    _check_grid(nu.grid)
    return BasepointDiffeo1D(nu.grid, nu.grid.antiderivative(nu.rho))


def hdot_metric(xi: BasepointDiffeo1D, V, W):
    """``(1/4) int V_x W_x / xi_x``."""
    g = xi.grid
    return float(0.25 * g.integrate(g.derivative(V) * g.derivative(W) / xi.jac()))


def divergence_alpha(alpha, xi: BasepointDiffeo1D, eta: BasepointDiffeo1D):
    """Alpha-divergence between the densities ``Jac xi`` and ``Jac eta``."""
    a = _check_alpha(alpha)
    g = xi.grid
    jx, je = xi.jac(), eta.jac()
    if a == -1.0:
        return float(0.25 * g.integrate((np.log(jx) - np.log(je)) * jx))
    if a == 1.0:
        return float(0.25 * g.integrate((np.log(je) - np.log(jx)) * je))
    s = g.integrate(jx ** ((1 - a) / 2) * je ** ((1 + a) / 2))
    return float((1 - s) / (1 - a * a))


def christoffel_alpha(alpha, xi: BasepointDiffeo1D, V, W):
    """Christoffel map ``Gamma^(alpha)_xi(W, V)`` (symmetric in ``V, W``)."""
    a = _check_alpha(alpha)
    g = xi.grid
    if a == -1.0:
        return np.zeros(g.shape)
    beta = 0.5 * (1 + a)
    f = g.derivative(V) * g.derivative(W) / xi.jac()
    G = g.antiderivative(f)         # int_0^x f
    return beta * (G - xi.xi * g.mean(f))


@dataclass
class AlphaState:
    t: float
    xi: BasepointDiffeo1D
    V: np.ndarray


def geodesic_alpha(alpha, xi0: BasepointDiffeo1D, V0, dt: float, t_end: float,
                   record_every: int = 1):
    """RK4 for ``xi'' = Gamma_xi(xi', xi')``; returns a list of :class:`AlphaState`."""
    a = _check_alpha(alpha)
    g = xi0.grid
    V = np.asarray(V0, dtype=float)
    V = V - V[0]
    d = xi0.disp.copy()
    x = g.x

    def acc(d, V):
        jac = 1.0 + g.derivative(d)
        if np.min(jac) < MONO_FLOOR:
            raise MonotonicityLost(f"min xi_x = {np.min(jac):.3e}")
        if a == -1.0:
            return np.zeros_like(V)
        f = g.derivative(V) ** 2 / jac
        return 0.5 * (1 + a) * (g.antiderivative(f) - (x + d) * g.mean(f))

    nsteps = max(1, int(np.ceil(t_end / dt - 1e-9))) if t_end > 0 else 0
    dt = t_end / nsteps if nsteps else dt
    out = [AlphaState(0.0, xi0, V.copy())]
    for k in range(nsteps):
        k1 = (V, acc(d, V))
        k2 = (V + dt / 2 * k1[1], acc(d + dt / 2 * k1[0], V + dt / 2 * k1[1]))
        k3 = (V + dt / 2 * k2[1], acc(d + dt / 2 * k2[0], V + dt / 2 * k2[1]))
        k4 = (V + dt * k3[1], acc(d + dt * k3[0], V + dt * k3[1]))
        d = d + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        V = V + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        if np.min(1.0 + g.derivative(d)) < MONO_FLOOR:
            raise MonotonicityLost(f"xi lost monotonicity at t = {(k + 1) * dt:.4f}")
        if (k + 1) % record_every == 0 or k + 1 == nsteps:
            out.append(AlphaState((k + 1) * dt, BasepointDiffeo1D.from_disp(g, d), V.copy()))
    return out


def eulerian_velocity(xi: BasepointDiffeo1D, V):
    """``u = V o xi^{-1}`` at the nodes."""
    g = xi.grid
    inv = inverse(xi.as_diffeo())
    return g.evaluate(V, g.x + inv.disp[0])


def pj_residual_field(grid, alpha, u, u_t):
    """``u_txx + (2 - alpha) u_x u_xx + u u_xxx``."""
    ux = grid.derivative(u)
    uxx = grid.derivative(u, 0, 2)
    uxxx = grid.derivative(u, 0, 3)
    return grid.derivative(u_t, 0, 2) + (2 - alpha) * ux * uxx + u * uxxx


def pj_residual(alpha, states, index: int | None = None):
    """Max residual of the Proudman-Johnson equation on a stored trajectory.

    ``states`` must be equally spaced in time (``record_every`` constant);
    ``u_t`` is a fourth-order central difference of the Eulerian velocity.
    """
    if len(states) < 5:
        raise ConfigError("need at least five states for the residual stencil")
    i = len(states) // 2 if index is None else index
    if i < 2 or i > len(states) - 3:
        raise ConfigError("index too close to the trajectory ends")
    g = states[i].xi.grid
    h = states[i + 1].t - states[i].t
    us = [eulerian_velocity(states[j].xi, states[j].V) for j in range(i - 2, i + 3)]
    ut = (us[0] - 8 * us[1] + 8 * us[3] - us[4]) / (12 * h)
    return float(np.max(np.abs(pj_residual_field(g, alpha, us[2], ut))))


# -- alpha = 1: explicit solution and affine chart ---------------------------------

def _alpha1_parts(grid, a, b, t):
    e = np.exp(a * t + b)
    E, Ea, Eaa = (grid.antiderivative(v) for v in (e, a * e, a * a * e))
    Z, Za, Zaa = (grid.integrate(v) for v in (e, a * e, a * a * e))
    return E, Ea, Eaa, Z, Za, Zaa


def explicit_alpha1_geodesic(grid: PeriodicGrid, a, b, t: float):
    """``xi(t, x) = int_0^x e^{a t + b} / int_0^1 e^{a t + b}``."""
    _check_grid(grid)
    E, _, _, Z, _, _ = _alpha1_parts(grid, np.asarray(a, float), np.asarray(b, float), t)
    return BasepointDiffeo1D(grid, E / Z)


def explicit_alpha1_velocity(grid: PeriodicGrid, a, b, t: float):
    """Analytic ``(xi_t, xi_tt)`` of :func:`explicit_alpha1_geodesic`."""
    E, Ea, Eaa, Z, Za, Zaa = _alpha1_parts(grid, np.asarray(a, float), np.asarray(b, float), t)
    N = Ea * Z - E * Za
    xt = N / Z ** 2
    xtt = (Eaa * Z - E * Zaa) / Z ** 2 - 2 * N * Za / Z ** 3
    return xt, xtt


def explicit_alpha1_residual(grid: PeriodicGrid, a, b, t: float):
    """Max residual of ``u_txx + u_x u_xx + u u_xxx`` for ``u = xi_t o xi^{-1}``."""
    xi = explicit_alpha1_geodesic(grid, a, b, t)
    xt, xtt = explicit_alpha1_velocity(grid, a, b, t)
    y = grid.x + inverse(xi.as_diffeo()).disp[0]
    u = grid.evaluate(xt, y)
    acc = grid.evaluate(xtt, y)
    ut = acc - u * grid.derivative(u)
    return float(np.max(np.abs(pj_residual_field(grid, 1.0, u, ut))))


def affine_chart(xi: BasepointDiffeo1D):
    """``phi = log xi_x - int log xi_x``."""
    lj = np.log(xi.jac())
    return lj - xi.grid.mean(lj)


def affine_chart_inverse(grid: PeriodicGrid, phi, tol: float = 1e-10):
    phi = np.asarray(phi, dtype=float)
    if abs(grid.mean(phi)) > tol:
        raise ConfigError("affine coordinate must have zero mean")
    e = np.exp(phi)
    return BasepointDiffeo1D(grid, grid.antiderivative(e) / grid.integrate(e))


# -- L^p root geodesic -------------------------------------------------------------

_GL = np.polynomial.legendre.leggauss(64)


def pth_root_geodesic(alpha, nu0: Density, nu1: Density, t: float):
    """Alpha-geodesic between two densities through the ``p``-th root map.

    With ``p = 2 / (1 - alpha)`` the curve is the radial projection of the
    segment between ``nu0^(1/p)`` and ``nu1^(1/p)`` onto the unit ``L^p``
    sphere. The affine parameter follows from the conserved Wronskian of the
    planar motion ``f'' = -lambda(t) f``: ``dt/dtau`` is proportional to
    ``N(tau)^(-2)`` with ``N`` the ``L^p`` norm of the segment point.
    """
    a = _check_alpha(alpha, closed=False)
    if not 0.0 <= t <= 1.0:
        raise ConfigError("t must lie in [0, 1]")
    if t == 0.0:
        return nu0
    if t == 1.0:
        return nu1
    g = nu0.grid
    p = 2.0 / (1.0 - a)
    f0, f1 = nu0.rho ** (1 / p), nu1.rho ** (1 / p)

    def norm(tau):
        s = (1 - tau) * f0 + tau * f1
        return g.integrate(s ** p) ** (1 / p)

    def clock(tau):
        xs, ws = _GL
        nodes = 0.5 * tau * (xs + 1)
        return 0.5 * tau * sum(w / norm(c) ** 2 for c, w in zip(nodes, ws))

    if np.max(np.abs(f0 - f1)) < 1e-15:
        return nu0
    total = clock(1.0)
    tau = optimize.brentq(lambda s: clock(s) / total - t, 0.0, 1.0, xtol=1e-15, rtol=1e-15)
    s = (1 - tau) * f0 + tau * f1
    return Density.normalized(g, (s / norm(tau)) ** p)


# -- duality and curvature -----------------------------------------------------------

def duality_defect(alpha, xi: BasepointDiffeo1D, V, W, Z, h: float = 1e-4):
    """``|V<W,Z> - <nabla^a_V W, Z> - <W, nabla^-a_V Z>|`` for constant fields."""
    a = _check_alpha(alpha)
    V = np.asarray(V, dtype=float)
    if not np.any(V):
        return 0.0
    g = xi.grid
    xp = BasepointDiffeo1D.from_disp(g, xi.disp + h * V)
    xm = BasepointDiffeo1D.from_disp(g, xi.disp - h * V)
    lhs = (hdot_metric(xp, W, Z) - hdot_metric(xm, W, Z)) / (2 * h)
    rhs = -hdot_metric(xi, christoffel_alpha(a, xi, V, W), Z) \
        - hdot_metric(xi, W, christoffel_alpha(-a, xi, V, Z))
    return float(abs(lhs - rhs))


def _holonomy(alpha, xi, X, Y, Z, h, sub):
    g = xi.grid
    d0 = xi.disp

    def gam(d, Zc, direction):
        jac = 1.0 + g.derivative(d)
        f = g.derivative(Zc) * g.derivative(direction) / jac
        if alpha == -1.0:
            return np.zeros_like(Zc)
        return 0.5 * (1 + alpha) * (g.antiderivative(f) - (g.x + d) * g.mean(f))

    Zc = np.asarray(Z, dtype=float).copy()
    start = d0.copy()
    for direction, sign in ((X, 1), (Y, 1), (X, -1), (Y, -1)):
        v = sign * h * np.asarray(direction, dtype=float)
        ds = 1.0 / sub
        for j in range(sub):
            p = start + j * ds * v
            k1 = gam(p, Zc, v)
            k2 = gam(p + 0.5 * ds * v, Zc + 0.5 * ds * k1, v)
            k3 = gam(p + 0.5 * ds * v, Zc + 0.5 * ds * k2, v)
            k4 = gam(p + ds * v, Zc + ds * k3, v)
            Zc = Zc + ds / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        start = start + v
    return Zc - np.asarray(Z, dtype=float)


def curvature_holonomy(alpha, xi, X, Y, Z, h: float = 1e-3, sub: int = 4):
    """Curvature field ``R(X, Y) Z`` up to sign from square-loop holonomy.

    Richardson extrapolation of loops of side ``h`` and ``h / 2`` removes
    the first-order loop-shape error.
    """
    a = _check_alpha(alpha)
    H1 = _holonomy(a, xi, X, Y, Z, h, sub) / h ** 2
    H2 = _holonomy(a, xi, X, Y, Z, h / 2, sub) / (h / 2) ** 2
    return 2 * H2 - H1


def alpha_curvature_check(alpha, xi, X, Y, Z, h: float = 1e-3):
    """Ratio ``R^(alpha) / R^(0)`` of holonomy curvatures (expected ``1 - alpha^2``)."""
    g = xi.grid
    r0 = curvature_holonomy(0.0, xi, X, Y, Z, h)
    n0 = g.integrate(r0 * r0)
    if np.sqrt(n0) < 1e-10:
        raise DegenerateTriple("Levi-Civita curvature vanishes on this triple")
    ra = curvature_holonomy(alpha, xi, X, Y, Z, h)
    return float(g.integrate(ra * r0) / n0)
