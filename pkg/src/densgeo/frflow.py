"""Euler-Arnold flow of the Fisher-Rao (homogeneous H^1) metric.

The Eulerian divergence ``h = div u`` evolves by

    h_t + <u, grad h> + h^2 / 2 = -(1 / (2 mu(M))) int h^2,

and along the flow ``eta`` of ``u`` the solution is explicit:
``h o eta = 2 kappa tan(arctan(h0 / 2 kappa) - kappa t)`` with Jacobian
``(cos(kappa t) + h0 / (2 kappa) sin(kappa t))^2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .density import Density
from .errors import (BlowupDetected, ConfigError, PastBreakdown, PositivityLost,
                     Stationary)
from .grid import PeriodicGrid
from .oit import Diffeo, jacobian, sample

JAC_FLOOR = 1e-6


@dataclass(frozen=True, eq=False)
class ExplicitSolutionParams:
    grid: PeriodicGrid
    h0: np.ndarray
    kappa: float

    @classmethod
    def from_h0(cls, grid, h0, tol: float = 1e-10):
        h0 = np.asarray(h0, dtype=float)
        if abs(grid.integrate(h0)) > tol:
            raise ConfigError("h0 must have zero mean")
        kappa = float(np.sqrt(grid.integrate(h0 ** 2) / (4 * grid.volume)))
        return cls(grid, h0, kappa)


def ea_rhs(grid: PeriodicGrid, h, u):
    """Time derivative ``h_t`` of the Eulerian divergence."""
    u = np.asarray(u, dtype=float).reshape((grid.dim,) + grid.shape)
    adv = sum(u[a] * grid.derivative(h, a) for a in range(grid.dim))
    c = grid.integrate(h * h) / (2 * grid.volume)
    return -(adv + 0.5 * h * h + c)


def breakdown_time(params: ExplicitSolutionParams):
    """``T_max = pi / (2 kappa) + arctan(inf h0 / (2 kappa)) / kappa``."""
    k = params.kappa
    if k == 0.0:
        raise Stationary("kappa = 0: stationary solution with infinite lifespan")
    return float(np.pi / (2 * k) + np.arctan(np.min(params.h0) / (2 * k)) / k)


def explicit_h(params: ExplicitSolutionParams, t: float):
    """Lagrangian values ``h(t, eta(t, x))``."""
    k = params.kappa
    if k == 0.0:
        return params.h0.copy()
    if t >= breakdown_time(params):
        raise PastBreakdown(f"t = {t} is past the breakdown time")
    if t == 0.0:
        return params.h0.copy()
    return 2 * k * np.tan(np.arctan(params.h0 / (2 * k)) - k * t)


def explicit_jacobian(params: ExplicitSolutionParams, t: float):
    """Jacobian of the flow, ``(cos(kappa t) + h0 / (2 kappa) sin(kappa t))^2``."""
    k = params.kappa
    if k == 0.0:
        return np.ones_like(params.h0)
    if t == 0.0:
        return np.ones_like(params.h0)
    return (np.cos(k * t) + params.h0 / (2 * k) * np.sin(k * t)) ** 2


def velocity_from_h(grid: PeriodicGrid, h, mean_u=None):
    """Gradient velocity with divergence ``h`` (plus a constant drift)."""
    if grid.dim == 1:
        u = grid.antiderivative(h - grid.mean(h))
        u = (u - grid.mean(u))[None]
    else:
        u = grid.gradient(grid.inv_laplacian_meanzero(h))
    if mean_u is not None:
        u = u + np.reshape(mean_u, (grid.dim,) + (1,) * grid.dim)
    return u


@dataclass
class FlowState:
    t: float
    h: np.ndarray
    u: np.ndarray
    eta: Diffeo

    @property
    def min_jacobian(self):
        return float(np.min(jacobian(self.eta, check=False)))


@dataclass
class Trajectory:
    states: list
    C: list = field(default_factory=list)
    breakdown: float | None = None

    @property
    def final(self):
        return self.states[-1]


def integrate_ea_numeric(grid: PeriodicGrid, u0, dt: float = 1e-3, t_end: float = 1.0,
                         h_cap: float = 1e4, record_every: int = 1, method=None,
                         stop_at_breakdown: bool = False):
    """RK4 integration of the Eulerian equation together with the flow map.

    Parameters
    ----------
    u0 : array
        Initial velocity, shape ``(dim, *shape)`` (``(n,)`` allowed in 1D).
        Only its gradient part and mean enter.
    h_cap : float
        ``BlowupDetected`` is raised when ``max |h|`` exceeds this value.
    stop_at_breakdown : bool
        Stop (instead of continuing) once the Jacobian of ``eta`` drops
        below ``1e-6``; the time is stored in ``Trajectory.breakdown``.
    """
    u0 = np.asarray(u0, dtype=float).reshape((grid.dim,) + grid.shape)
    mean_u = np.array([grid.mean(u0[a]) for a in range(grid.dim)])
    h = grid.divergence(u0)
    x = grid.coords().reshape((grid.dim,) + grid.shape)

    def rhs(h, d):
        u = velocity_from_h(grid, h, mean_u)
        ud = np.array([sample(grid, u[a], x + d, method) for a in range(grid.dim)])
        return ea_rhs(grid, h, u), ud

    d = np.zeros_like(x)
    nsteps = max(1, int(np.ceil(t_end / dt - 1e-9)))
    dt = t_end / nsteps
    traj = Trajectory([FlowState(0.0, h, velocity_from_h(grid, h, mean_u), Diffeo(grid, d))],
                      [grid.integrate(h * h) / grid.volume])
    for k in range(nsteps):
        k1 = rhs(h, d)
        k2 = rhs(h + dt / 2 * k1[0], d + dt / 2 * k1[1])
        k3 = rhs(h + dt / 2 * k2[0], d + dt / 2 * k2[1])
        k4 = rhs(h + dt * k3[0], d + dt * k3[1])
        h = h + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        d = d + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        t = (k + 1) * dt
        hmax = np.max(np.abs(h))
        if not np.isfinite(hmax) or hmax > h_cap:
            raise BlowupDetected(f"max|h| = {hmax:.3e} exceeds cap at t = {t:.4f}")
        traj.C.append(grid.integrate(h * h) / grid.volume)
        eta = Diffeo(grid, d)
        if stop_at_breakdown and np.min(jacobian(eta, check=False)) < JAC_FLOOR:
            traj.states.append(FlowState(t, h, velocity_from_h(grid, h, mean_u), eta))
            traj.breakdown = t
            return traj
        if (k + 1) % record_every == 0 or k + 1 == nsteps:
            traj.states.append(FlowState(t, h, velocity_from_h(grid, h, mean_u), eta))
    return traj


def eulerian_to_lagrangian(state: FlowState, method=None):
    """``h(t, eta(t, x))`` at the grid nodes."""
    g = state.eta.grid
    return sample(g, state.h, state.eta.points(), method)


# -- Hamiltonian form ------------------------------------------------------------

def _hamiltonian_rhs(grid):
    def rhs(y):
        rho, theta = y
        C = 0.5 * grid.integrate(theta * theta * rho)
        return np.array([theta * rho, -0.5 * theta * theta - C])
    return rhs


def hamiltonian_energy(rho: Density, theta):
    return float(0.5 * rho.grid.integrate(theta * theta * rho.rho))


def hamiltonian_step(rho: Density, theta, dt: float, gauge_tol: float = 1e-8):
    """One RK4 step of ``theta_t = -theta^2 / 2 - C``, ``rho_t = theta rho``.

    ``C`` is the energy ``(1/2) int theta^2 rho``; the gauge
    ``int theta rho = 0`` is checked on input and re-imposed on output.
    """
    g = rho.grid
    theta = np.asarray(theta, dtype=float)
    gauge = g.integrate(theta * rho.rho)
    if abs(gauge) > gauge_tol:
        raise ConfigError(f"gauge int(theta rho) = {gauge:.3e} violated")
    f = _hamiltonian_rhs(g)
    y = np.array([rho.rho, theta])
    k1 = f(y)
    k2 = f(y + dt / 2 * k1)
    k3 = f(y + dt / 2 * k2)
    k4 = f(y + dt * k3)
    y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    r, th = y
    if not np.all(np.isfinite(y)) or np.min(r) <= 0:
        raise PositivityLost("density left the positive cone")
    new = Density.normalized(g, r)
    th = th - g.integrate(th * new.rho)
    return new, th


def hamiltonian_trajectory(rho: Density, theta, dt: float, t_end: float,
                           jac_floor: float = JAC_FLOOR):
    """Iterate :func:`hamiltonian_step`; stops at numerical breakdown.

    Returns ``(times, rhos, thetas, breakdown)`` where ``breakdown`` is the
    first time the Jacobian ``mu(M) rho`` drops below ``jac_floor`` (or the
    step fails), else ``None``.
    """
    g = rho.grid
    times, rhos, thetas = [0.0], [rho], [np.asarray(theta, dtype=float)]
    nsteps = int(round(t_end / dt))
    for k in range(nsteps):
        t = (k + 1) * dt
        try:
            rho, theta = hamiltonian_step(rho, theta, dt, gauge_tol=1e-6)
        except (PositivityLost, ConfigError):
            return np.array(times), rhos, thetas, t
        times.append(t)
        rhos.append(rho)
        thetas.append(theta)
        if np.min(rho.rho) * g.volume < jac_floor:
            return np.array(times), rhos, thetas, t
    return np.array(times), rhos, thetas, None
