"""Diffeomorphisms of the torus and optimal information transport.

A :class:`Diffeo` is stored as a periodic displacement, ``x -> x + d(x)``.
Off-grid sampling uses trigonometric evaluation in 1D (cheap there, and
accurate enough for the 1e-10 inverse checks) and periodic cubic splines in
2D; pass ``method`` to override.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .density import Density, bhattacharyya, sqrt_map
from .errors import ConfigError, InverseDiverged, NonDiffeomorphic, PositivityLost
from .grid import PeriodicGrid


@dataclass(frozen=True, eq=False)
class Diffeo:
    """Orientation-preserving map ``x -> x + disp(x)``; ``disp`` has shape ``(dim, *shape)``."""
    grid: PeriodicGrid
    disp: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.disp, dtype=float).reshape((self.grid.dim,) + self.grid.shape)
        if not np.all(np.isfinite(d)):
            raise ConfigError("displacement has non-finite values")
        object.__setattr__(self, "disp", d)

    @classmethod
    def identity(cls, grid):
        return cls(grid, np.zeros((grid.dim,) + grid.shape))

    def points(self):
        """Image of the grid nodes (unwrapped), shape ``(dim, *shape)``."""
        return self.grid.coords().reshape(self.disp.shape) + self.disp


def default_method(grid):
    return "spectral" if grid.dim == 1 else "cubic"


def sample(grid: PeriodicGrid, f, pts, method=None):
    """Evaluate the grid field ``f`` at points of shape ``(dim, *shape)``."""
    method = method or default_method(grid)
    p = pts[0] if grid.dim == 1 else pts
    if method == "spectral":
        return grid.evaluate(f, p)
    if method == "cubic":
        return grid.interpolate(f, p)
    raise ConfigError(f"unknown interpolation method {method!r}")


def jacobian_matrix(phi: Diffeo):
    g = phi.grid
    J = np.empty((g.dim, g.dim) + g.shape)
    for i in range(g.dim):
        for j in range(g.dim):
            J[i, j] = g.derivative(phi.disp[i], j) + (i == j)
    return J


def jacobian(phi: Diffeo, check: bool = True):
    """Jacobian determinant of ``phi``; raises NonDiffeomorphic if not positive."""
    J = jacobian_matrix(phi)
    if phi.grid.dim == 1:
        jac = J[0, 0]
    else:
        jac = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
    if check and np.min(jac) <= 0:
        raise NonDiffeomorphic(f"Jacobian has min value {np.min(jac):.3e}")
    return jac


def compose(phi: Diffeo, psi: Diffeo, method=None):
    """``phi o psi``."""
    if phi.grid != psi.grid:
        raise ConfigError("diffeos live on different grids")
    g = phi.grid
    pts = psi.points()
    d = np.array([sample(g, phi.disp[a], pts, method) for a in range(g.dim)])
    return Diffeo(g, psi.disp + d)


def inverse(phi: Diffeo, tol: float = 1e-13, max_iter: int = 50, method=None, guess=None):
    """Inverse map by Newton iteration on every node.

    Solves ``y + d(y) = x`` for each node ``x``; ``guess`` may supply an
    initial inverse displacement.
    """
    g = phi.grid
    x = g.coords().reshape(phi.disp.shape)
    dd = jacobian_matrix(phi)
    y = x - phi.disp if guess is None else x + guess.disp
    for _ in range(max_iter):
        r = y + np.array([sample(g, phi.disp[a], y, method) for a in range(g.dim)]) - x
        err = np.max(np.abs(r))
        if not np.isfinite(err):
            break
        if err < tol:
            return Diffeo(g, y - x)
        J = np.array([[sample(g, dd[i, j], y, method) for j in range(g.dim)]
                      for i in range(g.dim)])
        if g.dim == 1:
            y = y - r / J[0, 0]
        else:
            det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
            y = y - np.array([(J[1, 1] * r[0] - J[0, 1] * r[1]) / det,
                              (-J[1, 0] * r[0] + J[0, 0] * r[1]) / det])
    raise InverseDiverged(f"Newton inverse did not converge in {max_iter} iterations")


def pullback_density(phi: Diffeo, nu: Density, method=None):
    """``phi^* nu = (rho o phi) Jac(phi)``, renormalized."""
    rho = sample(phi.grid, nu.rho, phi.points(), method)
    return Density.normalized(phi.grid, rho * jacobian(phi))


def pushforward_density(phi: Diffeo, nu: Density, method=None):
    return pullback_density(inverse(phi, method=method), nu, method)


def max_node_distance(phi: Diffeo, psi: Diffeo):
    """Largest periodic distance between images of the grid nodes."""
    L = phi.grid.length
    d = phi.disp - psi.disp
    d = d - L * np.round(d / L)
    return float(np.max(np.abs(d)))


# -- optimal information transport --------------------------------------------

def _angle(target: Density):
    return float(np.arccos(np.clip(bhattacharyya(Density.uniform(target.grid), target), -1, 1)))


def w0_source(target: Density):
    """Source ``(2 theta sqrt(J) - 2 theta cos(theta)) / sin(theta)`` of the initial potential."""
    theta = _angle(target)
    sq = sqrt_map(target)
    if theta < 1e-6:
        ratio = 1.0 + theta ** 2 / 6
    else:
        ratio = theta / np.sin(theta)
    return 2 * ratio * (sq - np.cos(theta)), theta


def w0(target: Density):
    """Initial potential ``w0`` with ``Lap w0`` given by :func:`w0_source`."""
    src, _ = w0_source(target)
    return target.grid.inv_laplacian_meanzero(src)


def _q(sq, theta, t):
    """``2 sigma_t / sigma`` on the reference grid (``sigma`` the great-circle arc)."""
    if theta < 1e-6:
        return 2 * (sq - 1) / (1 + t * (sq - 1))
    num = 2 * theta * (np.cos(t * theta) * sq - np.cos((1 - t) * theta))
    den = np.sin((1 - t) * theta) + np.sin(t * theta) * sq
    return num / den


@dataclass
class LiftResult:
    times: np.ndarray
    zeta: list                 # ζ(t_k)
    psi: Diffeo                # ζ(1)
    psi_inv: Diffeo            # back-advected ζ(1)^{-1}
    theta: float
    velocity_divfree: float    # max Helmholtz divergence-free norm of the velocity
    inverse_check: float       # max mismatch between back-advection and Newton inverse
    checks: dict = field(default_factory=dict)


def lift_horizontal(target: Density, dt: float = 1e-2, n_steps: int | None = None,
                    method=None, check_every: int = 10):
    """Horizontal lift of the Fisher-Rao geodesic from ``mu`` to ``target``.

    Integrates ``zeta_t = grad(w_t) o zeta`` with
    ``Lap w_t = (2 sigma_t / sigma) o zeta^{-1}``, carrying the inverse
    ``chi = zeta^{-1}`` along by back-advection ``chi_t = -D chi . grad(w_t)``.
    Coupled RK4 with stage-time potentials.
    """
    g = target.grid
    if n_steps is None:
        n_steps = int(round(1.0 / dt))
    dt = 1.0 / n_steps
    theta = _angle(target)
    sq = sqrt_map(target)
    sig_min = min(np.min(_sig(sq, theta, t)) for t in np.linspace(0, 1, 11))
    if sig_min <= 0:
        raise PositivityLost("great-circle arc leaves the positive cone")
    x = g.coords().reshape((g.dim,) + g.shape)
    stats = {"divfree": 0.0}

    def velocity(t, e):
        chi = x + e
        src = sample(g, _q(sq, theta, t), chi, method)
        src = src - g.mean(src)
        w = g.inv_laplacian_meanzero(src)
        u = g.gradient(w)
        if g.dim > 1:
            stats["divfree"] = max(stats["divfree"], _l2(g, g.helmholtz_divfree(u)))
        return u

    def rhs(t, d, e):
        u = velocity(t, e)
        dd = np.array([sample(g, u[a], x + d, method) for a in range(g.dim)])
        De = np.array([[g.derivative(e[i], j) + (i == j) for j in range(g.dim)]
                       for i in range(g.dim)])
        de = -np.einsum("ij...,j...->i...", De, u)
        return dd, de

    d = np.zeros_like(x)
    e = np.zeros_like(x)
    zetas = [Diffeo(g, d)]
    times = [0.0]
    inv_check = 0.0
    warned = False
    for k in range(n_steps):
        t = k * dt
        k1 = rhs(t, d, e)
        k2 = rhs(t + dt / 2, d + dt / 2 * k1[0], e + dt / 2 * k1[1])
        k3 = rhs(t + dt / 2, d + dt / 2 * k2[0], e + dt / 2 * k2[1])
        k4 = rhs(t + dt, d + dt * k3[0], e + dt * k3[1])
        d = d + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        e = e + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        zetas.append(Diffeo(g, d))
        times.append((k + 1) * dt)
        if not warned and np.max(np.abs(d)) > 0.25 * g.length:
            warnings.warn("lifted displacement exceeds a quarter period; "
                          "interpolation accuracy degrades", RuntimeWarning)
            warned = True
        if check_every and (k + 1) % check_every == 0:
            zi = inverse(zetas[-1], method=method, guess=Diffeo(g, e))
            inv_check = max(inv_check, max_node_distance(zi, Diffeo(g, e)))
    return LiftResult(np.array(times), zetas, zetas[-1], Diffeo(g, e), theta,
                      stats["divfree"], inv_check)


def _sig(sq, theta, t):
    if theta < 1e-6:
        return (1 - t) + t * sq
    return (np.sin((1 - t) * theta) + np.sin(t * theta) * sq) / np.sin(theta)


def _l2(g, u):
    return float(np.sqrt(g.integrate(np.sum(np.asarray(u) ** 2, axis=0))))


@dataclass
class FactorizationResult:
    psi: Diffeo
    eta: Diffeo
    info_distance: float
    theta: float
    jac_eta_error: float
    target_error: float
    recompose_error: float
    lift: LiftResult | None = None


def target_error(psi: Diffeo, target: Density):
    """Relative L2 mismatch between ``psi^* mu`` and ``target``."""
    g = psi.grid
    pb = jacobian(psi) / g.volume
    return float(np.sqrt(g.integrate((pb - target.rho) ** 2) / g.integrate(target.rho ** 2)))


def factorize(phi: Diffeo, dt: float = 1e-2, n_steps: int | None = None, method=None):
    """Information factorization ``phi = eta o psi``.

    ``psi`` is the endpoint of the horizontal lift towards ``phi^* mu`` and
    ``eta = phi o psi^{-1}`` is volume preserving up to discretization.
    """
    g = phi.grid
    target = pullback_density(phi, Density.uniform(g), method)
    lift = lift_horizontal(target, dt, n_steps, method)
    psi = lift.psi
    psi_inv = inverse(psi, method=method, guess=lift.psi_inv)
    eta = compose(phi, psi_inv, method)
    jerr = float(np.max(np.abs(jacobian(eta, check=False) - 1.0)))
    rec = max_node_distance(compose(eta, psi, method), phi)
    return FactorizationResult(psi, eta, float(np.sqrt(g.volume) * lift.theta), lift.theta,
                               jerr, target_error(psi, target), rec, lift)
