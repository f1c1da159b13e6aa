"""Madelung transform, Sasaki-Fisher-Rao and Fubini-Study geometry.

Conventions: ``Phi(rho, theta) = sqrt(rho) exp(i theta / 2)``, the Hermitian
product is ``<a, b> = int a conj(b)`` and the Schrodinger family is

    i psi_t = -Lap psi + V psi + f(|psi|^2) psi.

With these conventions the hydrodynamic velocity is ``v = grad theta`` and
the hydrodynamic system reads

    v_t + v . grad v + grad(2 V + 2 f(rho) - 2 Lap sqrt(rho) / sqrt(rho)) = 0,
    rho_t + div(rho v) = 0.

Only wave functions without zeros and with zero winding are handled.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .density import Density
from .errors import (BlowupDetected, ConfigError, ConstraintViolated, NotInNonvanishingClass,
                     WindingDetected, WrongDimension, ZeroCurvature, ZeroNode)
from .grid import PeriodicGrid

ZERO_TOL = 1e-12
UX_CAP = 1e4


@dataclass(frozen=True, eq=False)
class WaveFunction:
    grid: PeriodicGrid
    values: np.ndarray
    projective: bool = True
    normalized: bool = False

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex).reshape(self.grid.shape)
        if np.min(np.abs(v)) <= ZERO_TOL:
            raise ZeroNode("wave function vanishes at a node")
        if self.normalized:
            nrm = self.grid.integrate(np.abs(v) ** 2)
            if abs(nrm - 1.0) > 1e-10:
                raise ConfigError(f"wave function has norm^2 {nrm:.12g}, expected 1")
        object.__setattr__(self, "values", v)

    def norm2(self):
        return float(self.grid.integrate(np.abs(self.values) ** 2))


@dataclass(frozen=True, eq=False)
class CotangentDensity:
    """Density ``rho`` with phase representative ``theta`` in the gauge ``int theta rho = 0``."""
    rho: Density
    theta: np.ndarray

    def __post_init__(self):
        th = np.asarray(self.theta, dtype=float).reshape(self.rho.grid.shape)
        gauge = self.rho.grid.integrate(th * self.rho.rho)
        if abs(gauge) > 1e-8:
            raise ConstraintViolated(f"gauge int(theta rho) = {gauge:.3e}")
        object.__setattr__(self, "theta", th)

    @classmethod
    def from_fields(cls, grid, rho, theta):
        """Normalize ``rho`` and shift ``theta`` into the gauge."""
        nu = Density.normalized(grid, rho)
        th = np.asarray(theta, dtype=float)
        return cls(nu, th - grid.integrate(th * nu.rho))

    @property
    def grid(self):
        return self.rho.grid


# -- transform -----------------------------------------------------------------

def madelung_fwd(state: CotangentDensity) -> WaveFunction:
    """``psi = sqrt(rho) exp(i theta / 2)``."""
    psi = np.sqrt(state.rho.rho) * np.exp(0.5j * state.theta)
    return WaveFunction(state.grid, psi, projective=True, normalized=True)


def _unwrap_line(ph, axis):
    """Unwrap along ``axis``; returns the unwrapped phase and the winding numbers."""
    u = np.unwrap(ph, axis=axis)
    first = np.take(u, [0], axis=axis)
    last = np.take(u, [-1], axis=axis)
    # close the loop: the step from the last node back to the first
    step = np.angle(np.exp(1j * (first - last)))
    total = (last + step - first) / (2 * np.pi)
    return u, np.rint(total).astype(int).squeeze(axis)


def unwrap_phase(psi: WaveFunction):
    """Continuous ``arg psi`` at the nodes; raises WindingDetected on nonzero winding.

    In 2D the first column is unwrapped along axis 0, then every row along
    axis 1; the result is checked against unwrapping in the other order.
    """
    g = psi.grid
    ph = np.angle(psi.values)
    if g.dim == 1:
        u, w = _unwrap_line(ph, 0)
        if w != 0:
            raise WindingDetected(f"phase winds {int(w)} times around the circle")
        return u
    u0, w0 = _unwrap_line(ph[:, :1], 0)
    if np.any(w0 != 0):
        raise WindingDetected(f"phase winds {int(w0.flat[0])} times along axis 0")
    rows = ph + (u0 - ph[:, :1])
    u, w1 = _unwrap_line(rows, 1)
    if np.any(w1 != 0):
        raise WindingDetected(f"phase winds {int(w1[np.nonzero(w1)[0][0]])} times along axis 1")
    # other order
    v0, _ = _unwrap_line(ph[:1, :], 1)
    cols = ph + (v0 - ph[:1, :])
    v, w2 = _unwrap_line(cols, 0)
    if np.any(w2 != 0):
        raise WindingDetected("phase winds along axis 0")
    if np.max(np.abs(u - v - (u[0, 0] - v[0, 0]))) > 1e-8:
        raise WindingDetected("row-then-column unwrapping is inconsistent")
    return u


def madelung_inv(psi: WaveFunction) -> CotangentDensity:
    """Inverse transform: ``rho = |psi|^2`` (normalized) and ``theta = 2 arg psi`` in the gauge."""
    g = psi.grid
    if np.min(np.abs(psi.values)) <= ZERO_TOL:
        raise ZeroNode("wave function vanishes at a node")
    theta = 2.0 * unwrap_phase(psi)
    return CotangentDensity.from_fields(g, np.abs(psi.values) ** 2, theta)


def same_ray(a: WaveFunction, b: WaveFunction):
    """Distance between ``a`` and ``b`` modulo a global phase, relative L2."""
    g = a.grid
    c = g.integrate(b.values * np.conj(a.values))
    ph = c / abs(c) if abs(c) > 0 else 1.0
    return float(np.sqrt(g.integrate(np.abs(a.values * ph - b.values) ** 2)
                         / g.integrate(np.abs(b.values) ** 2)))


# -- metrics -------------------------------------------------------------------

def _check_tangent(state: CotangentDensity, d, tol=1e-8):
    rd, td = (np.asarray(v, dtype=float) for v in d)
    g = state.grid
    a = g.integrate(rd)
    b = g.integrate(td * state.rho.rho)
    if abs(a) > tol or abs(b) > tol:
        raise ConstraintViolated(f"tangent constraints int(rho') = {a:.2e}, "
                                 f"int(theta' rho) = {b:.2e}")
    return rd, td


def sfr_metric(state: CotangentDensity, d1, d2):
    """``(1/4) int (rho1' rho2' / rho^2 + theta1' theta2') rho`` for ``d = (rho', theta')``."""
    r1, t1 = _check_tangent(state, d1)
    r2, t2 = _check_tangent(state, d2)
    rho = state.rho.rho
    return float(0.25 * state.grid.integrate((r1 * r2 / rho ** 2 + t1 * t2) * rho))


def project_tangent(state: CotangentDensity, rho_dot, theta_dot):
    """Remove the constraint components of an arbitrary pair of fields."""
    g = state.grid
    rd = np.asarray(rho_dot, dtype=float)
    td = np.asarray(theta_dot, dtype=float)
    rd = rd - g.mean(rd)
    td = td - g.integrate(td * state.rho.rho)
    return rd, td


def hermitian(grid, a, b):
    """``<a, b> = int a conj(b)``."""
    return complex(grid.integrate(np.asarray(a) * np.conj(b)))


def fs_hermitian(psi: WaveFunction, a, b):
    """Projected Hermitian form ``<a,b>/<psi,psi> - <a,psi><psi,b>/<psi,psi>^2``."""
    g = psi.grid
    p = psi.values
    n = hermitian(g, p, p).real
    return hermitian(g, a, b) / n - hermitian(g, a, p) * hermitian(g, p, b) / n ** 2


def fs_metric(psi: WaveFunction, a, b):
    """Fubini-Study metric, the real part of :func:`fs_hermitian`."""
    return float(fs_hermitian(psi, a, b).real)


def fs_symplectic(psi: WaveFunction, a, b):
    """Imaginary part of :func:`fs_hermitian`."""
    return float(fs_hermitian(psi, a, b).imag)


def dphi(state: CotangentDensity, d):
    """Derivative of the transform, ``(1/2) psi (rho'/rho + i theta')``."""
    rd, td = (np.asarray(v, dtype=float) for v in d)
    psi = madelung_fwd(state).values
    return 0.5 * psi * (rd / state.rho.rho + 1j * td)


def canonical_pairing(state: CotangentDensity, d1, d2):
    """``int theta1' rho2' - theta2' rho1'``."""
    g = state.grid
    return float(g.integrate(d1[1] * d2[0] - d2[1] * d1[0]))


def isometry_residual(state: CotangentDensity, d1, d2):
    """``|fs_metric(Phi, dPhi d1, dPhi d2) - sfr_metric(d1, d2)|``."""
    psi = madelung_fwd(state)
    return abs(fs_metric(psi, dphi(state, d1), dphi(state, d2)) - sfr_metric(state, d1, d2))


def symplectic_residual(state: CotangentDensity, d1, d2):
    """``|canonical - 4 Im fs_hermitian(dPhi d1, dPhi d2)|``.

    The factor 4 is forced by ``Phi = sqrt(rho) e^{i theta/2}``:
    ``Im <dPhi d1, dPhi d2> = (1/4) int (theta1' rho2' - theta2' rho1')``.
    """
    psi = madelung_fwd(state)
    w = fs_symplectic(psi, dphi(state, d1), dphi(state, d2))
    return abs(canonical_pairing(state, d1, d2) - 4.0 * w)


# -- 2-component Hunter-Saxton --------------------------------------------------

@dataclass
class TwoHSTrajectory:
    grid: PeriodicGrid
    times: np.ndarray
    u: list
    sigma: list
    phi: list = field(default_factory=list)      # displacement of the flow
    alpha: list = field(default_factory=list)

    def energy(self, k: int = -1):
        g = self.grid
        return float(0.25 * g.integrate(g.derivative(self.u[k]) ** 2 + self.sigma[k] ** 2))

    def descended(self, k: int):
        """``(rho, theta) = (phi_x, alpha)`` in the gauge, as a CotangentDensity."""
        g = self.grid
        rho = 1.0 + g.derivative(self.phi[k])
        return CotangentDensity.from_fields(g, rho, self.alpha[k])


def _two_hs_rhs(grid, m, sigma, mean_tol):
    u = grid.hs_inverse(m - grid.mean(m))
    ux = grid.derivative(u)
    rm = -grid.dealias(2 * ux * m + u * grid.derivative(m) + sigma * grid.derivative(sigma))
    mean = grid.mean(rm)
    if abs(mean) > mean_tol * max(1.0, np.max(np.abs(rm))):
        raise ConstraintViolated(f"momentum tendency has mean {mean:.3e}")
    rs = -grid.derivative(grid.dealias(sigma * u))
    return rm - mean, rs, u


def solve_2hs(grid: PeriodicGrid, u0, sigma0, dt: float, t_end: float, record_every: int = 1,
              track: bool = False, mean_tol: float = 1e-9):
    """RK4 for the 2-component Hunter-Saxton system.

    ``m = -u_xx`` evolves by ``m_t = -(2 u_x m + u m_x) - sigma sigma_x`` and
    ``u`` is recovered in the gauge ``u(0) = 0``. With ``track`` the flow
    ``phi_t = u o phi`` and ``alpha_t = sigma o phi`` are carried along.
    """
    if grid.dim != 1:
        raise WrongDimension("2HS lives on the circle")
    u0 = np.asarray(u0, dtype=float)
    sigma = np.asarray(sigma0, dtype=float).copy()
    if abs(grid.integrate(sigma)) > 1e-10:
        raise ConfigError("sigma0 must have zero mean")
    u0 = u0 - u0[0]
    m = -grid.derivative(u0, 0, 2)
    m = m - grid.mean(m)
    x = grid.x
    d = np.zeros(grid.n)
    a = np.zeros(grid.n)

    def f(m, s, d):
        rm, rs, u = _two_hs_rhs(grid, m, s, mean_tol)
        if not track:
            return rm, rs, 0.0, 0.0
        return rm, rs, grid.evaluate(u, x + d), grid.evaluate(s, x + d)

    nsteps = max(1, int(np.ceil(t_end / dt - 1e-9))) if t_end > 0 else 0
    dt = t_end / nsteps if nsteps else dt
    u = grid.hs_inverse(m)
    traj = TwoHSTrajectory(grid, [0.0], [u], [sigma.copy()])
    if track:
        traj.phi.append(d.copy())
        traj.alpha.append(a.copy())
    for k in range(nsteps):
        k1 = f(m, sigma, d)
        k2 = f(m + dt / 2 * k1[0], sigma + dt / 2 * k1[1], d + dt / 2 * k1[2])
        k3 = f(m + dt / 2 * k2[0], sigma + dt / 2 * k2[1], d + dt / 2 * k2[2])
        k4 = f(m + dt * k3[0], sigma + dt * k3[1], d + dt * k3[2])
        m = m + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        sigma = sigma + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        m = m - grid.mean(m)
        if track:
            d = d + dt / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
            a = a + dt / 6 * (k1[3] + 2 * k2[3] + 2 * k3[3] + k4[3])
        u = grid.hs_inverse(m)
        uxmax = np.max(np.abs(grid.derivative(u)))
        if not np.isfinite(uxmax) or uxmax > UX_CAP:
            raise BlowupDetected(f"|u_x| = {uxmax:.3e} at t = {(k + 1) * dt:.4f}")
        if (k + 1) % record_every == 0 or k + 1 == nsteps:
            traj.times.append((k + 1) * dt)
            traj.u.append(u)
            traj.sigma.append(sigma.copy())
            if track:
                traj.phi.append(d.copy())
                traj.alpha.append(a.copy())
    traj.times = np.array(traj.times)
    return traj


def sfr_speeds(traj: TwoHSTrajectory):
    """SFR speed of the descended curve at interior samples (central differences)."""
    if not traj.phi:
        raise ConfigError("trajectory was solved without tracking")
    out = []
    for k in range(1, len(traj.times) - 1):
        h = traj.times[k + 1] - traj.times[k - 1]
        s = traj.descended(k)
        a, b = traj.descended(k - 1), traj.descended(k + 1)
        rd = (b.rho.rho - a.rho.rho) / h
        td = (traj.alpha[k + 1] - traj.alpha[k - 1]) / h
        rd, td = project_tangent(s, rd, td)
        out.append(np.sqrt(sfr_metric(s, (rd, td), (rd, td))))
    return np.array(out)


# -- Hasimoto --------------------------------------------------------------------

def hasimoto(grid: PeriodicGrid, k, tau) -> WaveFunction:
    """``psi(x) = k(x) exp(i int_0^x tau)`` from curvature ``k`` and torsion ``tau``."""
    if grid.dim != 1:
        raise WrongDimension("the Hasimoto map is one-dimensional")
    k = np.asarray(k, dtype=float)
    if np.min(k) <= 0:
        raise ZeroCurvature("curvature must be positive at every node")
    return WaveFunction(grid, k * np.exp(1j * grid.antiderivative(np.asarray(tau, dtype=float))),
                        projective=True)


# -- Schrodinger -----------------------------------------------------------------

NONLINEARITIES = ("none", "cubic", "barotropic")


def nonlinearity(tag: str, a, kappa: float = 1.0):
    """``f(a)`` for the tags ``none``, ``cubic`` (``kappa a``) and ``barotropic``."""
    if tag == "none":
        return np.zeros_like(a)
    if tag == "cubic":
        return kappa * a
    if tag == "barotropic":
        return 0.5 * (a - 1.0) ** 2
    raise ConfigError(f"unknown nonlinearity {tag!r}")


def nls_split_step(psi: WaveFunction, V, tag: str, dt: float, kappa: float = 1.0):
    """One Strang step: half potential, full kinetic (spectral), half potential."""
    g = psi.grid
    V = np.zeros(g.shape) if V is None else np.asarray(V, dtype=float)
    p = psi.values
    # |psi| is unchanged by the potential substep, so the second half uses the same f
    w = V + nonlinearity(tag, np.abs(p) ** 2, kappa)
    half = np.exp(-0.5j * dt * w)
    p = half * p
    p = np.fft.ifftn(np.exp(-1j * dt * g.ksq()) * np.fft.fftn(p))
    p = np.exp(-0.5j * dt * (V + nonlinearity(tag, np.abs(p) ** 2, kappa))) * p
    return WaveFunction(g, p, psi.projective, False)


@dataclass
class NLSTrajectory:
    grid: PeriodicGrid
    dt: float
    psi: list
    V: np.ndarray
    tag: str
    kappa: float = 1.0
    norm_drift: float = 0.0

    @property
    def times(self):
        return self.dt * np.arange(len(self.psi))


def nls_solve(psi0: WaveFunction, V, tag: str, dt: float = 1e-4, t_end: float = 0.05,
              kappa: float = 1.0, record_every: int = 1):
    """Repeated :func:`nls_split_step`; records every ``record_every`` steps."""
    g = psi0.grid
    V = np.zeros(g.shape) if V is None else np.asarray(V, dtype=float)
    nsteps = max(1, int(round(t_end / dt)))
    psi = psi0
    n0 = psi0.norm2()
    drift = 0.0
    out = [psi0]
    for k in range(nsteps):
        psi = nls_split_step(psi, V, tag, dt, kappa)
        drift = max(drift, abs(psi.norm2() - n0))
        if (k + 1) % record_every == 0:
            out.append(psi)
    return NLSTrajectory(g, dt * record_every, out, V, tag, kappa, drift)


def _hydro_fields(grid, p):
    rho = np.abs(p) ** 2
    if np.min(rho) <= ZERO_TOL:
        raise NotInNonvanishingClass("vacuum formed: the wave function vanishes")
    dp = np.fft.ifft(1j * grid.wavenumbers(0, odd=True) * np.fft.fft(p))
    v = 2.0 * np.imag(np.conj(p) * dp) / rho
    return rho, v


def hydrodynamic_residual(traj: NLSTrajectory, stride: int = 1):
    """Max residual of the hydrodynamic system on a stored 1D trajectory.

    Time derivatives are fourth-order central differences of the recorded
    states; space derivatives are spectral. Returns ``(momentum, continuity)``.
    """
    g = traj.grid
    if g.dim != 1:
        raise WrongDimension("the residual check is one-dimensional")
    if len(traj.psi) < 5:
        raise ConfigError("need at least five recorded states")
    fields = [_hydro_fields(g, p.values) for p in traj.psi]
    h = traj.dt
    res_v = 0.0
    res_r = 0.0
    for i in range(2, len(fields) - 2, stride):
        rho, v = fields[i]
        rt = (fields[i - 2][0] - 8 * fields[i - 1][0] + 8 * fields[i + 1][0] - fields[i + 2][0]) / (12 * h)
        vt = (fields[i - 2][1] - 8 * fields[i - 1][1] + 8 * fields[i + 1][1] - fields[i + 2][1]) / (12 * h)
        a = np.sqrt(rho)
        q = 2 * traj.V + 2 * nonlinearity(traj.tag, rho, traj.kappa) - 2 * g.derivative(a, 0, 2) / a
        rv = vt + v * g.derivative(v) + g.derivative(q)
        rr = rt + g.derivative(rho * v)
        res_v = max(res_v, float(np.max(np.abs(rv))))
        res_r = max(res_r, float(np.max(np.abs(rr))))
    return res_v, res_r
