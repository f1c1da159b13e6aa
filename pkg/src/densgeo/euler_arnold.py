"""Pseudospectral Euler-Arnold solver on the circle in momentum form.

    m_t = -(2 u_x m + u m_x + kappa u_x),   u = A^{-1} m

with inertia operators ``A = 1`` (scaled Burgers), ``A = 1 - d^2`` (CH),
``A = 1 - d^2`` with a central-extension constant ``kappa`` (general CH) and
``A = -d^2`` with the basepoint gauge ``u(0) = 0`` (Hunter-Saxton).
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import BlowupDetected, ConfigError, MeanNotZero, WrongDimension
from .grid import PeriodicGrid

UX_CAP = 1e4


@dataclass(frozen=True)
class InertiaTag:
    kind: str                 # "L2", "H1", "H1_extended" or "HdotGauge"
    kappa: float = 0.0

    def __post_init__(self):
        if self.kind not in ("L2", "H1", "H1_extended", "HdotGauge"):
            raise ConfigError(f"unknown inertia kind {self.kind!r}")
        if not np.isfinite(self.kappa):
            raise ConfigError("kappa must be finite")

    @classmethod
    def parse(cls, text: str):
        """Parse ``l2``, ``h1``, ``h1ext:KAPPA`` or ``hdot``."""
        t = text.strip().lower()
        if t == "l2":
            return cls("L2")
        if t == "h1":
            return cls("H1")
        if t == "hdot":
            return cls("HdotGauge")
        if t.startswith("h1ext"):
            _, _, k = t.partition(":")
            try:
                return cls("H1_extended", float(k) if k else 0.0)
            except ValueError:
                raise ConfigError(f"bad kappa in inertia tag {text!r}") from None
        raise ConfigError(f"unknown inertia tag {text!r}")


L2 = InertiaTag("L2")
H1 = InertiaTag("H1")
HDOT = InertiaTag("HdotGauge")


def H1_extended(kappa: float) -> InertiaTag:
    return InertiaTag("H1_extended", float(kappa))


@dataclass(frozen=True, eq=False)
class MomentumState:
    grid: PeriodicGrid
    u: np.ndarray
    m: np.ndarray
    kappa_component: float = 0.0
    t: float = 0.0


def _check(grid):
    if grid.dim != 1:
        raise WrongDimension("the Euler-Arnold family is one-dimensional")


def coadjoint_1d(grid: PeriodicGrid, u, m, kappa: float = 0.0):
    """``ad*_u m = 2 u_x m + u m_x + kappa u_x``."""
    ux = grid.derivative(u)
    return 2 * ux * m + u * grid.derivative(m) + kappa * ux


def ad_1d(grid: PeriodicGrid, u, v):
    """``ad_u v = u_x v - u v_x``."""
    return grid.derivative(u) * v - u * grid.derivative(v)


def apply_inertia(tag: InertiaTag, grid: PeriodicGrid, u):
    _check(grid)
    u = np.asarray(u, dtype=float)
    if tag.kind == "L2":
        return u.copy()
    if tag.kind == "HdotGauge":
        return -grid.derivative(u, 0, 2)
    return grid.ifft(grid.fft(u) * (1 + grid.ksq()))


def invert_inertia(tag: InertiaTag, grid: PeriodicGrid, m, mean_tol: float = 1e-8):
    _check(grid)
    m = np.asarray(m, dtype=float)
    if tag.kind == "L2":
        return m.copy()
    if tag.kind == "HdotGauge":
        mm = grid.mean(m)
        if abs(mm) > mean_tol:
            raise MeanNotZero(f"Hunter-Saxton momentum has mean {mm:.3e}")
        return grid.hs_inverse(m - mm)
    return grid.ifft(grid.fft(m) / (1 + grid.ksq()))


def make_state(tag: InertiaTag, grid: PeriodicGrid, u0, t: float = 0.0):
    """Consistent state from a velocity; the HS gauge shifts ``u0`` so ``u(0) = 0``."""
    u0 = np.asarray(u0, dtype=float)
    if tag.kind == "HdotGauge":
        u0 = u0 - u0[0]
    m = apply_inertia(tag, grid, u0)
    if tag.kind == "HdotGauge":
        m = m - grid.mean(m)
        u0 = invert_inertia(tag, grid, m)
    return MomentumState(grid, u0, m, tag.kappa, t)


def ea_momentum_rhs(tag: InertiaTag, grid: PeriodicGrid, m, kappa: float):
    u = invert_inertia(tag, grid, m - (grid.mean(m) if tag.kind == "HdotGauge" else 0.0))
    ux = grid.derivative(u)
    mx = grid.derivative(m)
    r = grid.dealias(2 * ux * m + u * mx) + kappa * ux
    r = -r
    if tag.kind == "HdotGauge":
        r = r - grid.mean(r)
    return r


def step_ea(tag: InertiaTag, state: MomentumState, dt: float):
    """One RK4 step in the momentum variable."""
    g = state.grid
    _check(g)
    k = state.kappa_component if tag.kind == "H1_extended" else 0.0
    m = state.m

    def f(mm):
        return ea_momentum_rhs(tag, g, mm, k)

    k1 = f(m)
    k2 = f(m + dt / 2 * k1)
    k3 = f(m + dt / 2 * k2)
    k4 = f(m + dt * k3)
    m = m + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    if tag.kind == "HdotGauge":
        m = m - g.mean(m)
    u = invert_inertia(tag, g, m)
    uxmax = np.max(np.abs(g.derivative(u)))
    if not np.isfinite(uxmax) or uxmax > UX_CAP:
        raise BlowupDetected(f"|u_x| = {uxmax:.3e} exceeds the cap at t = {state.t + dt:.4f}")
    return replace(state, u=u, m=m, t=state.t + dt)


def solve(tag: InertiaTag, state: MomentumState, dt: float, t_end: float, record_every: int = 0):
    """Integrate to ``t_end``; returns the final state and optional snapshots."""
    nsteps = max(1, int(np.ceil((t_end - state.t) / dt - 1e-9)))
    dt = (t_end - state.t) / nsteps
    snaps = [state]
    for k in range(nsteps):
        state = step_ea(tag, state, dt)
        if record_every and (k + 1) % record_every == 0:
            snaps.append(state)
    return state, snaps


def energy(tag: InertiaTag, state: MomentumState):
    """``(1/2) int u m`` plus ``(1/2) kappa^2`` for the extension."""
    e = 0.5 * state.grid.integrate(state.u * state.m)
    if tag.kind == "H1_extended":
        e += 0.5 * state.kappa_component ** 2
    return float(e)


def burgers_characteristics(grid: PeriodicGrid, u0_func, t: float, rate: float = 3.0):
    """Pre-shock solution of ``u_t + rate u u_x = 0`` by characteristics.

    Solves ``x = s + rate u0(s) t`` for the foot ``s`` of every node with
    bracketed Brent root finding, returning ``u0(s)``.
    """
    from scipy.optimize import brentq

    out = np.empty(grid.n)
    span = abs(rate * t) * 10 + grid.length
    for j, xj in enumerate(grid.x):
        fn = lambda s: s + rate * u0_func(s) * t - xj
        # the characteristic map is monotone before the shock
        lo, hi = xj - span, xj + span
        out[j] = u0_func(brentq(fn, lo, hi, xtol=1e-15, rtol=1e-15))
    return out
