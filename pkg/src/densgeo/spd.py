"""Transport of inner products: SPD matrices, a descending metric on GL+(n)
and the QR decomposition as a polar factorization.

The fibration is ``pi(A) = A^T A``. The metric on ``GL+(n)`` is
right-invariant with

    g_I(u, v) = tr(ell(u)^T ell(v)) + tr((u + u^T)(v + v^T)),

where ``ell`` keeps the strictly lower triangular part. The horizontal
directions at ``A`` are ``upp(n) A`` (upper triangular, with diagonal), and
the lift of the SPD geodesic from ``I`` to ``A^T A`` ends at the
transposed Cholesky factor.
"""
from __future__ import annotations

import warnings

import numpy as np
from scipy import integrate, linalg

from .errors import ConfigError, SingularA, SingularM, StepTooLarge

EIG_FLOOR = 1e-12


def _sym_check(M, name="matrix", tol=1e-12):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ConfigError(f"{name} must be square")
    if np.max(np.abs(M - M.T)) > tol * max(1.0, np.max(np.abs(M))):
        raise ConfigError(f"{name} is not symmetric")
    return 0.5 * (M + M.T)


def _eigh_spd(M):
    w, Q = linalg.eigh(M)
    if w[0] <= EIG_FLOOR * max(1.0, w[-1]):
        raise SingularM(f"matrix is not positive definite (min eigenvalue {w[0]:.3e})")
    return w, Q


def spd_sqrt(M):
    w, Q = _eigh_spd(_sym_check(M))
    return (Q * np.sqrt(w)) @ Q.T


def spd_invsqrt(M):
    w, Q = _eigh_spd(_sym_check(M))
    return (Q / np.sqrt(w)) @ Q.T


def spd_log(M):
    w, Q = _eigh_spd(_sym_check(M))
    return (Q * np.log(w)) @ Q.T


def sym_exp(S):
    w, Q = linalg.eigh(_sym_check(S))
    return (Q * np.exp(w)) @ Q.T


def spd_metric(M, U, V):
    """``h_M(U, V) = tr(M^-1 U M^-1 V)``."""
    M = _sym_check(M, "M")
    _eigh_spd(M)
    Mi = linalg.inv(M)
    return float(np.trace(Mi @ _sym_check(U, "U") @ Mi @ _sym_check(V, "V")))


def spd_distance(M0, M1):
    """Affine-invariant distance ``|log(M0^-1/2 M1 M0^-1/2)|_F``."""
    S = spd_invsqrt(M0)
    return float(np.linalg.norm(spd_log(S @ M1 @ S)))


def spd_geodesic(M0, M1, t: float):
    """``M0^1/2 exp(t log(M0^-1/2 M1 M0^-1/2)) M0^1/2``."""
    if t == 0.0:
        return _sym_check(M0)
    if t == 1.0:
        return _sym_check(M1)
    R = spd_sqrt(M0)
    Ri = spd_invsqrt(M0)
    out = R @ sym_exp(t * spd_log(Ri @ M1 @ Ri)) @ R
    return 0.5 * (out + out.T)


def ell(U):
    """Strictly lower triangular part."""
    return np.tril(np.asarray(U, dtype=float), -1)


def gl_metric_identity(u, v):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return float(np.trace(ell(u).T @ ell(v)) + np.trace((u + u.T) @ (v + v.T)))


def gl_metric(A, U, V):
    """Right-translated metric ``g_A(U, V) = g_I(U A^-1, V A^-1)``."""
    A = np.asarray(A, dtype=float)
    try:
        with warnings.catch_warnings():
            # singular pivots are reported below
            warnings.simplefilter("ignore", linalg.LinAlgWarning)
            lu = linalg.lu_factor(A, check_finite=True)
    except (linalg.LinAlgError, ValueError) as err:
        raise SingularA(str(err)) from None
    if np.min(np.abs(np.diag(lu[0]))) < 1e-14 * max(1.0, np.max(np.abs(A))):
        raise SingularA("matrix is singular")
    # U A^-1 = (A^-T U^T)^T
    ua = linalg.lu_solve(lu, np.asarray(U, dtype=float).T, trans=1).T
    va = linalg.lu_solve(lu, np.asarray(V, dtype=float).T, trans=1).T
    return gl_metric_identity(ua, va)


def ad(xi, u):
    """Matrix commutator ``[xi, u]``."""
    return xi @ u - u @ xi


def upper_from_symmetric(S):
    """Unique upper triangular ``X`` with ``X + X^T = S``."""
    S = np.asarray(S, dtype=float)
    return np.triu(S, 1) + 0.5 * np.diag(np.diag(S))


def _check_glplus(A):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ConfigError("A must be square")
    det = np.linalg.det(A)
    if not det > 0:
        raise SingularA(f"det A = {det:.3e} is not positive")
    return A


def horizontal_lift_qr(A, n_steps: int = 200):
    """Lift of the SPD geodesic ``I -> A^T A`` through ``R' = X R``.

    ``X`` is upper triangular with ``X + X^T = R^-T M' R^-1``. Classical RK4
    with ``n_steps`` steps; returns ``R(1)``.
    """
    A = _check_glplus(A)
    n = A.shape[0]
    L = spd_log(A.T @ A)
    w, Q = linalg.eigh(L)

    def mdot(t):
        # M(t) = exp(t L), M'(t) = L exp(t L)
        return (Q * (w * np.exp(t * w))) @ Q.T

    def f(t, R):
        Ri = linalg.solve_triangular(R, np.eye(n), lower=False)
        S = Ri.T @ mdot(t) @ Ri
        return upper_from_symmetric(0.5 * (S + S.T)) @ R

    R = np.eye(n)
    h = 1.0 / n_steps
    for k in range(n_steps):
        t = k * h
        k1 = f(t, R)
        k2 = f(t + h / 2, R + h / 2 * k1)
        k3 = f(t + h / 2, R + h / 2 * k2)
        k4 = f(t + h, R + h * k3)
        R = R + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(R)) or np.min(np.diag(R)) <= 0:
            raise StepTooLarge(f"lift lost the positive diagonal at step {k + 1}")
    R = np.triu(R)
    res = np.max(np.abs(R.T @ R - A.T @ A)) / max(1.0, np.max(np.abs(A.T @ A)))
    if res > 1e-4:
        raise StepTooLarge(f"lift residual {res:.3e}; increase n_steps")
    return R


def cholesky_upper(A):
    """Transpose of the Cholesky factor of ``A^T A``."""
    A = _check_glplus(A)
    return linalg.cholesky(A.T @ A, lower=False)


def qr_polar_factorize(A, route: str = "ode", n_steps: int = 200):
    """``A = Q R`` with ``Q`` in SO(n) and ``R`` upper triangular, positive diagonal."""
    A = _check_glplus(A)
    if route == "ode":
        R = horizontal_lift_qr(A, n_steps)
    elif route == "cholesky":
        R = cholesky_upper(A)
    else:
        raise ConfigError(f"unknown route {route!r}")
    Q = linalg.solve_triangular(R, A.T, trans=1, lower=False).T    # A R^-1
    return Q, R


def householder_qr(A):
    """Householder QR with diagonal signs normalized to be positive."""
    Q, R = np.linalg.qr(np.asarray(A, dtype=float))
    s = np.sign(np.diag(R))
    s[s == 0] = 1.0
    return Q * s, s[:, None] * R


def random_glplus(n: int, rng, scale: float = 0.3):
    A = np.eye(n) + scale * rng.standard_normal((n, n))
    if np.linalg.det(A) < 0:
        A[0] = -A[0]
    return A


def curve_length_gl(path, dt):
    """Length of a sampled curve under ``g`` (trapezoid rule, central differences)."""
    P = np.asarray(path)
    v = np.gradient(P, dt, axis=0, edge_order=2)
    speed = np.array([np.sqrt(max(gl_metric(P[k], v[k], v[k]), 0.0)) for k in range(len(P))])
    return float(integrate.trapezoid(speed, dx=dt))


def lifted_path(A, n_samples: int = 201, n_steps_per: int = 4):
    """Samples ``R(t)`` of the horizontal lift on a uniform grid in ``[0, 1]``."""
    A = _check_glplus(A)
    n = A.shape[0]
    L = spd_log(A.T @ A)
    w, Q = linalg.eigh(L)
    out = [np.eye(n)]
    R = np.eye(n)
    h = 1.0 / ((n_samples - 1) * n_steps_per)

    def f(t, R):
        Ri = linalg.solve_triangular(R, np.eye(n), lower=False)
        S = Ri.T @ ((Q * (w * np.exp(t * w))) @ Q.T) @ Ri
        return upper_from_symmetric(0.5 * (S + S.T)) @ R

    t = 0.0
    for _ in range(n_samples - 1):
        for _ in range(n_steps_per):
            k1 = f(t, R)
            k2 = f(t + h / 2, R + h / 2 * k1)
            k3 = f(t + h / 2, R + h / 2 * k2)
            k4 = f(t + h, R + h * k3)
            R = R + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            t += h
        out.append(R.copy())
    return np.array(out)


def gaussian_fisher_rao_1x1(m: float, n_quad: int = 4001, width: float = 12.0):
    """Fisher-Rao metric of the zero-mean Gaussian family with precision ``m``.

    Direct quadrature of ``int (d_m log p)^2 p dx`` on a truncated line.
    """
    s = 1.0 / np.sqrt(m)
    x = np.linspace(-width * s, width * s, n_quad)
    p = np.sqrt(m / (2 * np.pi)) * np.exp(-0.5 * m * x * x)
    score = 0.5 / m - 0.5 * x * x
    return float(integrate.trapezoid(score * score * p, x))
