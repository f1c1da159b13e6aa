"""Uniform periodic grids on flat tori with spectral calculus.

Scalar fields are numpy arrays of shape ``grid.shape``; vector fields are
arrays of shape ``(grid.dim, *grid.shape)``.
"""
from __future__ import annotations

import numpy as np
from scipy import ndimage

from .errors import ConfigError, MeanNotZero, WrongDimension


class PeriodicGrid:
    """Uniform grid with ``n`` points per axis on ``[0, length)^dim``.

    Parameters
    ----------
    n : int
        Points per axis, a power of two with ``n >= 8``.
    dim : int
        1 or 2.
    length : float
        Period per axis.
    """

    def __init__(self, n: int, dim: int = 1, length: float = 1.0):
        n = int(n)
        if dim not in (1, 2):
            raise WrongDimension(f"dim must be 1 or 2, got {dim}")
        if n < 8 or n & (n - 1):
            raise ConfigError(f"n must be a power of two >= 8, got {n}")
        if not length > 0:
            raise ConfigError(f"length must be positive, got {length}")
        self.n = n
        self.dim = dim
        self.length = float(length)
        self.spacing = self.length / n
        self.shape = (n,) * dim
        self.volume = self.length ** dim
        self.x = np.arange(n) * self.spacing
        self._k = 2 * np.pi / self.length * np.fft.fftfreq(n, d=1.0 / n)

    def __repr__(self):
        return f"PeriodicGrid(n={self.n}, dim={self.dim}, length={self.length})"

    def __eq__(self, other):
        return (isinstance(other, PeriodicGrid) and self.n == other.n
                and self.dim == other.dim and self.length == other.length)

    def __hash__(self):
        return hash((self.n, self.dim, self.length))

    # -- coordinates -------------------------------------------------------
    def coords(self):
        """Node coordinates, shape ``(dim, *shape)`` (``(n,)`` in 1D)."""
        if self.dim == 1:
            return self.x.copy()
        return np.array(np.meshgrid(self.x, self.x, indexing="ij"))

    def wavenumbers(self, axis: int = 0, odd: bool = False):
        """Angular wavenumbers along ``axis`` broadcastable to ``shape``.

        With ``odd=True`` the Nyquist entry is zeroed, which is the exact
        derivative of the real trigonometric interpolant for odd orders.
        """
        k = self._k.copy()
        if odd:
            k[self.n // 2] = 0.0
        s = [1] * self.dim
        s[axis] = self.n
        return k.reshape(s)

    def ksq(self):
        """|k|^2 on the transform grid."""
        out = np.zeros(self.shape)
        for a in range(self.dim):
            out = out + self.wavenumbers(a) ** 2
        return out

    # -- spectral calculus -------------------------------------------------
    def fft(self, f):
        return np.fft.fftn(f, axes=tuple(range(-self.dim, 0)))

    def ifft(self, fh, real=True):
        out = np.fft.ifftn(fh, axes=tuple(range(-self.dim, 0)))
        return out.real if real else out

    def derivative(self, f, axis: int = 0, order: int = 1):
        """Spectral derivative of ``f`` along ``axis``."""
        if axis >= self.dim:
            raise WrongDimension(f"axis {axis} out of range for dim {self.dim}")
        if order == 0:
            return np.array(f, dtype=float, copy=True)
        k = self.wavenumbers(axis, odd=order % 2 == 1)
        fh = self.fft(f) * (1j * k) ** order
        return self.ifft(fh, real=not np.iscomplexobj(f))

    def gradient(self, f):
        return np.array([self.derivative(f, a) for a in range(self.dim)])

    def divergence(self, u):
        u = np.asarray(u)
        if self.dim == 1 and u.ndim == 1:
            return self.derivative(u, 0)
        return sum(self.derivative(u[a], a) for a in range(self.dim))

    def laplacian(self, f):
        fh = self.fft(f) * (-self.ksq())
        return self.ifft(fh, real=not np.iscomplexobj(f))

    def heat(self, f, t: float):
        """Exact heat semigroup ``exp(t Laplacian) f``."""
        return self.ifft(self.fft(f) * np.exp(-t * self.ksq()))

    def inv_laplacian_meanzero(self, f, strict: bool = False, tol: float = 1e-10):
        """Mean-zero solution ``g`` of ``Laplacian g = f - mean(f)``.

        Raises
        ------
        MeanNotZero
            If ``strict`` and ``|mean(f)| >= tol``.
        """
        m = self.mean(f)
        if strict and abs(m) >= tol:
            raise MeanNotZero(f"Poisson source has mean {m:.3e}")
        ksq = self.ksq()
        ksq.flat[0] = 1.0
        gh = -self.fft(f) / ksq
        gh.flat[0] = 0.0
        return self.ifft(gh)

    def helmholtz_divfree(self, u):
        """Divergence-free part of the vector field ``u`` (zero-mean modes)."""
        u = np.asarray(u, dtype=float)
        if self.dim == 1:
            # every mean-zero 1D field is a gradient; only the constant survives
            return np.full_like(u, float(np.mean(u))).reshape(u.shape)
        uh = np.array([self.fft(u[a]) for a in range(2)])
        k = [self.wavenumbers(a) for a in range(2)]
        ksq = self.ksq()
        ksq.flat[0] = 1.0
        kdotu = k[0] * uh[0] + k[1] * uh[1]
        out = np.array([uh[a] - k[a] * kdotu / ksq for a in range(2)])
        return np.array([self.ifft(out[a]) for a in range(2)])

    def dealias(self, f):
        """2/3-rule truncation of the spectrum of ``f``."""
        fh = self.fft(f)
        cut = self.n // 3
        mask = np.ones(self.shape, dtype=bool)
        for a in range(self.dim):
            idx = np.abs(np.fft.fftfreq(self.n, d=1.0 / self.n)).reshape(
                [self.n if b == a else 1 for b in range(self.dim)])
            mask &= idx <= cut
        return self.ifft(fh * mask, real=not np.iscomplexobj(f))

    # -- quadrature ----------------------------------------------------------
    def integrate(self, f):
        """Trapezoidal sum ``spacing^dim * sum(f)``."""
        return self.spacing ** self.dim * np.sum(f, axis=tuple(range(-self.dim, 0)))

    def mean(self, f):
        return self.integrate(f) / self.volume

    def inner(self, f, g):
        return self.integrate(f * g)

    def antiderivative(self, f):
        """``x -> int_0^x f`` at the nodes (1D).

        Exact for trigonometric polynomials below the Nyquist frequency; a
        nonzero mean contributes the linear part ``mean * x``.
        """
        if self.dim != 1:
            raise WrongDimension("antiderivative is one-dimensional")
        fh = np.fft.fft(f)
        c = fh[0].real / self.n
        k = self._k.copy()
        k[0] = 1.0
        gh = fh / (1j * k)
        gh[0] = 0.0
        gh[self.n // 2] = 0.0
        g = np.fft.ifft(gh)
        g = g.real if not np.iscomplexobj(f) else g
        return c * self.x + (g - g[0])

    def hs_inverse(self, u):
        """Inverse of ``-d^2/dx^2`` with the basepoint gauge ``v(0) = 0``.

        Realizes ``v(x) = -W(x) + x W(1)`` with ``W(x)`` the double
        antiderivative ``int_0^x int_0^y u``; both antiderivatives are taken
        spectrally so the result is exact for trigonometric data.
        """
        if self.dim != 1:
            raise WrongDimension("hs_inverse is defined on the circle only")
        if self.length != 1.0:
            raise WrongDimension("hs_inverse assumes a circle of length 1")
        u = np.asarray(u, dtype=float)
        ubar = self.mean(u)
        p = self.antiderivative(u - ubar)          # periodic, p(0) = 0
        pbar = self.mean(p)
        q = self.antiderivative(p - pbar)          # periodic, q(0) = 0
        x = self.x
        w = 0.5 * ubar * x ** 2 + pbar * x + q
        w1 = 0.5 * ubar + pbar
        return -w + x * w1

    # -- off-grid evaluation ---------------------------------------------
    def _points(self, points):
        p = np.asarray(points, dtype=float)
        if self.dim == 1:
            return p.reshape(1, -1), p.shape
        if p.shape[0] != 2:
            raise WrongDimension("2D points must have shape (2, ...)")
        return p.reshape(2, -1), p.shape[1:]

    def interpolate(self, f, points):
        """Periodic cubic spline interpolation of ``f`` at ``points``."""
        p, shp = self._points(points)
        idx = (p / self.spacing) % self.n
        out = ndimage.map_coordinates(np.asarray(f, dtype=float), idx, order=3,
                                      mode="grid-wrap")
        return out.reshape(shp)

    def _trig_matrix(self, y):
        # columns e^{i k y}; Nyquist column uses cos so real data stay real
        E = np.exp(1j * np.outer(y, self._k))
        E[:, self.n // 2] = np.cos(self._k[self.n // 2] * y)
        return E

    def evaluate(self, f, points):
        """Trigonometric (exact spectral) evaluation of ``f`` at ``points``."""
        p, shp = self._points(points)
        ch = self.fft(f) / self.n ** self.dim
        if self.dim == 1:
            out = self._trig_matrix(p[0]) @ ch
        else:
            E0 = self._trig_matrix(p[0])
            E1 = self._trig_matrix(p[1])
            out = np.sum((E0 @ ch) * E1, axis=1)
        out = out if np.iscomplexobj(f) else out.real
        return out.reshape(shp)
