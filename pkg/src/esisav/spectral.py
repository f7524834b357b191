"""Periodic Fourier collocation on a 2D rectangle.

Fields are real ``numpy`` arrays of shape ``(nx, ny)`` with
``f[i, j] = f(x_i, y_j)``, ``x_i = i * lx / nx``. Transforms use the real FFT
with the last axis halved, so a spectrum has shape ``(nx, ny // 2 + 1)``.

A :class:`DiagonalSymbol` stores its multiplier on the full signed
wavenumber table ``(nx, ny)`` and keeps the half-layout slice that the
transforms use. Because a real field has a Hermitian spectrum, a real
multiplier must be even, ``s(k) == s(-k)``; this is checked once at
construction, which is what keeps every inverse transform exactly real.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np
import scipy.fft as sfft

from . import kernels
from .errors import ConfigError, GridMismatchError, NumericalError, SingularModeError

SINGULAR_TOL = 1e-14


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on ``[0, lx) x [0, ly)``."""

    nx: int
    ny: int
    lx: float
    ly: float

    def __post_init__(self):
        for name in ("nx", "ny"):
            n = getattr(self, name)
            if isinstance(n, bool) or not isinstance(n, (int, np.integer, float)) or int(n) != n \
                    or n < 4 or n % 2:
                raise ConfigError(f"{name}={n!r}: must be an even integer >= 4")
            object.__setattr__(self, name, int(n))
        for name in ("lx", "ly"):
            length = getattr(self, name)
            if not (np.isfinite(length) and length > 0):
                raise ConfigError(f"{name}={length!r}: must be a positive length")
            object.__setattr__(self, name, float(length))

    @property
    def shape(self):
        return (self.nx, self.ny)

    @property
    def size(self):
        return self.nx * self.ny

    @property
    def spectral_shape(self):
        return (self.nx, self.ny // 2 + 1)

    @property
    def dx(self):
        return self.lx / self.nx

    @property
    def dy(self):
        return self.ly / self.ny

    @property
    def cell_area(self):
        return self.dx * self.dy

    @property
    def area(self):
        return self.lx * self.ly

    @cached_property
    def x(self):
        return np.arange(self.nx) * self.dx

    @cached_property
    def y(self):
        return np.arange(self.ny) * self.dy

    @cached_property
    def mesh(self):
        """``(X, Y)`` coordinate arrays of shape ``(nx, ny)``."""
        return np.meshgrid(self.x, self.y, indexing="ij")

    @cached_property
    def kx(self):
        """Signed wavenumbers along x; index ``nx/2`` carries ``-nx/2``."""
        return 2 * np.pi * np.fft.fftfreq(self.nx, d=1.0 / self.nx) / self.lx

    @cached_property
    def ky(self):
        return 2 * np.pi * np.fft.fftfreq(self.ny, d=1.0 / self.ny) / self.ly

    @cached_property
    def ky_half(self):
        """``ky`` on the half layout (last entry is the Nyquist ``-ny/2``)."""
        ky = self.ky[: self.ny // 2 + 1].copy()
        ky[-1] = -abs(ky[-1])
        return ky

    @cached_property
    def k2(self):
        """``|k|^2`` on the full table."""
        return self.kx[:, None] ** 2 + self.ky[None, :] ** 2

    @cached_property
    def k2_half(self):
        return self.kx[:, None] ** 2 + self.ky_half[None, :] ** 2

    @cached_property
    def derivative_wavenumbers(self):
        """``(kx, ky)`` half-layout arrays for odd derivatives, Nyquist zeroed."""
        kx = self.kx.copy()
        kx[self.nx // 2] = 0.0
        ky = self.ky_half.copy()
        ky[-1] = 0.0
        return kx[:, None] * np.ones(self.spectral_shape), np.ones(self.spectral_shape) * ky[None, :]

    @cached_property
    def dealias_mask(self):
        """Half-layout mask keeping modes with ``|index| <= n/3`` on both axes."""
        ix = np.abs(np.fft.fftfreq(self.nx, d=1.0 / self.nx))
        iy = np.abs(np.fft.fftfreq(self.ny, d=1.0 / self.ny))[: self.ny // 2 + 1]
        iy[-1] = self.ny // 2
        return (ix[:, None] <= self.nx / 3.0) & (iy[None, :] <= self.ny / 3.0)

    @cached_property
    def spectral_norm(self):
        """Factor turning ``sum_k |f_hat|^2`` into ``integral f^2``."""
        return self.area / float(self.size) ** 2


def make_grid(nx: int, ny: int, lx: float, ly: float) -> Grid:
    """Build a validated :class:`Grid`."""
    return Grid(nx, ny, lx, ly)


def check_field(grid: Grid, f) -> np.ndarray:
    f = np.asarray(f, dtype=np.float64)
    if f.shape != grid.shape:
        raise GridMismatchError(f"field shape {f.shape} does not match grid {grid.shape}")
    return f


def forward(grid: Grid, f) -> np.ndarray:
    """Real field to half-layout spectrum (unnormalized)."""
    return sfft.rfft2(check_field(grid, f))


def inverse(grid: Grid, fh) -> np.ndarray:
    """Half-layout spectrum back to a real field."""
    if fh.shape != grid.spectral_shape:
        raise GridMismatchError(f"spectrum shape {fh.shape} does not match grid {grid.spectral_shape}")
    return sfft.irfft2(fh, s=grid.shape)


def inner_product(grid: Grid, a, b) -> float:
    """Collocation quadrature ``dx*dy*sum(a*b)``."""
    a = check_field(grid, a)
    b = check_field(grid, b)
    return grid.cell_area * float(np.dot(a.ravel(), b.ravel()))


def spectral_inner(grid: Grid, fh, sym_half=None) -> float:
    """``integral f * (S f)`` evaluated from the spectrum of ``f`` (Parseval)."""
    if sym_half is None:
        sym_half = np.ones(grid.spectral_shape)
    return grid.spectral_norm * kernels.spectral_quadratic(sym_half, np.ascontiguousarray(fh))


class DiagonalSymbol:
    """Real Fourier multiplier on a grid, i.e. a constant-coefficient operator.

    Supports ``+``, ``-`` and ``*`` with other symbols on the same grid and
    with scalars, so ``G*L`` or ``1 + dt*G*L`` read as written.
    """

    __slots__ = ("grid", "table", "half")

    def __init__(self, grid: Grid, table):
        table = np.array(np.broadcast_to(np.asarray(table, dtype=np.float64), grid.shape))
        if not np.all(np.isfinite(table)):
            raise ConfigError("symbol table contains non-finite multipliers")
        neg = table[(-np.arange(grid.nx)) % grid.nx][:, (-np.arange(grid.ny)) % grid.ny]
        scale = max(1.0, float(np.max(np.abs(table))))
        if np.max(np.abs(table - neg)) > 1e-12 * scale:
            raise ConfigError("symbol must be even, s(k) == s(-k), to act on real fields")
        table.setflags(write=False)
        half = np.ascontiguousarray(table[:, : grid.ny // 2 + 1])
        half.setflags(write=False)
        self.grid = grid
        self.table = table
        self.half = half

    @classmethod
    def from_function(cls, grid: Grid, fn: Callable[[np.ndarray, np.ndarray], np.ndarray]):
        """Evaluate ``fn(kx, ky)`` on the full signed wavenumber table."""
        kx, ky = np.meshgrid(grid.kx, grid.ky, indexing="ij")
        return cls(grid, fn(kx, ky))

    @property
    def is_psd(self):
        return bool(np.all(self.table >= 0.0))

    def _coerce(self, other):
        if isinstance(other, DiagonalSymbol):
            if other.grid != self.grid:
                raise GridMismatchError("symbols live on different grids")
            return other.table
        if np.isscalar(other):
            return float(other)
        return NotImplemented

    def __add__(self, other):
        t = self._coerce(other)
        return NotImplemented if t is NotImplemented else DiagonalSymbol(self.grid, self.table + t)

    __radd__ = __add__

    def __sub__(self, other):
        t = self._coerce(other)
        return NotImplemented if t is NotImplemented else DiagonalSymbol(self.grid, self.table - t)

    def __rsub__(self, other):
        t = self._coerce(other)
        return NotImplemented if t is NotImplemented else DiagonalSymbol(self.grid, t - self.table)

    def __mul__(self, other):
        t = self._coerce(other)
        return NotImplemented if t is NotImplemented else DiagonalSymbol(self.grid, self.table * t)

    __rmul__ = __mul__

    def __neg__(self):
        return DiagonalSymbol(self.grid, -self.table)

    def __repr__(self):
        return f"DiagonalSymbol(grid={self.grid}, min={self.table.min():.3g}, max={self.table.max():.3g})"


def identity_symbol(grid: Grid) -> DiagonalSymbol:
    return DiagonalSymbol(grid, np.ones(grid.shape))


def laplacian_symbol(grid: Grid) -> DiagonalSymbol:
    """Symbol of the Laplacian, ``-|k|^2``."""
    return DiagonalSymbol(grid, -grid.k2)


def neg_laplacian_symbol(grid: Grid) -> DiagonalSymbol:
    """Symbol of ``-Laplacian``, ``|k|^2`` (the H^-1 mobility)."""
    return DiagonalSymbol(grid, grid.k2)


def apply_symbol(s: DiagonalSymbol, f) -> np.ndarray:
    """Apply a diagonal operator to a real field."""
    grid = s.grid
    return inverse(grid, s.half * forward(grid, f))


def solve_diagonal(a: float, s: DiagonalSymbol, rhs) -> np.ndarray:
    """Solve ``(a*I + S) phi = rhs`` mode by mode."""
    grid = s.grid
    denom = a + s.half
    check_invertible(grid, denom)
    return inverse(grid, forward(grid, rhs) / denom)


def check_invertible(grid: Grid, denom_half) -> None:
    """Raise :class:`SingularModeError` naming the worst mode if any ``|d| < 1e-14``."""
    mag = np.abs(denom_half)
    idx = int(np.argmin(mag))
    if mag.flat[idx] < SINGULAR_TOL:
        i, j = np.unravel_index(idx, mag.shape)
        kx, ky = float(grid.kx[i]), float(grid.ky_half[j])
        raise SingularModeError(
            f"singular mode at (kx, ky) = ({kx:g}, {ky:g}): |a + s(k)| = {mag.flat[idx]:.3e}",
            kx=kx,
            ky=ky,
        )


def dissipation_rate(g: DiagonalSymbol, mu) -> float:
    """``(G mu, mu)`` for a positive semi-definite mobility ``G``."""
    if not g.is_psd:
        raise NumericalError("mobility symbol has negative multipliers")
    grid = g.grid
    return spectral_inner(grid, forward(grid, mu), g.half)


def dealias(grid: Grid, f) -> np.ndarray:
    """2/3-rule truncation: zero modes with ``|index| > n/3`` on either axis."""
    return inverse(grid, forward(grid, f) * grid.dealias_mask)


def assert_finite(f, what="field"):
    if not np.all(np.isfinite(f)):
        raise NumericalError(f"{what} contains NaN or Inf")
    return f
