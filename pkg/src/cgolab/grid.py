"""Periodic grid and complex field containers.

The computational domain is the axis-parallel square Q = [-L/2, L/2]^2
(plus an optional center offset), sampled on an N x N uniform lattice with
periodic identification.  Two nested boxes are tracked:

    Q = [-L/2, L/2]^2   periodic transform box
    Omega = [-L/4, L/4]^2   interior domain for PDE residuals / DN pairings
    support box = [-L/8, L/8]^2   where potentials are allowed to live

Spectral representation convention: a field f sampled on the grid is
identified with its trigonometric interpolant; the stored spectral values
are continuum-scaled transform samples

    f_hat(xi) = h^2 * FFT2(f)[k],    xi on the lattice (2*pi/L)*{-N/2..N/2-1}^2

so that h^2 * sum |f|^2 == sum |f_hat|^2 / L^2 (discrete Plancherel matching
the continuum normalization).  All norms in :mod:`cgolab.spectral` use these
weights, which keeps norm values stable under grid refinement.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft as _fft

__all__ = ["Grid2D", "Field", "make_grid", "set_fft_workers", "fft_workers"]

_FFT_WORKERS = 1


def set_fft_workers(n: int) -> None:
    """Set the number of threads scipy.fft may use for transforms."""
    global _FFT_WORKERS
    _FFT_WORKERS = max(1, int(n))


def fft_workers() -> int:
    return _FFT_WORKERS


@dataclass(frozen=True)
class Grid2D:
    """Periodic N x N sampling of the square Q = center + [-L/2, L/2]^2.

    N must be a power of two, N >= 16, so that the nested boxes
    Omega (side L/2) and the support box (side L/4) land exactly on
    grid nodes.
    """

    L: float
    N: int
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.L <= 0:
            raise ValueError(f"side length must be positive, got {self.L}")
        n = self.N
        if n < 16 or (n & (n - 1)) != 0:
            raise ValueError(f"resolution must be a power of two >= 16, got {n}")

    @property
    def h(self) -> float:
        return self.L / self.N

    @cached_property
    def nodes1d(self) -> tuple[np.ndarray, np.ndarray]:
        """1D node coordinates along each axis (length N, periodic, no right endpoint)."""
        t = -self.L / 2 + self.h * np.arange(self.N)
        return t + self.center[0], t + self.center[1]

    @cached_property
    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """(X1, X2) physical coordinate meshes, 'ij' indexing, shape (N, N)."""
        x1, x2 = self.nodes1d
        return np.meshgrid(x1, x2, indexing="ij")

    @cached_property
    def zmesh(self) -> np.ndarray:
        """Complex coordinates z = x1 + i*x2 on the grid."""
        X1, X2 = self.mesh
        return X1 + 1j * X2

    @cached_property
    def freq1d(self) -> np.ndarray:
        """1D frequency lattice (2*pi/L) * {0, 1, .., N/2-1, -N/2, .., -1} (FFT order)."""
        return 2.0 * np.pi * _fft.fftfreq(self.N, d=self.h)

    @cached_property
    def freq_mesh(self) -> tuple[np.ndarray, np.ndarray]:
        xi = self.freq1d
        return np.meshgrid(xi, xi, indexing="ij")

    @cached_property
    def freq_sq(self) -> np.ndarray:
        XI1, XI2 = self.freq_mesh
        return XI1**2 + XI2**2

    @cached_property
    def freq_abs(self) -> np.ndarray:
        return np.sqrt(self.freq_sq)

    # --- nested boxes -------------------------------------------------
    @property
    def omega_halfwidth(self) -> float:
        return self.L / 4

    @property
    def support_halfwidth(self) -> float:
        return self.L / 8

    @cached_property
    def omega_slice(self) -> slice:
        """Index slice selecting Omega = center + [-L/4, L/4]^2 (inclusive) per axis."""
        return slice(self.N // 4, 3 * self.N // 4 + 1)

    def omega_mask(self) -> np.ndarray:
        """Boolean mask of nodes inside the closed box Omega."""
        X1, X2 = self.mesh
        c1, c2 = self.center
        hw = self.omega_halfwidth + 1e-12 * self.L
        return (np.abs(X1 - c1) <= hw) & (np.abs(X2 - c2) <= hw)

    def support_mask(self) -> np.ndarray:
        """Boolean mask of nodes inside the closed support box."""
        X1, X2 = self.mesh
        c1, c2 = self.center
        hw = self.support_halfwidth + 1e-12 * self.L
        return (np.abs(X1 - c1) <= hw) & (np.abs(X2 - c2) <= hw)

    def in_omega(self, x: tuple[float, float]) -> bool:
        hw = self.omega_halfwidth + 1e-12 * self.L
        return abs(x[0] - self.center[0]) <= hw and abs(x[1] - self.center[1]) <= hw


def make_grid(L: float, N: int, center: tuple[float, float] = (0.0, 0.0)) -> Grid2D:
    """Create a periodic grid; rejects non-power-of-two N and non-positive L."""
    return Grid2D(float(L), int(N), (float(center[0]), float(center[1])))


_PHYS = "physical"
_SPEC = "spectral"


@dataclass(frozen=True)
class Field:
    """Complex scalar samples on a :class:`Grid2D`.

    ``rep`` tags the stored array as physical samples or continuum-scaled
    spectral coefficients (see module docstring).  Fields are immutable:
    the value array is marked read-only at construction and every operation
    returns a new instance, so concurrent use on distinct inputs is safe.
    """

    grid: Grid2D
    values: np.ndarray = field(repr=False)
    rep: str = _PHYS

    def __post_init__(self):
        if self.rep not in (_PHYS, _SPEC):
            raise ValueError(f"unknown representation tag {self.rep!r}")
        v = np.ascontiguousarray(self.values, dtype=np.complex128)
        if v.shape != (self.grid.N, self.grid.N):
            raise ValueError(f"value shape {v.shape} does not match grid N={self.grid.N}")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    # --- constructors -------------------------------------------------
    @staticmethod
    def from_physical(grid: Grid2D, values: np.ndarray) -> "Field":
        return Field(grid, values, _PHYS)

    @staticmethod
    def from_spectral(grid: Grid2D, values: np.ndarray) -> "Field":
        return Field(grid, values, _SPEC)

    @staticmethod
    def zeros(grid: Grid2D) -> "Field":
        return Field(grid, np.zeros((grid.N, grid.N), dtype=np.complex128), _PHYS)

    def like(self, values: np.ndarray, rep: str = _PHYS) -> "Field":
        return Field(self.grid, values, rep)

    # --- representation changes ----------------------------------------
    def physical(self) -> np.ndarray:
        """Physical samples as a (read-only) array."""
        if self.rep == _PHYS:
            return self.values
        return np.asarray(
            _fft.ifft2(self.values, workers=_FFT_WORKERS) / self.grid.h**2,
            dtype=np.complex128,
        )

    def spectral(self) -> np.ndarray:
        """Continuum-scaled spectral coefficients h^2 * FFT2(f)."""
        if self.rep == _SPEC:
            return self.values
        return np.asarray(
            _fft.fft2(self.values, workers=_FFT_WORKERS) * self.grid.h**2,
            dtype=np.complex128,
        )

    def as_physical(self) -> "Field":
        return self if self.rep == _PHYS else Field(self.grid, self.physical(), _PHYS)

    def as_spectral(self) -> "Field":
        return self if self.rep == _SPEC else Field(self.grid, self.spectral(), _SPEC)

    # --- basic quantities ----------------------------------------------
    def l2_norm(self) -> float:
        """Continuum-scaled L2 norm over Q."""
        if self.rep == _PHYS:
            return float(self.grid.h * np.linalg.norm(self.values))
        return float(np.linalg.norm(self.values) / self.grid.L)

    def mean(self) -> complex:
        """Average value over Q, i.e. the zero-frequency series coefficient."""
        if self.rep == _PHYS:
            return complex(np.mean(self.values))
        return complex(self.values[0, 0] / self.grid.L**2)
