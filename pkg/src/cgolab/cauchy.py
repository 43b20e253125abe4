"""Wirtinger derivatives, periodic Cauchy inverses, and the magnetic gauge factor.

Conventions (z = z1 + i z2):

    dbar = d/dz1 + i d/dz2      symbol  i(xi1 + i xi2)
    d    = d/dz1 - i d/dz2      symbol  i(xi1 - i xi2)
    Laplacian = d dbar          symbol  -|xi|^2

The inverses d^-1 and dbar^-1 are realized as reciprocal symbols with the
zero-mode coefficient deleted (periodic stand-in for the Cauchy transform;
supports live in the inner L/8 box, so periodization error is below spectral
tolerance for smooth data).

All four operators also annihilate the unpaired Nyquist modes (xi with a
component equal to -pi*N/L, which have no +pi*N/L partner on an even grid).
This keeps the conjugation symmetry conj(dbar^-1 F) = d^-1 conj(F) exact on
the lattice; for well-resolved fields the discarded coefficients are below
spectral tolerance anyway.

For a real vector potential (A1, A2), encoded as the complex field
A = A1 + i A2, the gauge phase is

    g = d^-1 conj(A) - dbar^-1 A,

which is purely imaginary and satisfies -Laplacian g = 2i curl A with
curl A = d1 A2 - d2 A1.  The gauge factors exp(+-i g) are therefore real
and positive.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .grid import Field, Grid2D
from .spectral import apply_multiplier

__all__ = [
    "wirtinger",
    "cauchy_inverse",
    "PotentialSet",
    "gauge_phase",
    "apply_gauge_modulation",
]

_DBAR = "dbar"
_D = "d"


def _check_which(which: str) -> str:
    if which not in (_DBAR, _D):
        raise ValueError(f"which must be 'd' or 'dbar', got {which!r}")
    return which


def _nyquist_mask(grid: Grid2D) -> np.ndarray:
    """1 away from unpaired Nyquist rows/columns, 0 on them."""
    xi = grid.freq1d
    nyq = np.isclose(xi, xi.min())  # single -pi*N/L entry
    keep = ~nyq
    return np.outer(keep, keep).astype(np.float64)


def wirtinger(F: Field, which: str) -> Field:
    """First-order Wirtinger derivative, 'd' or 'dbar' (Nyquist modes annihilated)."""
    mask = _nyquist_mask(F.grid)
    if _check_which(which) == _DBAR:
        return apply_multiplier(F, lambda a, b: mask * 1j * (a + 1j * b))
    return apply_multiplier(F, lambda a, b: mask * 1j * (a - 1j * b))


def cauchy_inverse(F: Field, which: str) -> Field:
    """Inverse Wirtinger derivative: reciprocal symbol, zero and Nyquist modes deleted."""
    mask = _nyquist_mask(F.grid)
    if _check_which(which) == _DBAR:
        return apply_multiplier(F, lambda a, b: mask / (1j * (a + 1j * b)))
    return apply_multiplier(F, lambda a, b: mask / (1j * (a - 1j * b)))


@dataclass(frozen=True)
class PotentialSet:
    """Electric potential V, vector potential A = A1 + i A2, and derived fields.

    V is real and A has real components; both must be supported inside the
    grid's support box (checked at construction).  curl A is computed
    spectrally from A so that -Laplacian g = 2i curl A holds exactly at the
    discrete level.
    """

    V: Field
    A: Field

    def __post_init__(self):
        grid = self.grid
        if self.A.grid is not grid and self.A.grid != grid:
            raise ValueError("V and A must live on the same grid")
        v = self.V.physical()
        a = self.A.physical()
        vmax = float(np.abs(v).max())
        if vmax > 0 and float(np.abs(v.imag).max()) > 1e-12 * vmax:
            raise ValueError("V must be real")
        outside = ~grid.support_mask()
        for name, arr in (("V", v), ("A", a)):
            amax = float(np.abs(arr).max())
            if amax > 0 and float(np.abs(arr[outside]).max()) > 1e-12 * amax:
                raise ValueError(f"{name} is not supported inside the support box")

    @property
    def grid(self) -> Grid2D:
        return self.V.grid

    @cached_property
    def curl(self) -> Field:
        """curl A = d1 A2 - d2 A1, computed spectrally (real field)."""
        # d A = div A + i curl A for A = A1 + i A2 with real components
        dA = wirtinger(self.A, "d")
        return Field.from_physical(self.grid, dA.physical().imag.astype(np.complex128))

    @cached_property
    def gauge(self) -> Field:
        """Gauge phase g = d^-1 conj(A) - dbar^-1 A (purely imaginary)."""
        return gauge_phase(self)

    @cached_property
    def gauge_exp(self) -> np.ndarray:
        """exp(+i g) as a physical array (real positive multiplier)."""
        return np.exp(1j * self.gauge.physical())

    @cached_property
    def gauge_derivative(self) -> Field:
        """Holomorphic Wirtinger derivative d g of the gauge phase."""
        return wirtinger(self.gauge, "d")

    @cached_property
    def effective(self) -> Field:
        """Effective potential V - curl A of the factored equation."""
        return Field.from_physical(self.grid, self.V.physical() - self.curl.physical())

    @cached_property
    def a_mean(self) -> complex:
        """Mean of A over Q; the periodic conjugation identities for
        dbar + iA hold exactly up to this constant."""
        return self.A.mean()


def gauge_phase(P: PotentialSet) -> Field:
    """g = d^-1 conj(A) - dbar^-1 A for the potential set's A."""
    A = P.A
    Abar = Field.from_physical(A.grid, np.conj(A.physical()))
    g = cauchy_inverse(Abar, "d").physical() - cauchy_inverse(A, "dbar").physical()
    return Field.from_physical(A.grid, g)


def apply_gauge_modulation(F: Field, P: PotentialSet, sign: int) -> Field:
    """Multiply pointwise by exp(sign * i g).

    Since g is purely imaginary the multiplier is real and positive, so the
    modulation preserves the pointwise phase of F.
    """
    if sign not in (+1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    mult = P.gauge_exp if sign > 0 else 1.0 / P.gauge_exp
    return Field.from_physical(F.grid, mult * F.physical())
