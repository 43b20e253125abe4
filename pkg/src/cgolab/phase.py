"""Quadratic Bukhgeim phase, oscillatory modulations, and the nonelliptic propagator.

For tau >= 1 and a localization point x in Omega, the holomorphic phase is

    psi(z) = (tau/8) * (z - x)^2,        z complex,

whose real combined part is

    psi + conj(psi) = (tau/4) * ((z1-x1)^2 - (z2-x2)^2).

The modulation operators multiply by the unimodular factor
exp(+-i (psi + conj(psi))) times the indicator of Q (the indicator is the
identity on the periodic grid).  The stationary functional

    T[F, a](x) = (tau / 4 pi) * integral_Q exp(i(psi+conj psi)) e^{ig} F a dz

is, for a == 1, the value at x of the nonelliptic propagator
exp(i t (d11 - d22)) applied to e^{ig} F at time t = 1/tau; it is computed by
direct h^2 quadrature so that arbitrary weights a share the code path.

Admissibility: tau * (L*sqrt(2)/2) * h <= 2*pi, so the phase gradient stays
resolvable on the lattice.  Constructors reject larger tau.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .cauchy import PotentialSet, apply_gauge_modulation
from .grid import Field, Grid2D
from .spectral import apply_multiplier

__all__ = [
    "PhaseContext",
    "NyquistViolation",
    "tau_cap",
    "bukhgeim_phase",
    "apply_phase_modulation",
    "modulated_fourier_sup",
    "propagate_nonelliptic",
    "stationary_functional",
]


class NyquistViolation(ValueError):
    """tau too large for the grid: quadratic phase gradient exceeds the lattice limit."""


def tau_cap(grid: Grid2D) -> float:
    """Largest admissible tau on this grid."""
    return 2.0 * math.pi / (grid.h * grid.L * math.sqrt(2.0) / 2.0)


@dataclass(frozen=True)
class PhaseContext:
    """Phase parameters (tau, x) tied to a grid; validates admissibility."""

    tau: float
    x: tuple[float, float]
    grid: Grid2D

    def __post_init__(self):
        if self.tau < 1.0:
            raise ValueError(f"tau must be >= 1, got {self.tau}")
        cap = tau_cap(self.grid)
        if self.tau > cap * (1.0 + 1e-12):
            raise NyquistViolation(
                f"tau={self.tau:g} exceeds the admissible cap {cap:g} "
                f"for L={self.grid.L:g}, N={self.grid.N}"
            )
        if not self.grid.in_omega(self.x):
            raise ValueError(f"x={self.x} lies outside Omega")

    @cached_property
    def combined_phase(self) -> np.ndarray:
        """Real array (tau/4)*((z1-x1)^2 - (z2-x2)^2) on the grid."""
        X1, X2 = self.grid.mesh
        return (self.tau / 4.0) * ((X1 - self.x[0]) ** 2 - (X2 - self.x[1]) ** 2)

    @cached_property
    def modulation(self) -> np.ndarray:
        """exp(+i (psi + conj psi)) as a physical array."""
        return np.exp(1j * self.combined_phase)

    @cached_property
    def dz_phase(self) -> np.ndarray:
        """Holomorphic derivative d psi = (tau/2) (z - x), closed form."""
        z = self.grid.zmesh
        return (self.tau / 2.0) * (z - (self.x[0] + 1j * self.x[1]))


def bukhgeim_phase(ctx: PhaseContext) -> tuple[Field, Field]:
    """Sample psi and the real combined phase psi + conj(psi) as fields."""
    grid = ctx.grid
    z = grid.zmesh
    psi = (ctx.tau / 8.0) * (z - (ctx.x[0] + 1j * ctx.x[1])) ** 2
    return (
        Field.from_physical(grid, psi),
        Field.from_physical(grid, ctx.combined_phase.astype(np.complex128)),
    )


def apply_phase_modulation(F: Field, ctx: PhaseContext, sign: int) -> Field:
    """Multiply pointwise by the unimodular factor exp(sign*i*(psi+conj psi))."""
    if sign not in (+1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    mult = ctx.modulation if sign > 0 else np.conj(ctx.modulation)
    return Field.from_physical(F.grid, mult * F.physical())


def modulated_fourier_sup(F: Field, ctx: PhaseContext) -> float:
    """Sup over the lattice of the (continuum-scaled) spectrum of the modulated field.

    Bounded by h^2 * sum |F| for every tau, and decays like 1/tau for smooth F.
    """
    return float(np.abs(apply_phase_modulation(F, ctx, +1).spectral()).max())


def propagate_nonelliptic(G: Field, t: float) -> Field:
    """exp(i t (d11 - d22)): Fourier multiplier exp(-i t (xi1^2 - xi2^2))."""
    return apply_multiplier(G, lambda a, b: np.exp(-1j * t * (a**2 - b**2)))


def stationary_functional(
    F: Field,
    weight: Field | None,
    ctx: PhaseContext,
    P: PotentialSet | None = None,
) -> complex:
    """(tau/4pi) * h^2-quadrature of exp(i(psi+conj psi)) e^{ig} F * weight.

    ``weight=None`` means the constant weight 1, in which case the value
    approximates the nonelliptic propagator of e^{ig} F at time 1/tau,
    evaluated at ctx.x.  ``P=None`` means no magnetic potential (g = 0).
    """
    G = F if P is None else apply_gauge_modulation(F, P, +1)
    integrand = ctx.modulation * G.physical()
    if weight is not None:
        integrand = integrand * weight.physical()
    h2 = ctx.grid.h**2
    return complex(ctx.tau / (4.0 * math.pi) * h2 * integrand.sum())
