"""Test-potential factory and rate fitting for the experiment driver."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cauchy import PotentialSet
from .grid import Field, Grid2D

__all__ = [
    "make_bump",
    "mean_zero_pair",
    "BumpSpec",
    "build_potentials",
    "random_bump",
    "random_bandlimited",
    "RateFit",
    "fit_rate",
]


def _bump_values(grid: Grid2D, center: tuple[float, float], radius: float) -> np.ndarray:
    X1, X2 = grid.mesh
    r2 = ((X1 - center[0]) ** 2 + (X2 - center[1]) ** 2) / radius**2
    with np.errstate(over="ignore", divide="ignore"):
        return np.where(r2 < 1.0, np.exp(1.0 - 1.0 / np.maximum(1e-300, 1.0 - r2)), 0.0)


def make_bump(
    center: tuple[float, float], radius: float, amplitude: float, grid: Grid2D
) -> Field:
    """amplitude * exp(1 - 1/(1 - r^2)) inside the ball, zero outside.

    Smooth, compactly supported, value ``amplitude`` at the center.  The ball
    must lie inside the grid's support box.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    hw = grid.support_halfwidth
    c1, c2 = grid.center
    if abs(center[0] - c1) + radius > hw + 1e-12 or abs(center[1] - c2) + radius > hw + 1e-12:
        raise ValueError(f"bump ball (center={center}, r={radius}) leaves the support box")
    return Field.from_physical(grid, amplitude * _bump_values(grid, center, radius))


def mean_zero_pair(
    grid: Grid2D,
    center: tuple[float, float],
    center2: tuple[float, float],
    radius: float,
    amplitude: float,
) -> np.ndarray:
    """Bump minus a balancing bump, scaled so the discrete sum is exactly zero."""
    b1 = make_bump(center, radius, amplitude, grid).physical().real
    b2 = _bump_values(grid, center2, radius)
    hw = grid.support_halfwidth
    c1m, c2m = grid.center
    if abs(center2[0] - c1m) + radius > hw + 1e-12 or abs(center2[1] - c2m) + radius > hw + 1e-12:
        raise ValueError("balancing bump leaves the support box")
    return b1 - b2 * (b1.sum() / b2.sum())


@dataclass(frozen=True)
class BumpSpec:
    """One radial bump: center, radius, amplitude (amplitude 0 disables it)."""

    center: tuple[float, float] = (0.0, 0.0)
    radius: float = 0.1
    amplitude: float = 0.0
    center2: tuple[float, float] | None = None  # balancing bump for mean-zero pairs


def build_potentials(
    grid: Grid2D,
    v1: BumpSpec,
    v2: BumpSpec,
    a1: BumpSpec,
    a2: BumpSpec,
) -> tuple[PotentialSet, PotentialSet]:
    """Potential sets (V1, A) and (V2, A) from bump specifications.

    Vector-potential components with a ``center2`` are balanced to an exactly
    zero discrete mean; the periodic Cauchy-transform proxy is only faithful
    for mean-zero A (see :mod:`cgolab.cgo`).
    """

    def scalar(spec: BumpSpec) -> np.ndarray:
        if spec.amplitude == 0.0:
            return np.zeros((grid.N, grid.N))
        return make_bump(spec.center, spec.radius, spec.amplitude, grid).physical().real

    def component(spec: BumpSpec) -> np.ndarray:
        if spec.amplitude == 0.0:
            return np.zeros((grid.N, grid.N))
        if spec.center2 is not None:
            return mean_zero_pair(grid, spec.center, spec.center2, spec.radius, spec.amplitude)
        return make_bump(spec.center, spec.radius, spec.amplitude, grid).physical().real

    A = Field.from_physical(grid, component(a1) + 1j * component(a2))
    P1 = PotentialSet(V=Field.from_physical(grid, scalar(v1).astype(np.complex128)), A=A)
    P2 = PotentialSet(V=Field.from_physical(grid, scalar(v2).astype(np.complex128)), A=A)
    return P1, P2


def random_bump(grid: Grid2D, rng: np.random.Generator, amplitude_range=(0.5, 1.5)) -> Field:
    """Random admissible bump: center and radius uniform inside the support box."""
    hw = grid.support_halfwidth
    radius = rng.uniform(0.3 * hw, 0.8 * hw)
    c1 = rng.uniform(-(hw - radius), hw - radius)
    c2 = rng.uniform(-(hw - radius), hw - radius)
    amp = rng.uniform(*amplitude_range)
    return make_bump((grid.center[0] + c1, grid.center[1] + c2), radius, amp, grid)


def random_bandlimited(grid: Grid2D, rng: np.random.Generator, kmax: int = 24) -> Field:
    """Random band-limited field: unit Gaussian coefficients on |k|_inf <= kmax."""
    spec = np.zeros((grid.N, grid.N), dtype=np.complex128)
    idx = np.rint(grid.freq1d / (2 * np.pi / grid.L)).astype(int)
    I, J = np.meshgrid(idx, idx, indexing="ij")
    mask = (np.abs(I) <= kmax) & (np.abs(J) <= kmax)
    cnt = int(mask.sum())
    spec[mask] = rng.standard_normal(cnt) + 1j * rng.standard_normal(cnt)
    return Field.from_spectral(grid, spec).as_physical()


@dataclass(frozen=True)
class RateFit:
    """Least-squares log-log fit of (tau, value) samples; exponent = -slope."""

    points: tuple[tuple[float, float], ...]
    exponent: float
    r2: float


def fit_rate(points) -> RateFit:
    """Fit value ~ C * tau^(-exponent) by least squares on log-log axes.

    Requires at least 3 points with positive values.
    """
    pts = tuple((float(t), float(v)) for t, v in points)
    if len(pts) < 3:
        raise ValueError(f"need at least 3 points, got {len(pts)}")
    if any(v <= 0 for _, v in pts):
        raise ValueError("rate fit requires positive values")
    lt = np.log([t for t, _ in pts])
    lv = np.log([v for _, v in pts])
    slope, intercept = np.polyfit(lt, lv, 1)
    pred = slope * lt + intercept
    ss_res = float(np.sum((lv - pred) ** 2))
    ss_tot = float(np.sum((lv - lv.mean()) ** 2))
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res < 1e-20 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return RateFit(pts, float(-slope), float(min(max(r2, 0.0), 1.0)))
