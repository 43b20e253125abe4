"""Reconstruction of the potential difference from stationary-phase averages.

For a pair of potential sets sharing the vector potential A, solutions
u1 (sign +, V1) and u2 (sign -, V2) give pointwise products

    u1 * conj(u2) = e^{i(psi+conj psi)} e^{ig} (1 + w1)(1 + conj w2),

so the tau/(4 pi)-normalized quadrature of (V1 - V2) u1 conj(u2) is the
stationary functional with weight (1 + w1)(1 + conj w2).  As tau grows it
converges to the gauge-wrapped difference e^{ig} (V1 - V2) evaluated at the
localization point; the cross terms in the expansion of the weight,

    T_[w1 + conj w2]  and  T_[w1 * conj w2],

are remainders decaying like tau^{-s}.  Per-point evaluations for different
localization points are independent and run in a process pool.
"""

from __future__ import annotations

import multiprocessing as _mp
from dataclasses import dataclass, field

import numpy as np

from .cauchy import PotentialSet
from .cgo import MaxIterationsExceeded, NoContraction, build_cgo
from .grid import Field, Grid2D
from .phase import PhaseContext, stationary_functional

__all__ = [
    "ReconReport",
    "PointEvaluation",
    "reconstruct_difference",
    "remainder_norms",
    "unwrap_gauge",
    "support_subgrid",
]


@dataclass(frozen=True)
class PointEvaluation:
    """Stationary-functional values at one localization point."""

    x: tuple[float, float]
    main: complex  # weight 1
    cross_w: complex  # weight w1 + conj(w2)
    cross_ww: complex  # weight w1 * conj(w2)
    failed: bool = False

    @property
    def total(self) -> complex:
        return self.main + self.cross_w + self.cross_ww


@dataclass(frozen=True)
class ReconReport:
    """Reconstruction of V1 - V2 on a sub-grid of localization points."""

    tau: float
    xs: list[tuple[float, float]]
    recon: np.ndarray = field(repr=False)  # T with full weight, per point
    target: np.ndarray = field(repr=False)  # e^{ig}(V1 - V2) at the points
    difference: np.ndarray = field(repr=False)  # (V1 - V2) at the points
    gauge_at_xs: np.ndarray = field(repr=False)  # e^{ig} at the points
    rel_l2_error: float
    remainder_w: float  # sup over points of |cross_w|
    remainder_ww: float  # sup over points of |cross_ww|
    failures: list[tuple[float, float]] = field(default_factory=list)


def support_subgrid(grid: Grid2D, n: int = 17) -> list[tuple[float, float]]:
    """n x n uniform sub-grid of the closed support box, snapped to grid nodes."""
    if (grid.N // 8) % (n - 1) != 0:
        # keep points exactly on lattice nodes: spacing (L/4)/(n-1) must be a
        # multiple of h, i.e. (n-1) must divide N/4
        if (grid.N // 4) % (n - 1) != 0:
            raise ValueError(f"{n}x{n} sub-grid does not align with N={grid.N}")
    hw = grid.support_halfwidth
    step = 2 * hw / (n - 1)
    c1, c2 = grid.center
    return [
        (c1 - hw + i * step, c2 - hw + j * step) for i in range(n) for j in range(n)
    ]


def _node_index(grid: Grid2D, x: tuple[float, float]) -> tuple[int, int]:
    x1, x2 = grid.nodes1d
    i = int(np.argmin(np.abs(x1 - x[0])))
    j = int(np.argmin(np.abs(x2 - x[1])))
    return i, j


def _evaluate_point(
    x: tuple[float, float],
    P1: PotentialSet,
    P2: PotentialSet,
    diffF: Field,
    tau: float,
    s: float,
    tol: float,
    max_iter: int,
) -> PointEvaluation:
    grid = P1.grid
    ctx = PhaseContext(tau, x, grid)
    try:
        w1 = build_cgo(P1, ctx, +1, tol=tol, max_iter=max_iter, s=s, certify=False).w
        w2 = build_cgo(P2, ctx, -1, tol=tol, max_iter=max_iter, s=s, certify=False).w
    except (NoContraction, MaxIterationsExceeded):
        nan = complex(float("nan"), float("nan"))
        return PointEvaluation(x, nan, nan, nan, True)
    w1p = w1.physical()
    w2c = np.conj(w2.physical())
    main = stationary_functional(diffF, None, ctx, P1)
    cross_w = stationary_functional(
        diffF, Field.from_physical(grid, w1p + w2c), ctx, P1
    )
    cross_ww = stationary_functional(
        diffF, Field.from_physical(grid, w1p * w2c), ctx, P1
    )
    return PointEvaluation(x, main, cross_w, cross_ww)


_POOL_PAYLOAD: dict = {}


def _pool_worker(x: tuple[float, float]) -> PointEvaluation:
    p = _POOL_PAYLOAD
    return _evaluate_point(
        x, p["P1"], p["P2"], p["diffF"], p["tau"], p["s"], p["tol"], p["max_iter"]
    )


def _check_shared_gauge(P1: PotentialSet, P2: PotentialSet) -> None:
    if P1.A.values.shape != P2.A.values.shape or not np.array_equal(
        P1.A.values, P2.A.values
    ):
        raise ValueError("potential sets must share the vector potential A")


def reconstruct_difference(
    P1: PotentialSet,
    P2: PotentialSet,
    tau: float,
    xs: list[tuple[float, float]],
    s: float = 0.5,
    tol: float = 1e-8,
    max_iter: int = 200,
    threads: int = 1,
) -> ReconReport:
    """Evaluate the full-weight stationary functional of V1 - V2 at each x.

    Builds w1 (sign +, V1) and w2 (sign -, V2) per point, quadratures the
    weighted functional, and compares against the target e^{ig} (V1 - V2).
    Points whose builds fail to contract are recorded in ``failures`` and
    excluded from the error metrics.
    """
    _check_shared_gauge(P1, P2)
    grid = P1.grid
    diff = P1.V.physical() - P2.V.physical()
    diffF = Field.from_physical(grid, diff)

    if threads > 1:
        _POOL_PAYLOAD.update(
            P1=P1, P2=P2, diffF=diffF, tau=tau, s=s, tol=tol, max_iter=max_iter
        )
        try:
            with _mp.get_context("fork").Pool(threads) as pool:
                evals = pool.map(_pool_worker, xs)
        finally:
            _POOL_PAYLOAD.clear()
    else:
        evals = [
            _evaluate_point(x, P1, P2, diffF, tau, s, tol, max_iter) for x in xs
        ]

    gauge = P1.gauge_exp
    recon = np.array([e.total for e in evals])
    tgt = np.empty(len(xs), dtype=np.complex128)
    dif = np.empty(len(xs), dtype=np.complex128)
    gxs = np.empty(len(xs), dtype=np.complex128)
    for k, x in enumerate(xs):
        i, j = _node_index(grid, x)
        gxs[k] = gauge[i, j]
        dif[k] = diff[i, j]
        tgt[k] = gauge[i, j] * diff[i, j]
    ok = ~np.array([e.failed for e in evals])
    denom = float(np.linalg.norm(tgt[ok]))
    err = float(np.linalg.norm((recon - tgt)[ok]))
    rel = err / denom if denom > 0 else err
    cross_w = np.array([e.cross_w for e in evals])[ok]
    cross_ww = np.array([e.cross_ww for e in evals])[ok]
    rem_w = float(np.abs(cross_w).max()) if cross_w.size else 0.0
    rem_ww = float(np.abs(cross_ww).max()) if cross_ww.size else 0.0
    failures = [e.x for e in evals if e.failed]
    return ReconReport(tau, list(xs), recon, tgt, dif, gxs, rel, rem_w, rem_ww, failures)


def remainder_norms(
    P1: PotentialSet,
    P2: PotentialSet,
    ctx: PhaseContext,
    s: float = 0.5,
    tol: float = 1e-8,
    max_iter: int = 200,
) -> tuple[float, float]:
    """|T_[w1 + conj w2]| and |T_[w1 conj w2]| of V1 - V2 at ctx.x."""
    _check_shared_gauge(P1, P2)
    diffF = Field.from_physical(P1.grid, P1.V.physical() - P2.V.physical())
    e = _evaluate_point(ctx.x, P1, P2, diffF, ctx.tau, s, tol, max_iter)
    if e.failed:
        raise NoContraction(f"CGO build failed at x={ctx.x}, tau={ctx.tau}")
    return abs(e.cross_w), abs(e.cross_ww)


def unwrap_gauge(report: ReconReport, P: PotentialSet) -> np.ndarray:
    """Divide the reconstruction pointwise by e^{ig} (never zero: g imaginary).

    The result approximates the real difference V1 - V2 at the report points.
    """
    return report.recon / report.gauge_at_xs
