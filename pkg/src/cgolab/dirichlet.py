"""Finite-difference Dirichlet solver on Omega and the weak DN pairing.

The magnetic Schroedinger Dirichlet problem on the square
Omega = center + [-L/4, L/4]^2 is

    (grad + iA)^2 u = V u  in Omega,      u = f  on the boundary,

discretized with the five-point Laplacian and central first differences in
divergence pairing form:

    Lap5 u + i [Dc.(A u) + A . Dc u] - (|A|^2 + V) u = 0,

where Dc is the central difference and Dc.(A u) means the central divergence
of the product.  This operator is exactly the Euler-Lagrange operator of the
discrete sesquilinear energy used by :func:`dn_pairing`,

    B_h(u, v) = sum_faces  w_f  D+ u  conj(D+ v) h^2
              + sum_nodes w_n [ (|A|^2 + V) u conj(v)
                                + i A . (u Dc conj(v) - conj(v) Dc u) ] h^2,

with trapezoid node weights and half-weights on transverse boundary lines of
the face sums.  Consequently B_h(u_fd, psi) vanishes to solver tolerance for
every test field psi supported in the interior, which is the discrete weak-
solution property, while the quadrature remains exact for linear factors
(e.g. the gradient term of u = psi = x1 integrates to the exact area).

A fixed positive energy k^2 is supported through the shift V <- V - k^2.

The Alessandrini check realizes the DN map faithfully: both pairings use
finite-difference solutions of the SAME boundary trace (taken from the CGO
solution u1), so with identical potentials the two solves coincide bitwise
and the identity degenerates to 0 = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .cauchy import PotentialSet
from .cgo import assemble_solution, build_cgo
from .grid import Field, Grid2D
from .phase import PhaseContext

__all__ = [
    "BoundaryTrace",
    "DnPairing",
    "EigenvalueCollision",
    "SolverFailure",
    "solve_dirichlet",
    "solve_dirichlet_arrays",
    "dn_pairing",
    "dn_matrix",
    "alessandrini_residual",
    "alessandrini_check",
    "AlessandriniResult",
    "omega_nodes",
    "boundary_indices",
]


class EigenvalueCollision(RuntimeError):
    """Discrete operator is (near-)singular: zero is close to a Dirichlet eigenvalue."""


class SolverFailure(RuntimeError):
    """Sparse solve did not meet the relative-residual contract."""


def omega_nodes(grid: Grid2D) -> tuple[np.ndarray, np.ndarray]:
    """1D node coordinates of the Omega sub-grid (inclusive endpoints)."""
    sl = grid.omega_slice
    x1, x2 = grid.nodes1d
    return x1[sl], x2[sl]


def boundary_indices(n: int) -> list[tuple[int, int]]:
    """Counterclockwise boundary walk of an n x n node square, from (0, 0)."""
    idx = [(i, 0) for i in range(n - 1)]
    idx += [(n - 1, j) for j in range(n - 1)]
    idx += [(i, n - 1) for i in range(n - 1, 0, -1)]
    idx += [(0, j) for j in range(n - 1, 0, -1)]
    return idx


@dataclass(frozen=True)
class BoundaryTrace:
    """Ordered samples of Dirichlet data on the discrete boundary of Omega."""

    grid: Grid2D
    samples: np.ndarray

    def __post_init__(self):
        n = self.grid.N // 2 + 1
        expected = 4 * (n - 1)
        v = np.ascontiguousarray(self.samples, dtype=np.complex128)
        if v.shape != (expected,):
            raise ValueError(f"trace length {v.shape} != boundary node count {expected}")
        v.flags.writeable = False
        object.__setattr__(self, "samples", v)

    @staticmethod
    def from_field(F: Field) -> "BoundaryTrace":
        """Sample a field on the boundary nodes of Omega."""
        grid = F.grid
        sl = grid.omega_slice
        sub = F.physical()[sl, sl]
        n = sub.shape[0]
        vals = np.array([sub[i, j] for i, j in boundary_indices(n)])
        return BoundaryTrace(grid, vals)

    @staticmethod
    def from_function(grid: Grid2D, fn) -> "BoundaryTrace":
        x1, x2 = omega_nodes(grid)
        n = len(x1)
        vals = np.array([fn(x1[i], x2[j]) for i, j in boundary_indices(n)], dtype=np.complex128)
        return BoundaryTrace(grid, vals)

    def to_subgrid_boundary(self) -> np.ndarray:
        """(n, n) array with the trace on the boundary ring, zero inside."""
        n = self.grid.N // 2 + 1
        out = np.zeros((n, n), dtype=np.complex128)
        for val, (i, j) in zip(self.samples, boundary_indices(n)):
            out[i, j] = val
        return out


@dataclass(frozen=True)
class DnPairing:
    """Value of the weak DN sesquilinear form, with the quadrature scheme tag."""

    value: complex
    quadrature: str = "face-trapezoid"


def _subgrid_arrays(P: PotentialSet) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    sl = P.grid.omega_slice
    V = P.V.physical()[sl, sl].real
    A = P.A.physical()[sl, sl]
    return V, A.real, A.imag


def solve_dirichlet_arrays(
    V: np.ndarray,
    A1: np.ndarray,
    A2: np.ndarray,
    trace: BoundaryTrace,
    grid: Grid2D,
    energy: float = 0.0,
) -> Field:
    """Sparse solve of the discrete magnetic Dirichlet problem on Omega.

    ``V`` may be complex (manufactured solutions); ``energy`` applies the
    fixed-energy shift V <- V - k^2.  Returns a Field on the full grid with
    the solution on Omega nodes and zeros outside.  Raises
    :class:`EigenvalueCollision` if the factorization reports singularity and
    :class:`SolverFailure` if the relative residual exceeds 1e-10.
    """
    n = grid.N // 2 + 1
    if V.shape != (n, n) or A1.shape != (n, n) or A2.shape != (n, n):
        raise ValueError("coefficient arrays must live on the Omega sub-grid")
    h = grid.h
    Veff = V - energy

    interior = n - 2
    if interior <= 0:
        raise ValueError("grid too coarse for an interior")

    def node_id(i, j):
        return (i - 1) * interior + (j - 1)

    Ii, Jj = np.meshgrid(np.arange(1, n - 1), np.arange(1, n - 1), indexing="ij")
    Ii = Ii.ravel()
    Jj = Jj.ravel()
    ids = node_id(Ii, Jj)

    inv_h2 = 1.0 / h**2
    inv_2h = 1.0 / (2.0 * h)

    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    data: list[np.ndarray] = []
    gb = trace.to_subgrid_boundary()
    rhs = np.zeros(interior * interior, dtype=np.complex128)

    # diagonal: -4/h^2 - (A^2 + Veff)
    diag = -4.0 * inv_h2 - (A1[Ii, Jj] ** 2 + A2[Ii, Jj] ** 2 + Veff[Ii, Jj])
    rows.append(ids)
    cols.append(ids)
    data.append(diag.astype(np.complex128))

    # neighbor couplings: Lap5 plus magnetic central-divergence pairing
    for di, dj, Acomp in ((1, 0, A1), (-1, 0, A1), (0, 1, A2), (0, -1, A2)):
        ni, nj = Ii + di, Jj + dj
        sgn = 1.0 if (di + dj) > 0 else -1.0
        coef = inv_h2 + 1j * sgn * inv_2h * (Acomp[ni, nj] + Acomp[Ii, Jj])
        inner = (ni >= 1) & (ni <= n - 2) & (nj >= 1) & (nj <= n - 2)
        rows.append(ids[inner])
        cols.append(node_id(ni[inner], nj[inner]))
        data.append(coef[inner])
        bnd = ~inner
        np.add.at(rhs, ids[bnd], -coef[bnd] * gb[ni[bnd], nj[bnd]])

    M = sp.csr_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(interior * interior, interior * interior),
    )
    try:
        lu = spla.splu(M.tocsc())
        sol = lu.solve(rhs)
    except RuntimeError as exc:  # singular factorization
        raise EigenvalueCollision(str(exc)) from exc
    if not np.all(np.isfinite(sol)):
        raise EigenvalueCollision("solution contains non-finite entries")
    resid = np.linalg.norm(M @ sol - rhs)
    scale = np.linalg.norm(rhs)
    if scale > 0 and resid / scale > 1e-10:
        raise SolverFailure(f"relative residual {resid / scale:.2e} exceeds 1e-10")

    sub = gb.copy()
    sub[1:-1, 1:-1] = sol.reshape(interior, interior)
    full = np.zeros((grid.N, grid.N), dtype=np.complex128)
    sl = grid.omega_slice
    full[sl, sl] = sub
    return Field.from_physical(grid, full)


def solve_dirichlet(P: PotentialSet, f: BoundaryTrace, grid: Grid2D, energy: float = 0.0) -> Field:
    """Dirichlet solve for a potential set (see :func:`solve_dirichlet_arrays`)."""
    if grid != P.grid:
        raise ValueError("trace grid and potential grid differ")
    V, A1, A2 = _subgrid_arrays(P)
    return solve_dirichlet_arrays(V, A1, A2, f, grid, energy)


def _central_gradient(u: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Second-order gradient on the sub-grid: central inside, one-sided at edges."""
    d1 = np.empty_like(u)
    d1[1:-1, :] = (u[2:, :] - u[:-2, :]) / (2 * h)
    d1[0, :] = (-3 * u[0, :] + 4 * u[1, :] - u[2, :]) / (2 * h)
    d1[-1, :] = (3 * u[-1, :] - 4 * u[-2, :] + u[-3, :]) / (2 * h)
    d2 = np.empty_like(u)
    d2[:, 1:-1] = (u[:, 2:] - u[:, :-2]) / (2 * h)
    d2[:, 0] = (-3 * u[:, 0] + 4 * u[:, 1] - u[:, 2]) / (2 * h)
    d2[:, -1] = (3 * u[:, -1] - 4 * u[:, -2] + u[:, -3]) / (2 * h)
    return d1, d2


def _trapezoid_weights(n: int) -> np.ndarray:
    w1 = np.ones(n)
    w1[0] = w1[-1] = 0.5
    return np.outer(w1, w1)


def dn_pairing(u: Field, Psi: Field, P: PotentialSet, energy: float = 0.0) -> DnPairing:
    """Discrete weak form B_h(u, Psi) over Omega (see module docstring)."""
    grid = P.grid
    sl = grid.omega_slice
    h = grid.h
    us = u.physical()[sl, sl]
    ps = np.conj(Psi.physical()[sl, sl])
    V, A1, A2 = _subgrid_arrays(P)
    Veff = V - energy
    n = us.shape[0]

    # gradient energy: forward-difference faces, half weight on transverse
    # boundary lines (exact discrete adjoint of the five-point operator)
    wt_line = np.ones(n)
    wt_line[0] = wt_line[-1] = 0.5
    du_x = (us[1:, :] - us[:-1, :]) / h
    dp_x = (ps[1:, :] - ps[:-1, :]) / h
    grad_term = np.sum(du_x * dp_x * wt_line[None, :]) * h**2
    du_y = (us[:, 1:] - us[:, :-1]) / h
    dp_y = (ps[:, 1:] - ps[:, :-1]) / h
    grad_term += np.sum(du_y * dp_y * wt_line[:, None]) * h**2

    wt = _trapezoid_weights(n)
    node_term = np.sum(wt * (A1**2 + A2**2 + Veff) * us * ps) * h**2

    if np.any(A1) or np.any(A2):
        dpx, dpy = _central_gradient(ps, h)
        dux, duy = _central_gradient(us, h)
        mag = A1 * (us * dpx - ps * dux) + A2 * (us * dpy - ps * duy)
        node_term = node_term + 1j * np.sum(wt * mag) * h**2

    return DnPairing(complex(grad_term + node_term))


def dn_matrix(
    P: PotentialSet, traces: list[BoundaryTrace], energy: float = 0.0
) -> np.ndarray:
    """Matrix of DN pairings over a boundary basis: entry (k, j) = <Lambda f_k, f_j>.

    Each basis trace is resolved through the Dirichlet solver; the second
    argument of the pairing uses the solve of f_j as its H^1 extension.
    """
    solves = [solve_dirichlet(P, f, P.grid, energy) for f in traces]
    K = len(traces)
    out = np.empty((K, K), dtype=np.complex128)
    for k in range(K):
        for j in range(K):
            out[k, j] = dn_pairing(solves[k], solves[j], P, energy).value
    return out


def _omega_integral(f: np.ndarray, grid: Grid2D) -> complex:
    n = f.shape[0]
    return complex(np.sum(_trapezoid_weights(n) * f) * grid.h**2)


@dataclass(frozen=True)
class AlessandriniResult:
    lhs: complex
    rhs: complex
    residual: float
    tau: float
    x: tuple[float, float]


def alessandrini_check(
    P1: PotentialSet,
    P2: PotentialSet,
    tau: float,
    x: tuple[float, float],
    s: float = 0.5,
    tol: float = 1e-10,
    energy: float = 0.0,
) -> AlessandriniResult:
    """Boundary-interior identity check for the CGO pair at (tau, x).

    LHS: difference of DN pairings of the two finite-difference resolvents of
    the CGO trace against the sign-minus CGO solution.  RHS: Omega integral
    of (V1 - V2) u1 conj(u2).  Residual: |LHS - RHS| / (|LHS| + |RHS| + eps).
    """
    grid = P1.grid
    if not np.array_equal(P1.A.values, P2.A.values):
        raise ValueError("potential sets must share the vector potential A")
    ctx = PhaseContext(tau, x, grid)
    sol1 = build_cgo(P1, ctx, +1, tol=tol, s=s, certify=True)
    sol2 = build_cgo(P2, ctx, -1, tol=tol, s=s, certify=True)
    u1 = assemble_solution(sol1, P1)
    u2 = assemble_solution(sol2, P2)

    f = BoundaryTrace.from_field(u1)
    u1_fd = solve_dirichlet(P1, f, grid, energy)
    u2_fd = solve_dirichlet(P2, f, grid, energy)
    lhs = dn_pairing(u1_fd, u2, P1, energy).value - dn_pairing(u2_fd, u2, P2, energy).value

    sl = grid.omega_slice
    integrand = (P1.V.physical() - P2.V.physical())[sl, sl] * u1.physical()[sl, sl] * np.conj(
        u2.physical()[sl, sl]
    )
    rhs = _omega_integral(integrand, grid)
    residual = abs(lhs - rhs) / (abs(lhs) + abs(rhs) + 1e-30)
    return AlessandriniResult(lhs, rhs, residual, tau, x)


def alessandrini_residual(
    P1: PotentialSet,
    P2: PotentialSet,
    tau: float,
    x: tuple[float, float],
    s: float = 0.5,
    tol: float = 1e-10,
    energy: float = 0.0,
) -> float:
    """Residual |LHS - RHS| / (|LHS| + |RHS| + eps) of the identity check."""
    return alessandrini_check(P1, P2, tau, x, s, tol, energy).residual
