"""Boundary-corrected pressure Poisson system and its CG solver.

Sign conventions
----------------
``apply_laplacian`` is the positive semi-definite operator

    L_i p = (A_hat_i / rho0) p_i - (1/rho0) sum_j (1/a_i + 1/a_j) (omega/r^2)_ij p_j

and ``compute_source`` is the (divergence-like) source ``D``, negative for
converging flow.  Requiring the staggered velocities ``v*_ij - dt/rho0 *
(p_j - p_i)/r_ij n_ij`` to be divergence free gives ``L p = -D``, which is the
system solved here so that ``p`` is the physical (compressive positive)
pressure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .classification import BoundaryWeights, ParticleClass, pair_coefficients
from .geometry import NeighborTable
from .kernel import KernelSpec


class PressureSolveError(RuntimeError):
    """Raised when the CG iteration produces non-finite values."""

    def __init__(self, message, dump=None):
        super().__init__(message)
        self.dump = dump or {}


@dataclass
class PressureSystem:
    diag: np.ndarray
    pair_i: np.ndarray
    pair_j: np.ndarray
    coef: np.ndarray
    rho0: float

    @property
    def size(self):
        return len(self.diag)

    def apply(self, p):
        off = np.bincount(self.pair_i, weights=self.coef * p[self.pair_j], minlength=self.size)
        return self.diag * p - off

    def dense(self):
        """Explicit matrix (small systems only)."""
        m = np.diag(self.diag.astype(float))
        np.subtract.at(m, (self.pair_i, self.pair_j), self.coef)
        return m

    def is_pinned(self):
        """True if some row is anchored to the zero-pressure air."""
        row = np.bincount(self.pair_i, weights=self.coef, minlength=self.size)
        return bool(np.any(self.diag > row * (1.0 + 1e-9)))


def assemble(table: NeighborTable, weights: BoundaryWeights, kernel: KernelSpec, rho0):
    cf, _ = pair_coefficients(table, weights.alpha_hat)
    coef = cf * kernel.omega_over_r2(table.fluid.r) / rho0
    return PressureSystem(weights.A_hat / rho0, table.fluid.i, table.fluid.j, coef, rho0)


def apply_laplacian(system: PressureSystem, p):
    return system.apply(np.asarray(p, dtype=float))


def compute_source(table: NeighborTable, weights: BoundaryWeights, kernel: KernelSpec,
                   v_star, wall_dv, dt):
    """Velocity-divergence source with the wall constraint folded in.

    ``wall_dv`` holds the velocity change of every fluid-ghost pair (one row per
    entry of ``table.solid``).  Only particles touching a wall have ghost pairs,
    so the wall sum vanishes automatically for the other classes.
    """
    if not dt > 0:
        raise ValueError(f"time step must be positive, got {dt}")
    n = table.n_particles
    cf, cs = pair_coefficients(table, weights.alpha_hat)
    f = table.fluid
    dv = v_star[f.j] - v_star[f.i]
    term = cf * 0.5 * np.einsum("ij,ij->i", dv, f.n) * kernel.omega_over_r(f.r)
    D = np.bincount(f.i, weights=term, minlength=n)
    s = table.solid
    if len(s):
        wterm = cs * np.einsum("ij,ij->i", wall_dv, s.n) * kernel.omega_over_r(s.r)
        D += np.bincount(s.i, weights=wterm, minlength=n)
    return D / dt


def compute_ecs(rho_rel, D_prev):
    """Error compensating source; nonzero only for over-dense particles.

    ``rho_rel`` is ``rho_i / rho0``.
    """
    e = np.asarray(rho_rel, dtype=float) - 1.0
    D_prev = np.asarray(D_prev, dtype=float)
    ecs = np.abs(e) * D_prev + np.abs(D_prev) * e
    return np.where(e > 0.0, ecs, 0.0)


def residual_eta(L, D):
    """Mean absolute residual ``(1/N) sum |L_i - D_i|``."""
    L = np.asarray(L, dtype=float)
    if L.size == 0:
        return 0.0
    return float(np.mean(np.abs(L - np.asarray(D, dtype=float))))


@dataclass
class CGResult:
    pressure: np.ndarray
    iterations: int
    eta: float
    residual_norms: list = field(default_factory=list)
    etas: list = field(default_factory=list)
    converged: bool = False


def solve_pressure(system: PressureSystem, rhs, p0=None, eta0=0.0, max_iter=500):
    """Unpreconditioned conjugate gradients on ``L p = rhs``.

    The residual is ``q = L p - rhs`` and the iteration stops once the mean
    absolute residual ``eta`` drops to ``eta0`` or after ``max_iter`` steps.
    Negative pressures are kept.
    """
    n = system.size
    rhs = np.asarray(rhs, dtype=float)
    p = np.zeros(n) if p0 is None else np.array(p0, dtype=float)
    if n == 0:
        return CGResult(p, 0, 0.0, [0.0], [0.0], True)

    q = system.apply(p) - rhs
    y = q.copy()
    qq = float(q @ q)
    eta = float(np.mean(np.abs(q)))
    norms, etas = [np.sqrt(qq)], [eta]
    if not np.isfinite(qq):
        raise PressureSolveError("non-finite initial residual",
                                 dump={"p": p, "q": q, "iteration": 0})
    k = 0
    while eta > eta0 and k < max_iter:
        Ly = system.apply(y)
        yLy = float(y @ Ly)
        if not np.isfinite(yLy) or not np.isfinite(qq):
            raise PressureSolveError(
                f"non-finite CG state at iteration {k}",
                dump={"p": p, "q": q, "y": y, "iteration": k},
            )
        if yLy <= 0.0:
            # direction in the null space of a singular operator
            break
        beta = qq / yLy
        p -= beta * y
        q -= beta * Ly
        qq_new = float(q @ q)
        gamma = qq_new / qq if qq > 0.0 else 0.0
        y = q + gamma * y
        qq = qq_new
        k += 1
        eta = float(np.mean(np.abs(q)))
        norms.append(np.sqrt(qq))
        etas.append(eta)
    if not np.all(np.isfinite(p)):
        raise PressureSolveError("non-finite pressure", dump={"p": p, "iteration": k})
    return CGResult(p, k, eta, norms, etas, eta <= eta0)


def enforce_compatibility(system: PressureSystem, rhs):
    """Remove the constant component of ``rhs`` when no row is pinned.

    Without free-surface rows the operator annihilates constants and the
    system is only solvable for mean-free right-hand sides.
    """
    if system.size == 0 or system.is_pinned():
        return rhs
    return rhs - rhs.mean()


def free_surface_rows(classes):
    return (classes == ParticleClass.FREE_SURFACE) | (classes == ParticleClass.SURFACE_AND_WALL)
