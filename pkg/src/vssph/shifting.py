"""Particle shifting by descent on a Helmholtz-type free energy.

The energy per particle is

    F_i = |x_i - x*_i|^2 / (2 d0^2) + lambda/4 (c_i^2 - 1)^2 + kappa/2 |grad c_i|^2

with the concentration ``c`` normalized so that the reference lattice has
``c = 1``.  All lengths inside this module are measured in units of ``d0``
(positions are divided by ``d0`` before the energy is evaluated).  This makes
the step size ``1 / (1 + lambda0 + kappa0 |lap0 c|)`` dimensionless and the
iteration independent of the physical particle spacing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .calibration import ReferenceConstants
from .classification import _segment_sum, compute_alpha_hat
from .geometry import GhostSolidSet, NeighborTable, build_neighbors
from .kernel import KernelSpec


@dataclass(frozen=True)
class ShiftConfig:
    kappa: float = 0.0
    lam: float = 1.0
    iterations: int = 10
    d0: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.kappa <= 1.0:
            raise ValueError(f"kappa must lie in [0, 1], got {self.kappa}")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lambda must lie in [0, 1], got {self.lam}")
        if self.iterations < 0:
            raise ValueError("iterations must be nonnegative")
        if not self.d0 > 0:
            raise ValueError("d0 must be positive")


@dataclass
class ShiftResult:
    positions: np.ndarray
    xi: list = field(default_factory=list)
    max_step: list = field(default_factory=list)


def concentration(table: NeighborTable, kernel: KernelSpec, alpha_hat):
    """Raw ``c_i = sum_j W(r_ij) / alpha_hat_i`` over fluid and ghost neighbors."""
    n = table.n_particles
    s = _segment_sum(table.fluid.i, kernel.bigW(table.fluid.r), n)
    s += _segment_sum(table.solid.i, kernel.bigW(table.solid.r), n)
    return s / alpha_hat


def grad_c(table: NeighborTable, kernel: KernelSpec, alpha_hat):
    """``sum_j n_ij omega_ij / r_ij / alpha_hat_i``; points toward denser regions."""
    n = table.n_particles
    g = _segment_sum(table.fluid.i, table.fluid.n * kernel.omega_over_r(table.fluid.r)[:, None], n)
    if len(table.solid):
        g = g + _segment_sum(
            table.solid.i, table.solid.n * kernel.omega_over_r(table.solid.r)[:, None], n
        )
    return g / alpha_hat[:, None]


def lap_c(table: NeighborTable, kernel: KernelSpec, alpha_hat):
    n = table.n_particles
    s = _segment_sum(table.fluid.i, kernel.omega_prime_over_r(table.fluid.r), n)
    s += _segment_sum(table.solid.i, kernel.omega_prime_over_r(table.solid.r), n)
    return s / alpha_hat


def free_energy_gradient(x, x_star, c, gc, lc, kappa, lam, d0=1.0):
    """Gradient of the free energy for normalized ``c`` (reference value 1).

    ``gc`` and ``lc`` must be the gradient and Laplacian of the normalized
    concentration in the same length unit as ``x``.
    """
    x = np.asarray(x, dtype=float)
    c = np.asarray(c, dtype=float)
    bulk = lam * (c**3 - c)
    return (x - x_star) / d0**2 + (bulk + kappa * np.asarray(lc))[:, None] * gc


def step_size(consts: ReferenceConstants):
    """Lattice-unit step ``1 / (1 + lambda0 + kappa0 |lap0 c| / c0)``."""
    lap0 = abs(consts.delta0c) / consts.c0  # normalized, per d0^2 at d0 = 1
    return 1.0 / (1.0 + consts.lambda0 + consts.kappa0 * lap0)


def _lattice_units(consts: ReferenceConstants, d0):
    """Constants rescaled to d0 = 1 (only ``delta0c`` carries a length)."""
    return ReferenceConstants(
        alpha0=consts.alpha0,
        A0=consts.A0 * d0**2,
        c0=consts.c0,
        delta0c=consts.delta0c * d0**2,
        beta0=consts.beta0,
        lambda0=consts.lambda0,
        kappa0=consts.kappa0,
    )


def project_out_of_solids(x, sdf, eps):
    """Move points with negative distance back to the surface plus ``eps``."""
    if sdf is None or len(x) == 0:
        return x
    dist, grad = sdf.evaluate(x)
    inside = dist < 0.0
    if np.any(inside):
        x = x.copy()
        x[inside] += (eps - dist[inside])[:, None] * grad[inside]
    return x


def shift_particles(positions, ghosts: GhostSolidSet | None, sdf, kernel: KernelSpec,
                    consts: ReferenceConstants, cfg: ShiftConfig):
    """Run ``cfg.iterations`` Jacobi rounds of ``dx = -step * grad F``.

    ``x*`` is the incoming position for the whole loop.  Neighbors are rebuilt
    every round, ghost solids count toward the concentration, the step is
    clipped to ``d0`` and particles pushed into a solid are projected back.
    ``xi`` records ``sum |dx| / (d0 N)`` per round.
    """
    d0 = cfg.d0
    x_star = np.array(positions, dtype=float)
    x = x_star.copy()
    n = len(x)
    result = ShiftResult(x)
    if n == 0 or cfg.iterations == 0:
        return result
    unit = _lattice_units(consts, d0)
    sigma = step_size(unit)
    eps = 1e-6 * d0
    for _ in range(cfg.iterations):
        table = build_neighbors(x, ghosts, kernel.h)
        alpha_hat = compute_alpha_hat(table, kernel, consts.alpha0)
        c = concentration(table, kernel, alpha_hat) / consts.c0
        # derivatives of the normalized concentration, in lattice units
        gc = grad_c(table, kernel, alpha_hat) * (d0 / consts.c0)
        lc = lap_c(table, kernel, alpha_hat) * (d0**2 / consts.c0)
        g = free_energy_gradient(x / d0, x_star / d0, c, gc, lc, cfg.kappa, cfg.lam)
        dx = -sigma * g * d0
        norm = np.linalg.norm(dx, axis=1)
        too_far = norm > d0
        if np.any(too_far):
            dx[too_far] *= (d0 / norm[too_far])[:, None]
            norm[too_far] = d0
        x = project_out_of_solids(x + dx, sdf, eps)
        result.xi.append(float(norm.sum() / (d0 * n)))
        result.max_step.append(float(norm.max()))
    result.positions = x
    return result
