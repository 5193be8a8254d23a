"""Wall velocity constraint, per-class pressure term, XSPH and the CFL step.

The pressure term is returned in gradient form ``G`` (units of acceleration)
so that the corrected velocity is ``v = v* - dt * G``.  For a linear pressure
``p = a x + b`` on a complete lattice ``G = (a / rho0, 0)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classification import BoundaryWeights, ParticleClass, _segment_sum, pair_coefficients
from .geometry import GhostSolidSet, NeighborTable
from .kernel import KernelSpec

V_FLOOR = 1e-8


@dataclass(frozen=True)
class WallCondition:
    cn: float = 1.0
    ct: float = 1.0

    def __post_init__(self):
        for name in ("cn", "ct"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")


def wall_delta_v(v_star_i, v_wall, normal, wall: WallCondition):
    """Velocity change imposed by a ghost sample, row-wise.

    The relative velocity ``v_wall - v*_i`` is split along the ghost normal;
    the normal part is scaled by ``cn`` (forced to 1 when the particle moves
    toward the wall) and the tangential part by ``ct``.
    """
    rel = np.asarray(v_wall, dtype=float) - np.asarray(v_star_i, dtype=float)
    normal = np.asarray(normal, dtype=float)
    un = np.einsum("ij,ij->i", rel, normal)
    rel_n = un[:, None] * normal
    cn = np.where(un > 0.0, 1.0, wall.cn)
    return cn[:, None] * rel_n + wall.ct * (rel - rel_n)


def pair_wall_delta_v(table: NeighborTable, ghosts: GhostSolidSet, v_star, wall: WallCondition):
    """``wall_delta_v`` for every fluid-ghost pair in ``table.solid``."""
    s = table.solid
    if len(s) == 0:
        return np.zeros((0, v_star.shape[1]))
    return wall_delta_v(v_star[s.i], ghosts.velocities[s.j], ghosts.normals[s.j], wall)


def pressure_force(table: NeighborTable, weights: BoundaryWeights, kernel: KernelSpec,
                   p, wall_dv, beta0, rho0, dt):
    """Pressure term ``G_i`` per particle class.

    Interior and wall particles use the pair differences ``p_j - p_i``.
    Free-surface particles see ``p = 0`` air beyond their truncated support,
    which reduces to ``sum_j c_ij p_j n_ij omega/r``.  Surface-and-wall
    particles use the pair differences plus ``p_i`` times the missing (air)
    part of the zero-sum ``sum n omega/r``, taken over fluid and ghost pairs.
    Particles with ghost neighbors also receive the wall velocity constraint
    divided by ``dt``.
    """
    n = table.n_particles
    dim = table.fluid.n.shape[1]
    cf, cs = pair_coefficients(table, weights.alpha_hat)
    f = table.fluid
    wf = (cf * kernel.omega_over_r(f.r))[:, None] * f.n
    diff = _segment_sum(f.i, wf * (p[f.j] - p[f.i])[:, None], n).reshape(n, dim)
    open_sum = _segment_sum(f.i, wf, n).reshape(n, dim)

    cls = weights.classes
    surface = cls == ParticleClass.FREE_SURFACE
    wedge = cls == ParticleClass.SURFACE_AND_WALL

    G = diff.copy()
    G[surface] += p[surface, None] * open_sum[surface]

    s = table.solid
    if len(s):
        ws = (cs * kernel.omega_over_r(s.r))[:, None] * s.n
        solid_sum = _segment_sum(s.i, ws, n).reshape(n, dim)
        G[wedge] += p[wedge, None] * (open_sum[wedge] + solid_sum[wedge])
        dv_n = np.einsum("ij,ij->i", wall_dv, s.n)[:, None] * s.n
        lam_s = _segment_sum(s.i, (cs * kernel.omega(s.r))[:, None] * dv_n, n).reshape(n, dim)
    else:
        lam_s = np.zeros((n, dim))
    return beta0 * (G / rho0 - lam_s / dt)


def xsph_viscosity(table: NeighborTable, v, kernel: KernelSpec, alpha_hat, eps):
    """Smoothed velocity ``v_i + eps * sum_j omega_ij / alpha_i (v_j - v_i)``."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"XSPH coefficient must lie in [0, 1], got {eps}")
    if eps == 0.0 or len(table.fluid) == 0:
        return np.array(v, dtype=float)
    f = table.fluid
    w = kernel.omega(f.r) / alpha_hat[f.i]
    corr = _segment_sum(f.i, w[:, None] * (v[f.j] - v[f.i]), table.n_particles)
    return v + eps * corr.reshape(v.shape)


def cfl_dt(v_max, h, cfl_factor, dt_max):
    if v_max < 0:
        raise ValueError("v_max must be nonnegative")
    return min(dt_max, cfl_factor * h / max(v_max, V_FLOOR))


def staggered_masses(table: NeighborTable, kernel: KernelSpec, masses, alpha=None):
    """Pair masses ``m_ij = omega_ij / alpha_i * m_i`` for the fluid pairs.

    With ``alpha`` left as ``None`` the unclamped weight sum is used, in which
    case every particle's pair masses add up to its own mass.
    """
    f = table.fluid
    w = kernel.omega(f.r)
    if alpha is None:
        alpha = np.bincount(f.i, weights=w, minlength=table.n_particles)
    return w / alpha[f.i] * np.asarray(masses, dtype=float)[f.i]
