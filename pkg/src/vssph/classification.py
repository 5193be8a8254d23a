"""Boundary-aware particle weights and the four-way particle classification."""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass

import numpy as np

from .geometry import NeighborTable
from .kernel import KernelSpec

log = logging.getLogger(__name__)

# relative slack on the A0 comparisons: a complete support that is stretched
# by a fraction of a percent must stay interior, while the second layer below
# a flat free surface sits near 0.96 A0 and must not
CLASS_RTOL = 0.02
A_HAT_FLOOR = 1e-6


class ParticleClass(enum.IntEnum):
    INTERIOR = 0  # support untouched by any boundary
    FREE_SURFACE = 1  # truncated by air only
    WALL = 2  # truncated by solid walls only
    SURFACE_AND_WALL = 3  # truncated by both


@dataclass
class BoundaryWeights:
    alpha_hat: np.ndarray
    Ab: np.ndarray
    As: np.ndarray
    A_hat: np.ndarray
    classes: np.ndarray


def _segment_sum(index, values, n):
    if values.ndim == 1:
        return np.bincount(index, weights=values, minlength=n)
    return np.stack(
        [np.bincount(index, weights=values[:, k], minlength=n) for k in range(values.shape[1])],
        axis=1,
    )


def compute_alpha_hat(table: NeighborTable, kernel: KernelSpec, alpha0):
    """``max(alpha0, sum of omega over fluid and solid neighbors)``."""
    n = table.n_particles
    s = _segment_sum(table.fluid.i, kernel.omega(table.fluid.r), n)
    s += _segment_sum(table.solid.i, kernel.omega(table.solid.r), n)
    return np.maximum(alpha0, s)


def pair_coefficients(table: NeighborTable, alpha_hat):
    """``1/alpha_i + 1/alpha_j`` for fluid pairs and ``2/alpha_i`` for ghost pairs."""
    inv = 1.0 / alpha_hat
    fluid = inv[table.fluid.i] + inv[table.fluid.j]
    solid = 2.0 * inv[table.solid.i]
    return fluid, solid


def compute_Ab_As(table: NeighborTable, alpha_hat, kernel: KernelSpec):
    n = table.n_particles
    cf, cs = pair_coefficients(table, alpha_hat)
    Ab = _segment_sum(table.fluid.i, cf * kernel.omega_over_r2(table.fluid.r), n)
    As = _segment_sum(table.solid.i, cs * kernel.omega_over_r2(table.solid.r), n)
    return Ab, As


def classify(Ab, As, has_solid, A0, rtol=CLASS_RTOL):
    threshold = A0 * (1.0 - rtol)
    has_solid = np.asarray(has_solid, dtype=bool)
    classes = np.where(
        has_solid,
        np.where(Ab + As >= threshold, ParticleClass.WALL, ParticleClass.SURFACE_AND_WALL),
        np.where(Ab >= threshold, ParticleClass.INTERIOR, ParticleClass.FREE_SURFACE),
    )
    return classes.astype(np.int8)


def compute_A_hat(classes, Ab, As, A0):
    A_hat = np.where(
        classes == ParticleClass.FREE_SURFACE,
        A0,
        np.where(classes == ParticleClass.SURFACE_AND_WALL, A0 - As, Ab),
    )
    # wedge particles with As >= A0, or wall particles enclosed by ghosts only,
    # would otherwise get an empty diagonal
    floor = A_HAT_FLOOR * A0
    bad = A_hat <= floor
    if np.any(bad):
        log.warning("flooring A_hat for %d degenerate particles", int(bad.sum()))
        A_hat = np.where(bad, floor, A_hat)
    return A_hat


def boundary_weights(table: NeighborTable, kernel: KernelSpec, alpha0, A0,
                     rtol=CLASS_RTOL) -> BoundaryWeights:
    alpha_hat = compute_alpha_hat(table, kernel, alpha0)
    Ab, As = compute_Ab_As(table, alpha_hat, kernel)
    classes = classify(Ab, As, table.has_solid(), A0, rtol)
    A_hat = compute_A_hat(classes, Ab, As, A0)
    return BoundaryWeights(alpha_hat, Ab, As, A_hat, classes)
