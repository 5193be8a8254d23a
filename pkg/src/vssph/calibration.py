"""Reference constants from a prototype particle with a full neighborhood.

The prototype is the centre of a Cartesian lattice of spacing ``d0``; its
neighbors are all lattice points with ``0 < r < h``.  Everything the solver
needs to recognise a "complete" support (``alpha0``, ``A0``) or to normalise
the shifting energy (``c0``, ``delta0c``) is measured on it, as is the
pressure-force scale ``beta0``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass

import numpy as np

from .kernel import KernelSpec


class CalibrationError(RuntimeError):
    pass


@dataclass(frozen=True)
class ReferenceConstants:
    alpha0: float
    A0: float
    c0: float
    delta0c: float  # magnitude; the raw lattice value is negative for decreasing omega
    beta0: float
    grad0c: tuple = (0.0, 0.0)
    lambda0: float = 1.0
    kappa0: float = 1.0

    def as_dict(self):
        return asdict(self)


def build_prototype(dimension, d0, h):
    """Lattice offsets (relative to the centre particle) with ``0 < r < h``."""
    if dimension not in (2, 3):
        raise ValueError("dimension must be 2 or 3")
    if h / d0 < 1:
        raise ValueError("h must be at least d0")
    k = int(math.ceil(h / d0))
    offsets = np.array(list(itertools.product(range(-k, k + 1), repeat=dimension)), float) * d0
    r = np.linalg.norm(offsets, axis=1)
    keep = (r > 0.0) & (r < h)
    return offsets[keep]


def _radii(proto):
    r = np.linalg.norm(proto, axis=1)
    return r, proto / r[:, None]


def compute_alpha0_A0(proto, kernel: KernelSpec):
    r, _ = _radii(proto)
    alpha0 = float(np.sum(kernel.omega(r)))
    if not alpha0 > 0:
        raise CalibrationError("prototype has no neighbors inside the support")
    A0 = 2.0 / alpha0 * float(np.sum(kernel.omega_over_r2(r)))
    return alpha0, A0


def compute_c0_delta0c(proto, kernel: KernelSpec, alpha0):
    """Raw lattice concentration and squared-gradient reference (signed)."""
    r, _ = _radii(proto)
    c0 = float(np.sum(kernel.bigW(r))) / alpha0
    delta0c = float(np.sum(kernel.omega_prime_over_r(r))) / alpha0
    return c0, delta0c


def compute_grad0c(proto, kernel: KernelSpec, alpha0):
    r, n = _radii(proto)
    return (n * kernel.omega_over_r(r)[:, None]).sum(axis=0) / alpha0


def lattice_pressure_force(proto, kernel: KernelSpec, alpha0, rho0, pressure, beta0=1.0):
    """Interior pressure-gradient term at the prototype centre.

    ``pressure`` is a callable evaluated at the lattice points (centre at the
    origin).
    """
    r, n = _radii(proto)
    p_i = float(pressure(np.zeros((1, proto.shape[1])))[0])
    p_j = np.asarray(pressure(proto), dtype=float)
    w = (2.0 / alpha0) * (p_j - p_i) * kernel.omega_over_r(r)
    return beta0 / rho0 * (w[:, None] * n).sum(axis=0)


def calibrate_beta0(proto, kernel: KernelSpec, rho0, alpha0=None):
    """Scale that makes the lattice force under ``p = x`` equal ``1/rho0``."""
    if alpha0 is None:
        alpha0, _ = compute_alpha0_A0(proto, kernel)
    computed = lattice_pressure_force(proto, kernel, alpha0, rho0, lambda x: x[:, 0])
    if abs(computed[0]) < 1e-300 or not np.isfinite(computed[0]):
        raise CalibrationError("degenerate kernel: linear pressure produces no force")
    return (1.0 / rho0) / float(np.linalg.norm(computed))


def calibrate(dimension, d0, kernel: KernelSpec, rho0=1000.0) -> ReferenceConstants:
    proto = build_prototype(dimension, d0, kernel.h)
    alpha0, A0 = compute_alpha0_A0(proto, kernel)
    c0, delta0c = compute_c0_delta0c(proto, kernel, alpha0)
    grad0c = compute_grad0c(proto, kernel, alpha0)
    if np.linalg.norm(grad0c) > 1e-9 * abs(delta0c) * d0:
        raise CalibrationError(f"prototype is not symmetric: grad c = {grad0c}")
    beta0 = calibrate_beta0(proto, kernel, rho0, alpha0)
    return ReferenceConstants(
        alpha0=alpha0,
        A0=A0,
        c0=c0,
        delta0c=abs(delta0c),
        beta0=beta0,
        grad0c=tuple(float(g) for g in grad0c),
    )
