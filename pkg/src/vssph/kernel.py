"""Pair weighting functions.

Every operator in the solver is written in terms of a pair weight
``omega(r)`` with compact support ``h``.  The families below differ only in
the shape of ``omega``; their overall scale is irrelevant because all sums are
normalized by the particle weight ``alpha = sum(omega)``.

Families
--------
PROPOSED_QUARTIC
    ``omega = 1 - q**4`` with ``q = r/h``.  Positive at the origin, which is
    what keeps the stability indicator positive everywhere.
CUBIC_SPLINE, CLASSIC_QUARTIC
    The M4 / M5 B-splines ``W`` rescaled to support ``h`` and turned into
    pair weights through ``omega = -r dW/dr``.  ``W(0) = 1``.
WENDLAND_C2
    ``W = (1-q)**3 (1+3q)`` and ``omega = 12 q**2 (1-q)**2``.

The clamped quotients ``omega/r`` and ``omega/r**2`` replace ``r`` by the
threshold ``delta`` whenever ``r <= delta`` so that close pairs cannot blow up.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property

import numpy as np


class KernelFamily(str, enum.Enum):
    PROPOSED_QUARTIC = "proposed_quartic"
    CUBIC_SPLINE = "cubic_spline"
    WENDLAND_C2 = "wendland_c2"
    CLASSIC_QUARTIC = "classic_quartic"


# M5 quartic spline on s in [0, 2.5): sum of a * (b - s)^4, active for s < b
_M5_TERMS = ((1.0, 2.5), (-5.0, 1.5), (10.0, 0.5))


def _m5_power_sum(s, power):
    out = np.zeros_like(s)
    for a, b in _M5_TERMS:
        out += a * np.clip(b - s, 0.0, None) ** power
    return out


def _omega_q(family: KernelFamily, q: np.ndarray) -> np.ndarray:
    """Pair weight as a function of q = r/h, valid on [0, 1)."""
    if family is KernelFamily.PROPOSED_QUARTIC:
        return 1.0 - q**4
    if family is KernelFamily.WENDLAND_C2:
        return 12.0 * q**2 * (1.0 - q) ** 2
    if family is KernelFamily.CUBIC_SPLINE:
        s = 2.0 * q
        inner = 3.0 * s**2 - 2.25 * s**3
        outer = 0.75 * s * (2.0 - s) ** 2
        return np.where(s < 1.0, inner, outer)
    if family is KernelFamily.CLASSIC_QUARTIC:
        s = 2.5 * q
        # W(0) of the raw M5 spline is 2.5^4 - 5*1.5^4 + 10*0.5^4 = 14.375
        return 4.0 * s * _m5_power_sum(s, 3) / 14.375
    raise ValueError(f"unknown kernel family {family!r}")


def _domega_dq(family: KernelFamily, q: np.ndarray) -> np.ndarray:
    if family is KernelFamily.PROPOSED_QUARTIC:
        return -4.0 * q**3
    if family is KernelFamily.WENDLAND_C2:
        return 24.0 * q * (1.0 - q) * (1.0 - 2.0 * q)
    if family is KernelFamily.CUBIC_SPLINE:
        s = 2.0 * q
        inner = 6.0 * s - 6.75 * s**2
        outer = 0.75 * (2.0 - s) * (2.0 - 3.0 * s)
        return 2.0 * np.where(s < 1.0, inner, outer)
    if family is KernelFamily.CLASSIC_QUARTIC:
        s = 2.5 * q
        d = 4.0 * (_m5_power_sum(s, 3) - 3.0 * s * _m5_power_sum(s, 2)) / 14.375
        return 2.5 * d
    raise ValueError(f"unknown kernel family {family!r}")


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family with smoothing radius ``h`` and clamp threshold ``delta``.

    ``table_size`` is the number of tabulation nodes per segment used for the
    integrated weight :meth:`bigW` (segments are ``[0, delta]`` and
    ``[delta, h]``).
    """

    family: KernelFamily
    h: float
    delta: float
    table_size: int = 8192

    def __post_init__(self):
        object.__setattr__(self, "family", KernelFamily(self.family))
        if not self.h > 0:
            raise ValueError(f"smoothing radius must be positive, got h={self.h}")
        if not 0 < self.delta < self.h:
            raise ValueError(f"clamp threshold must satisfy 0 < delta < h, got {self.delta}")
        if self.table_size < 2:
            raise ValueError("table_size must be at least 2")

    def omega(self, r):
        r = np.asarray(r, dtype=float)
        q = r / self.h
        return np.where(q < 1.0, _omega_q(self.family, np.minimum(q, 1.0)), 0.0)

    def omega_prime(self, r):
        """d omega / dr."""
        r = np.asarray(r, dtype=float)
        q = r / self.h
        return np.where(q < 1.0, _domega_dq(self.family, np.minimum(q, 1.0)) / self.h, 0.0)

    def omega_over_r(self, r):
        r = np.asarray(r, dtype=float)
        return self.omega(r) / np.maximum(r, self.delta)

    def omega_over_r2(self, r):
        r = np.asarray(r, dtype=float)
        return self.omega(r) / np.maximum(r, self.delta) ** 2

    def omega_prime_over_r(self, r):
        r = np.asarray(r, dtype=float)
        return self.omega_prime(r) / np.maximum(r, self.delta)

    def stability_indicator(self, r):
        """``omega/r**2 - omega'/r`` without clamping.

        Negative values flag radii where pairs are prone to clumping under
        compression.  ``r`` must lie in ``(0, h]``.
        """
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0.0):
            raise ValueError("stability indicator is singular at r = 0")
        if np.any(r > self.h):
            raise ValueError("stability indicator is only defined on (0, h]")
        q = r / self.h
        om = _omega_q(self.family, q)
        dom = _domega_dq(self.family, q) / self.h
        return om / r**2 - dom / r

    @cached_property
    def _bigw_table(self):
        n = self.table_size
        r = np.concatenate(
            [np.linspace(0.0, self.delta, n), np.linspace(self.delta, self.h, n)[1:]]
        )
        f = self.omega_over_r(r)
        # integrate from h down to r
        seg = 0.5 * (f[1:] + f[:-1]) * np.diff(r)
        tail = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])
        return r, tail

    def bigW(self, r):
        """Integrated weight ``W(r) = int_r^h omega_over_r(s) ds``.

        Nonincreasing, zero at ``h`` and finite at the origin.  Tabulated once
        and linearly interpolated.
        """
        grid, values = self._bigw_table
        return np.interp(np.asarray(r, dtype=float), grid, values, right=0.0)


def make_kernel(family="proposed_quartic", d0=1.0, h_ratio=2.5, delta=None, table_size=8192):
    """Kernel with ``h = h_ratio * d0`` and ``delta`` defaulting to ``d0``."""
    return KernelSpec(
        KernelFamily(family),
        h=h_ratio * d0,
        delta=d0 if delta is None else delta,
        table_size=table_size,
    )


def stability_table(spec: KernelSpec, n: int = 10_000):
    """Sample the stability indicator on ``n`` points over ``(0, h]``."""
    r = np.linspace(spec.h / n, spec.h, n)
    return r, spec.stability_indicator(r)
