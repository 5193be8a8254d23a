"""Scene geometry, ghost wall samples and neighbor search.

Signed distances follow the convention that the fluid lives where the
distance is positive; solids are the negative region.  Primitive shapes are
defined as solids (negative inside) and combined with :class:`Union` and
:class:`Complement`.  A closed tank is ``Complement(Box(lo, hi))``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np


class SignedDistanceField:
    """Base class; subclasses return ``(distance, unit_gradient)``."""

    def evaluate(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def distance(self, x):
        return self.evaluate(x)[0]

    def gradient(self, x):
        return self.evaluate(x)[1]


@dataclass(frozen=True)
class HalfSpace(SignedDistanceField):
    """Solid where ``dot(normal, x) < offset``; ``normal`` points into the fluid."""

    normal: tuple
    offset: float = 0.0

    def evaluate(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        n = np.asarray(self.normal, dtype=float)
        n = n / np.linalg.norm(n)
        d = x @ n - self.offset
        return d, np.broadcast_to(n, x.shape).copy()


@dataclass(frozen=True)
class Box(SignedDistanceField):
    """Solid axis-aligned box."""

    lo: tuple
    hi: tuple

    def evaluate(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        center = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        rel = x - center
        q = np.abs(rel) - half
        outside = np.maximum(q, 0.0)
        out_norm = np.linalg.norm(outside, axis=1)
        inside = np.minimum(q.max(axis=1), 0.0)
        d = out_norm + inside

        sign = np.where(rel >= 0.0, 1.0, -1.0)
        grad = np.zeros_like(x)
        is_out = out_norm > 0.0
        grad[is_out] = sign[is_out] * outside[is_out] / out_norm[is_out, None]
        # inside (or on the surface): gradient of the nearest face
        axis = np.argmax(q[~is_out], axis=1)
        rows = np.flatnonzero(~is_out)
        grad[rows, axis] = sign[rows, axis]
        return d, grad


@dataclass(frozen=True)
class Sphere(SignedDistanceField):
    """Solid ball (a disc in 2D)."""

    center: tuple
    radius: float

    def evaluate(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        rel = x - np.asarray(self.center, dtype=float)
        dist = np.linalg.norm(rel, axis=1)
        grad = np.zeros_like(x)
        ok = dist > 0.0
        grad[ok] = rel[ok] / dist[ok, None]
        grad[~ok, 0] = 1.0
        return dist - self.radius, grad


@dataclass(frozen=True)
class Complement(SignedDistanceField):
    inner: SignedDistanceField

    def evaluate(self, x):
        d, g = self.inner.evaluate(x)
        return -d, -g


@dataclass(frozen=True)
class Union(SignedDistanceField):
    """Union of solids: pointwise minimum of the member distances."""

    parts: tuple

    def evaluate(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if not self.parts:
            return np.full(len(x), np.inf), np.zeros_like(x)
        results = [p.evaluate(x) for p in self.parts]
        dists = np.stack([r[0] for r in results])
        grads = np.stack([r[1] for r in results])
        k = np.argmin(dists, axis=0)
        idx = np.arange(len(x))
        return dists[k, idx], grads[k, idx]


@dataclass
class GhostSolidSet:
    """Static wall samples seeded inside the solids."""

    positions: np.ndarray
    velocities: np.ndarray
    normals: np.ndarray

    def __len__(self):
        return len(self.positions)

    @classmethod
    def empty(cls, dim):
        z = np.zeros((0, dim))
        return cls(z, z.copy(), z.copy())


def lattice_points(lo, hi, d0):
    """Cell-centred lattice points ``(k + 1/2) d0`` lying inside ``[lo, hi]``."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    k_lo = np.ceil(lo / d0 - 0.5 - 1e-9).astype(int)
    k_hi = np.floor(hi / d0 - 0.5 + 1e-9).astype(int)
    axes = [(np.arange(a, b + 1) + 0.5) * d0 for a, b in zip(k_lo, k_hi)]
    if any(len(a) == 0 for a in axes):
        return np.zeros((0, len(lo)))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def seed_ghost_solids(sdf, d0, h, bounds, wall_velocity=None):
    """Seed ghost samples on the cell-centred lattice within ``h`` of the walls.

    ``bounds`` is the ``(lo, hi)`` box of the scene; the lattice is sampled over
    that box grown by ``h`` and a point is kept when ``-h <= distance < 0``.
    ``wall_velocity`` is an optional callable mapping positions to velocities.
    """
    if d0 <= 0:
        raise ValueError("d0 must be positive")
    if h < d0:
        raise ValueError("h must be at least d0")
    lo, hi = (np.asarray(b, dtype=float) for b in bounds)
    if sdf is None:
        return GhostSolidSet.empty(len(lo))
    pts = lattice_points(lo - h, hi + h, d0)
    if len(pts) == 0:
        return GhostSolidSet.empty(len(lo))
    dist, grad = sdf.evaluate(pts)
    keep = (dist >= -h) & (dist < 0.0)
    pts = pts[keep]
    normals = grad[keep]
    vel = np.zeros_like(pts) if wall_velocity is None else np.asarray(wall_velocity(pts), float)
    return GhostSolidSet(pts, vel, normals)


@dataclass
class PairList:
    """Directed pairs ``(i, j)`` with distance ``r`` and unit vector ``n``.

    ``n`` points from ``i`` to ``j``.  ``offsets`` gives CSR-style start
    indices per source particle (pairs are sorted by ``i``).
    """

    i: np.ndarray
    j: np.ndarray
    r: np.ndarray
    n: np.ndarray
    offsets: np.ndarray

    def __len__(self):
        return len(self.i)

    def of(self, i):
        return self.j[self.offsets[i] : self.offsets[i + 1]]


@dataclass
class NeighborTable:
    """Fluid-fluid pairs (both directions) and fluid-to-ghost pairs."""

    fluid: PairList
    solid: PairList
    n_particles: int

    def fluid_neighbors(self, i):
        return self.fluid.of(i)

    def solid_neighbors(self, i):
        return self.solid.of(i)

    def has_solid(self):
        return np.diff(self.solid.offsets) > 0


class _CellGrid:
    """Uniform grid of cell size ``h`` over a point set."""

    def __init__(self, points, h):
        self.points = points
        self.h = h
        dim = points.shape[1]
        if len(points):
            self.origin = points.min(axis=0)
            cells = np.floor((points - self.origin) / h).astype(np.int64)
            self.shape = cells.max(axis=0) + 1
        else:
            self.origin = np.zeros(dim)
            cells = np.zeros((0, dim), dtype=np.int64)
            self.shape = np.ones(dim, dtype=np.int64)
        self.strides = np.cumprod(np.concatenate([[1], self.shape[:-1]]))
        key = cells @ self.strides
        self.order = np.argsort(key, kind="stable")
        self.keys, first, counts = np.unique(
            key[self.order], return_index=True, return_counts=True
        )
        self.first = first
        self.counts = counts

    def candidates(self, queries):
        """All (query, point) index pairs whose cells are adjacent."""
        dim = self.points.shape[1]
        if len(queries) == 0 or len(self.points) == 0:
            e = np.zeros(0, dtype=np.int64)
            return e, e
        qcell = np.floor((queries - self.origin) / self.h).astype(np.int64)
        qs, ps = [], []
        for off in itertools.product((-1, 0, 1), repeat=dim):
            c = qcell + np.asarray(off)
            valid = np.all((c >= 0) & (c < self.shape), axis=1)
            qi = np.flatnonzero(valid)
            key = c[valid] @ self.strides
            slot = np.searchsorted(self.keys, key)
            slot = np.minimum(slot, len(self.keys) - 1)
            hit = self.keys[slot] == key
            qi, slot = qi[hit], slot[hit]
            lo = self.first[slot]
            cnt = self.counts[slot]
            total = int(cnt.sum())
            if total == 0:
                continue
            rep_q = np.repeat(qi, cnt)
            # position within each run
            run_start = np.repeat(np.cumsum(cnt) - cnt, cnt)
            within = np.arange(total) - run_start
            qs.append(rep_q)
            ps.append(self.order[np.repeat(lo, cnt) + within])
        if not qs:
            e = np.zeros(0, dtype=np.int64)
            return e, e
        return np.concatenate(qs), np.concatenate(ps)


def _pair_list(src, dst, qi, pj, h, n_src, exclude_self=False):
    d = dst[pj] - src[qi]
    r = np.sqrt(np.einsum("ij,ij->i", d, d))
    keep = r < h
    if exclude_self:
        keep &= qi != pj
    qi, pj, d, r = qi[keep], pj[keep], d[keep], r[keep]
    order = np.lexsort((pj, qi))
    qi, pj, d, r = qi[order], pj[order], d[order], r[order]
    with np.errstate(invalid="ignore", divide="ignore"):
        n = np.where(r[:, None] > 0.0, d / r[:, None], 0.0)
    offsets = np.searchsorted(qi, np.arange(n_src + 1), side="left")
    return PairList(qi, pj, r, n, offsets)


def build_neighbors(positions, ghosts: GhostSolidSet | None, h) -> NeighborTable:
    """Neighbor table using a uniform grid of cell size ``h``; keeps ``r < h``."""
    positions = np.asarray(positions, dtype=float)
    n = len(positions)
    grid = _CellGrid(positions, h)
    qi, pj = grid.candidates(positions)
    fluid = _pair_list(positions, positions, qi, pj, h, n, exclude_self=True)
    if ghosts is None or len(ghosts) == 0:
        e = np.zeros(0, dtype=np.int64)
        dim = positions.shape[1] if positions.ndim == 2 else 2
        solid = PairList(e, e, np.zeros(0), np.zeros((0, dim)), np.zeros(n + 1, dtype=np.int64))
    else:
        ggrid = _CellGrid(ghosts.positions, h)
        qi, pj = ggrid.candidates(positions)
        solid = _pair_list(positions, ghosts.positions, qi, pj, h, n)
    return NeighborTable(fluid, solid, n)


def min_neighbor_distance(table: NeighborTable, cap):
    """Per-particle distance to the closest fluid neighbor (``cap`` if none)."""
    out = np.full(table.n_particles, float(cap))
    if len(table.fluid):
        np.minimum.at(out, table.fluid.i, table.fluid.r)
    return out
