"""Scene configuration and the built-in 2D scenarios.

Geometry is given as axis-aligned boxes (fluid blocks, solid blocks and an
optional closed container), discs and half-spaces.  Fluid blocks are filled
with the cell-centred lattice ``(k + 1/2) d0`` so that, like the ghost
samples, no particle sits on a wall.

Default parameterizations
-------------------------
hydrostatic
    Tank of width ``20 d0``; column of the requested height; no-slip walls.
dambreak
    ``0.8 x 0.6`` m tank with a ``0.2 x 0.4`` m column in the left corner.
taylor_green
    Walled unit box, ``u = U sin(pi x) cos(pi y)``, ``v = -U cos(pi x) sin(pi y)``.
    Free-slip walls since the field has no normal flow through them.
rotating_square
    Square patch of side ``0.4`` m in rigid rotation ``v = Omega e_z x (x - x_c)``;
    no walls, no gravity.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .calibration import calibrate
from .classification import CLASS_RTOL
from .forces import WallCondition
from .geometry import (
    Box,
    Complement,
    GhostSolidSet,
    HalfSpace,
    Sphere,
    Union,
    lattice_points,
    seed_ghost_solids,
)
from .kernel import make_kernel
from .shifting import ShiftConfig
from .solver import ParticleState, Simulation, SolverConfig

VELOCITY_FIELDS = ("zero", "taylor_green", "rigid_rotation")


@dataclass
class SceneConfig:
    name: str = "custom"
    d0: float = 0.01
    h_ratio: float = 2.5
    kernel: str = "proposed_quartic"
    delta: float | None = None  # defaults to d0
    bigw_resolution: int = 8192
    container: tuple | None = None  # (lo, hi) of a closed tank
    domain: tuple | None = None  # (lo, hi) used for ghost seeding bounds
    fluid_boxes: list = field(default_factory=list)
    solid_boxes: list = field(default_factory=list)
    solid_spheres: list = field(default_factory=list)  # (center, radius)
    half_spaces: list = field(default_factory=list)  # (normal, offset)
    rho0: float = 1000.0
    gravity: tuple = (0.0, -9.8)
    cn: float = 1.0
    ct: float = 1.0
    kappa: float = 0.0
    lam: float = 1.0
    shift_iterations: int = 10
    cfl: float = 0.4
    dt_max: float = 1e-3
    xsph_eps: float = 0.2
    eta0_coeff: float = 1e-3
    cg_max_iter: int = 500
    warm_start: bool = False
    ecs: bool = True
    class_tolerance: float = CLASS_RTOL
    frame_interval: float = 0.02
    total_time: float = 1.0
    seed: int = 0
    epsilon: float = 0.0
    velocity_field: str = "zero"
    velocity_scale: float = 0.0

    def __post_init__(self):
        if not self.d0 > 0:
            raise ValueError("d0 must be positive")
        if self.h_ratio < 1:
            raise ValueError("h_ratio must be at least 1")
        if self.velocity_field not in VELOCITY_FIELDS:
            raise ValueError(f"velocity_field must be one of {VELOCITY_FIELDS}")
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if not self.fluid_boxes:
            raise ValueError("scene has no fluid")
        # parameter ranges are checked by the config objects below
        self.kernel_spec()
        self.wall_condition()
        self.shift_config()
        self.solver_config()

    def solver_config(self):
        return SolverConfig(
            rho0=self.rho0,
            gravity=tuple(self.gravity),
            cfl_factor=self.cfl,
            xsph_eps=self.xsph_eps,
            dt_max=self.dt_max,
            eta0_coeff=self.eta0_coeff,
            cg_max_iter=self.cg_max_iter,
            warm_start=self.warm_start,
            ecs=self.ecs,
            class_tolerance=self.class_tolerance,
        )

    def wall_condition(self):
        return WallCondition(self.cn, self.ct)

    def shift_config(self):
        return ShiftConfig(self.kappa, self.lam, self.shift_iterations, self.d0)

    def kernel_spec(self):
        return make_kernel(self.kernel, self.d0, self.h_ratio, self.delta, self.bigw_resolution)

    def sdf(self):
        parts = [Box(tuple(lo), tuple(hi)) for lo, hi in self.solid_boxes]
        parts += [Sphere(tuple(c), float(r)) for c, r in self.solid_spheres]
        parts += [HalfSpace(tuple(nrm), float(off)) for nrm, off in self.half_spaces]
        if self.container is not None:
            lo, hi = self.container
            parts.append(Complement(Box(tuple(lo), tuple(hi))))
        if not parts:
            return None
        return parts[0] if len(parts) == 1 else Union(tuple(parts))

    def bounds(self):
        boxes = list(self.fluid_boxes) + list(self.solid_boxes)
        for box in (self.container, self.domain):
            if box is not None:
                boxes.append(box)
        lo = np.min([np.asarray(b[0], float) for b in boxes], axis=0)
        hi = np.max([np.asarray(b[1], float) for b in boxes], axis=0)
        return lo, hi


def _initial_velocity(cfg: SceneConfig, x):
    U = cfg.velocity_scale
    if cfg.velocity_field == "zero":
        return np.zeros_like(x)
    if cfg.velocity_field == "taylor_green":
        u = U * np.sin(np.pi * x[:, 0]) * np.cos(np.pi * x[:, 1])
        v = -U * np.cos(np.pi * x[:, 0]) * np.sin(np.pi * x[:, 1])
        return np.stack([u, v], axis=1)
    center = x.mean(axis=0)
    rel = x - center
    return U * np.stack([-rel[:, 1], rel[:, 0]], axis=1)


def fluid_positions(cfg: SceneConfig, sdf=None):
    """Lattice-filled fluid blocks, optionally perturbed by up to ``epsilon d0``."""
    pts = [lattice_points(lo, hi, cfg.d0) for lo, hi in cfg.fluid_boxes]
    x = np.unique(np.concatenate(pts), axis=0)
    if sdf is not None:
        dist = sdf.distance(x)
        if np.any(dist <= 0.0):
            raise ValueError("fluid and solid regions overlap")
    if cfg.epsilon > 0:
        rng = np.random.default_rng(cfg.seed)
        theta = rng.uniform(0.0, 2.0 * np.pi, len(x))
        mag = rng.uniform(0.0, cfg.epsilon * cfg.d0, len(x))
        x = x + mag[:, None] * np.stack([np.cos(theta), np.sin(theta)], axis=1)
    return x


def build(cfg: SceneConfig) -> Simulation:
    """Calibrate, seed ghosts and fill the fluid for a scene."""
    kernel = cfg.kernel_spec()
    consts = calibrate(2, cfg.d0, kernel, cfg.rho0)
    sdf = cfg.sdf()
    lo, hi = cfg.bounds()
    ghosts = seed_ghost_solids(sdf, cfg.d0, kernel.h, (lo, hi)) if sdf else GhostSolidSet.empty(2)
    x = fluid_positions(cfg, sdf)
    v = _initial_velocity(cfg, x)
    return Simulation(
        kernel=kernel,
        consts=consts,
        config=cfg.solver_config(),
        wall=cfg.wall_condition(),
        shift=cfg.shift_config(),
        ghosts=ghosts,
        sdf=sdf,
        d0=cfg.d0,
        state=ParticleState(x, v),
    )


def hydrostatic_config(height_cells=20, d0=0.01, width_cells=20, epsilon=0.0, **overrides):
    H = height_cells * d0
    W = width_cells * d0
    cfg = SceneConfig(
        name="hydrostatic",
        d0=d0,
        container=((0.0, 0.0), (W, H + 10 * d0)),
        fluid_boxes=[((0.0, 0.0), (W, H))],
        cn=1.0,
        ct=1.0,
        shift_iterations=0,
        dt_max=2e-3,
        eta0_coeff=1e-7,
        warm_start=True,
        total_time=1.5,
        epsilon=epsilon,
    )
    return replace(cfg, **overrides) if overrides else cfg


def dambreak_config(d0=0.01, cn=0.2, ct=0.0, kappa=0.1, **overrides):
    cfg = SceneConfig(
        name="dambreak",
        d0=d0,
        container=((0.0, 0.0), (0.8, 0.6)),
        fluid_boxes=[((0.0, 0.0), (0.2, 0.4))],
        cn=cn,
        ct=ct,
        kappa=kappa,
        dt_max=2e-3,
        eta0_coeff=1e-6,
        total_time=2.0,
    )
    return replace(cfg, **overrides) if overrides else cfg


def taylor_green_config(d0=0.025, U=1.0, **overrides):
    cfg = SceneConfig(
        name="taylor_green",
        d0=d0,
        container=((0.0, 0.0), (1.0, 1.0)),
        fluid_boxes=[((0.0, 0.0), (1.0, 1.0))],
        gravity=(0.0, 0.0),
        cn=1.0,
        ct=0.0,
        kappa=0.0,
        velocity_field="taylor_green",
        velocity_scale=U,
        total_time=0.4,
    )
    return replace(cfg, **overrides) if overrides else cfg


def rotating_square_config(d0=0.01, omega=1.0, side=0.4, **overrides):
    cfg = SceneConfig(
        name="rotating_square",
        d0=d0,
        fluid_boxes=[((0.0, 0.0), (side, side))],
        gravity=(0.0, 0.0),
        kappa=0.0,
        velocity_field="rigid_rotation",
        velocity_scale=omega,
        total_time=2.0,
    )
    return replace(cfg, **overrides) if overrides else cfg


def build_hydrostatic(height_cells=20, d0=0.01, **kw):
    return build(hydrostatic_config(height_cells, d0, **kw))


def build_dambreak_2d(d0=0.01, cn=0.2, ct=0.0, kappa=0.1, **kw):
    return build(dambreak_config(d0, cn, ct, kappa, **kw))


def build_taylor_green(d0=0.025, U=1.0, **kw):
    return build(taylor_green_config(d0, U, **kw))


def build_rotating_square(d0=0.01, omega=1.0, **kw):
    return build(rotating_square_config(d0, omega, **kw))


SCENES = {
    "hydrostatic": hydrostatic_config,
    "dambreak": dambreak_config,
    "taylor_green": taylor_green_config,
    "rotating_square": rotating_square_config,
}


def bottom_pressure(sim: Simulation, margin_cells=3):
    """Bottom pressure of a resting column from a linear fit ``p(y)``.

    Uses particles at least ``margin_cells`` cells from the side walls and
    below mid-depth, extrapolated to ``y = 0``.
    """
    x = sim.state.positions
    p = sim.state.pressure
    lo, hi = x[:, 0].min(), x[:, 0].max()
    m = margin_cells * sim.d0
    ymax = x[:, 1].max()
    sel = (x[:, 0] > lo + m) & (x[:, 0] < hi - m) & (x[:, 1] < 0.5 * ymax)
    slope, intercept = np.polyfit(x[sel, 1], p[sel], 1)
    return float(intercept)
