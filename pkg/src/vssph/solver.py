"""Time stepping for the staggered incompressible particle solver.

One step, in order:

1. CFL time step and neighbor search at ``x^t``.
2. ``v* = xsph(v) + dt g`` and ``x* = x + dt v*``.
3. Particle shifting of ``x*``.
4. Weights, classification, pressure solve with the wall and ECS sources.
5. ``v^{t+dt} = v* - dt G`` and ``x^{t+dt} = x*_shifted + dt (v^{t+dt} - v*)``.

The last position update moves particles with the projected instead of the
predicted velocity.  Without it a resting column sinks by ``g dt^2`` per step.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .calibration import ReferenceConstants
from .classification import CLASS_RTOL, boundary_weights, compute_alpha_hat
from .forces import WallCondition, cfl_dt, pair_wall_delta_v, pressure_force, xsph_viscosity
from .geometry import GhostSolidSet, build_neighbors, min_neighbor_distance
from .kernel import KernelSpec
from .ppe import (
    PressureSolveError,
    assemble,
    compute_ecs,
    compute_source,
    enforce_compatibility,
    solve_pressure,
)
from .shifting import ShiftConfig, concentration, shift_particles

log = logging.getLogger(__name__)


class StepFailure(RuntimeError):
    """A step produced non-finite data; ``dump`` holds the offending arrays."""

    def __init__(self, message, dump=None):
        super().__init__(message)
        self.dump = dump or {}


@dataclass(frozen=True)
class SolverConfig:
    rho0: float = 1000.0
    gravity: tuple = (0.0, -9.8)
    cfl_factor: float = 0.4
    xsph_eps: float = 0.2
    dt_max: float = 1e-3
    eta0_coeff: float = 1e-3
    cg_max_iter: int = 500
    warm_start: bool = False
    ecs: bool = True
    class_tolerance: float = CLASS_RTOL

    def __post_init__(self):
        if not 0 <= self.class_tolerance < 1:
            raise ValueError("class_tolerance must lie in [0, 1)")
        if not self.rho0 > 0:
            raise ValueError("rho0 must be positive")
        if not 0 < self.cfl_factor <= 1:
            raise ValueError("cfl_factor must lie in (0, 1]")
        if not self.dt_max > 0:
            raise ValueError("dt_max must be positive")
        if not self.eta0_coeff > 0:
            raise ValueError("eta0_coeff must be positive")
        if self.cg_max_iter < 1:
            raise ValueError("cg_max_iter must be at least 1")
        if not 0 <= self.xsph_eps <= 1:
            raise ValueError("xsph_eps must lie in [0, 1]")


@dataclass
class ParticleState:
    """Structure-of-arrays fluid state."""

    positions: np.ndarray
    velocities: np.ndarray
    pressure: np.ndarray = None
    classes: np.ndarray = None
    concentration: np.ndarray = None  # c_i / c0
    source: np.ndarray = None  # D of the last solve, feeds the ECS term
    t: float = 0.0
    step: int = 0

    def __post_init__(self):
        self.positions = np.array(self.positions, dtype=float)
        self.velocities = np.array(self.velocities, dtype=float)
        n = len(self.positions)
        if self.velocities.shape != self.positions.shape:
            raise ValueError("positions and velocities must have the same shape")
        if self.pressure is None:
            self.pressure = np.zeros(n)
        if self.classes is None:
            self.classes = np.zeros(n, dtype=np.int8)
        if self.concentration is None:
            self.concentration = np.ones(n)
        if self.source is None:
            self.source = np.zeros(n)

    @property
    def n(self):
        return len(self.positions)

    def copy(self):
        return replace(
            self,
            positions=self.positions.copy(),
            velocities=self.velocities.copy(),
            pressure=self.pressure.copy(),
            classes=self.classes.copy(),
            concentration=self.concentration.copy(),
            source=self.source.copy(),
        )


@dataclass
class StepInfo:
    step: int
    t: float
    dt: float
    cg_iterations: int
    eta: float
    xi: list
    d_bar: float
    p_min: float
    p_max: float
    momentum_drift: float
    volume_proxy: float
    residual_norms: list = field(default_factory=list)


@dataclass
class Simulation:
    """Everything a step needs besides the particle state."""

    kernel: KernelSpec
    consts: ReferenceConstants
    config: SolverConfig
    wall: WallCondition
    shift: ShiftConfig
    ghosts: GhostSolidSet
    sdf: object
    d0: float
    state: ParticleState
    _cache: tuple | None = None  # (positions array, neighbor table at those positions)

    def neighbors(self, positions):
        return build_neighbors(positions, self.ghosts, self.kernel.h)

    def step(self, dt=None):
        info = advance(self, dt)
        return info

    def run(self, steps=None, t_end=None, callback=None):
        """Advance until ``steps`` steps or simulated time ``t_end``."""
        if steps is None and t_end is None:
            raise ValueError("give steps or t_end")
        infos = []
        while True:
            if steps is not None and len(infos) >= steps:
                break
            if t_end is not None and self.state.t >= t_end - 1e-12:
                break
            dt = None
            if t_end is not None:
                dt = min(self._next_dt(), t_end - self.state.t)
            info = self.step(dt)
            infos.append(info)
            if callback is not None:
                callback(self, info)
        return infos

    def _next_dt(self):
        v = self.state.velocities
        vmax = float(np.max(np.linalg.norm(v, axis=1))) if len(v) else 0.0
        return cfl_dt(vmax, self.kernel.h, self.config.cfl_factor, self.config.dt_max)


def _check_finite(state: ParticleState, where):
    for name in ("positions", "velocities", "pressure"):
        a = getattr(state, name)
        if not np.all(np.isfinite(a)):
            raise StepFailure(f"non-finite {name} after {where}", dump={"state": state})


def advance(sim: Simulation, dt=None) -> StepInfo:
    """One step of the scheme; mutates ``sim.state`` and returns metrics."""
    cfg = sim.config
    st = sim.state
    kernel = sim.kernel
    consts = sim.consts
    n = st.n
    dim = st.positions.shape[1] if n else len(cfg.gravity)
    gravity = np.asarray(cfg.gravity, dtype=float)[:dim]

    if dt is None:
        dt = sim._next_dt()
    if not dt > 0:
        raise ValueError(f"time step must be positive, got {dt}")
    _check_finite(st, f"input of step {st.step + 1}")

    if sim._cache is not None and sim._cache[0] is st.positions:
        table = sim._cache[1]
    else:
        table = sim.neighbors(st.positions)
    alpha_hat = compute_alpha_hat(table, kernel, consts.alpha0)
    rho_rel = concentration(table, kernel, alpha_hat) / consts.c0

    v_old = st.velocities
    v_star = xsph_viscosity(table, v_old, kernel, alpha_hat, cfg.xsph_eps) + dt * gravity
    x_star = st.positions + dt * v_star

    shifted = shift_particles(x_star, sim.ghosts, sim.sdf, kernel, consts, sim.shift)
    x_s = shifted.positions

    table = sim.neighbors(x_s)
    weights = boundary_weights(table, kernel, consts.alpha0, consts.A0, cfg.class_tolerance)
    wall_dv = pair_wall_delta_v(table, sim.ghosts, v_star, sim.wall)
    D = compute_source(table, weights, kernel, v_star, wall_dv, dt)
    src = D + compute_ecs(rho_rel, st.source) if cfg.ecs else D

    system = assemble(table, weights, kernel, cfg.rho0)
    rhs = enforce_compatibility(system, -src)
    p0 = st.pressure if cfg.warm_start and len(st.pressure) == n else None
    try:
        cg = solve_pressure(system, rhs, p0=p0, eta0=cfg.eta0_coeff / dt**2,
                            max_iter=cfg.cg_max_iter)
    except PressureSolveError as exc:
        raise StepFailure(f"pressure solve failed at step {st.step}: {exc}",
                          dump={"state": st, **exc.dump}) from exc
    p = cg.pressure

    G = pressure_force(table, weights, kernel, p, wall_dv, consts.beta0, cfg.rho0, dt)
    v_new = v_star - dt * G
    x_new = x_s + dt * (v_new - v_star)

    st.positions = x_new
    st.velocities = v_new
    st.pressure = p
    st.classes = weights.classes
    st.source = D
    st.t += dt
    st.step += 1
    _check_finite(st, f"step {st.step}")

    end_table = sim.neighbors(x_new)
    sim._cache = (x_new, end_table)
    end_alpha = compute_alpha_hat(end_table, kernel, consts.alpha0)
    st.concentration = concentration(end_table, kernel, end_alpha) / consts.c0

    d_bar = float(np.mean(min_neighbor_distance(end_table, kernel.h))) if n else 0.0
    drift = float(np.linalg.norm(v_new.sum(axis=0) - v_old.sum(axis=0)) / max(n, 1))
    return StepInfo(
        step=st.step,
        t=st.t,
        dt=dt,
        cg_iterations=cg.iterations,
        eta=cg.eta,
        xi=list(shifted.xi),
        d_bar=d_bar,
        p_min=float(p.min()) if n else 0.0,
        p_max=float(p.max()) if n else 0.0,
        momentum_drift=drift,
        volume_proxy=float(st.concentration.mean()) if n else 0.0,
        residual_norms=list(cg.residual_norms),
    )
