"""Variational staggered incompressible SPH in two dimensions."""

from .calibration import ReferenceConstants, calibrate
from .kernel import KernelFamily, KernelSpec, make_kernel
from .scenes import SCENES, SceneConfig, build
from .solver import ParticleState, Simulation, SolverConfig, StepFailure, StepInfo

__all__ = [
    "KernelFamily",
    "KernelSpec",
    "ParticleState",
    "ReferenceConstants",
    "SCENES",
    "SceneConfig",
    "Simulation",
    "SolverConfig",
    "StepFailure",
    "StepInfo",
    "build",
    "calibrate",
    "make_kernel",
]

__version__ = "0.1.0"
