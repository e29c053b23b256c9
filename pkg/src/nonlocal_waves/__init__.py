"""Pseudo-spectral solvers for nonlocal shallow-water type equations."""

from .domain import (
    Field,
    Grid,
    GridKind,
    NonFiniteError,
    deriv,
    dx_helmholtz_inverse,
    helmholtz_inverse,
    kernel_samples,
    make_grid,
)
from .models import ModelId, ModelSpec, State
from .stepper import BlowUpError, StepControl, Trajectory, integrate, rk4_step

__version__ = "0.1.0"

__all__ = [
    "BlowUpError",
    "Field",
    "Grid",
    "GridKind",
    "ModelId",
    "ModelSpec",
    "NonFiniteError",
    "State",
    "StepControl",
    "Trajectory",
    "deriv",
    "dx_helmholtz_inverse",
    "helmholtz_inverse",
    "integrate",
    "kernel_samples",
    "make_grid",
    "rk4_step",
]
