"""
Higher-order Hamilton-Pontryagin integrators for Riemannian cubics on SO(3)
and a shooting planner for interpolation on the sphere.

Submodules: ``algebra`` (SO(3) and Cayley kernel), ``integrators`` (Euler and
Stormer-Verlet steppers), ``diagnostics`` (invariants, symplecticity,
convergence), ``planner`` (cost, adjoint gradient, descent) and ``cli``.
"""
from . import algebra, diagnostics, integrators, planner
from .errors import (DimensionMismatch, InvariantError, LieCubicsError, LineSearchFailure,
                     NonConvergence, TooShort)
from .integrators import HOHPState, StepParams, euler_step, flow, sv_step
from .planner import DescentOptions, PlanningProblem, descend, sphere_problem

__version__ = "0.1.0"
