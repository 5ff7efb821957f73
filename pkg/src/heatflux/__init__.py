"""Similarity solutions of f''' + (m+2) f f'' - (2m+1) f'^2 = 0 with
f(0) = -gamma, f''(0) = -1, f'(inf) = 0."""

from .ode_core import IvpSpec, Params, State, Trajectory, integrate, residuals, rhs

__all__ = ["IvpSpec", "Params", "State", "Trajectory", "integrate", "residuals", "rhs"]
__version__ = "0.1.0"
