"""Spectral laboratory for the radial fractional Dirichlet problem on the unit ball.

Eigenpairs of (-Lap)^s + V, Poisson-kernel extensions, symmetrization
inequalities and ground states of (-Lap)^s u + lambda u = u^p, with a
verification harness for their qualitative properties.
"""

from .discretization import Params, RadialFunction, assemble, basis_function
from .eigensolver import EigenSet, qualitative_report, sign_change_count, solve
from .extension import nodal_count, poisson_extend, tail_moment
from .potentials import PotentialProfile, parse_potential
from .semilinear import GroundState, continuation_branch, ground_state

__version__ = "0.1.0"

__all__ = [
    "Params",
    "RadialFunction",
    "assemble",
    "basis_function",
    "EigenSet",
    "solve",
    "qualitative_report",
    "sign_change_count",
    "poisson_extend",
    "nodal_count",
    "tail_moment",
    "PotentialProfile",
    "parse_potential",
    "GroundState",
    "ground_state",
    "continuation_branch",
]
