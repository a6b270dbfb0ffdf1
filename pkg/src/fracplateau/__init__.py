"""Fractional nonparametric Plateau problem with obstacles.

Modules
-------
kernel       kernel profiles g, G, GG, Gbar and their constants
domain       base interval, obstacle, exterior data, grids, tail integral
functional   discrete truncated area functional and its derivatives
solver       obstacle-constrained minimization with optimality certificate
geometry     fractional perimeter, curvature and mass at infinity of planar sets
experiments  s-sweeps, reports and configuration
"""

__version__ = "0.1.0"

from .kernel import KernelSpec
from .domain import Domain1D, ExteriorData, Grid1D, ObstacleSpec, PsiSpec
from .functional import EnergyBreakdown, Functional, ScalarField
from .solver import ObstacleProblem, SolveReport, project, solve

__all__ = ["KernelSpec", "Domain1D", "ExteriorData", "Grid1D", "ObstacleSpec", "PsiSpec",
           "EnergyBreakdown", "Functional", "ScalarField", "ObstacleProblem", "SolveReport",
           "project", "solve", "__version__"]
