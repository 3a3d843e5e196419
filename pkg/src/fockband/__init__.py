"""Spectral analysis of a four-sector block operator on a truncated Fock space."""

from .bandset import BandSet
from .channel import BranchDecomposition, ChannelAnalysis
from .determinant import CoeffMatrix, DeterminantEvaluator, DomainError, NearSingularError
from .fy import EigvecBundle, FYSolver, ReducedSystem
from .kernels import BACKEND
from .model import (
    FunctionSpec,
    ModelProblem,
    ProblemError,
    TorusGrid,
    load_problem,
    make_problem,
    parse_problem,
    preset,
    quad_integrate,
)
from .pencil import GapError, PencilSplit, RayleighResult, split_blocks

__version__ = "0.1.0"
