"""Return probabilities of finite-range random walks on free products of Z/2 and Z.

The package builds the finite algebraic system satisfied by restricted
first-passage generating functions, analyses its dependency digraph, and
locates the radius of convergence as the fold of the associated curve.
"""
from .group_tree import IDENTITY, GroupSpec, Word
from .walk_kernel import StepMeasure, MeasureError, period
from .xi_psi import PsiSystem, build_psi
from .cavern import CavernTree, build_cavern, cavern_of_path
from .digraph import build_digraph, condense, grading
from .curve import find_R, tangent_at_R, second_derivative, leading_constant, GreenStructure
from .config import ConfigError, RunConfig, load_config, parse_config, dump_config

__all__ = [
    "IDENTITY", "GroupSpec", "Word", "StepMeasure", "MeasureError", "period",
    "PsiSystem", "build_psi", "CavernTree", "build_cavern", "cavern_of_path",
    "build_digraph", "condense", "grading", "find_R", "tangent_at_R",
    "second_derivative", "leading_constant", "GreenStructure",
    "ConfigError", "RunConfig", "load_config", "parse_config", "dump_config",
]
__version__ = "0.1.0"
