"""Bundle gerbes over finite covers: Čech data, Dixmier-Douady classes and worked examples."""

from .cech import (Cochain, CocycleError, Cover, Nerve, NerveError, Ring, SmoothCochain,
                   build_nerve, delta, is_cocycle, solve_coboundary)
from .gerbe import CechGerbe, DDClass, dd, dual, from_cocycle, is_trivial, refine, tensor, tensor_reduced
from .homology import INFINITE, ClassInfo, CohomologyGroup, bockstein, class_info, cohomology
from .intlinalg import IntMatrix, SnfResult, smith_normal_form

__version__ = "0.1.0"
