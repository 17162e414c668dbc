"""Separations, tree amalgamations and processes of splittings of graphs.

The modules build on each other:

* ``graph_core``: finite and lazily explored graphs, balls, components,
  group actions given by generators.
* ``separation``: finite-order separations, the two semiring operations,
  tight separations and decomposition into tight ones.
* ``tree_decomp``: tree-decompositions, invariance, compressible edges,
  contraction and size sequences.
* ``tree_amalg``: tree amalgamations of finite graphs, their identification
  classes and whether they respect the declared actions.
* ``splitting``: factorisations and processes of splittings.
* ``io`` and ``cli``: JSON documents, DOT export and the command line.
"""

from .errors import (
    AccessibilityError,
    BudgetError,
    DomainError,
    NotGeneratedError,
    OracleError,
    ParseError,
    ResolutionError,
    SpecError,
)
from .graph_core import FiniteGraph, GroupAction, ball, family
from .separation import Separation, decompose_into_tight, enumerate_tight, plus, times
from .splitting import run_process, split_step
from .tree_amalg import AmalgamSpec, classify_type, construct_amalgam
from .tree_decomp import TreeDecomposition, size_sequence, validate_td

__version__ = "0.1.0"

__all__ = [
    "AccessibilityError", "AmalgamSpec", "BudgetError", "DomainError", "FiniteGraph", "GroupAction",
    "NotGeneratedError", "OracleError", "ParseError", "ResolutionError", "Separation", "SpecError",
    "TreeDecomposition", "ball", "classify_type", "construct_amalgam", "decompose_into_tight",
    "enumerate_tight", "family", "plus", "run_process", "size_sequence", "split_step", "times",
    "validate_td",
]
