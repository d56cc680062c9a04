"""Systems of SDEs: model language, validation and induced graphs."""

from .expr import ExprError
from .parser import parse_model, print_model, tokenize
from .system import (Diagnostic, Dist, DriverSpec, ModelError, ProcessSpec,
                     SdeSystem, SolvabilityReport, UnsolvableError,
                     check_unique_solvability, graph_of_sdes, induced_dscm_graph,
                     init_node, intervene_sde, validate)

__all__ = [
    "Diagnostic", "Dist", "DriverSpec", "ExprError", "ModelError", "ProcessSpec",
    "SdeSystem", "SolvabilityReport", "UnsolvableError", "check_unique_solvability",
    "graph_of_sdes", "induced_dscm_graph", "init_node", "intervene_sde",
    "parse_model", "print_model", "tokenize", "validate",
]
