"""Translator and verification toolkit for mini-gringo logic programs:
Clark completion and ordered completion (order-predicate and level-mapping
variants), prover problem emission, and a finite-domain stable-model oracle.
"""

from .completion import completion, completion_parts, is_tight
from .fol import evaluate, extend_standard, format_formula, parse_spec
from .ground import (
    default_domain,
    is_stable,
    is_supported,
    is_well_supported,
    stable_models,
    values,
)
from .ordered import OcConfig, axioms, oc_def, ordered_completion
from .simplify import simplify_formula
from .syntax import parse_program, precomputed_compare
from .tau_star import tau_star_program, tau_star_rule
from .tptp import emit_tptp, run_verify

__version__ = "0.1.0"

__all__ = [
    "OcConfig",
    "axioms",
    "completion",
    "completion_parts",
    "default_domain",
    "emit_tptp",
    "evaluate",
    "extend_standard",
    "format_formula",
    "is_stable",
    "is_supported",
    "is_tight",
    "is_well_supported",
    "oc_def",
    "ordered_completion",
    "parse_program",
    "parse_spec",
    "precomputed_compare",
    "run_verify",
    "simplify_formula",
    "stable_models",
    "tau_star_program",
    "tau_star_rule",
    "values",
    "__version__",
]
