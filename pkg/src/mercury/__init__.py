"""Modeling and parameterized verification of distributed agreement-based
systems: a Mercury-language frontend, counter-system verification backend,
and unbounded-n coverability checker."""

__version__ = "0.1.0"

from .analysis import CutoffResult, compose_cutoff
from .core import lower_to_core
from .diagnostics import Diagnostic, MercuryError, Severity
from .gsp import GspAction, GspSystem, alpha, counter_step, rewrite
from .localts import LocalTS, build_local_ts
from .oracle import Oracle, reachable_indexed
from .parser import parse_program
from .phasing import PhaseResult, compute_phases
from .specs import eval_spec, parse_spec_file
from .validate import frontend_check
from .verify import PipelineResult, Verdict, verify, verify_parameterized
from .wsts import CoverResult, coverable

__all__ = [
    "CutoffResult", "compose_cutoff", "lower_to_core", "Diagnostic",
    "MercuryError", "Severity", "GspAction", "GspSystem", "alpha",
    "counter_step", "rewrite", "LocalTS", "build_local_ts", "Oracle",
    "reachable_indexed", "parse_program", "PhaseResult", "compute_phases",
    "eval_spec", "parse_spec_file", "frontend_check", "PipelineResult",
    "Verdict", "verify", "verify_parameterized", "CoverResult", "coverable",
]
