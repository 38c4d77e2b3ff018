"""Derivation checking for the guarded relational logic."""
from .embed import EmbedError, embed_uhol
from .judgement import Ghol, Rhol, StrassenPremise, Uhol, as_ghol, from_syntax, pretty_judgement
from .kernel import Failure, Kernel, Report, RuleError, check_proof, check_script
from .rules import ARITY, RULES, register
from .semantic import SemanticFailure, soundness_probe

__all__ = [
    "ARITY", "EmbedError", "Failure", "Ghol", "Kernel", "RULES", "Report", "Rhol", "RuleError",
    "SemanticFailure", "StrassenPremise", "Uhol", "as_ghol", "check_proof", "check_script", "embed_uhol",
    "from_syntax", "pretty_judgement", "register", "soundness_probe",
]
