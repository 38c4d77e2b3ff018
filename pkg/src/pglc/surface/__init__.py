"""Concrete syntax: AST, parser and pretty-printer."""
from .ast import *  # noqa: F401,F403
from .lexer import PglcSyntaxError
from .parser import (ProofNode, ProofScript, JudgementSyntax, Ctx, Hint, InstValue,
                     parse_program, parse_term, parse_type, parse_formula, parse_judgement,
                     parse_proof, prelude_source)
from .pretty import (pretty, pretty_type, pretty_formula, pretty_program, pretty_judgement,
                     pretty_proof, pretty_decl)
