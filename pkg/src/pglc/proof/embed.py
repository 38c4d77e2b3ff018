"""Combining two unary derivations into a relational one."""
from __future__ import annotations

from typing import Tuple

from ..surface import ast as A
from ..surface.parser import ProofNode
from .judgement import R, R1, R2, Rhol, Uhol


class EmbedError(ValueError):
    pass


def embed_uhol(left: Tuple[Uhol, ProofNode], right: Tuple[Uhol, ProofNode]) -> Tuple[Rhol, ProofNode]:
    (j1, p1), (j2, p2) = left, right
    if j1.ctx != j2.ctx:
        raise EmbedError("the two unary judgements have different contexts")
    phi = A.And(A.subst(j1.phi, {R: A.Var(R1)}), A.subst(j2.phi, {R: A.Var(R2)}))
    goal = Rhol(j1.ctx, j1.term, j1.ty, j2.term, j2.ty, phi)
    root = ProofNode("CONJ", {}, [ProofNode("UHOL_L", {}, [p1]), ProofNode("UHOL_R", {}, [p2])])
    return goal, root
