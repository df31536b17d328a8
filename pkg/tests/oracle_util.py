"""Shared helpers for oracle-backed tests."""

from hybridsat.formula import bound_vars, free_vars, nominals, propositions
from hybridsat.kripke import FrameClass, VarSpace, iter_batches


def _names(*fs):
    out = []
    for f in fs:
        out += sorted(free_vars(f) | bound_vars(f))
    return list(dict.fromkeys(out))


def pointwise_equal(f, g, n, F=FrameClass.ALL):
    """f and g agree at every state, assignment and model with n states in F."""
    props = sorted(set(propositions(f)) | set(propositions(g)))
    noms = sorted(set(nominals(f)) | set(nominals(g)))
    space = VarSpace(n, _names(f, g))
    for batch, *_ in iter_batches(n, F, props, noms):
        a, b = batch.evaluate(f, space), batch.evaluate(g, space)
        if ((a ^ b) & batch.valid).any():
            return False
    return True
