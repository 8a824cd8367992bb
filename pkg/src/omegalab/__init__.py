"""Proof kernel, cut elimination, bounded omega-rule engine and a finite
lattice laboratory for parameter-free second-order intuitionistic logic."""

from .formulas import (
    BOT,
    NOT_PARAMETER_FREE,
    Abstract,
    Language,
    abstract,
    app,
    atom,
    canonical,
    conj,
    const,
    disj,
    eq,
    exists,
    exists2,
    forall,
    forall2,
    imp,
    level,
    lpa,
    positive_in,
    rank,
    satom,
    substitute_set,
    substitute_term,
    top,
    var,
)
from .sequents import (
    LI,
    LIP,
    LIT,
    Calculus,
    Derivation,
    Sequent,
    check,
    check_ok,
    parse_calculus,
    sequent,
    substitute_derivation,
    weaken,
)

__all__ = [name for name in dir() if not name.startswith("_")]
