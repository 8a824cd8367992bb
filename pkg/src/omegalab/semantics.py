"""Heyting-valued term-model semantics over finite algebras.

Structures carry a finite closed-term universe (all closed terms of a
declared language up to a depth bound), predicate tables into a finite
Heyting algebra, and an abstract domain D of functions from the universe
into the algebra.  Full structures take D to be every such function, which
makes the structure condition automatic.  Interpretation follows the usual
clauses with finite meets and joins; first-order quantifiers range over the
universe, second-order ones over D.
"""

from dataclasses import dataclass
from itertools import product

from .errors import LevelViolation, UncoveredVariable, UnknownFunctionSymbol
from .formulas import (
    AND,
    IMP,
    OR,
    App,
    Atom,
    Bin,
    Bot,
    Quant,
    Quant2,
    SetAtom,
    Var,
    level,
)
from .lattice import FiniteHeytingAlgebra, three_chain, two_chain
from .printer import fkey, term_str
from .search import NOT_FOUND, Member, SearchBudget, omega_membership


@dataclass(frozen=True)
class Structure:
    algebra: FiniteHeytingAlgebra
    universe: tuple  # closed Terms
    funcs: dict  # symbol -> {arg index tuple: universe index}
    preds: dict  # symbol -> {arg index tuple: algebra element}
    domain: tuple  # tuple of vectors: universe index -> algebra element
    full: bool = False

    def __post_init__(self):
        if not self.domain:
            raise ValueError("the abstract domain must be nonempty")
        object.__setattr__(
            self, "_uindex", {term_str(t): i for i, t in enumerate(self.universe)}
        )

    @property
    def size(self):
        return len(self.universe)

    def term_index(self, t):
        got = self._uindex.get(term_str(t))
        if got is None:
            raise UnknownFunctionSymbol(f"term {term_str(t)} outside the universe")
        return got


def full_domain(algebra, universe_size):
    return tuple(product(range(algebra.size), repeat=universe_size))


def term_universe(functions, depth):
    """All closed terms over the given (symbol, arity) list with nesting
    depth at most `depth`."""
    layers = [App(s, ()) for s, a in functions if a == 0]
    out = {term_str(t): t for t in layers}
    current = list(layers)
    for _ in range(depth):
        new = []
        for s, a in functions:
            if a == 0:
                continue
            for args in product(out.values(), repeat=a):
                t = App(s, tuple(args))
                if term_str(t) not in out:
                    new.append(t)
        for t in new:
            out[term_str(t)] = t
        if not new:
            break
    return tuple(sorted(out.values(), key=term_str))


def full_structure(algebra, functions, preds, depth=0):
    """A full term-model structure: function tables follow term formation
    inside the bounded universe, the abstract domain is all of A^M."""
    universe = term_universe(functions, depth)
    if not universe:
        raise ValueError("the term universe is empty (declare a constant)")
    uindex = {term_str(t): i for i, t in enumerate(universe)}
    funcs = {}
    for s, a in functions:
        if a == 0:
            continue
        table = {}
        for args in product(range(len(universe)), repeat=a):
            t = App(s, tuple(universe[i] for i in args))
            got = uindex.get(term_str(t))
            if got is not None:
                table[args] = got
        funcs[s] = table
    return Structure(
        algebra,
        universe,
        funcs,
        dict(preds),
        full_domain(algebra, len(universe)),
        full=True,
    )


def eval_term(s, t, sigma):
    if isinstance(t, Var):
        if t.name not in sigma:
            raise UncoveredVariable(f"term variable {t.name} has no assignment")
        return sigma[t.name]
    if not t.args:
        return s.term_index(t)
    args = tuple(eval_term(s, a, sigma) for a in t.args)
    table = s.funcs.get(t.head)
    if table is None or args not in table:
        raise UnknownFunctionSymbol(
            f"no interpretation for {t.head}/{len(t.args)} at {args}"
        )
    return table[args]


def interpret(f, s, valuation=None, sigma=None):
    """The algebra element denoted by f under the given set-variable
    valuation and term-variable assignment."""
    v = valuation or {}
    sg = sigma or {}
    alg = s.algebra

    def go(g, v, sg):
        if isinstance(g, Atom):
            table = s.preds.get(g.pred)
            if table is None:
                raise UnknownFunctionSymbol(f"no table for predicate {g.pred}")
            args = tuple(eval_term(s, t, sg) for t in g.args)
            if args not in table:
                raise UnknownFunctionSymbol(f"predicate {g.pred} undefined at {args}")
            return table[args]
        if isinstance(g, SetAtom):
            if g.svar not in v:
                raise UncoveredVariable(f"set variable {g.svar} has no valuation")
            return v[g.svar][eval_term(s, g.arg, sg)]
        if isinstance(g, Bot):
            return alg.bot
        if isinstance(g, Bin):
            a = go(g.left, v, sg)
            b = go(g.right, v, sg)
            if g.op == AND:
                return alg.meet(a, b)
            if g.op == OR:
                return alg.join(a, b)
            return alg.imp(a, b)
        if isinstance(g, Quant):
            vals = (go(g.body, v, {**sg, g.v: m}) for m in range(s.size))
            return alg.meet_all(vals) if g.q == "all" else alg.join_all(vals)
        if isinstance(g, Quant2):
            vals = (go(g.body, {**v, g.v: F}, sg) for F in s.domain)
            return alg.meet_all(vals) if g.q == "All" else alg.join_all(vals)
        raise TypeError(f"not a formula: {g!r}")

    return go(f, v, sg)


def sequent_holds(seq, s, valuation, sigma):
    alg = s.algebra
    lhs = alg.meet_all(interpret(f, s, valuation, sigma) for f in seq.antecedent)
    if seq.succedent is None:
        rhs = alg.bot
    else:
        rhs = interpret(seq.succedent, s, valuation, sigma)
    return alg.le(lhs, rhs)


def check_validity(seq, s):
    """True iff the sequent holds under every valuation over D and every
    assignment of universe elements to its free term variables."""
    svars = sorted(seq.sv())
    fvars = sorted(seq.fv())
    for vals in product(s.domain, repeat=len(svars)):
        v = dict(zip(svars, vals))
        for ms in product(range(s.size), repeat=len(fvars)):
            sg = dict(zip(fvars, ms))
            if not sequent_holds(seq, s, v, sg):
                return False
    return True


# ---------------------------------------------------------------------------
# The omega-rule soundness probe


@dataclass(frozen=True)
class ProbeEntry:
    delta: tuple  # formulas
    certified: bool
    value: int = None  # algebra element of the meet, when certified

    def names(self, alg):
        return tuple(fkey(f) for f in self.delta)


@dataclass(frozen=True)
class ProbeReport:
    q_value: int
    target: int
    entries: tuple
    unsound_instance: bool
    algebra: FiniteHeytingAlgebra

    def certified_values(self):
        return [e.value for e in self.entries if e.certified]


def omega_soundness_probe(s, q, delta_pool, budget=SearchBudget()):
    """Evaluate the bot-targeted omega-rule instance for q on the structure:
    certify pool members via omega_membership, list their values under the
    everywhere-bot valuation, and flag UNSOUND-INSTANCE when the certified
    premises hold, the conclusion fails, and the conclusion value sits
    strictly below top.

    The premise family of the rule is infinite; the sampled values witness
    unsoundness only together with the forcing argument that pins every
    two-valued premise at bot, which needs the conclusion value < top.  A
    conclusion at top therefore never flags (the classical case stays an
    open question here).
    """
    if level(q) != 0:
        raise LevelViolation(f"probe formula must have level 0, got {level(q)}")
    if q.fv:
        raise UncoveredVariable(f"probe formula must be closed: free {sorted(q.fv)}")
    alg = s.algebra
    bot_vec = tuple(alg.bot for _ in range(s.size))
    entries = []
    for delta in delta_pool:
        delta = tuple(delta)
        verdict = omega_membership(q, delta, budget=budget)
        if verdict is NOT_FOUND:
            entries.append(ProbeEntry(delta, False))
            continue
        svars = set()
        for f in delta:
            svars |= f.sv
        valuation = {x: bot_vec for x in svars}
        value = alg.meet_all(interpret(f, s, valuation) for f in delta)
        entries.append(ProbeEntry(delta, True, value))
    q_value = interpret(q, s)
    target = alg.bot
    certified = [e for e in entries if e.certified]
    unsound = (
        bool(certified)
        and all(alg.le(e.value, target) for e in certified)
        and not alg.le(q_value, target)
        and q_value != alg.top
    )
    return ProbeReport(q_value, target, tuple(entries), unsound, alg)
