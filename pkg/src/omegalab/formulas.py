"""Terms, second-order formulas and abstracts with alpha-canonical identity.

Every binder (first- and second-order quantifiers, abstracts) renames its
variable to a reserved name derived from the number of enclosing binders, so
alpha-equivalent trees are structurally identical, compare equal and hash
equal.  Reserved names start with an underscore and cannot be produced by the
text grammar; user-facing variable names never collide with them, which makes
substitution capture-free by construction.

Conventions: term variables are lowercase identifiers, set variables
uppercase.  The verum constant is represented as ``bot -> bot``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import LevelViolation

AND = "&"
OR = "|"
IMP = "->"
FORALL = "all"
EXISTS = "ex"
FORALL2 = "All"
EXISTS2 = "Ex"

_BINOPS = (AND, OR, IMP)


# ---------------------------------------------------------------------------
# Terms


class Term:
    __slots__ = ()

    def __eq__(self, other):
        if self is other:
            return True
        return (
            type(self) is type(other)
            and self._h == other._h
            and self._eq_fields(other)
        )

    def __hash__(self):
        return self._h

    def __repr__(self):
        from .printer import term_str

        return f"Term({term_str(self)!r})"


@dataclass(frozen=True, eq=False, repr=False)
class Var(Term):
    name: str

    def __post_init__(self):
        object.__setattr__(self, "_h", hash(("Var", self.name)))
        object.__setattr__(self, "_fv", frozenset((self.name,)))

    def _eq_fields(self, other):
        return self.name == other.name


@dataclass(frozen=True, eq=False, repr=False)
class App(Term):
    head: str
    args: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "_h", hash(("App", self.head, self.args)))
        fv = frozenset().union(*(a._fv for a in self.args)) if self.args else frozenset()
        object.__setattr__(self, "_fv", fv)

    def _eq_fields(self, other):
        return self.head == other.head and self.args == other.args


def var(name):
    return Var(name)


def app(head, *args):
    return App(head, tuple(args))


def const(name):
    return App(name, ())


def term_fv(t):
    """Free (i.e. all) variables of a term."""
    return t._fv


def subterms(t):
    """All subterms of t, including t itself."""
    out = [t]
    if isinstance(t, App):
        for a in t.args:
            out.extend(subterms(a))
    return out


def replace_vars(t, mapping):
    """Simultaneous substitution of terms for variables in a term."""
    if isinstance(t, Var):
        return mapping.get(t.name, t)
    if not t.args:
        return t
    return App(t.head, tuple(replace_vars(a, mapping) for a in t.args))


# ---------------------------------------------------------------------------
# Formulas


class Formula:
    __slots__ = ()

    def __eq__(self, other):
        if self is other:
            return True
        return (
            type(self) is type(other)
            and self._h == other._h
            and self._eq_fields(other)
        )

    def __hash__(self):
        return self._h

    def __repr__(self):
        from .printer import formula_str

        return f"Formula({formula_str(self)!r})"

    @property
    def fv(self):
        """Free term variables."""
        return self._fv

    @property
    def sv(self):
        """Free set variables."""
        return self._sv


@dataclass(frozen=True, eq=False, repr=False)
class Atom(Formula):
    pred: str
    args: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "_h", hash(("Atom", self.pred, self.args)))
        fv = frozenset().union(*(a._fv for a in self.args)) if self.args else frozenset()
        object.__setattr__(self, "_fv", fv)
        object.__setattr__(self, "_sv", frozenset())

    def _eq_fields(self, other):
        return self.pred == other.pred and self.args == other.args


@dataclass(frozen=True, eq=False, repr=False)
class SetAtom(Formula):
    svar: str
    arg: Term

    def __post_init__(self):
        object.__setattr__(self, "_h", hash(("SetAtom", self.svar, self.arg)))
        object.__setattr__(self, "_fv", self.arg._fv)
        object.__setattr__(self, "_sv", frozenset((self.svar,)))

    def _eq_fields(self, other):
        return self.svar == other.svar and self.arg == other.arg


@dataclass(frozen=True, eq=False, repr=False)
class Bot(Formula):
    def __post_init__(self):
        object.__setattr__(self, "_h", hash("Bot"))
        object.__setattr__(self, "_fv", frozenset())
        object.__setattr__(self, "_sv", frozenset())

    def _eq_fields(self, other):
        return True


@dataclass(frozen=True, eq=False, repr=False)
class Bin(Formula):
    op: str
    left: Formula
    right: Formula

    def __post_init__(self):
        object.__setattr__(self, "_h", hash(("Bin", self.op, self.left._h, self.right._h)))
        object.__setattr__(self, "_fv", self.left._fv | self.right._fv)
        object.__setattr__(self, "_sv", self.left._sv | self.right._sv)

    def _eq_fields(self, other):
        return self.op == other.op and self.left == other.left and self.right == other.right


@dataclass(frozen=True, eq=False, repr=False)
class Quant(Formula):
    """First-order quantifier; q is ``all`` or ``ex``."""

    q: str
    v: str
    body: Formula

    def __post_init__(self):
        object.__setattr__(self, "_h", hash(("Quant", self.q, self.v, self.body._h)))
        object.__setattr__(self, "_fv", self.body._fv - {self.v})
        object.__setattr__(self, "_sv", self.body._sv)

    def _eq_fields(self, other):
        return self.q == other.q and self.v == other.v and self.body == other.body


@dataclass(frozen=True, eq=False, repr=False)
class Quant2(Formula):
    """Second-order quantifier; q is ``All`` or ``Ex``."""

    q: str
    v: str
    body: Formula

    def __post_init__(self):
        object.__setattr__(self, "_h", hash(("Quant2", self.q, self.v, self.body._h)))
        object.__setattr__(self, "_fv", self.body._fv)
        object.__setattr__(self, "_sv", self.body._sv - {self.v})

    def _eq_fields(self, other):
        return self.q == other.q and self.v == other.v and self.body == other.body


@dataclass(frozen=True, eq=False, repr=False)
class Abstract:
    """lambda x. body, substitutable for set variables."""

    v: str
    body: Formula

    def __post_init__(self):
        object.__setattr__(self, "_h", hash(("Abstract", self.v, self.body._h)))

    def __eq__(self, other):
        if self is other:
            return True
        return (
            isinstance(other, Abstract)
            and self._h == other._h
            and self.v == other.v
            and self.body == other.body
        )

    def __hash__(self):
        return self._h

    def __repr__(self):
        from .printer import abstract_str

        return f"Abstract({abstract_str(self)!r})"

    @property
    def fv(self):
        return self.body._fv - {self.v}

    @property
    def sv(self):
        return self.body._sv


BOT = Bot()


# ---------------------------------------------------------------------------
# Canonicalization

_TVPREFIX = "_x"
_SVPREFIX = "_X"


def _canon(f, tenv, senv, depth):
    if isinstance(f, Atom):
        if not tenv:
            return f
        return Atom(f.pred, tuple(replace_vars(a, tenv) for a in f.args))
    if isinstance(f, SetAtom):
        sv = senv.get(f.svar, f.svar)
        arg = replace_vars(f.arg, tenv) if tenv else f.arg
        return SetAtom(sv, arg)
    if isinstance(f, Bot):
        return f
    if isinstance(f, Bin):
        return Bin(f.op, _canon(f.left, tenv, senv, depth), _canon(f.right, tenv, senv, depth))
    if isinstance(f, Quant):
        name = _TVPREFIX + str(depth)
        tenv2 = dict(tenv)
        tenv2[f.v] = Var(name)
        return Quant(f.q, name, _canon(f.body, tenv2, senv, depth + 1))
    if isinstance(f, Quant2):
        name = _SVPREFIX + str(depth)
        senv2 = dict(senv)
        senv2[f.v] = name
        return Quant2(f.q, name, _canon(f.body, tenv, senv2, depth + 1))
    raise TypeError(f"not a formula: {f!r}")


def canonical(f):
    """Rename all bound variables by binder depth.  Idempotent."""
    return _canon(f, {}, {}, 0)


def canonical_abstract(a):
    name = _TVPREFIX + "0"
    return Abstract(name, _canon(a.body, {a.v: Var(name)}, {}, 1))


# Smart constructors.  All public formula-building code goes through these,
# which keeps every formula in canonical form.


def atom(pred, *args):
    return Atom(pred, tuple(args))


def satom(svar, arg):
    return SetAtom(svar, arg)


def conj(a, b):
    return Bin(AND, a, b)


def disj(a, b):
    return Bin(OR, a, b)


def imp(a, b):
    return Bin(IMP, a, b)


def top():
    return imp(BOT, BOT)


def conj_all(fs):
    """Left-associated conjunction of a nonempty list."""
    fs = list(fs)
    out = fs[0]
    for f in fs[1:]:
        out = conj(out, f)
    return out


def forall(v, body):
    return canonical(Quant(FORALL, v, body))


def exists(v, body):
    return canonical(Quant(EXISTS, v, body))


def forall2(v, body):
    return canonical(Quant2(FORALL2, v, body))


def exists2(v, body):
    return canonical(Quant2(EXISTS2, v, body))


def abstract(v, body):
    return canonical_abstract(Abstract(v, body))


def eq(a, b):
    return atom("=", a, b)


# ---------------------------------------------------------------------------
# Substitution


def _subst(f, tmap, smap):
    if isinstance(f, Atom):
        if not tmap:
            return f
        return Atom(f.pred, tuple(replace_vars(a, tmap) for a in f.args))
    if isinstance(f, SetAtom):
        arg = replace_vars(f.arg, tmap) if tmap else f.arg
        if f.svar in smap:
            tau = smap[f.svar]
            return _subst(tau.body, {tau.v: arg}, {})
        return SetAtom(f.svar, arg)
    if isinstance(f, Bot):
        return f
    if isinstance(f, Bin):
        return Bin(f.op, _subst(f.left, tmap, smap), _subst(f.right, tmap, smap))
    if isinstance(f, Quant):
        tmap2 = {k: v for k, v in tmap.items() if k != f.v}
        return Quant(f.q, f.v, _subst(f.body, tmap2, smap))
    if isinstance(f, Quant2):
        smap2 = {k: v for k, v in smap.items() if k != f.v}
        return Quant2(f.q, f.v, _subst(f.body, tmap, smap2))
    raise TypeError(f"not a formula: {f!r}")


def substitute_terms(f, tmap):
    """Capture-avoiding simultaneous substitution of terms for term variables."""
    if not tmap:
        return f
    return canonical(_subst(f, tmap, {}))


def substitute_term(f, v, t):
    return substitute_terms(f, {v: t})


def substitute_sets(f, smap):
    """Replace each free atom X(t) by tau(t) for X in the mapping."""
    if not smap:
        return f
    return canonical(_subst(f, {}, smap))


def substitute_set(f, svar, tau):
    return substitute_sets(f, {svar: tau})


def apply_abstract(tau, t):
    """tau(t): the abstract's body with t for the bound variable."""
    return canonical(_subst(tau.body, {tau.v: t}, {}))


def subst_abstract_terms(tau, tmap):
    tmap2 = {k: v for k, v in tmap.items() if k != tau.v}
    if not tmap2:
        return tau
    return canonical_abstract(Abstract(tau.v, _subst(tau.body, tmap2, {})))


def subst_abstract_sets(tau, smap):
    if not smap:
        return tau
    return canonical_abstract(Abstract(tau.v, _subst(tau.body, {}, smap)))


def instantiate(qf, t):
    """Body of a first-order quantified formula with t for the bound variable."""
    assert isinstance(qf, Quant)
    return canonical(_subst(qf.body, {qf.v: t}, {}))


def instantiate2(qf, tau):
    """Body of a second-order quantified formula with the abstract plugged in."""
    assert isinstance(qf, Quant2)
    return canonical(_subst(qf.body, {}, {qf.v: tau}))


def instantiate2_var(qf, svar):
    """Body of QX.phi with a set variable Y for X (identity abstract)."""
    assert isinstance(qf, Quant2)
    ident = Abstract("_x0", SetAtom(svar, Var("_x0")))
    return canonical(_subst(qf.body, {}, {qf.v: ident}))


def identity_abstract(svar):
    """lambda z. X(z)."""
    return abstract("z", satom(svar, var("z")))


# ---------------------------------------------------------------------------
# Level, rank, positivity


class _NotParameterFree:
    __slots__ = ()

    def __repr__(self):
        return "NotParameterFree"


NOT_PARAMETER_FREE = _NotParameterFree()

_level_cache = {}


def level(f):
    """Least n >= -1 with f in the parameter-free hierarchy at level n.

    Returns NOT_PARAMETER_FREE when some second-order-quantified subformula
    QX.xi has a free set variable other than X.
    """
    got = _level_cache.get(f)
    if got is not None:
        return got
    if isinstance(f, (Atom, SetAtom, Bot)):
        out = -1
    elif isinstance(f, Bin):
        a, b = level(f.left), level(f.right)
        if a is NOT_PARAMETER_FREE or b is NOT_PARAMETER_FREE:
            out = NOT_PARAMETER_FREE
        else:
            out = max(a, b)
    elif isinstance(f, Quant):
        out = level(f.body)
    elif isinstance(f, Quant2):
        if f.body._sv - {f.v}:
            out = NOT_PARAMETER_FREE
        else:
            b = level(f.body)
            out = NOT_PARAMETER_FREE if b is NOT_PARAMETER_FREE else b + 1
    else:
        raise TypeError(f"not a formula: {f!r}")
    _level_cache[f] = out
    return out


def level_le(f, n):
    lv = level(f)
    return lv is not NOT_PARAMETER_FREE and lv <= n


def abstract_level(tau):
    return level(tau.body)


def require_level(f, n, what="formula"):
    if not level_le(f, n):
        raise LevelViolation(f"{what} must have level <= {n}, got {level(f)}")


_rank_cache = {}


def rank(f):
    """Cut-complexity measure: zero on atoms, bot and second-order quantifiers."""
    got = _rank_cache.get(f)
    if got is not None:
        return got
    if isinstance(f, (Atom, SetAtom, Bot, Quant2)):
        out = 0
    elif isinstance(f, Bin):
        out = max(rank(f.left), rank(f.right)) + 1
    elif isinstance(f, Quant):
        out = rank(f.body) + 1
    else:
        raise TypeError(f"not a formula: {f!r}")
    _rank_cache[f] = out
    return out


def _polarity_ok(f, x, sign):
    if isinstance(f, SetAtom):
        return sign if f.svar == x else True
    if isinstance(f, (Atom, Bot)):
        return True
    if isinstance(f, Bin):
        if f.op == IMP:
            return _polarity_ok(f.left, x, not sign) and _polarity_ok(f.right, x, sign)
        return _polarity_ok(f.left, x, sign) and _polarity_ok(f.right, x, sign)
    if isinstance(f, Quant):
        return _polarity_ok(f.body, x, sign)
    if isinstance(f, Quant2):
        if f.v == x:
            return True
        return _polarity_ok(f.body, x, sign)
    raise TypeError(f"not a formula: {f!r}")


def positive_in(f, x):
    """True iff every free occurrence of set variable x in f is positive."""
    return _polarity_ok(f, x, True)


def negative_in(f, x):
    return _polarity_ok(f, x, False)


# ---------------------------------------------------------------------------
# Misc structure helpers


def formula_terms(f):
    """All terms occurring in f."""
    out = []
    if isinstance(f, Atom):
        out.extend(f.args)
    elif isinstance(f, SetAtom):
        out.append(f.arg)
    elif isinstance(f, Bin):
        out.extend(formula_terms(f.left))
        out.extend(formula_terms(f.right))
    elif isinstance(f, (Quant, Quant2)):
        out.extend(formula_terms(f.body))
    return out


def predicate_symbols(f):
    if isinstance(f, Atom):
        return {f.pred}
    if isinstance(f, (SetAtom, Bot)):
        return set()
    if isinstance(f, Bin):
        return predicate_symbols(f.left) | predicate_symbols(f.right)
    if isinstance(f, (Quant, Quant2)):
        return predicate_symbols(f.body)
    raise TypeError(f"not a formula: {f!r}")


def function_symbols_term(t):
    if isinstance(t, Var):
        return set()
    out = {(t.head, len(t.args))}
    for a in t.args:
        out |= function_symbols_term(a)
    return out


def function_symbols(f):
    out = set()
    for t in formula_terms(f):
        out |= function_symbols_term(t)
    return out


def fresh_term_var(avoid, base="y"):
    """First name base, base1, base2, ... not in avoid."""
    if base not in avoid:
        return base
    i = 1
    while f"{base}{i}" in avoid:
        i += 1
    return f"{base}{i}"


def fresh_set_var(avoid, base="Y"):
    if base not in avoid:
        return base
    i = 1
    while f"{base}{i}" in avoid:
        i += 1
    return f"{base}{i}"


# ---------------------------------------------------------------------------
# Languages


@dataclass(frozen=True)
class Language:
    """Function and predicate symbols with arities."""

    name: str
    functions: tuple  # of (symbol, arity)
    predicates: tuple

    def function_arity(self, sym):
        for s, a in self.functions:
            if s == sym:
                return a
        return None

    def predicate_arity(self, sym):
        for s, a in self.predicates:
            if s == sym:
                return a
        return None


def lpa(pr_symbols=(("add", 2), ("mul", 2))):
    """The arithmetic language: 0, s, = plus a configurable list of
    primitive-recursive function symbols."""
    return Language(
        "L_PA",
        (("0", 0), ("s", 1)) + tuple(pr_symbols),
        (("=", 2),),
    )


def validate(f, lang):
    """Arity problems of a formula over a declared language."""
    problems = []

    def check_term(t):
        if isinstance(t, Var):
            return
        a = lang.function_arity(t.head)
        if a is None:
            problems.append(f"unknown function symbol {t.head}")
        elif a != len(t.args):
            problems.append(f"arity of {t.head}: expected {a}, got {len(t.args)}")
        for s in t.args:
            check_term(s)

    def go(g):
        if isinstance(g, Atom):
            a = lang.predicate_arity(g.pred)
            if a is None:
                problems.append(f"unknown predicate symbol {g.pred}")
            elif a != len(g.args):
                problems.append(f"arity of {g.pred}: expected {a}, got {len(g.args)}")
            for t in g.args:
                check_term(t)
        elif isinstance(g, SetAtom):
            check_term(g.arg)
        elif isinstance(g, Bin):
            go(g.left)
            go(g.right)
        elif isinstance(g, (Quant, Quant2)):
            go(g.body)

    go(f)
    return problems
