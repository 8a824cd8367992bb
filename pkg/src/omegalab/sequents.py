"""Sequents, rule-labelled derivation trees and the kernel checker.

The checker is total: it never searches and never raises on malformed
derivations, it reports violations with node paths.  Antecedents are finite
sets stored canonically sorted, so exchange and contraction are implicit and
``Gamma, Delta`` always means set union.  Weakening and substitution are
admissible transformations implemented as functions on valid derivations.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import LevelViolation
from .formulas import (
    AND,
    IMP,
    OR,
    BOT,
    NOT_PARAMETER_FREE,
    Abstract,
    Bin,
    Quant,
    Quant2,
    Term,
    Var,
    abstract_level,
    fresh_set_var,
    fresh_term_var,
    instantiate,
    instantiate2,
    instantiate2_var,
    level,
    level_le,
    replace_vars,
    subst_abstract_sets,
    subst_abstract_terms,
    substitute_sets,
    substitute_terms,
    term_fv,
)
from .printer import fkey

# ---------------------------------------------------------------------------
# Sequents


@dataclass(frozen=True, eq=False, repr=False)
class Sequent:
    antecedent: tuple  # formulas, sorted by serialization, no duplicates
    succedent: object  # Formula or None

    def __post_init__(self):
        h = hash(("Sequent", self.antecedent, self.succedent))
        object.__setattr__(self, "_h", h)

    def __eq__(self, other):
        if self is other:
            return True
        return (
            isinstance(other, Sequent)
            and self._h == other._h
            and self.antecedent == other.antecedent
            and self.succedent == other.succedent
        )

    def __hash__(self):
        return self._h

    def __repr__(self):
        return f"Sequent({str(self)!r})"

    def __str__(self):
        left = ", ".join(fkey(f) for f in self.antecedent)
        right = " " + fkey(self.succedent) if self.succedent is not None else ""
        return f"{left} |-{right}" if left else f"|-{right}"

    @property
    def ant(self):
        return frozenset(self.antecedent)

    def formulas(self):
        if self.succedent is None:
            return self.antecedent
        return self.antecedent + (self.succedent,)

    def fv(self):
        out = set()
        for f in self.formulas():
            out |= f.fv
        return out

    def sv(self):
        out = set()
        for f in self.formulas():
            out |= f.sv
        return out


def sequent(antecedent, succedent=None):
    ants = sorted(set(antecedent), key=fkey)
    return Sequent(tuple(ants), succedent)


# ---------------------------------------------------------------------------
# Calculi


@dataclass(frozen=True)
class Calculus:
    kind: str  # "LI", "LIP" or "LIT"
    n: int = -1

    def __str__(self):
        return f"LIP{self.n}" if self.kind == "LIP" else self.kind


LI = Calculus("LI")
LIT = Calculus("LIT")


def LIP(n):
    if n < 0:
        raise ValueError("LIP level must be >= 0")
    return Calculus("LIP", n)


def parse_calculus(s):
    if s == "LI":
        return LI
    if s == "LIT":
        return LIT
    if s.startswith("LIP") and s[3:].isdigit():
        return LIP(int(s[3:]))
    raise ValueError(f"unknown calculus {s!r}")


# ---------------------------------------------------------------------------
# Derivations

SECOND_ORDER_RULES = frozenset({"All2L", "All2R", "Ex2L", "Ex2R"})
EIGEN_TERM_RULES = frozenset({"AllR", "ExL"})
EIGEN_SET_RULES = frozenset({"All2R", "Ex2L"})

_ARITY = {
    "Id": 0,
    "BotL": 0,
    "BotR": 1,
    "Cut": 2,
    "AndL": 1,
    "AndR": 2,
    "OrL": 2,
    "OrR": 1,
    "ImpL": 2,
    "ImpR": 1,
    "AllL": 1,
    "AllR": 1,
    "ExL": 1,
    "ExR": 1,
    "All2L": 1,
    "All2R": 1,
    "Ex2L": 1,
    "Ex2R": 1,
}

RULES = tuple(_ARITY)


@dataclass(frozen=True, eq=False, repr=False)
class Derivation:
    rule: str
    conclusion: Sequent
    premises: tuple = ()
    side: int = 0  # 1 or 2 for AndL / OrR
    term: Term = None  # witness for AllL / ExR
    fvar: str = None  # eigenvariable for AllR / ExL / All2R / Ex2L
    formula: object = None  # cut formula
    abstract: Abstract = None  # witness for All2L / Ex2R

    def __post_init__(self):
        h = hash(
            (
                self.rule,
                self.conclusion,
                tuple(p._h for p in self.premises),
                self.side,
                self.term,
                self.fvar,
                self.formula,
                self.abstract,
            )
        )
        object.__setattr__(self, "_h", h)
        object.__setattr__(self, "_nodes", 1 + sum(p._nodes for p in self.premises))

    def __eq__(self, other):
        if self is other:
            return True
        return (
            isinstance(other, Derivation)
            and self._h == other._h
            and self.rule == other.rule
            and self.conclusion == other.conclusion
            and self.side == other.side
            and self.term == other.term
            and self.fvar == other.fvar
            and self.formula == other.formula
            and self.abstract == other.abstract
            and self.premises == other.premises
        )

    def __hash__(self):
        return self._h

    def __repr__(self):
        return f"Derivation({self.rule}, {str(self.conclusion)!r}, {self._nodes} nodes)"

    @property
    def nodes(self):
        return self._nodes


def node_count(d):
    return d._nodes


def iter_nodes(d):
    yield d
    for p in d.premises:
        yield from iter_nodes(p)


def cut_formulas(d):
    return [n.formula for n in iter_nodes(d) if n.rule == "Cut"]


def is_cut_free(d):
    return all(n.rule != "Cut" for n in iter_nodes(d))


def used_term_names(d):
    out = set()
    for n in iter_nodes(d):
        out |= n.conclusion.fv()
        if n.term is not None:
            out |= term_fv(n.term)
        if n.fvar is not None and n.rule in EIGEN_TERM_RULES:
            out.add(n.fvar)
        if n.formula is not None:
            out |= n.formula.fv
        if n.abstract is not None:
            out |= n.abstract.fv
    return out


def used_set_names(d):
    out = set()
    for n in iter_nodes(d):
        out |= n.conclusion.sv()
        if n.fvar is not None and n.rule in EIGEN_SET_RULES:
            out.add(n.fvar)
        if n.formula is not None:
            out |= n.formula.sv
        if n.abstract is not None:
            out |= n.abstract.sv
    return out


# ---------------------------------------------------------------------------
# Checking


@dataclass(frozen=True)
class Violation:
    path: tuple  # premise indices from the root
    rule: str
    reason: str

    def __str__(self):
        where = ".".join(map(str, self.path)) if self.path else "root"
        return f"[{where}] {self.rule}: {self.reason}"


def _gammas(ant, main):
    """Candidate context sets for a left rule with the given main formula.
    Set-antecedents allow the main formula to be kept or dropped."""
    yield ant - {main}
    yield ant


def _match_left(d, picker, build_premises):
    """Try every main-formula candidate and context choice; empty list on
    the first full match, reasons otherwise."""
    ant = d.conclusion.ant
    succ = d.conclusion.succedent
    candidates = [f for f in ant if picker(f)]
    if not candidates:
        return ["no candidate main formula in the antecedent"]
    for main in candidates:
        for gamma in _gammas(ant, main):
            want = build_premises(main, gamma, succ)
            if want is None:
                continue
            if list(want) == [p.conclusion for p in d.premises]:
                return []
    return ["premises do not instantiate the rule schema for any main formula"]


def _check_node(d):
    """Schema and side-condition violations of the root node (premise
    sequents are taken at face value; recursion happens in check)."""
    r = d.rule
    if r not in _ARITY:
        return [f"unknown rule tag {r!r}"]
    if len(d.premises) != _ARITY[r]:
        return [f"expected {_ARITY[r]} premises, got {len(d.premises)}"]
    ant = d.conclusion.ant
    succ = d.conclusion.succedent

    if r == "Id":
        if succ is None or succ not in ant:
            return ["succedent must occur in the antecedent"]
        return []

    if r == "BotL":
        if BOT not in ant:
            return ["bot must occur in the antecedent"]
        return []

    if r == "BotR":
        if succ != BOT:
            return ["succedent must be bot"]
        if d.premises[0].conclusion != sequent(ant, None):
            return ["premise must be the conclusion with empty succedent"]
        return []

    if r == "Cut":
        if d.formula is None:
            return ["missing cut formula"]
        want = [sequent(ant, d.formula), sequent(ant | {d.formula}, succ)]
        if [p.conclusion for p in d.premises] != want:
            return ["premises do not match the cut schema"]
        return []

    if r == "AndL":
        if d.side not in (1, 2):
            return ["missing projection index"]
        return _match_left(
            d,
            lambda f: isinstance(f, Bin) and f.op == AND,
            lambda m, g, s: [sequent(g | {m.left if d.side == 1 else m.right}, s)],
        )

    if r == "AndR":
        if not (isinstance(succ, Bin) and succ.op == AND):
            return ["succedent must be a conjunction"]
        want = [sequent(ant, succ.left), sequent(ant, succ.right)]
        if [p.conclusion for p in d.premises] != want:
            return ["premises do not match the schema"]
        return []

    if r == "OrL":
        return _match_left(
            d,
            lambda f: isinstance(f, Bin) and f.op == OR,
            lambda m, g, s: [sequent(g | {m.left}, s), sequent(g | {m.right}, s)],
        )

    if r == "OrR":
        if d.side not in (1, 2):
            return ["missing disjunct index"]
        if not (isinstance(succ, Bin) and succ.op == OR):
            return ["succedent must be a disjunction"]
        want = [sequent(ant, succ.left if d.side == 1 else succ.right)]
        if [p.conclusion for p in d.premises] != want:
            return ["premise does not match the schema"]
        return []

    if r == "ImpL":
        return _match_left(
            d,
            lambda f: isinstance(f, Bin) and f.op == IMP,
            lambda m, g, s: [sequent(g, m.left), sequent(g | {m.right}, s)],
        )

    if r == "ImpR":
        if not (isinstance(succ, Bin) and succ.op == IMP):
            return ["succedent must be an implication"]
        if d.premises[0].conclusion != sequent(ant | {succ.left}, succ.right):
            return ["premise does not match the schema"]
        return []

    if r == "AllL":
        if d.term is None:
            return ["missing witness term"]
        return _match_left(
            d,
            lambda f: isinstance(f, Quant) and f.q == "all",
            lambda m, g, s: [sequent(g | {instantiate(m, d.term)}, s)],
        )

    if r == "AllR":
        if d.fvar is None:
            return ["missing eigenvariable"]
        if not (isinstance(succ, Quant) and succ.q == "all"):
            return ["succedent must be universally quantified"]
        if d.premises[0].conclusion != sequent(ant, instantiate(succ, Var(d.fvar))):
            return ["premise does not match the schema"]
        if d.fvar in d.conclusion.fv():
            return [f"eigenvariable {d.fvar} occurs free in the conclusion"]
        return []

    if r == "ExL":
        if d.fvar is None:
            return ["missing eigenvariable"]
        bad = _match_left(
            d,
            lambda f: isinstance(f, Quant) and f.q == "ex",
            lambda m, g, s: [sequent(g | {instantiate(m, Var(d.fvar))}, s)],
        )
        if bad:
            return bad
        if d.fvar in d.conclusion.fv():
            return [f"eigenvariable {d.fvar} occurs free in the conclusion"]
        return []

    if r == "ExR":
        if d.term is None:
            return ["missing witness term"]
        if not (isinstance(succ, Quant) and succ.q == "ex"):
            return ["succedent must be existentially quantified"]
        if d.premises[0].conclusion != sequent(ant, instantiate(succ, d.term)):
            return ["premise does not match the schema"]
        return []

    if r == "All2L":
        if d.abstract is None:
            return ["missing witness abstract"]
        return _match_left(
            d,
            lambda f: isinstance(f, Quant2) and f.q == "All",
            lambda m, g, s: [sequent(g | {instantiate2(m, d.abstract)}, s)],
        )

    if r == "All2R":
        if d.fvar is None:
            return ["missing eigenvariable"]
        if not (isinstance(succ, Quant2) and succ.q == "All"):
            return ["succedent must be second-order universally quantified"]
        if d.premises[0].conclusion != sequent(ant, instantiate2_var(succ, d.fvar)):
            return ["premise does not match the schema"]
        if d.fvar in d.conclusion.sv():
            return [f"eigenvariable {d.fvar} occurs free in the conclusion"]
        return []

    if r == "Ex2L":
        if d.fvar is None:
            return ["missing eigenvariable"]
        bad = _match_left(
            d,
            lambda f: isinstance(f, Quant2) and f.q == "Ex",
            lambda m, g, s: [sequent(g | {instantiate2_var(m, d.fvar)}, s)],
        )
        if bad:
            return bad
        if d.fvar in d.conclusion.sv():
            return [f"eigenvariable {d.fvar} occurs free in the conclusion"]
        return []

    if r == "Ex2R":
        if d.abstract is None:
            return ["missing witness abstract"]
        if not (isinstance(succ, Quant2) and succ.q == "Ex"):
            return ["succedent must be second-order existentially quantified"]
        if d.premises[0].conclusion != sequent(ant, instantiate2(succ, d.abstract)):
            return ["premise does not match the schema"]
        return []

    raise AssertionError(r)


def _calculus_violations(d, calc):
    out = []
    if calc.kind == "LI" and d.rule in SECOND_ORDER_RULES:
        out.append("second-order rule not available in LI")
    bound = -1 if calc.kind == "LI" else calc.n
    if calc.kind != "LIT":
        for f in d.conclusion.formulas():
            lv = level(f)
            if lv is NOT_PARAMETER_FREE or lv > bound:
                out.append(f"formula exceeds level {bound}: {fkey(f)}")
    return out


_LEFT_PICKERS = {
    "AndL": lambda f: isinstance(f, Bin) and f.op == AND,
    "OrL": lambda f: isinstance(f, Bin) and f.op == OR,
    "ImpL": lambda f: isinstance(f, Bin) and f.op == IMP,
    "AllL": lambda f: isinstance(f, Quant) and f.q == "all",
    "ExL": lambda f: isinstance(f, Quant) and f.q == "ex",
    "All2L": lambda f: isinstance(f, Quant2) and f.q == "All",
    "Ex2L": lambda f: isinstance(f, Quant2) and f.q == "Ex",
}


def _left_premises(d, main, gamma):
    succ = d.conclusion.succedent
    r = d.rule
    if r == "AndL":
        return [sequent(gamma | {main.left if d.side == 1 else main.right}, succ)]
    if r == "OrL":
        return [sequent(gamma | {main.left}, succ), sequent(gamma | {main.right}, succ)]
    if r == "ImpL":
        return [sequent(gamma, main.left), sequent(gamma | {main.right}, succ)]
    if r == "AllL":
        return [sequent(gamma | {instantiate(main, d.term)}, succ)]
    if r == "ExL":
        return [sequent(gamma | {instantiate(main, Var(d.fvar))}, succ)]
    if r == "All2L":
        return [sequent(gamma | {instantiate2(main, d.abstract)}, succ)]
    if r == "Ex2L":
        return [sequent(gamma | {instantiate2_var(main, d.fvar)}, succ)]
    raise AssertionError(r)


def left_mains(d):
    """Main-formula candidates of a valid left-rule node: the formulas whose
    rule instantiation reproduces the stored premises."""
    picker = _LEFT_PICKERS.get(d.rule)
    if picker is None:
        return []
    got = [p.conclusion for p in d.premises]
    out = []
    for main in d.conclusion.ant:
        if not picker(main):
            continue
        for gamma in _gammas(d.conclusion.ant, main):
            if _left_premises(d, main, gamma) == got:
                out.append(main)
                break
    return out


def left_main(d):
    mains = left_mains(d)
    return mains[0] if mains else None


def check(d, calc=LIT):
    """Violations of the full derivation against Fig.-1 schemas and the
    calculus restriction; empty list means the derivation is valid."""
    out = []

    def go(node, path):
        for reason in _check_node(node):
            out.append(Violation(path, node.rule, reason))
        for reason in _calculus_violations(node, calc):
            out.append(Violation(path, node.rule, reason))
        for i, p in enumerate(node.premises):
            go(p, path + (i,))

    go(d, ())
    return out


def check_ok(d, calc=LIT):
    return not check(d, calc)


# ---------------------------------------------------------------------------
# Admissible transformations


def weaken(d, extra):
    """Enlarge every antecedent by the given formulas, renaming
    eigenvariables that would clash.  Valid input yields valid output."""
    extra = frozenset(extra)
    if not extra:
        return d
    new_fv = set()
    new_sv = set()
    for f in extra:
        new_fv |= f.fv
        new_sv |= f.sv
    return _weaken(d, extra, new_fv, new_sv)


def _weaken(d, extra, new_fv, new_sv):
    node = d
    if node.rule in EIGEN_TERM_RULES and node.fvar in new_fv:
        fresh = fresh_term_var(used_term_names(node) | new_fv)
        prem = substitute_derivation(node.premises[0], term_subst={node.fvar: Var(fresh)})
        node = _replace(node, premises=(prem,), fvar=fresh)
    elif node.rule in EIGEN_SET_RULES and node.fvar in new_sv:
        from .formulas import identity_abstract

        fresh = fresh_set_var(used_set_names(node) | new_sv)
        prem = substitute_derivation(
            node.premises[0], set_subst={node.fvar: identity_abstract(fresh)}
        )
        node = _replace(node, premises=(prem,), fvar=fresh)
    prems = tuple(_weaken(p, extra, new_fv, new_sv) for p in node.premises)
    concl = sequent(node.conclusion.ant | extra, node.conclusion.succedent)
    return _replace(node, conclusion=concl, premises=prems)


def _replace(d, **kw):
    return Derivation(
        rule=kw.get("rule", d.rule),
        conclusion=kw.get("conclusion", d.conclusion),
        premises=kw.get("premises", d.premises),
        side=kw.get("side", d.side),
        term=kw.get("term", d.term),
        fvar=kw.get("fvar", d.fvar),
        formula=kw.get("formula", d.formula),
        abstract=kw.get("abstract", d.abstract),
    )


def subst_sequent(s, tmap, smap):
    ant = [substitute_sets(substitute_terms(f, tmap), smap) for f in s.antecedent]
    succ = s.succedent
    if succ is not None:
        succ = substitute_sets(substitute_terms(succ, tmap), smap)
    return sequent(ant, succ)


def substitute_derivation(d, term_subst=None, set_subst=None, calculus=None):
    """Apply a term/set substitution to a whole derivation, renaming
    eigenvariables where the binding would clash.

    For LIP(n) the bodies of substituted abstracts must have level <= n.
    """
    tmap = dict(term_subst or {})
    smap = dict(set_subst or {})
    if calculus is not None and calculus.kind != "LIT":
        bound = -1 if calculus.kind == "LI" else calculus.n
        for x, tau in smap.items():
            if not level_le(tau.body, bound):
                raise LevelViolation(
                    f"binding for {x} has level {abstract_level(tau)} > {bound}"
                )
    if not tmap and not smap:
        return d
    return _subst_deriv(d, tmap, smap)


def _subst_deriv(d, tmap, smap):
    node = d
    if node.rule in EIGEN_TERM_RULES:
        v = node.fvar
        clash = v in tmap or any(v in term_fv(t) for t in tmap.values()) or any(
            v in tau.fv for tau in smap.values()
        )
        if clash:
            avoid = used_term_names(node) | set(tmap) | set().union(
                *(term_fv(t) for t in tmap.values())
            )
            for tau in smap.values():
                avoid |= tau.fv
            fresh = fresh_term_var(avoid)
            prem = _subst_deriv(node.premises[0], {v: Var(fresh)}, {})
            node = _replace(node, premises=(prem,), fvar=fresh)
    elif node.rule in EIGEN_SET_RULES:
        v = node.fvar
        clash = v in smap or any(v in tau.sv for tau in smap.values())
        if clash:
            from .formulas import identity_abstract

            avoid = used_set_names(node) | set(smap)
            for tau in smap.values():
                avoid |= tau.sv
            fresh = fresh_set_var(avoid)
            prem = _subst_deriv(node.premises[0], {}, {v: identity_abstract(fresh)})
            node = _replace(node, premises=(prem,), fvar=fresh)

    prems = tuple(_subst_deriv(p, tmap, smap) for p in node.premises)
    concl = subst_sequent(node.conclusion, tmap, smap)
    term = replace_vars(node.term, tmap) if node.term is not None else None
    formula = node.formula
    if formula is not None:
        formula = substitute_sets(substitute_terms(formula, tmap), smap)
    abstr = node.abstract
    if abstr is not None:
        abstr = subst_abstract_sets(subst_abstract_terms(abstr, tmap), smap)
    return _replace(
        node, conclusion=concl, premises=prems, term=term, formula=formula, abstract=abstr
    )
