"""Bounded backward cut-free proof search for first-order sequents, plus the
budgeted omega-rule index-set machinery built on top of it.

The searcher applies invertible rules eagerly (committing to the first
applicable one) and backtracks over the choice rules (OrR, ImpL and the
term-instantiating quantifier rules).  Repeated sequents along a branch are
pruned, instantiation terms come only from the budget's candidate list plus
subterms of the current goal, and results are deterministic for fixed inputs.

Nothing here ever asserts non-membership of an index set: exhausting the
budget yields the explicit NotFoundWithinBudget verdict.
"""

from dataclasses import dataclass, field

from .errors import InvalidCertificate, LevelViolation, MissingPremise
from .formulas import (
    AND,
    IMP,
    OR,
    BOT,
    Bin,
    Quant,
    Quant2,
    Var,
    formula_terms,
    fresh_set_var,
    fresh_term_var,
    instantiate,
    instantiate2_var,
    level,
    subterms,
    term_fv,
)
from .printer import fkey, term_str
from .sequents import LI, Derivation, check, is_cut_free, sequent


@dataclass(frozen=True)
class SearchBudget:
    max_depth: int = 14
    max_nodes: int = 50000
    term_candidates: tuple = ()


class NotFoundWithinBudget:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NotFoundWithinBudget"

    def __bool__(self):
        return False


NOT_FOUND = NotFoundWithinBudget()


@dataclass(frozen=True)
class Member:
    """Certified membership in an omega-rule index set."""

    derivation: Derivation
    svar: str


class _Exhausted(Exception):
    pass


def _candidate_terms(goal, budget):
    """User candidates first, then subterms of the goal, deduplicated.
    Terms mentioning reserved bound-variable names are skipped: only terms
    meaningful outside their binders can serve as instantiations."""
    seen = []
    keys = set()
    pool = list(budget.term_candidates)
    goal_terms = []
    for f in goal.formulas():
        for t in formula_terms(f):
            goal_terms.extend(subterms(t))
    pool.extend(sorted(goal_terms, key=term_str))
    for t in pool:
        if any(name.startswith("_") for name in term_fv(t)):
            continue
        k = term_str(t)
        if k not in keys:
            keys.add(k)
            seen.append(t)
    return seen


def search_cutfree(goal, budget=SearchBudget()):
    """A cut-free LI derivation of the goal, or NotFoundWithinBudget."""
    for f in goal.formulas():
        if level(f) != -1:
            raise LevelViolation(f"search goal must be first order: {fkey(f)}")
    state = {"nodes": 0}
    fail_memo = {}

    def solve(g, depth, path):
        """Returns (derivation-or-None, pure).  pure means the failure did
        not involve a loop-check hit, so it may be memoized."""
        state["nodes"] += 1
        if state["nodes"] > budget.max_nodes:
            raise _Exhausted
        if g in path:
            return None, False
        if depth < 0:
            return None, True
        if fail_memo.get(g, -1) >= depth:
            return None, True
        ant = g.ant
        succ = g.succedent

        def done(result, pure):
            if result is None and pure:
                fail_memo[g] = max(fail_memo.get(g, -1), depth)
            return result, pure

        # closure
        if succ is not None and succ in ant:
            return Derivation("Id", g), True
        if BOT in ant:
            return Derivation("BotL", g), True

        path2 = path | {g}

        def sub(ant2, succ2):
            return solve(sequent(ant2, succ2), depth - 1, path2)

        # invertible rules: commit to the first applicable one
        for c in g.antecedent:
            if isinstance(c, Bin) and c.op == AND:
                rest = ant - {c}
                prem, pure = sub(rest | {c.left, c.right}, succ)
                if prem is None:
                    return done(None, pure)
                if c.left == c.right:
                    inner = prem
                else:
                    inner = Derivation(
                        "AndL", sequent(rest | {c, c.left}, succ), (prem,), side=2
                    )
                return Derivation("AndL", g, (inner,), side=1), True
        for c in g.antecedent:
            if isinstance(c, Bin) and c.op == OR:
                rest = ant - {c}
                p1, pure1 = sub(rest | {c.left}, succ)
                if p1 is None:
                    return done(None, pure1)
                p2, pure2 = sub(rest | {c.right}, succ)
                if p2 is None:
                    return done(None, pure2)
                return Derivation("OrL", g, (p1, p2)), True
        if isinstance(succ, Bin) and succ.op == IMP:
            prem, pure = sub(ant | {succ.left}, succ.right)
            if prem is None:
                return done(None, pure)
            return Derivation("ImpR", g, (prem,)), True
        if isinstance(succ, Bin) and succ.op == AND:
            p1, pure1 = sub(ant, succ.left)
            if p1 is None:
                return done(None, pure1)
            p2, pure2 = sub(ant, succ.right)
            if p2 is None:
                return done(None, pure2)
            return Derivation("AndR", g, (p1, p2)), True
        if isinstance(succ, Quant) and succ.q == "all":
            y = fresh_term_var(g.fv())
            prem, pure = sub(ant, instantiate(succ, Var(y)))
            if prem is None:
                return done(None, pure)
            return Derivation("AllR", g, (prem,), fvar=y), True
        for c in g.antecedent:
            if isinstance(c, Quant) and c.q == "ex":
                y = fresh_term_var(g.fv())
                rest = ant - {c}
                prem, pure = sub(rest | {instantiate(c, Var(y))}, succ)
                if prem is None:
                    return done(None, pure)
                return Derivation("ExL", g, (prem,), fvar=y), True
        if succ == BOT:
            prem, pure = sub(ant, None)
            if prem is None:
                return done(None, pure)
            return Derivation("BotR", g, (prem,)), True

        # choice rules: backtrack
        pure_all = True
        if isinstance(succ, Bin) and succ.op == OR:
            for side, comp in ((1, succ.left), (2, succ.right)):
                prem, pure = sub(ant, comp)
                if prem is not None:
                    return Derivation("OrR", g, (prem,), side=side), True
                pure_all = pure_all and pure
        for c in g.antecedent:
            if isinstance(c, Bin) and c.op == IMP:
                # the main formula is retained in both premises
                p1, pure1 = sub(ant, c.left)
                if p1 is None:
                    pure_all = pure_all and pure1
                    continue
                p2, pure2 = sub(ant | {c.right}, succ)
                if p2 is None:
                    pure_all = pure_all and pure2
                    continue
                return Derivation("ImpL", g, (p1, p2)), True
        terms = None
        for c in g.antecedent:
            if isinstance(c, Quant) and c.q == "all":
                terms = _candidate_terms(g, budget) if terms is None else terms
                for t in terms:
                    prem, pure = sub(ant | {instantiate(c, t)}, succ)
                    if prem is not None:
                        return Derivation("AllL", g, (prem,), term=t), True
                    pure_all = pure_all and pure
        if isinstance(succ, Quant) and succ.q == "ex":
            terms = _candidate_terms(g, budget) if terms is None else terms
            for t in terms:
                prem, pure = sub(ant, instantiate(succ, t))
                if prem is not None:
                    return Derivation("ExR", g, (prem,), term=t), True
                pure_all = pure_all and pure
        return done(None, pure_all)

    try:
        result, _ = solve(goal, budget.max_depth, frozenset())
    except _Exhausted:
        return NOT_FOUND
    return result if result is not None else NOT_FOUND


# ---------------------------------------------------------------------------
# Omega-rule index sets, at index 0: the oracle calculus is LI


def _require_first_order(fs, what):
    for f in fs:
        if level(f) != -1:
            raise LevelViolation(f"{what} must be first order: {fkey(f)}")


def defining_sequent(q, delta, lam=None, svar=None):
    """The sequent whose cut-free provability defines membership of
    delta (and lam, on the existential side) in the index set of q."""
    if not isinstance(q, Quant2):
        raise LevelViolation("membership asks for a second-order quantified formula")
    if level(q) != 0:
        raise LevelViolation(f"index sets are exercised at level 0, got {level(q)}")
    _require_first_order(delta, "index-set context")
    if lam is not None:
        _require_first_order([lam], "index-set succedent")
    avoid = set().union(*(f.sv for f in delta)) if delta else set()
    if lam is not None:
        avoid |= lam.sv
    y = svar or fresh_set_var(avoid)
    minor = instantiate2_var(q, y)
    if q.q == "All":
        return sequent(delta, minor), y
    return sequent(set(delta) | {minor}, lam), y


def omega_membership(q, delta, lam=None, budget=SearchBudget()):
    """Budgeted membership of delta in |All X.phi|_0 (or of the sequent
    delta => lam in |Ex X.phi|_0), certified by a cut-free derivation."""
    goal, y = defining_sequent(q, delta, lam)
    found = search_cutfree(goal, budget)
    if found is NOT_FOUND:
        return NOT_FOUND
    return Member(found, y)


def certificate_svar(q, left, gamma):
    """The fresh variable under which `left` proves the defining sequent of
    gamma for q, or None if it proves no such sequent."""
    concl = left.conclusion
    if q.q == "All":
        if concl.ant != frozenset(gamma) or concl.succedent is None:
            return None
        cands = sorted(concl.succedent.sv) or [fresh_set_var(set())]
    else:
        return None
    free_in_gamma = set().union(*(f.sv for f in gamma)) if gamma else set()
    for y in cands:
        if y in free_in_gamma:
            continue
        want, _ = defining_sequent(q, gamma, svar=y)
        if concl == want:
            return y
    return None


def omega_cut_reduce(gamma, q, left, premise_table):
    """The finite demonstration of the cut-reduction step against an
    omega-rule node: certify gamma's membership with `left`, then return the
    stored premise derivation for gamma itself.

    premise_table maps finite formula sets (frozensets) to derivations of
    `key, gamma => Pi`.
    """
    gamma = frozenset(gamma)
    if not is_cut_free(left):
        raise InvalidCertificate("certificate derivation contains a cut")
    bad = check(left, LI)
    if bad:
        raise InvalidCertificate(f"certificate fails checking: {bad[0]}")
    y = certificate_svar(q, left, gamma)
    if y is None:
        raise InvalidCertificate(
            "certificate endsequent is not the defining sequent for gamma"
        )
    key = gamma
    table = {frozenset(k): v for k, v in premise_table.items()}
    if key not in table:
        raise MissingPremise(f"no premise stored for {{{', '.join(sorted(fkey(f) for f in gamma))}}}")
    result = table[key]
    pi = result.conclusion.succedent
    for k, d in sorted(table.items(), key=lambda kv: sorted(map(fkey, kv[0]))):
        bad = check(d, LI)
        if bad:
            raise InvalidCertificate(f"stored premise fails checking: {bad[0]}")
        want = sequent(k | gamma, d.conclusion.succedent)
        if d.conclusion != want:
            raise InvalidCertificate(
                f"stored premise endsequent is not its key extended by gamma: {d.conclusion}"
            )
    if result.conclusion != sequent(gamma, pi):
        raise InvalidCertificate("gamma's premise does not conclude gamma => Pi")
    return result
