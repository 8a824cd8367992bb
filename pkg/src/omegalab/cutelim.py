"""Rank-stratified cut elimination for first-order derivations, plus Craig
interpolation on cut-free derivations by the usual partition induction.

The eliminator lowers the cut-rank budget one step at a time: a pass at
budget t replays the two reduction lemmas (recursion over the left premise
until the cut formula is principal, then over the right premise, then the
principal/principal collision introducing strictly lower-rank cuts).  The
first-order quantifier collisions are resolved by substituting the witness
term for the eigenvariable; a bot/bot collision re-targets an
empty-succedent derivation.  Every recursive call strictly decreases the
lexicographic measure (left size, right size, phase), which a debug
assertion enforces.
"""

from dataclasses import dataclass

from .errors import InvalidDerivation, InvalidPartition, NotCutFree
from .formulas import (
    AND,
    IMP,
    OR,
    BOT,
    Bin,
    Quant,
    Var,
    conj,
    disj,
    exists,
    forall,
    fresh_term_var,
    imp,
    predicate_symbols,
    rank,
    top,
)
from . import builders as B
from .sequents import (
    LI,
    Derivation,
    check,
    cut_formulas,
    is_cut_free,
    left_main,
    left_mains,
    sequent,
    substitute_derivation,
    used_term_names,
)

_RIGHT_INTRO = frozenset({"ImpR", "AndR", "OrR", "AllR", "ExR", "BotR"})

_PRINCIPAL_PAIR = {
    "AndR": "AndL",
    "OrR": "OrL",
    "ImpR": "ImpL",
    "AllR": "AllL",
    "ExR": "ExL",
}


@dataclass(frozen=True)
class RankBudget:
    """A derivation satisfies the budget iff every cut formula has rank
    strictly below m."""

    m: int

    def satisfied_by(self, d):
        return all(rank(f) < self.m for f in cut_formulas(d))


@dataclass(frozen=True)
class EliminationPass:
    budget: int
    max_rank_before: int
    nodes_before: int
    nodes_after: int


def max_cut_rank(d):
    ranks = [rank(f) for f in cut_formulas(d)]
    return max(ranks) if ranks else -1


def _rename_eigen(d, fresh):
    prem = substitute_derivation(d.premises[0], term_subst={d.fvar: Var(fresh)})
    return Derivation(
        d.rule, d.conclusion, (prem,), side=d.side, term=d.term, fvar=fresh
    )


def _norm(out, gamma, pi):
    out = B.weaken_to(out, gamma)
    assert out.conclusion == sequent(gamma, pi), "cut reduction changed the endsequent"
    return out


def _cut1(dl, dr, phi, t, _meas=(None,)):
    """Lemma shape: dl proves Gamma => phi, dr proves phi, Gamma => Pi, with
    rank(phi) <= t and all cuts in dl, dr of rank < t.  Returns a derivation
    of Gamma => Pi with all cuts of rank < t."""
    meas = (dl.nodes, dr.nodes, 1)
    assert _meas == (None,) or meas < _meas, "termination measure did not decrease"
    gamma = B.ctx(dl) | (B.ctx(dr) - {phi})
    pi = B.succ(dr)
    if phi in gamma:
        # the cut formula is already available: dr proves the target
        return _norm(B.weaken_to(dr, gamma), gamma, pi)
    dl = B.weaken_to(dl, gamma)
    dr = B.weaken_to(dr, gamma | {phi})

    if dl.rule == "Id":
        # phi already sits in gamma, so dr's conclusion is the target
        return _norm(dr, gamma, pi)
    if dl.rule == "BotL":
        return Derivation("BotL", sequent(gamma, pi))
    if dl.rule in _RIGHT_INTRO:
        return _norm(_cut0(dl, dr, phi, t, meas), gamma, pi)
    if dl.rule == "Cut":
        p1, p2 = dl.premises
        q2 = _cut1(p2, dr, phi, t, meas)
        return _norm(B.cut(p1, q2), gamma, pi)

    main = left_main(dl)
    assert main is not None, f"unexpected rule {dl.rule} proving the cut formula"
    if dl.rule == "AndL":
        q = _cut1(dl.premises[0], dr, phi, t, meas)
        return _norm(B.and_l(dl.side, main, q), gamma, pi)
    if dl.rule == "OrL":
        q1 = _cut1(dl.premises[0], dr, phi, t, meas)
        q2 = _cut1(dl.premises[1], dr, phi, t, meas)
        return _norm(B.or_l(main, q1, q2), gamma, pi)
    if dl.rule == "ImpL":
        q2 = _cut1(dl.premises[1], dr, phi, t, meas)
        return _norm(B.imp_l(main, dl.premises[0], q2), gamma, pi)
    if dl.rule == "AllL":
        q = _cut1(dl.premises[0], dr, phi, t, meas)
        return _norm(B.all_l(main, dl.term, q), gamma, pi)
    if dl.rule == "ExL":
        avoid = pi.fv if pi is not None else set()
        if dl.fvar in avoid:
            taken = set(avoid) | gamma_names(gamma) | used_term_names(dl)
            dl = _rename_eigen(dl, fresh_term_var(taken))
        q = _cut1(dl.premises[0], dr, phi, t, meas)
        return _norm(B.ex_l(main, dl.fvar, q), gamma, pi)
    raise AssertionError(f"unhandled rule {dl.rule} in cut reduction")


def gamma_names(gamma):
    out = set()
    for f in gamma:
        out |= f.fv
    return out


def _cut0(dl, dr, phi, t, _meas=(None,)):
    """dl's last inference introduces phi on the right; recursion over dr."""
    meas = (dl.nodes, dr.nodes, 0)
    assert _meas == (None,) or meas < _meas, "termination measure did not decrease"
    gamma = B.ctx(dl) | (B.ctx(dr) - {phi})
    pi = B.succ(dr)
    if phi in gamma:
        return _norm(B.weaken_to(dr, gamma), gamma, pi)
    dl = B.weaken_to(dl, gamma)
    dr = B.weaken_to(dr, gamma | {phi})

    if dr.rule == "Id":
        if pi == phi:
            return _norm(dl, gamma, pi)
        return Derivation("Id", sequent(gamma, pi))
    if dr.rule == "BotL":
        if BOT in gamma:
            return Derivation("BotL", sequent(gamma, pi))
        # principal bot collision: dl ends with BotR
        assert phi == BOT and dl.rule == "BotR"
        return _norm(_succ_fill(dl.premises[0], pi), gamma, pi)

    principal = (
        dr.rule == _PRINCIPAL_PAIR.get(dl.rule) and phi in left_mains(dr)
    )

    if principal:
        def clean(p):
            if phi in B.ctx(p):
                return _cut0(dl, p, phi, t, meas)
            return B.weaken_to(p, (B.ctx(p) | gamma) - {phi})

        if dl.rule == "AndR":  # vs AndL
            comp_proof = dl.premises[dr.side - 1]
            return _norm(B.cut(comp_proof, clean(dr.premises[0])), gamma, pi)
        if dl.rule == "OrR":  # vs OrL
            branch = clean(dr.premises[dl.side - 1])
            return _norm(B.cut(dl.premises[0], branch), gamma, pi)
        if dl.rule == "ImpR":  # vs ImpL: two lower-rank cuts
            p1 = clean(dr.premises[0])
            p2 = clean(dr.premises[1])
            mid = B.cut(dl.premises[0], p2)  # cut on phi.right
            return _norm(B.cut(p1, mid), gamma, pi)
        if dl.rule == "AllR":  # vs AllL: substitute the witness
            inst = substitute_derivation(
                dl.premises[0], term_subst={dl.fvar: dr.term}
            )
            return _norm(B.cut(inst, clean(dr.premises[0])), gamma, pi)
        if dl.rule == "ExR":  # vs ExL
            p = clean(dr.premises[0])
            inst = substitute_derivation(p, term_subst={dr.fvar: dl.term})
            return _norm(B.cut(dl.premises[0], inst), gamma, pi)
        raise AssertionError(f"unhandled principal pair {dl.rule}/{dr.rule}")

    # phi is not main in dr's last inference: push the cut into the premises
    cleaned = []
    for p in dr.premises:
        assert phi in B.ctx(p), "premise of a non-principal step lost the cut formula"
        cleaned.append(_cut0(dl, p, phi, t, meas))
    succ_dr = B.succ(dr)
    if dr.rule == "ImpR":
        return _norm(B.imp_r(succ_dr.left, cleaned[0]), gamma, pi)
    if dr.rule == "AndR":
        return _norm(B.and_r(cleaned[0], cleaned[1]), gamma, pi)
    if dr.rule == "OrR":
        return _norm(B.or_r(dr.side, succ_dr, cleaned[0]), gamma, pi)
    if dr.rule == "BotR":
        return _norm(B.bot_r(cleaned[0]), gamma, pi)
    if dr.rule == "AllR":
        return _norm(B.all_r(succ_dr, dr.fvar, cleaned[0]), gamma, pi)
    if dr.rule == "Cut":
        return _norm(B.cut(cleaned[0], cleaned[1]), gamma, pi)
    main = left_main(dr)
    assert main is not None and main != phi
    if dr.rule == "AndL":
        return _norm(B.and_l(dr.side, main, cleaned[0]), gamma, pi)
    if dr.rule == "OrL":
        return _norm(B.or_l(main, cleaned[0], cleaned[1]), gamma, pi)
    if dr.rule == "ImpL":
        return _norm(B.imp_l(main, cleaned[0], cleaned[1]), gamma, pi)
    if dr.rule == "AllL":
        return _norm(B.all_l(main, dr.term, cleaned[0]), gamma, pi)
    if dr.rule == "ExL":
        return _norm(B.ex_l(main, dr.fvar, cleaned[0]), gamma, pi)
    raise AssertionError(f"unhandled rule {dr.rule} in cut reduction")


def _succ_fill(d, psi):
    """Re-target an empty-succedent derivation at the succedent psi."""
    if psi is None:
        return d
    assert B.succ(d) is None
    if d.rule == "BotL":
        return Derivation("BotL", sequent(B.ctx(d), psi))
    if d.rule == "Cut":
        return B.cut(d.premises[0], _succ_fill(d.premises[1], psi))
    main = left_main(d)
    assert main is not None, f"rule {d.rule} cannot conclude an empty succedent"
    if d.rule == "AndL":
        return B.and_l(d.side, main, _succ_fill(d.premises[0], psi))
    if d.rule == "OrL":
        return B.or_l(main, _succ_fill(d.premises[0], psi), _succ_fill(d.premises[1], psi))
    if d.rule == "ImpL":
        return B.imp_l(main, d.premises[0], _succ_fill(d.premises[1], psi))
    if d.rule == "AllL":
        return B.all_l(main, d.term, _succ_fill(d.premises[0], psi))
    if d.rule == "ExL":
        node = d
        if node.fvar in psi.fv:
            node = _rename_eigen(node, fresh_term_var(psi.fv | used_term_names(node)))
        return B.ex_l(main, node.fvar, _succ_fill(node.premises[0], psi))
    raise AssertionError(d.rule)


def _lower(d, t):
    """One budget step: from all cut ranks <= t to all cut ranks < t."""
    prems = tuple(_lower(p, t) for p in d.premises)
    node = d if prems == d.premises else Derivation(
        d.rule, d.conclusion, prems, side=d.side, term=d.term,
        fvar=d.fvar, formula=d.formula, abstract=d.abstract,
    )
    if node.rule == "Cut" and rank(node.formula) >= t:
        return _cut1(node.premises[0], node.premises[1], node.formula, t)
    return node


def eliminate_cuts(d):
    out, _ = eliminate_cuts_with_report(d)
    return out


def eliminate_cuts_with_report(d):
    """Cut-free derivation with the same endsequent, plus per-pass stats."""
    bad = check(d, LI)
    if bad:
        raise InvalidDerivation(f"input fails LI checking: {bad[0]}")
    end = d.conclusion
    passes = []
    while True:
        m = max_cut_rank(d)
        if m < 0:
            break
        before = d.nodes
        d = _lower(d, m)
        passes.append(EliminationPass(m, m, before, d.nodes))
        assert d.conclusion == end
        assert max_cut_rank(d) < m, "budget did not descend"
    assert is_cut_free(d)
    return d, tuple(passes)


# ---------------------------------------------------------------------------
# Craig interpolation (partition induction on cut-free derivations)


def _vocab(fs):
    preds = set()
    for f in fs:
        preds |= predicate_symbols(f)
        preds |= f.sv
    return preds


def _free(fs):
    out = set()
    for f in fs:
        out |= f.fv
    return out


def _close_bad_vars(i, quantifier, bad):
    for v in sorted(bad):
        i = forall(v, i) if quantifier == "all" else exists(v, i)
    return i


def simplify_constants(f):
    """Fold verum/falsum through connectives and vacuous quantifiers; every
    step is an intuitionistic equivalence that only shrinks the vocabulary."""
    t = top()
    if isinstance(f, Bin):
        a = simplify_constants(f.left)
        b = simplify_constants(f.right)
        if f.op == AND:
            if a == t:
                return b
            if b == t:
                return a
            if a == BOT or b == BOT:
                return BOT
            return conj(a, b)
        if f.op == OR:
            if a == BOT:
                return b
            if b == BOT:
                return a
            if a == t or b == t:
                return t
            return disj(a, b)
        if f.op == IMP:
            if a == t:
                return b
            if a == BOT or b == t:
                return t
            return imp(a, b)
    if isinstance(f, Quant):
        body = simplify_constants(f.body)
        if f.v not in body.fv:
            return body
        rebuilt = forall(f.v, body) if f.q == "all" else exists(f.v, body)
        return rebuilt
    return f


def interpolate(d, left, right=None):
    """Maehara-style interpolant for a partition of the antecedent; the
    succedent belongs to the right part.

    Returns a formula I with left => I and I, right => succedent provable,
    built over the shared predicate/set-variable/term-variable vocabulary.
    """
    bad = check(d, LI)
    if bad:
        raise InvalidDerivation(f"input fails LI checking: {bad[0]}")
    if not is_cut_free(d):
        raise NotCutFree("interpolation expects a cut-free derivation")
    left = frozenset(left)
    right = frozenset(right) if right is not None else d.conclusion.ant - left
    if left | right != d.conclusion.ant or left & right:
        raise InvalidPartition("partition must split the antecedent exactly")
    return simplify_constants(_interp(d, left, right))


def _child_split(child_ant, left, right, introduced, intro_side):
    lp, rp = set(), set()
    for f in child_ant:
        if f in left:
            lp.add(f)
        elif f in right:
            rp.add(f)
        else:
            assert f in introduced, "partition lost track of a formula"
            (lp if intro_side == "L" else rp).add(f)
    return frozenset(lp), frozenset(rp)


def _interp(d, left, right):
    succ = B.succ(d)
    rule = d.rule

    if rule == "Id":
        return succ if succ in left else top()
    if rule == "BotL":
        return BOT if BOT in left else top()
    if rule == "BotR":
        return _interp(d.premises[0], left, right)

    if rule in ("AndR", "OrR", "AllR", "ExR"):
        if rule == "AndR":
            return conj(
                _interp(d.premises[0], left, right),
                _interp(d.premises[1], left, right),
            )
        if rule == "OrR":
            return _interp(d.premises[0], left, right)
        if rule == "AllR":
            i = _interp(d.premises[0], left, right)
            if d.fvar in i.fv:
                i = forall(d.fvar, i)
            return i
        # ExR: the witness may mention variables absent from the conclusion
        i = _interp(d.premises[0], left, right)
        shared = _free(left) & (_free(right) | (succ.fv if succ else set()))
        return _close_bad_vars(i, "ex", i.fv - shared)

    if rule == "ImpR":
        lp, rp = _child_split(
            d.premises[0].conclusion.ant, left, right, {succ.left}, "R"
        )
        return _interp(d.premises[0], lp, rp)

    main = left_main(d)
    assert main is not None, f"unhandled rule {rule}"
    side = "L" if main in left else "R"

    if rule == "AndL":
        comp = main.left if d.side == 1 else main.right
        lp, rp = _child_split(d.premises[0].conclusion.ant, left, right, {comp}, side)
        return _interp(d.premises[0], lp, rp)

    if rule == "OrL":
        ls, rs = [], []
        for k, comp in ((0, main.left), (1, main.right)):
            lp, rp = _child_split(
                d.premises[k].conclusion.ant, left, right, {comp}, side
            )
            ls.append(_interp(d.premises[k], lp, rp))
        i1, i2 = ls
        return disj(i1, i2) if side == "L" else conj(i1, i2)

    if rule == "ImpL":
        p1, p2 = d.premises
        if side == "R":
            lp1, rp1 = _child_split(p1.conclusion.ant, left, right, set(), "R")
            i1 = _interp(p1, lp1, rp1)
            lp2, rp2 = _child_split(p2.conclusion.ant, left, right, {main.right}, "R")
            i2 = _interp(p2, lp2, rp2)
            return conj(i1, i2)
        # main on the left: premise 1 is interpolated with the parts swapped
        lp1, rp1 = _child_split(p1.conclusion.ant, right, left, set(), "R")
        j1 = _interp(p1, lp1, rp1)
        lp2, rp2 = _child_split(p2.conclusion.ant, left, right, {main.right}, "L")
        j2 = _interp(p2, lp2, rp2)
        return imp(j1, j2)

    if rule == "AllL":
        minor = d.premises[0].conclusion.ant - (left | right)
        lp, rp = _child_split(d.premises[0].conclusion.ant, left, right, minor, side)
        i = _interp(d.premises[0], lp, rp)
        shared = _free(left) & (_free(right) | (succ.fv if succ else set()))
        return _close_bad_vars(i, "all" if side == "L" else "ex", i.fv - shared)

    if rule == "ExL":
        minor = d.premises[0].conclusion.ant - (left | right)
        lp, rp = _child_split(d.premises[0].conclusion.ant, left, right, minor, side)
        i = _interp(d.premises[0], lp, rp)
        if d.fvar in i.fv:
            i = exists(d.fvar, i) if side == "L" else forall(d.fvar, i)
        return i

    raise AssertionError(f"unhandled rule {rule} in interpolation")
