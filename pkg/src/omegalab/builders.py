"""Forward construction of derivations, one combinator per inference rule.

Binary combinators align the contexts of their premises by weakening, so
generator code can compose lemmas without threading an ambient context by
hand.  Every combinator produces a node the kernel checker accepts, provided
its inputs are valid and the stated preconditions hold; violations raise
AssertionError immediately instead of surfacing later in check().
"""

from .formulas import (
    AND,
    IMP,
    OR,
    BOT,
    Bin,
    Quant,
    Quant2,
    Var,
    conj,
    disj,
    imp,
    instantiate,
    instantiate2,
    instantiate2_var,
)
from .sequents import Derivation, sequent, weaken


def ctx(d):
    return d.conclusion.ant


def succ(d):
    return d.conclusion.succedent


def weaken_to(d, target_ant):
    extra = frozenset(target_ant) - ctx(d)
    return weaken(d, extra) if extra else d


def by_id(phi, gamma=()):
    return Derivation("Id", sequent(set(gamma) | {phi}, phi))


def bot_l(gamma, pi=None):
    assert BOT in set(gamma), "bot_l needs bot in the context"
    return Derivation("BotL", sequent(set(gamma) | {BOT}, pi))


def bot_r(d):
    assert succ(d) is None
    return Derivation("BotR", sequent(ctx(d), BOT), (d,))


def cut(d_left, d_right):
    """Cut on the succedent of d_left, which must occur in d_right's context."""
    phi = succ(d_left)
    assert phi is not None and phi in ctx(d_right), "cut formula missing on the right"
    gamma = ctx(d_left) | (ctx(d_right) - {phi})
    l = weaken_to(d_left, gamma)
    r = weaken_to(d_right, gamma | {phi})
    return Derivation(
        "Cut", sequent(gamma, succ(d_right)), (l, r), formula=phi
    )


def and_l(side, main, d):
    assert isinstance(main, Bin) and main.op == AND
    comp = main.left if side == 1 else main.right
    assert comp in ctx(d), "projected conjunct missing from the premise"
    gamma = ctx(d) - {comp}
    return Derivation("AndL", sequent(gamma | {main}, succ(d)), (d,), side=side)


def and_r(d1, d2):
    gamma = ctx(d1) | ctx(d2)
    l, r = weaken_to(d1, gamma), weaken_to(d2, gamma)
    return Derivation("AndR", sequent(gamma, conj(succ(d1), succ(d2))), (l, r))


def or_l(main, d1, d2):
    assert isinstance(main, Bin) and main.op == OR
    assert main.left in ctx(d1) and main.right in ctx(d2)
    assert succ(d1) == succ(d2), "disjunction branches must share the succedent"
    gamma = (ctx(d1) - {main.left}) | (ctx(d2) - {main.right})
    l = weaken_to(d1, gamma | {main.left})
    r = weaken_to(d2, gamma | {main.right})
    return Derivation("OrL", sequent(gamma | {main}, succ(d1)), (l, r))


def or_r(side, main, d):
    assert isinstance(main, Bin) and main.op == OR
    comp = main.left if side == 1 else main.right
    assert succ(d) == comp
    return Derivation("OrR", sequent(ctx(d), main), (d,), side=side)


def imp_l(main, d1, d2):
    """From d1: Gamma1 => phi1 and d2: phi2, Gamma2 => Pi conclude
    phi1 -> phi2, Gamma => Pi."""
    assert isinstance(main, Bin) and main.op == IMP
    assert succ(d1) == main.left and main.right in ctx(d2)
    gamma = ctx(d1) | (ctx(d2) - {main.right})
    l = weaken_to(d1, gamma)
    r = weaken_to(d2, gamma | {main.right})
    return Derivation("ImpL", sequent(gamma | {main}, succ(d2)), (l, r))


def imp_r(hyp, d):
    d = weaken_to(d, ctx(d) | {hyp})
    gamma = ctx(d) - {hyp}
    return Derivation("ImpR", sequent(gamma, imp(hyp, succ(d))), (d,))


def all_l(main, t, d):
    assert isinstance(main, Quant) and main.q == "all"
    minor = instantiate(main, t)
    assert minor in ctx(d), "instantiated body missing from the premise"
    gamma = ctx(d) - {minor}
    return Derivation("AllL", sequent(gamma | {main}, succ(d)), (d,), term=t)


def all_r(main, y, d):
    assert isinstance(main, Quant) and main.q == "all"
    assert succ(d) == instantiate(main, Var(y))
    assert y not in sequent(ctx(d), main).fv(), f"eigenvariable {y} not fresh"
    return Derivation("AllR", sequent(ctx(d), main), (d,), fvar=y)


def ex_l(main, y, d):
    assert isinstance(main, Quant) and main.q == "ex"
    minor = instantiate(main, Var(y))
    assert minor in ctx(d)
    gamma = ctx(d) - {minor}
    concl = sequent(gamma | {main}, succ(d))
    assert y not in concl.fv(), f"eigenvariable {y} not fresh"
    return Derivation("ExL", concl, (d,), fvar=y)


def ex_r(main, t, d):
    assert isinstance(main, Quant) and main.q == "ex"
    assert succ(d) == instantiate(main, t)
    return Derivation("ExR", sequent(ctx(d), main), (d,), term=t)


def all2_l(main, tau, d):
    assert isinstance(main, Quant2) and main.q == "All"
    minor = instantiate2(main, tau)
    assert minor in ctx(d), "instantiated body missing from the premise"
    gamma = ctx(d) - {minor}
    return Derivation("All2L", sequent(gamma | {main}, succ(d)), (d,), abstract=tau)


def all2_r(main, Y, d):
    assert isinstance(main, Quant2) and main.q == "All"
    assert succ(d) == instantiate2_var(main, Y)
    assert Y not in sequent(ctx(d), main).sv(), f"eigenvariable {Y} not fresh"
    return Derivation("All2R", sequent(ctx(d), main), (d,), fvar=Y)


def ex2_l(main, Y, d):
    assert isinstance(main, Quant2) and main.q == "Ex"
    minor = instantiate2_var(main, Y)
    assert minor in ctx(d)
    gamma = ctx(d) - {minor}
    concl = sequent(gamma | {main}, succ(d))
    assert Y not in concl.sv(), f"eigenvariable {Y} not fresh"
    return Derivation("Ex2L", concl, (d,), fvar=Y)


def ex2_r(main, tau, d):
    assert isinstance(main, Quant2) and main.q == "Ex"
    assert succ(d) == instantiate2(main, tau)
    return Derivation("Ex2R", sequent(ctx(d), main), (d,), abstract=tau)


def and_l_both(main, d):
    """Absorb both conjuncts of the context into the conjunction itself:
    from phi1, phi2, Gamma => Pi conclude phi1 & phi2, Gamma => Pi."""
    assert isinstance(main, Bin) and main.op == AND
    assert main.left in ctx(d) and main.right in ctx(d)
    step = and_l(2, main, d)  # consumes main.right, keeps main.left
    return and_l(1, main, weaken_to(step, ctx(step)))


def mp(main, d_hyp):
    """From d_hyp: Gamma => phi1 derive phi1 -> phi2, Gamma => phi2."""
    return imp_l(main, d_hyp, by_id(main.right))


def id_in(phi, gamma):
    """Id node for phi inside an explicit ambient context."""
    return by_id(phi, gamma)
