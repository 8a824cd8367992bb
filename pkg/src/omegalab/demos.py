"""The two desk-scale demonstrations: the three-chain structure where the
bot-targeted omega rule fails, and the finite omega-cut reduction.

Every number in the reports is computed by the core modules; nothing is
hard-coded, so swapping the algebra changes the output.
"""

from dataclasses import dataclass
from fractions import Fraction

from .formulas import BOT, atom, const, disj, forall2, imp, satom
from .parser import parse_formula
from .printer import fkey
from .search import (
    NOT_FOUND,
    Member,
    SearchBudget,
    omega_cut_reduce,
    omega_membership,
    search_cutfree,
)
from .semantics import full_structure, interpret, omega_soundness_probe
from .sequents import sequent
from .lattice import three_chain


@dataclass(frozen=True)
class CounterexampleReport:
    algebra_names: tuple
    per_valuation: tuple  # (F(*) element name, value name) sorted by F(*)
    q_value: str
    certified: tuple  # (delta serialization, value name)
    uncertified: tuple
    unsound_instance: bool


def counterexample_demo(algebra=None, budget=SearchBudget()):
    """The bot-targeted omega-rule instance for All X.((X(*)->bot)|X(*)) on
    a full structure over the single-constant language.

    On the three-element chain the per-valuation values are 1, 0.5, 1, their
    meet is 0.5, every certified premise set evaluates to 0, and the
    instance is flagged unsound."""
    alg = algebra or three_chain()
    star = const("*")
    phi = disj(imp(satom("X", star), BOT), satom("X", star))
    q = forall2("X", phi)
    s = full_structure(alg, (("*", 0),), {"r": {(): alg.top}})
    pool = [(), (BOT,), (atom("r"),), (BOT, atom("r"))]
    report = omega_soundness_probe(s, q, pool, budget)
    body = phi
    per_val = []
    for F in s.domain:
        value = interpret(body, s, {"X": F})
        per_val.append((alg.name(F[0]), alg.name(value)))
    per_val.sort(key=lambda kv: kv[0])
    certified = tuple(
        (", ".join(fkey(f) for f in e.delta) or "<empty>", alg.name(e.value))
        for e in report.entries
        if e.certified
    )
    uncertified = tuple(
        ", ".join(fkey(f) for f in e.delta) or "<empty>"
        for e in report.entries
        if not e.certified
    )
    return CounterexampleReport(
        tuple(alg.name(a) for a in range(alg.size)),
        tuple(per_val),
        alg.name(report.q_value),
        certified,
        uncertified,
        report.unsound_instance,
    )


def fraction_values(report):
    """The report's per-valuation values as exact rationals (demands the
    algebra's element names to be rational literals, as in the default
    three-chain)."""
    return tuple(Fraction(v) for _, v in report.per_valuation)


@dataclass(frozen=True)
class OmegaCutReport:
    provable_member: bool
    unprovable_verdict: str
    reduced_matches: bool
    endsequent: str
    certificate_nodes: int


def omega_cut_demo(budget=SearchBudget()):
    """The finite reduction of a cut against a bot-targeted omega node:
    the certificate proves |- Y(c) -> Y(c), the stored premise for the empty
    context is returned unchanged, and the paper's unprovable instance
    (empty context against All X.(X(c) -> X(x))) stays NotFoundWithinBudget."""
    q_provable = forall2("X", parse_formula("X(c) -> X(c)"))
    q_unprovable = forall2("X", parse_formula("X(c) -> X(x)"))

    member = omega_membership(q_provable, (), budget=budget)
    assert isinstance(member, Member)
    not_member = omega_membership(q_unprovable, (), budget=budget)
    bot_member = omega_membership(q_unprovable, (BOT,), budget=budget)
    assert isinstance(bot_member, Member)

    target = parse_formula("p -> p")
    stored = search_cutfree(sequent((), target), budget)
    table = {frozenset(): stored, frozenset((BOT,)): search_cutfree(sequent((BOT,), target), budget)}
    reduced = omega_cut_reduce((), q_provable, member.derivation, table)
    return OmegaCutReport(
        provable_member=isinstance(member, Member),
        unprovable_verdict=repr(not_member),
        reduced_matches=reduced == stored,
        endsequent=str(reduced.conclusion),
        certificate_nodes=member.derivation.nodes,
    )
