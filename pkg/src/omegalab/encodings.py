"""Machine-built derivations for the arithmetic-in-logic encodings: the
second-order natural-number predicate, relativization, induction, least
fixed points and the translation of fixed-point formulas.

Everything here is a generator returning derivation trees the kernel
checker accepts in the stated calculus; nothing is trusted.  The generators
lean on three engines:

  * absorb/forall_elim: structural glue for conjunction spines and
    instantiated universal hypotheses,
  * mono_eq: substitutivity of equals through a formula, powered by a
    concrete equality-axiom list (reflexivity, symmetry, transitivity and
    congruence instances for the symbols actually used),
  * pos_mono: monotonicity in a positively occurring set variable, by
    recursion on the formula with caller-supplied bridge derivations at the
    variable's atoms.

Second-order quantified subformulas are handled by mono_eq only in the
self-substitutive shape All Z.(H -> Z(t)) with Sub(Z) on H's conjunction
spine, which covers every formula these encodings produce.
"""

from dataclasses import dataclass

from .errors import (
    LevelViolation,
    NotPositive,
    OmegalabError,
    UncoveredVariable,
    UnknownFunctionSymbol,
)
from .formulas import (
    AND,
    IMP,
    OR,
    BOT,
    Abstract,
    App,
    Atom,
    Bin,
    Bot,
    Quant,
    Quant2,
    SetAtom,
    Term,
    Var,
    abstract,
    apply_abstract,
    canonical,
    conj,
    disj,
    eq,
    exists,
    forall,
    forall2,
    fresh_set_var,
    fresh_term_var,
    function_symbols,
    function_symbols_term,
    imp,
    instantiate,
    instantiate2,
    instantiate2_var,
    level,
    level_le,
    positive_in,
    predicate_symbols,
    satom,
    substitute_set,
    substitute_term,
    substitute_terms,
    var,
)
from . import builders as B
from .printer import fkey
from .sequents import sequent, substitute_derivation, weaken

ZERO = App("0", ())


def s_(t):
    return App("s", (t,))


# ---------------------------------------------------------------------------
# The second-order naturals and relativization


def sub_of(x):
    """Sub(X) := all a b. a = b & X(a) -> X(b)."""
    return forall(
        "a", forall("b", imp(conj(eq(var("a"), var("b")), satom(x, var("a"))), satom(x, var("b"))))
    )


def suc_of(x):
    return forall("a", imp(satom(x, var("a")), satom(x, s_(var("a")))))


def nn_body(x, t):
    return imp(conj(conj(sub_of(x), suc_of(x)), satom(x, ZERO)), satom(x, t))


def nn(t):
    """Nn(t): membership of t in every =-closed successor-closed set
    containing zero."""
    return forall2("X", nn_body("X", t))


def relativize(f):
    """Replace every first-order quantifier Qx by Qx in Nn."""
    if level(f) != -1:
        raise LevelViolation(f"relativization expects a first-order formula, got level {level(f)}")

    def go(g):
        if isinstance(g, (Atom, SetAtom, Bot)):
            return g
        if isinstance(g, Bin):
            return Bin(g.op, go(g.left), go(g.right))
        if isinstance(g, Quant):
            body = go(g.body)
            if g.q == "all":
                return Quant("all", g.v, imp(nn(Var(g.v)), body))
            return Quant("ex", g.v, conj(nn(Var(g.v)), body))
        raise TypeError(f"not a formula: {g!r}")

    from .formulas import canonical

    return canonical(go(f))


# ---------------------------------------------------------------------------
# Equality axioms


@dataclass(frozen=True)
class EqAxiomSet:
    """The concrete equality axiom list: reflexivity, symmetry,
    transitivity, plus congruence instances for the declared symbols."""

    axioms: tuple
    refl: object
    symm: object
    trans: object
    fun_cong: dict  # symbol -> axiom
    pred_cong: dict

    def context(self):
        return self.axioms


def _vars(prefix, k):
    return [var(f"{prefix}{i + 1}") for i in range(k)]


def _conj_chain(fs):
    out = fs[0]
    for f in fs[1:]:
        out = conj(out, f)
    return out


def _forall_chain(vs, body):
    for v in reversed(vs):
        body = forall(v.name, body)
    return body


def eq_axioms(functions=(), predicates=()):
    """Minimal equality axiom set for the congruences actually used; every
    member is a closed universal first-order sentence."""
    x, y, z = var("a"), var("b"), var("c")
    refl = forall("a", eq(x, x))
    symm = _forall_chain([x, y], imp(eq(x, y), eq(y, x)))
    trans = _forall_chain([x, y, z], imp(conj(eq(x, y), eq(y, z)), eq(x, z)))
    fun_cong = {}
    for sym, arity in sorted(set(functions)):
        if arity == 0:
            continue
        xs = _vars("a", arity)
        ys = _vars("b", arity)
        prem = _conj_chain([eq(a, b) for a, b in zip(xs, ys)])
        ax = _forall_chain(xs + ys, imp(prem, eq(App(sym, tuple(xs)), App(sym, tuple(ys)))))
        fun_cong[sym] = ax
    pred_cong = {}
    for sym, arity in sorted(set(predicates)):
        if arity == 0:
            continue
        xs = _vars("a", arity)
        ys = _vars("b", arity)
        eqs = _conj_chain([eq(a, b) for a, b in zip(xs, ys)])
        ax = _forall_chain(
            xs + ys, imp(conj(eqs, Atom(sym, tuple(xs))), Atom(sym, tuple(ys)))
        )
        pred_cong[sym] = ax
    axioms = (refl, symm, trans) + tuple(fun_cong.values()) + tuple(pred_cong.values())
    return EqAxiomSet(axioms, refl, symm, trans, fun_cong, pred_cong)


def eq_axioms_for(formulas):
    """Equality axioms covering exactly the symbols of the given formulas."""
    funs, preds = set(), set()
    for f in formulas:
        funs |= function_symbols(f)
        for p in predicate_symbols(f):
            preds.add(p)
    # congruence instances need arities; predicates are collected with
    # arities by scanning atoms
    pred_ar = set()
    def scan(g):
        if isinstance(g, Atom):
            pred_ar.add((g.pred, len(g.args)))
        elif isinstance(g, Bin):
            scan(g.left)
            scan(g.right)
        elif isinstance(g, (Quant, Quant2)):
            scan(g.body)
    for f in formulas:
        scan(f)
    return eq_axioms(funs, pred_ar)


# ---------------------------------------------------------------------------
# Structural glue


def absorb_leaf(c, leaf, d):
    """From a context containing `leaf` derive the same sequent with the
    conjunction `c` instead, following the spine path to the leaf."""
    if c == leaf:
        return d
    assert isinstance(c, Bin) and c.op == AND, f"{fkey(leaf)} not on the spine of {fkey(c)}"
    if _on_spine(c.left, leaf):
        return B.and_l(1, c, absorb_leaf(c.left, leaf, d))
    return B.and_l(2, c, absorb_leaf(c.right, leaf, d))


def _on_spine(c, leaf):
    if c == leaf:
        return True
    return isinstance(c, Bin) and c.op == AND and (
        _on_spine(c.left, leaf) or _on_spine(c.right, leaf)
    )


def absorb_conj(c, d):
    """From a context containing all spine leaves of the conjunction c
    derive the sequent with c itself (the leaves are consumed)."""
    if c in B.ctx(d):
        return d
    if not (isinstance(c, Bin) and c.op == AND):
        assert c in B.ctx(d), f"cannot absorb {fkey(c)}: not in context"
    d = absorb_conj(c.left, d)
    d = absorb_conj(c.right, d)
    if c.left == c.right:
        return B.and_l(1, c, d)
    step = B.and_l(2, c, d)
    return B.and_l(1, c, step)


def forall_elim(main, ts, d):
    """Absorb the instantiated body of a universal chain: from a context
    containing main[t1..tk] conclude the sequent with main instead."""
    mains = [main]
    for t in ts:
        mains.append(instantiate(mains[-1], t))
    out = d
    for i in range(len(ts) - 1, -1, -1):
        out = B.all_l(mains[i], ts[i], out)
    return out


def apply_axiom(ax, ts, d_args, target):
    """Use a universal implication axiom: instantiate ax at ts, feed the
    premise with d_args (a derivation of the instantiated hypothesis), and
    continue with an Id on `target`."""
    minor = ax
    for t in ts:
        minor = instantiate(minor, t)
    assert isinstance(minor, Bin) and minor.op == IMP
    step = B.imp_l(minor, d_args, B.by_id(target))
    return forall_elim(ax, ts, step)


# ---------------------------------------------------------------------------
# Substitutivity: Gamma_eq, ta = tb, xi[v:=ta] => xi[v:=tb]


def _term_eq(t, v, ta, tb, ax):
    """Derivation of Gamma_eq, ta = tb => t[v:=ta] = t[v:=tb]."""
    hyp = eq(ta, tb)
    ctx = set(ax.context()) | {hyp}
    t_a = _tsub(t, v, ta)
    t_b = _tsub(t, v, tb)
    if isinstance(t, Var) and t.name == v:
        return B.by_id(hyp, ctx - {hyp})
    if v not in _tfv(t):
        # reflexivity instance
        d = B.by_id(eq(t_a, t_a), ctx)
        return forall_elim(ax.refl, [t_a], d)
    assert isinstance(t, App)
    if t.head not in ax.fun_cong:
        raise UnknownFunctionSymbol(f"no congruence axiom for {t.head}/{len(t.args)}")
    cong = ax.fun_cong[t.head]
    args = [_term_eq(u, v, ta, tb, ax) for u in t.args]
    d_prem = args[0]
    for d_next in args[1:]:
        d_prem = B.and_r(d_prem, d_next)
    ts = [_tsub(u, v, ta) for u in t.args] + [_tsub(u, v, tb) for u in t.args]
    return apply_axiom(cong, ts, d_prem, eq(t_a, t_b))


def _tsub(t, v, w):
    if isinstance(t, Var):
        return w if t.name == v else t
    return App(t.head, tuple(_tsub(u, v, w) for u in t.args))


def _tfv(t):
    from .formulas import term_fv

    return term_fv(t)


def symmetry_flip(ta, tb, ax, d):
    """From a derivation using tb = ta in its context produce one using
    ta = tb, by cutting with the symmetry axiom instance."""
    flipped = eq(tb, ta)
    if flipped not in B.ctx(d):
        return d
    want = eq(ta, tb)
    d_sym = apply_axiom(ax.symm, [ta, tb], B.by_id(want), flipped)
    # d_sym: symm-axiom, ta = tb => tb = ta
    return B.cut(B.weaken_to(d_sym, B.ctx(d_sym) | {want}), d)


def mono_eq(xi, v, ta, tb, ax):
    """Derivation of Gamma_eq, ta = tb, xi[v:=ta] => xi[v:=tb].

    Supports first-order structure, equality atoms, and second-order
    quantifications of the guarded shape All Z.(H -> Z(t)) with Sub(Z) on
    H's spine (the naturals predicate and the fixed-point formulas)."""
    hyp = eq(ta, tb)
    base = set(ax.context()) | {hyp}
    xa = substitute_term(xi, v, ta)
    xb = substitute_term(xi, v, tb)
    if v not in xi.fv or xa == xb:
        return B.by_id(xa, base)

    if isinstance(xi, Atom):
        if xi.pred not in ax.pred_cong:
            raise UnknownFunctionSymbol(f"no congruence axiom for predicate {xi.pred}")
        cong = ax.pred_cong[xi.pred]
        eqs = [_term_eq(u, v, ta, tb, ax) for u in xi.args]
        d_eqs = eqs[0]
        for nxt in eqs[1:]:
            d_eqs = B.and_r(d_eqs, nxt)
        d_prem = B.and_r(d_eqs, B.by_id(xa, base))
        ts = [_tsub(u, v, ta) for u in xi.args] + [_tsub(u, v, tb) for u in xi.args]
        return apply_axiom(cong, ts, d_prem, xb)

    if isinstance(xi, SetAtom):
        raise OmegalabError(
            f"substitutivity through the free set atom {fkey(xi)} is not derivable"
        )

    if isinstance(xi, Bin):
        if xi.op == AND:
            dl = mono_eq(xi.left, v, ta, tb, ax)
            dr = mono_eq(xi.right, v, ta, tb, ax)
            out = B.and_r(dl, dr)
            return absorb_conj(xa, out) if xa not in B.ctx(out) else out
        if xi.op == OR:
            la, ra = substitute_term(xi.left, v, ta), substitute_term(xi.right, v, ta)
            dl = B.or_r(1, xb, mono_eq(xi.left, v, ta, tb, ax))
            dr = B.or_r(2, xb, mono_eq(xi.right, v, ta, tb, ax))
            return B.or_l(xa, dl, dr)
        # implication: contravariant on the left through the symmetry flip
        la = substitute_term(xi.left, v, ta)
        lb = substitute_term(xi.left, v, tb)
        d_back = mono_eq(xi.left, v, tb, ta, ax)  # uses tb = ta
        d_back = symmetry_flip(ta, tb, ax, B.weaken_to(d_back, B.ctx(d_back) | {lb}))
        d_fwd = mono_eq(xi.right, v, ta, tb, ax)
        inner = B.imp_l(xa, d_back, d_fwd)
        return B.imp_r(lb, inner)

    if isinstance(xi, Quant):
        avoid = {v} | xi.fv | _tfv(ta) | _tfv(tb)
        for f in ax.context():
            avoid |= f.fv
        w = fresh_term_var(avoid, "w")
        body_w = instantiate(xi, Var(w))
        d = mono_eq(body_w, v, ta, tb, ax)
        if xi.q == "all":
            d = B.all_l(xa, Var(w), d)
            return B.all_r(xb, w, d)
        d = B.ex_r(xb, Var(w), d)
        return B.ex_l(xa, w, d)

    if isinstance(xi, Quant2):
        return _mono_eq_guarded(xi, v, ta, tb, ax)

    raise TypeError(f"not a formula: {xi!r}")


def _guard_shape(xi):
    """For All Z.(H -> Z(t)) with Sub(Z) on H's spine, return (H, t)."""
    if not (isinstance(xi, Quant2) and xi.q == "All"):
        return None
    z = fresh_set_var(xi.body.sv | {"X"}, "Z")
    body = instantiate2_var(xi, z)
    if not (isinstance(body, Bin) and body.op == IMP):
        return None
    head, tail = body.left, body.right
    if not (isinstance(tail, SetAtom) and tail.svar == z):
        return None
    if not _on_spine_pred(head, sub_of(z)):
        return None
    return z, head, tail.arg


def _on_spine_pred(c, leaf):
    if c == leaf:
        return True
    return isinstance(c, Bin) and c.op == AND and (
        _on_spine_pred(c.left, leaf) or _on_spine_pred(c.right, leaf)
    )


def _mono_eq_guarded(xi, v, ta, tb, ax):
    got = _guard_shape(xi)
    if got is None:
        raise OmegalabError(
            f"substitutivity through {fkey(xi)}: unsupported second-order shape"
        )
    z, head, arg = got
    hyp = eq(ta, tb)
    xa = substitute_term(xi, v, ta)
    xb = substitute_term(xi, v, tb)
    head_a = substitute_term(head, v, ta)
    head_b = substitute_term(head, v, tb)
    assert head_a == head_b, "guard head must not mention the substituted variable"
    arg_a = _tsub(arg, v, ta)
    arg_b = _tsub(arg, v, tb)
    subz = sub_of(z)
    # Z(arg_a), Sub(Z), ta = tb, Gamma_eq => Z(arg_b)
    d_eq = _term_eq(arg, v, ta, tb, ax)
    d_pair = B.and_r(d_eq, B.by_id(SetAtom(z, arg_a)))
    d_transport = apply_axiom(subz, [arg_a, arg_b], d_pair, SetAtom(z, arg_b))
    d_transport = absorb_leaf(head_a, subz, d_transport)
    # use xa's instance at the identity abstract on Z
    minor_a = imp(head_a, SetAtom(z, arg_a))
    d_use = B.imp_l(minor_a, B.by_id(head_a), d_transport)
    d_use = B.all2_l(xa, _identity(z), d_use)
    d_body = B.imp_r(head_b, d_use)
    return B.all2_r(xb, z, d_body)


def _identity(svar):
    return abstract("t", satom(svar, var("t")))


# ---------------------------------------------------------------------------
# Positive monotonicity: from bridges at the set atoms to the whole formula


def pos_mono(psi, x, tau_a, tau_b, bridge_pos, bridge_neg, base_ctx):
    """Derivation of base_ctx, psi[X:=tau_a] => psi[X:=tau_b], by structural
    recursion; bridge_pos(t) proves base_ctx, tau_a(t) => tau_b(t) and
    bridge_neg(t) the reverse (only demanded where the polarity requires
    it)."""

    def go(g, positive):
        src = substitute_set(g, x, tau_a if positive else tau_b)
        dst = substitute_set(g, x, tau_b if positive else tau_a)
        if x not in g.sv or src == dst:
            return B.by_id(src, base_ctx)
        if isinstance(g, SetAtom):
            bridge = bridge_pos if positive else bridge_neg
            if bridge is None:
                raise NotPositive(
                    f"set variable {x} occurs with the wrong sign at {fkey(g)}"
                )
            return bridge(g.arg)
        if isinstance(g, Bin):
            if g.op == AND:
                d = B.and_r(go(g.left, positive), go(g.right, positive))
                return absorb_conj(src, d)
            if g.op == OR:
                dl = B.or_r(1, dst, go(g.left, positive))
                dr = B.or_r(2, dst, go(g.right, positive))
                return B.or_l(src, dl, dr)
            dl = go(g.left, not positive)
            dr = go(g.right, positive)
            dst_hyp = substitute_set(g.left, x, tau_b if positive else tau_a)
            inner = B.imp_l(src, dl, dr)
            return B.imp_r(dst_hyp, inner)
        if isinstance(g, Quant):
            avoid = set(g.fv) | {x}
            for f in base_ctx:
                avoid |= f.fv
            avoid |= tau_a.fv | tau_b.fv
            w = fresh_term_var(avoid, "w")
            body = instantiate(g, Var(w))
            d = go(body, positive)
            if g.q == "all":
                return B.all_r(dst, w, B.all_l(src, Var(w), d))
            return B.ex_l(src, w, B.ex_r(dst, Var(w), d))
        raise TypeError(f"unexpected formula {g!r} in monotonicity")

    return go(psi, True)


# ---------------------------------------------------------------------------
# The basic facts about the naturals predicate


def d_nn_zero():
    """|- Nn(0)."""
    target = nn(ZERO)
    y = "Y"
    body = instantiate2_var(target, y)  # H -> Y(0)
    head = body.left
    d = B.by_id(satom(y, ZERO))
    d = absorb_leaf(head, satom(y, ZERO), d)
    d = B.imp_r(head, d)
    return B.all2_r(target, y, d)


def d_suc_nn():
    """|- Suc(Nn), i.e. all x. Nn(x) -> Nn(s(x))."""
    target = forall("x", imp(nn(var("x")), nn(s_(var("x")))))
    yv = var("y")
    y = "Y"
    nn_y = nn(yv)
    nn_sy = nn(s_(yv))
    body_sy = instantiate2_var(nn_sy, y)
    head = body_sy.left  # (Sub(Y) & Suc(Y)) & Y(0)
    sucy = suc_of(y)
    # Y(y), head ... => Y(s(y)) via Suc(Y)
    d = B.imp_l(
        imp(satom(y, yv), satom(y, s_(yv))),
        B.by_id(satom(y, yv)),
        B.by_id(satom(y, s_(yv))),
    )
    d = B.all_l(sucy, yv, d)
    d = absorb_leaf(head, sucy, d)
    # head -> Y(y) from Nn(y)
    minor = imp(head, satom(y, yv))
    d = B.imp_l(minor, B.by_id(head), d)
    d = B.all2_l(nn_y, _identity(y), d)
    d = B.imp_r(head, d)
    d = B.all2_r(nn_sy, y, d)
    d = B.imp_r(nn_y, d)
    return B.all_r(target, "y", d)


def d_sub_nn():
    """|- Sub(Nn)."""
    a, b = var("a"), var("b")
    y = "Y"
    nna, nnb = nn(a), nn(b)
    target = forall("a", forall("b", imp(conj(eq(a, b), nna), nn(b))))
    body_b = instantiate2_var(nnb, y)
    head = body_b.left
    suby = sub_of(y)
    d_pair = B.and_r(B.by_id(eq(a, b)), B.by_id(satom(y, a)))
    d = apply_axiom(suby, [a, b], d_pair, satom(y, b))
    d = absorb_leaf(head, suby, d)
    minor = imp(head, satom(y, a))
    d = B.imp_l(minor, B.by_id(head), d)
    d = B.all2_l(nna, _identity(y), d)
    d = B.imp_r(head, d)
    d = B.all2_r(nnb, y, d)
    d = absorb_conj(conj(eq(a, b), nna), d)
    d = B.imp_r(conj(eq(a, b), nna), d)
    d = B.all_r(instantiate(target, a), "b", d)
    return B.all_r(target, "a", d)


def d_sub_abstract(tau, ax):
    """Gamma_eq => Sub(tau) for a set-closed abstract."""
    if tau.sv:
        raise OmegalabError("Sub(tau) needs a set-closed abstract body")
    target = substitute_set(sub_of("X"), "X", tau)
    avoid = tau.fv | {"a", "b"}
    for f in ax.context():
        avoid |= f.fv
    a = fresh_term_var(avoid, "a")
    b = fresh_term_var(avoid | {a}, "b")
    va, vb = var(a), var(b)
    ta = apply_abstract(tau, va)
    tb = apply_abstract(tau, vb)
    d = mono_eq(tau.body, tau.v, va, vb, ax)
    d = absorb_conj(conj(eq(va, vb), ta), d)
    d = B.imp_r(conj(eq(va, vb), ta), d)
    inner = instantiate(target, va)
    d = B.all_r(inner, b, d)
    d = B.all_r(target, a, d)
    assert B.succ(d) == target
    return d


# ---------------------------------------------------------------------------
# The induction engine (the tau := psi(z) & Nn(z) instantiation)


def induction_formula(psi, v):
    """(all x in Nn.(psi(x) -> psi(s(x)))) & psi(0) -> all y in Nn. psi(y)."""
    x, y = var("x"), var("y")
    px = substitute_term(psi, v, x)
    psx = substitute_term(psi, v, s_(x))
    p0 = substitute_term(psi, v, ZERO)
    py = substitute_term(psi, v, y)
    step = forall("x", imp(nn(x), imp(px, psx)))
    concl = forall("y", imp(nn(y), py))
    return imp(conj(step, p0), concl)


def induction_derivation_for(psi, v, ax=None):
    """Gamma_eq => induction_formula(psi, v), by instantiating the
    membership in Nn(y) at the abstract lambda z. psi(z) & Nn(z)."""
    if not level_le(psi, 0):
        raise LevelViolation("induction body must have level <= 0")
    ax = ax or eq_axioms_for([psi, nn(ZERO)])
    target = induction_formula(psi, v)
    step, p0 = target.left.left, target.left.right
    gamma0 = set(ax.context()) | {step, p0}

    zname = fresh_term_var(psi.fv | {v}, "z")
    tau = abstract(zname, conj(substitute_term(psi, v, var(zname)), nn(var(zname))))

    avoid = psi.fv | {v, "x"}
    for f in gamma0:
        avoid |= f.fv
    yname = fresh_term_var(avoid, "y")
    yv = var(yname)
    psy = substitute_term(psi, v, yv)
    nny = nn(yv)
    tau_y = apply_abstract(tau, yv)

    # minor for the abstract tau: ((Sub(tau) & Suc(tau)) & tau(0)) -> tau(y)
    minor = instantiate2(nny, tau)
    head = minor.left

    # right branch: tau(y) => psi(y)
    d_use = B.and_l(1, tau_y, B.by_id(psy))

    # left branch: Sub(tau) & Suc(tau) & tau(0)
    d_sub = B.weaken_to(d_sub_abstract(tau, ax), gamma0)

    wname = fresh_term_var({yname, v} | psi.fv, "w")
    wv = var(wname)
    psw = substitute_term(psi, v, wv)
    psw1 = substitute_term(psi, v, s_(wv))
    tau_w = apply_abstract(tau, wv)
    tau_sw = apply_abstract(tau, s_(wv))
    # psi branch of the step: uses the step hypothesis at w
    d_psi = B.imp_l(
        imp(psw, psw1), B.by_id(psw), B.by_id(psw1)
    )
    d_psi = B.imp_l(imp(nn(wv), imp(psw, psw1)), B.by_id(nn(wv)), d_psi)
    d_psi = forall_elim(step, [wv], d_psi)
    # Nn branch of the step: Suc(Nn) at w
    d_nn = B.imp_l(imp(nn(wv), nn(s_(wv))), B.by_id(nn(wv)), B.by_id(nn(s_(wv))))
    d_nn = forall_elim(forall("x", imp(nn(var("x")), nn(s_(var("x"))))), [wv], d_nn)
    d_nn = B.cut(d_suc_nn(), d_nn)
    d_step_body = B.and_r(d_psi, d_nn)
    d_step_body = absorb_conj(tau_w, d_step_body)
    d_step_body = B.imp_r(tau_w, d_step_body)
    suc_tau = substitute_set(suc_of("X"), "X", tau)
    d_suc_tau = B.all_r(suc_tau, wname, d_step_body)

    d_tau0 = B.and_r(B.by_id(p0), B.cut(d_nn_zero(), B.by_id(nn(ZERO))))

    d_left = B.and_r(B.and_r(d_sub, d_suc_tau), d_tau0)
    assert B.succ(d_left) == head, f"{fkey(B.succ(d_left))} vs {fkey(head)}"

    d = B.imp_l(minor, d_left, d_use)
    d = B.all2_l(nny, tau, d)
    # assemble: Gamma_eq, step, p0, Nn(y) => psi(y)
    d = B.imp_r(nny, d)
    d = B.all_r(forall("y", imp(nn(var("y")), substitute_term(psi, v, var("y")))), yname, d)
    d = absorb_conj(conj(step, p0), B.weaken_to(d, B.ctx(d) | {step, p0}))
    d = B.imp_r(conj(step, p0), d)
    assert B.succ(d) == target
    return d


def induction_derivation(phi, v=None, ax=None):
    """The induction lemma for a first-order formula with one free
    variable: Gamma_eq => [all x(phi(x) -> phi(s(x))) & phi(0) ->
    all y. phi(y)] relativized."""
    if level(phi) != -1:
        raise LevelViolation(f"induction expects a first-order formula, got {level(phi)}")
    free = sorted(phi.fv)
    if v is None:
        if len(free) != 1:
            raise LevelViolation(
                f"induction expects exactly one free variable, got {free}"
            )
        v = free[0]
    elif set(free) - {v}:
        raise LevelViolation(f"unexpected extra free variables {set(free) - {v}}")
    psi = relativize(phi)
    return induction_derivation_for(psi, v, ax)


def nn_compose_induction(t, v="x", ax=None):
    """The induction instance for Nn(t(x)): composing the naturals
    predicate with a term."""
    psi = nn(t)
    if v not in psi.fv:
        raise LevelViolation(f"{v} must occur in the term")
    return induction_derivation_for(psi, v, ax or eq_axioms_for([psi]))


# ---------------------------------------------------------------------------
# Closure of the naturals under declared terms (unary primitive recursion)


@dataclass(frozen=True)
class PRDef:
    """A unary symbol defined by base value and step term: f(0) = base,
    f(s(x)) = step[v1 := x, v2 := f(x)].  base is a closed term over
    already-definable symbols; step uses the reserved variables v1, v2."""

    base: Term
    step: Term

    def formula(self, f):
        x = var("x")
        fx = App(f, (x,))
        step_at = _tsub(_tsub(self.step, "v1", x), "v2", fx)
        return conj(
            eq(App(f, (ZERO,)), self.base),
            forall("x", eq(App(f, (s_(x),)), step_at)),
        )


def _transport(d_eq, d_nn, src, dst):
    """Nn transported along src = dst: from derivations of ... => src = dst
    and ... => Nn(src), conclude ... => Nn(dst) via Sub(Nn)."""
    minor_hyp = B.and_r(d_eq, d_nn)
    d = B.imp_l(
        imp(conj(eq(src, dst), nn(src)), nn(dst)), minor_hyp, B.by_id(nn(dst))
    )
    subnn = forall("a", forall("b", imp(conj(eq(var("a"), var("b")), nn(var("a"))), nn(var("b")))))
    d = forall_elim(subnn, [src, dst], d)
    return B.cut(d_sub_nn(), d)


def _flip_eq(lhs, rhs, ax, d_hyp):
    """From a derivation of ... => lhs = rhs conclude ... => rhs = lhs."""
    d = apply_axiom(ax.symm, [lhs, rhs], B.by_id(eq(lhs, rhs)), eq(rhs, lhs))
    return B.cut(d_hyp, d)


def nn_closure(t, assumed=(), prdefs=None, ax=None):
    """A derivation of Nn(x1), ..., Gamma_ax => Nn(t), where the assumed
    terms carry Nn hypotheses and Gamma_ax holds the defining sentences of
    the primitive-recursive symbols used (plus equality axioms)."""
    prdefs = prdefs or {}
    ax = ax or eq_axioms((("0", 0), ("s", 1)) + tuple((f, 1) for f in prdefs), ())
    assumed_keys = {t2 for t2 in assumed}

    def go(u):
        if u in assumed_keys:
            return B.by_id(nn(u))
        if isinstance(u, Var):
            raise UncoveredVariable(f"no Nn hypothesis for variable {u.name}")
        if u.head == "0" and not u.args:
            return d_nn_zero()
        if u.head == "s":
            d_u = go(u.args[0])
            sucnn = forall("x", imp(nn(var("x")), nn(s_(var("x")))))
            d = B.imp_l(imp(nn(u.args[0]), nn(u)), d_u, B.by_id(nn(u)))
            d = forall_elim(sucnn, [u.args[0]], d)
            return B.cut(d_suc_nn(), d)
        if u.head in prdefs:
            if len(u.args) != 1:
                raise UnknownFunctionSymbol(f"{u.head} must be unary")
            return _pr_closure(u.head, u.args[0])
        raise UnknownFunctionSymbol(f"no recursion scheme declared for {u.head}")

    def _pr_closure(f, u):
        prd = prdefs[f]
        deff = prd.formula(f)
        f0 = App(f, (ZERO,))
        # base: Nn(f(0)) from Nn(base) and f(0) = base
        d_fl = B.and_l(1, deff, B.by_id(eq(f0, prd.base)))
        d_eqc = _flip_eq(f0, prd.base, ax, d_fl)
        d_base = _transport(d_eqc, go(prd.base), prd.base, f0)
        # step: all x in Nn. Nn(f(x)) -> Nn(f(s(x)))
        avoid = {"x", "y", "z"} | _tfv(u) | _tfv(prd.base) | _tfv(prd.step)
        w = fresh_term_var(avoid, "w")
        wv = var(w)
        fw = App(f, (wv,))
        fsw = App(f, (s_(wv),))
        h_at = _tsub(_tsub(prd.step, "v1", wv), "v2", fw)
        assumed_keys.add(wv)
        assumed_keys.add(fw)
        d_h = go(h_at)
        assumed_keys.discard(wv)
        assumed_keys.discard(fw)
        d_fl2 = B.and_l(2, deff, forall_elim(deff.right, [wv], B.by_id(eq(fsw, h_at))))
        d_eq2 = _flip_eq(fsw, h_at, ax, d_fl2)
        d_stepw = _transport(d_eq2, d_h, h_at, fsw)
        d_stepw = B.imp_r(nn(fw), d_stepw)
        d_stepw = B.imp_r(nn(wv), d_stepw)
        step_formula = forall("x", imp(nn(var("x")), imp(nn(App(f, (var("x"),))), nn(App(f, (s_(var("x")),))))))
        d_step = B.all_r(step_formula, w, d_stepw)
        # the induction instance for Nn(f(.))
        ind = induction_formula(nn(App(f, (var("x"),))), "x")
        d_ind = nn_compose_induction(App(f, (var("x"),)), "x", ax)
        d_u = go(u)
        fu = App(f, (u,))
        d_use = B.imp_l(imp(nn(u), nn(fu)), d_u, B.by_id(nn(fu)))
        d_use = forall_elim(forall("y", imp(nn(var("y")), nn(App(f, (var("y"),))))), [u], d_use)
        d = B.imp_l(ind, B.and_r(d_step, d_base), d_use)
        return B.cut(d_ind, d)

    return go(t)


# ---------------------------------------------------------------------------
# Relativization of whole derivations


def relativize_derivation(d, free_vars=None, prdefs=None):
    """From an LI derivation of Gamma => Pi build an LIP(0) derivation of
    Nn(xs), Gamma_ax, Gamma-relativized => Pi-relativized.

    Gamma_ax is empty when the derivation only uses 0/s terms; otherwise it
    holds the equality axioms and defining sentences of the declared
    primitive-recursive symbols (UnknownFunctionSymbol if a symbol has no
    recursion scheme)."""
    from .sequents import LI, check

    bad = check(d, LI)
    if bad:
        raise OmegalabError(f"input fails LI checking: {bad[0]}")
    prdefs = prdefs or {}
    xs = tuple(free_vars) if free_vars is not None else tuple(sorted(d.conclusion.fv()))

    syms = set()
    from .sequents import iter_nodes

    for node in iter_nodes(d):
        for f in node.conclusion.formulas():
            syms |= function_symbols(f)
        if node.term is not None:
            syms |= function_symbols_term(node.term)
    pr_used = sorted(s for s, a in syms if s not in ("0", "s"))
    for s in pr_used:
        if s not in prdefs:
            raise UnknownFunctionSymbol(f"no recursion scheme declared for {s}")
    if pr_used:
        ax = eq_axioms(sorted(syms | {("0", 0), ("s", 1)}), ())
        axioms = set(ax.context()) | {prdefs[f].formula(f) for f in pr_used}
    else:
        ax = eq_axioms((("0", 0), ("s", 1)), ())
        axioms = set()

    def closure(t, scope):
        assumed = tuple(Var(x) for x in scope)
        return nn_closure(t, assumed, prdefs, ax)

    def go(node, scope):
        rule = node.rule
        succ = node.conclusion.succedent
        if rule == "Id":
            gamma = {relativize(f) for f in node.conclusion.ant}
            gamma |= {nn(var(x)) for x in scope} | axioms
            return B.by_id(relativize(succ), gamma - {relativize(succ)})
        if rule == "BotL":
            gamma = {relativize(f) for f in node.conclusion.ant}
            gamma |= {nn(var(x)) for x in scope} | axioms
            return B.bot_l(gamma, relativize(succ) if succ is not None else None)
        if rule == "BotR":
            return B.bot_r(go(node.premises[0], scope))
        if rule == "Cut":
            return B.cut(go(node.premises[0], scope), go(node.premises[1], scope))
        if rule == "AndL":
            from .sequents import left_main

            main = left_main(node)
            return B.and_l(node.side, relativize(main), go(node.premises[0], scope))
        if rule == "AndR":
            return B.and_r(go(node.premises[0], scope), go(node.premises[1], scope))
        if rule == "OrL":
            from .sequents import left_main

            main = left_main(node)
            return B.or_l(
                relativize(main), go(node.premises[0], scope), go(node.premises[1], scope)
            )
        if rule == "OrR":
            return B.or_r(node.side, relativize(succ), go(node.premises[0], scope))
        if rule == "ImpL":
            from .sequents import left_main

            main = left_main(node)
            return B.imp_l(
                relativize(main), go(node.premises[0], scope), go(node.premises[1], scope)
            )
        if rule == "ImpR":
            return B.imp_r(relativize(succ.left), go(node.premises[0], scope))
        if rule == "AllL":
            from .sequents import left_main

            main = left_main(node)
            rmain = relativize(main)
            minor = instantiate(rmain, node.term)  # Nn(t) -> phi^Nn(t)
            d_min = B.imp_l(minor, closure(node.term, scope), go(node.premises[0], scope))
            return B.all_l(rmain, node.term, d_min)
        if rule == "AllR":
            y = node.fvar
            prem = go(node.premises[0], scope | {y})
            rmain = relativize(succ)
            body = B.imp_r(nn(var(y)), prem)
            return B.all_r(rmain, y, body)
        if rule == "ExL":
            from .sequents import left_main

            main = left_main(node)
            y = node.fvar
            prem = go(node.premises[0], scope | {y})
            rmain = relativize(main)
            minor = instantiate(rmain, Var(y))  # Nn(y) & phi^Nn(y)
            prem = absorb_conj(minor, prem)
            return B.ex_l(rmain, y, prem)
        if rule == "ExR":
            rmain = relativize(succ)
            prem = go(node.premises[0], scope)
            d_pair = B.and_r(closure(node.term, scope), prem)
            return B.ex_r(rmain, node.term, d_pair)
        raise OmegalabError(f"unexpected rule {rule} in an LI derivation")

    scope0 = frozenset(xs)
    out = go(d, scope0)
    target_ant = (
        {nn(var(x)) for x in xs}
        | set(axioms)
        | {relativize(f) for f in d.conclusion.ant}
    )
    succ = d.conclusion.succedent
    out = B.weaken_to(out, target_ant)
    want = sequent(target_ant, relativize(succ) if succ is not None else None)
    assert out.conclusion == want, f"{out.conclusion} vs {want}"
    return out


# ---------------------------------------------------------------------------
# Least fixed points


def fix_formula(phi, svar, tvar, t):
    """Fix_phi(t): membership of t in every =-closed prefixed point of the
    operator phi(X, x)."""
    phi_z = phi  # the bound variable is renamed by canonicalization
    body = imp(
        conj(sub_of(svar), forall(tvar, imp(phi_z, satom(svar, var(tvar))))),
        satom(svar, t),
    )
    return forall2(svar, body)


def fix_abstract(phi, svar, tvar):
    w = fresh_term_var(phi.fv | {tvar}, "w")
    return abstract(w, fix_formula(phi, svar, tvar, var(w)))


@dataclass(frozen=True)
class FixpointKit:
    phi: object
    svar: str
    tvar: str
    n: int
    fix: Abstract
    lfp1: object
    _lfp2: object

    def fix_at(self, t):
        return apply_abstract(self.fix, t)

    def lfp2(self, tau):
        return self._lfp2(tau)


def fixpoint_kit(phi, svar="X", tvar="x", n=None):
    """The fixed-point package for a positive operator phi(X, x): the
    defining abstract, a derivation of the prefixed-point axiom and a
    derivation schema of the least-prefixed-point axiom.

    The induction hypothesis set of lfp2 carries the equality axioms needed
    for Sub of the instantiating abstract, whose body must be set-closed."""
    if not positive_in(phi, svar):
        raise NotPositive(f"{svar} must occur only positively")
    if phi.sv - {svar}:
        raise LevelViolation(f"free set variables besides {svar}: {sorted(phi.sv - {svar})}")
    lv = level(phi)
    least_n = lv + 1
    if n is None:
        n = max(least_n, 1)
    elif n < least_n:
        raise LevelViolation(f"fixed point of a level-{lv} body needs level >= {least_n}")

    fix = fix_abstract(phi, svar, tvar)

    def fix_at(t):
        return apply_abstract(fix, t)

    x = svar
    hind = forall(tvar, imp(phi, satom(x, var(tvar))))
    subx = sub_of(x)
    base_ctx = frozenset((subx, hind))

    def step1(t):
        """Sub(X), (phi(X) prefixed), Fix(t) => X(t)."""
        target = satom(x, t)
        minor = instantiate2(fix_at(t), _identity(x))
        d = B.imp_l(minor, B.and_r(B.by_id(subx), B.by_id(hind)), B.by_id(target))
        return B.all2_l(fix_at(t), _identity(x), d)

    # positivity induction: base, phi[X:=Fix][x:=y] => phi[x:=y]
    avoid = phi.fv | {tvar}
    y = fresh_term_var(avoid, "y")
    phi_y = substitute_term(phi, tvar, var(y))
    d_mono = pos_mono(phi_y, x, fix, _identity(x), step1, None, base_ctx)
    d3 = B.imp_l(instantiate(hind, var(y)), d_mono, B.by_id(satom(x, var(y))))
    d3 = B.all_l(hind, var(y), d3)
    d3 = absorb_conj(conj(subx, hind), d3)
    d3 = B.imp_r(conj(subx, hind), d3)
    d3 = B.all2_r(fix_at(var(y)), x, d3)
    phi_fix_y = substitute_set(phi_y, x, fix)
    d3 = B.imp_r(phi_fix_y, d3)
    lfp1_formula = forall(tvar, imp(substitute_set(phi, x, fix), fix_at(var(tvar))))
    lfp1 = B.all_r(lfp1_formula, y, d3)

    def lfp2(tau):
        if not level_le(tau.body, n):
            raise LevelViolation(f"abstract body exceeds level {n}")
        if tau.sv:
            raise OmegalabError("lfp2 needs a set-closed abstract (Sub is not derivable otherwise)")
        ax = eq_axioms_for([tau.body, phi])
        phi_tau = substitute_set(phi, x, tau)
        h = forall(tvar, imp(phi_tau, apply_abstract(tau, var(tvar))))
        avoid2 = phi.fv | tau.fv | {tvar, "w"}
        for f in ax.context():
            avoid2 |= f.fv
        z = fresh_term_var(avoid2, "z")
        sigma = abstract(z, imp(h, apply_abstract(tau, var(z))))

        def sigma_at(t):
            return apply_abstract(sigma, t)

        # Sub(sigma)
        a = fresh_term_var(avoid2 | {z}, "a")
        b = fresh_term_var(avoid2 | {z, a}, "b")
        va, vb = var(a), var(b)
        d_tr = mono_eq(apply_abstract(tau, var(z)), z, va, vb, ax)
        d_tr = B.imp_l(sigma_at(va), B.by_id(h), d_tr)
        d_sub_body = B.imp_r(h, d_tr)
        d_sub_body = B.weaken_to(d_sub_body, B.ctx(d_sub_body) | {h})
        pair = conj(eq(va, vb), sigma_at(va))
        d_sub_body = absorb_conj(pair, d_sub_body)
        d_sub_body = B.imp_r(pair, d_sub_body)
        sub_sigma = substitute_set(sub_of(x), x, sigma)
        inner = instantiate(sub_sigma, va)
        d_sub_sigma = B.all_r(sub_sigma, a, B.all_r(inner, b, d_sub_body))

        # prefixed point for sigma: h |- all x.(phi(sigma) -> sigma(x))
        w = fresh_term_var(avoid2 | {z, a, b}, "w")
        wv = var(w)

        def bridge_pos(t):
            return B.imp_l(sigma_at(t), B.by_id(h), B.by_id(apply_abstract(tau, t)))

        def bridge_neg(t):
            d0 = B.by_id(apply_abstract(tau, t), gamma=[h])
            d0 = B.imp_r(h, d0)
            return B.weaken_to(d0, B.ctx(d0) | {h, apply_abstract(tau, t)})

        phi_w = substitute_term(phi, tvar, wv)
        d_m = pos_mono(phi_w, x, sigma, tau, bridge_pos, bridge_neg, frozenset({h}) | set(ax.context()))
        d_in = B.imp_l(instantiate(h, wv), d_m, B.by_id(apply_abstract(tau, wv)))
        d_in = B.all_l(h, wv, d_in)
        d_in = B.imp_r(h, d_in)
        d_in = B.weaken_to(d_in, B.ctx(d_in) | {h})
        d_in = B.imp_r(substitute_term(substitute_set(phi, x, sigma), tvar, wv), d_in)
        prefix_sigma = forall(tvar, imp(substitute_set(phi, x, sigma), sigma_at(var(tvar))))
        d_prefix = B.all_r(prefix_sigma, w, d_in)

        # the instance of Fix at sigma
        yy = fresh_term_var(avoid2 | {z, a, b, w}, "y")
        yv = var(yy)
        minor = instantiate2(fix_at(yv), sigma)
        d_left = B.and_r(d_sub_sigma, d_prefix)
        d_use = B.imp_l(sigma_at(yv), B.by_id(h), B.by_id(apply_abstract(tau, yv)))
        d_core = B.imp_l(minor, d_left, d_use)
        d_core = B.all2_l(fix_at(yv), sigma, d_core)
        d_core = B.imp_r(fix_at(yv), d_core)
        concl = forall("y", imp(fix_at(var("y")), apply_abstract(tau, var("y"))))
        d_core = B.all_r(concl, yy, d_core)
        d_core = B.imp_r(h, d_core)
        return d_core

    return FixpointKit(phi, svar, tvar, n, fix, lfp1, lfp2)


# ---------------------------------------------------------------------------
# Fixed-point formulas and their translation


class IDFormula:
    """First-order formula trees extended with fixed-point atoms, each
    carrying its defining body."""

    __slots__ = ()


@dataclass(frozen=True)
class IDAtom(IDFormula):
    pred: str
    args: tuple = ()


@dataclass(frozen=True)
class IDSetAtom(IDFormula):
    svar: str
    arg: Term


@dataclass(frozen=True)
class IDBot(IDFormula):
    pass


@dataclass(frozen=True)
class IDBin(IDFormula):
    op: str
    left: IDFormula
    right: IDFormula


@dataclass(frozen=True)
class IDQuant(IDFormula):
    q: str
    v: str
    body: IDFormula


@dataclass(frozen=True)
class IDFix(IDFormula):
    """I_phi(t): the fixed-point atom with its stored body phi(X, x)."""

    svar: str
    tvar: str
    body: IDFormula
    arg: Term


def id_level(f):
    """Nesting depth of fixed-point atoms."""
    if isinstance(f, (IDAtom, IDSetAtom, IDBot)):
        return 0
    if isinstance(f, IDBin):
        return max(id_level(f.left), id_level(f.right))
    if isinstance(f, IDQuant):
        return id_level(f.body)
    if isinstance(f, IDFix):
        return 1 + id_level(f.body)
    raise TypeError(f"not an ID formula: {f!r}")


def id_fv(f):
    if isinstance(f, IDAtom):
        return frozenset().union(*(_tfv(t) for t in f.args)) if f.args else frozenset()
    if isinstance(f, IDSetAtom):
        return _tfv(f.arg)
    if isinstance(f, IDBot):
        return frozenset()
    if isinstance(f, IDBin):
        return id_fv(f.left) | id_fv(f.right)
    if isinstance(f, IDQuant):
        return id_fv(f.body) - {f.v}
    if isinstance(f, IDFix):
        return (id_fv(f.body) - {f.tvar}) | _tfv(f.arg)
    raise TypeError(f"not an ID formula: {f!r}")


def id_translate(f):
    """Translate a fixed-point formula into the parameter-free hierarchy:
    fixed-point atoms become their second-order definitions and first-order
    quantifiers are relativized to the naturals.  The result's level is the
    nesting depth of the fixed-point atoms (for bodies that keep a
    quantifier at every nesting stage)."""
    return canonical(_id_tr(f))


def _id_tr(f):
    if isinstance(f, IDAtom):
        return Atom(f.pred, f.args)
    if isinstance(f, IDSetAtom):
        return SetAtom(f.svar, f.arg)
    if isinstance(f, IDBot):
        return BOT
    if isinstance(f, IDBin):
        return Bin(f.op, _id_tr(f.left), _id_tr(f.right))
    if isinstance(f, IDQuant):
        body = _id_tr(f.body)
        if f.q == "all":
            return Quant("all", f.v, imp(nn(Var(f.v)), body))
        return Quant("ex", f.v, conj(nn(Var(f.v)), body))
    if isinstance(f, IDFix):
        body = canonical(_id_tr(f.body))
        if not positive_in(body, f.svar):
            raise NotPositive(f"fixed-point body must be positive in {f.svar}")
        if body.sv - {f.svar}:
            raise LevelViolation(
                f"fixed-point body has free set variables {sorted(body.sv - {f.svar})}"
            )
        if id_fv(f.body) - {f.tvar}:
            raise LevelViolation(
                f"fixed-point body has free term variables {sorted(id_fv(f.body) - {f.tvar})}"
            )
        return fix_formula(body, f.svar, f.tvar, f.arg)
    raise TypeError(f"not an ID formula: {f!r}")


def plain_to_id(f):
    """View a first-order formula as an ID formula (no fixed-point atoms)."""
    if isinstance(f, Atom):
        return IDAtom(f.pred, f.args)
    if isinstance(f, SetAtom):
        return IDSetAtom(f.svar, f.arg)
    if isinstance(f, Bot):
        return IDBot()
    if isinstance(f, Bin):
        return IDBin(f.op, plain_to_id(f.left), plain_to_id(f.right))
    if isinstance(f, Quant):
        return IDQuant(f.q, f.v, plain_to_id(f.body))
    raise TypeError(f"not first-order: {f!r}")
