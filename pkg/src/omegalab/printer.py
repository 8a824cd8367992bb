"""Deterministic text rendering of terms, formulas and abstracts.

The output follows the package's surface grammar (see parser.py) and is the
canonical serialization: two formulas are alpha-equal iff they print to the
same string.  Bound variables, stored internally under reserved names, are
displayed as the first pretty name that cannot capture anything in scope.
"""

from .formulas import (
    AND,
    IMP,
    OR,
    Abstract,
    App,
    Atom,
    Bin,
    Bot,
    Quant,
    Quant2,
    SetAtom,
    Var,
)

_TERM_NAMES = ("x", "y", "z", "u", "v", "w")
_SET_NAMES = ("X", "Y", "Z", "U", "V", "W")

_LEVEL = {AND: 3, OR: 2, IMP: 1}


def _reserved(name):
    return name.startswith("_")


def term_str(t, env=None):
    env = env or {}
    if isinstance(t, Var):
        return env.get(t.name, t.name)
    if not t.args:
        return t.head
    return t.head + "(" + ",".join(term_str(a, env) for a in t.args) + ")"


def _pick(seq, avoid):
    for base in seq:
        if base not in avoid:
            return base
    i = 1
    while True:
        for base in seq:
            cand = f"{base}{i}"
            if cand not in avoid:
                return cand
        i += 1


def _display_name(kind, body_fv, body_sv, env):
    # A candidate must not collide with a user name free in the body, nor
    # with the display name of an enclosing binder still referenced there.
    avoid = set()
    for n in body_fv:
        avoid.add(env.get(n, n) if _reserved(n) else n)
    for n in body_sv:
        avoid.add(env.get(n, n) if _reserved(n) else n)
    return _pick(_TERM_NAMES if kind == "term" else _SET_NAMES, avoid)


def _render(f, min_level, env):
    if isinstance(f, Bot):
        return "bot"
    if isinstance(f, Atom):
        if f.pred == "=" and len(f.args) == 2:
            return term_str(f.args[0], env) + " = " + term_str(f.args[1], env)
        if not f.args:
            return f.pred
        return f.pred + "(" + ",".join(term_str(a, env) for a in f.args) + ")"
    if isinstance(f, SetAtom):
        name = env.get(f.svar, f.svar)
        return name + "(" + term_str(f.arg, env) + ")"
    if isinstance(f, Bin):
        lv = _LEVEL[f.op]
        left = _render(f.left, lv if f.op != IMP else lv + 1, env)
        right = _render(f.right, lv + 1 if f.op != IMP else lv, env)
        s = f"{left} {f.op} {right}"
        return f"({s})" if lv < min_level else s
    if isinstance(f, Quant):
        name = _display_name("term", f.body.fv - {f.v}, f.body.sv, env)
        env2 = dict(env)
        env2[f.v] = name
        s = f"{f.q} {name}. {_render(f.body, 0, env2)}"
        return f"({s})" if min_level > 0 else s
    if isinstance(f, Quant2):
        name = _display_name("set", f.body.fv, f.body.sv - {f.v}, env)
        env2 = dict(env)
        env2[f.v] = name
        s = f"{f.q} {name}. {_render(f.body, 0, env2)}"
        return f"({s})" if min_level > 0 else s
    raise TypeError(f"not a formula: {f!r}")


_fkey_cache = {}


def formula_str(f):
    got = _fkey_cache.get(f)
    if got is None:
        got = _render(f, 0, {})
        _fkey_cache[f] = got
    return got


fkey = formula_str


def abstract_str(a):
    name = _display_name("term", a.body.fv - {a.v}, a.body.sv, {})
    return f"\\{name}. {_render(a.body, 0, {a.v: name})}"
