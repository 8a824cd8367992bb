"""Exact-grammar parsing of terms, formulas, abstracts, sequents and
derivation files, plus the matching serializers.

Grammar summary:
  atoms        p, p(t1,...,tk), X(t), t1 = t2
  connectives  &  |  ->      precedence & > | > ->, -> right-associative
  quantifiers  all x. / ex x. / All X. / Ex X.   binding to the end
  abstracts    \\x. phi
  terms        lowercase identifiers (variables), f(t1,...,tk),
               numerals and * (constants)
  sequents     phi1, phi2 |- psi     (",")-separated, "|-" separator
  derivations  (RULE {witness} SEQUENT PREMISE*)

Term variables are lowercase identifiers, set variables uppercase.  There is
no error recovery: the first offence raises ParseError with line and column.
"""

from .errors import ParseError
from .formulas import (
    AND,
    IMP,
    OR,
    BOT,
    Abstract,
    App,
    Atom,
    Bin,
    Quant,
    Quant2,
    SetAtom,
    Var,
    canonical,
    canonical_abstract,
)
from .printer import abstract_str, fkey, term_str
from .sequents import RULES, Derivation, sequent

_KEYWORDS = {"all", "ex", "All", "Ex", "bot"}

_PUNCT = ("|-", "->", "(", ")", "{", "}", ",", ".", "&", "|", "=", "\\", "*")


def _tokenize(text):
    toks = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        matched = None
        for p in _PUNCT:
            if text.startswith(p, i):
                matched = p
                break
        if matched:
            toks.append((matched, matched, line, col))
            i += len(matched)
            col += len(matched)
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(("num", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isalpha():
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            if word in _KEYWORDS:
                toks.append((word, word, line, col))
            elif word[0].islower():
                toks.append(("lid", word, line, col))
            else:
                toks.append(("uid", word, line, col))
            col += j - i
            i = j
            continue
        raise ParseError(f"unexpected character {c!r}", line, col)
    toks.append(("eof", "", line, col))
    return toks


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.pos = 0

    def peek(self, k=0):
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def next(self):
        t = self.toks[self.pos]
        if t[0] != "eof":
            self.pos += 1
        return t

    def expect(self, kind):
        t = self.next()
        if t[0] != kind:
            raise ParseError(f"expected {kind!r}, got {t[1]!r}", t[2], t[3])
        return t

    def fail(self, msg):
        t = self.peek()
        raise ParseError(msg + f" (got {t[1]!r})", t[2], t[3])

    # -- terms ------------------------------------------------------------

    def term(self):
        t = self.peek()
        if t[0] == "lid":
            self.next()
            # a "(" can also open a premise node in derivation files
            if self.peek()[0] == "(" and not self.at_node_start():
                return App(t[1], self.term_args())
            return Var(t[1])
        if t[0] == "num":
            self.next()
            return App(t[1], ())
        if t[0] == "*":
            self.next()
            return App("*", ())
        self.fail("expected a term")

    def term_args(self):
        self.expect("(")
        args = [self.term()]
        while self.peek()[0] == ",":
            self.next()
            args.append(self.term())
        self.expect(")")
        return tuple(args)

    # -- formulas ----------------------------------------------------------

    def formula(self):
        return self.imp_level()

    def imp_level(self):
        left = self.or_level()
        if self.peek()[0] == "->":
            self.next()
            return Bin(IMP, left, self.imp_level())
        return left

    def or_level(self):
        out = self.and_level()
        while self.peek()[0] == "|":
            self.next()
            out = Bin(OR, out, self.and_level())
        return out

    def and_level(self):
        out = self.unit()
        while self.peek()[0] == "&":
            self.next()
            out = Bin(AND, out, self.unit())
        return out

    def unit(self):
        t = self.peek()
        if t[0] == "bot":
            self.next()
            return BOT
        if t[0] in ("all", "ex"):
            self.next()
            v = self.expect("lid")[1]
            self.expect(".")
            return Quant(t[0], v, self.formula())
        if t[0] in ("All", "Ex"):
            self.next()
            v = self.expect("uid")[1]
            self.expect(".")
            return Quant2(t[0], v, self.formula())
        if t[0] == "(":
            self.next()
            f = self.formula()
            self.expect(")")
            return f
        if t[0] == "uid":
            self.next()
            self.expect("(")
            arg = self.term()
            self.expect(")")
            f = SetAtom(t[1], arg)
            if self.peek()[0] == "=":
                self.fail("a set atom is not a term")
            return f
        if t[0] in ("lid", "num", "*"):
            u = self.term()
            if self.peek()[0] == "=":
                self.next()
                return Atom("=", (u, self.term()))
            if isinstance(u, Var):
                return Atom(u.name, ())
            return Atom(u.head, u.args)
        self.fail("expected a formula")

    def abstract(self):
        self.expect("\\")
        v = self.expect("lid")[1]
        self.expect(".")
        return Abstract(v, self.formula())

    # -- sequents and derivations -------------------------------------------

    def sequent(self):
        ants = []
        if self.peek()[0] != "|-":
            ants.append(self.formula())
            while self.peek()[0] == ",":
                self.next()
                ants.append(self.formula())
        self.expect("|-")
        succ = None
        if self.peek()[0] not in ("eof", ")", "("):
            succ = self.formula()
        elif self.peek()[0] == "(" and not self.at_node_start():
            succ = self.formula()
        return sequent(
            [canonical(f) for f in ants],
            canonical(succ) if succ is not None else None,
        )

    def at_node_start(self):
        return (
            self.peek()[0] == "("
            and self.peek(1)[1] in RULES
            and self.peek(2)[0] == "{"
        )

    def derivation(self):
        self.expect("(")
        rule = self.next()
        if rule[1] not in RULES:
            raise ParseError(f"unknown rule {rule[1]!r}", rule[2], rule[3])
        name = rule[1]
        self.expect("{")
        side, term, fvar, formula, abstract = 0, None, None, None, None
        if name in ("AndL", "OrR"):
            side = int(self.expect("num")[1])
        elif name == "Cut":
            formula = canonical(self.formula())
        elif name in ("AllL", "ExR"):
            term = self.term()
        elif name in ("AllR", "ExL"):
            fvar = self.expect("lid")[1]
        elif name in ("All2R", "Ex2L"):
            fvar = self.expect("uid")[1]
        elif name in ("All2L", "Ex2R"):
            abstract = canonical_abstract(self.abstract())
        self.expect("}")
        concl = self.sequent()
        prems = []
        while self.at_node_start():
            prems.append(self.derivation())
        self.expect(")")
        return Derivation(
            name,
            concl,
            tuple(prems),
            side=side,
            term=term,
            fvar=fvar,
            formula=formula,
            abstract=abstract,
        )


def _finish(p, value):
    t = p.peek()
    if t[0] != "eof":
        raise ParseError(f"trailing input {t[1]!r}", t[2], t[3])
    return value


def parse_term(text):
    p = _Parser(text)
    return _finish(p, p.term())


def parse_formula(text):
    p = _Parser(text)
    return _finish(p, canonical(p.formula()))


def parse_abstract(text):
    p = _Parser(text)
    return _finish(p, canonical_abstract(p.abstract()))


def parse_sequent(text):
    p = _Parser(text)
    return _finish(p, p.sequent())


def parse_derivation(text):
    p = _Parser(text)
    return _finish(p, p.derivation())


def parse_formula_list(text):
    """Top-level comma-separated formulas (used by CLI flags)."""
    text = text.strip()
    if not text:
        return []
    p = _Parser(text)
    out = [canonical(p.formula())]
    while p.peek()[0] == ",":
        p.next()
        out.append(canonical(p.formula()))
    _finish(p, None)
    return out


def parse_term_list(text):
    text = text.strip()
    if not text:
        return []
    p = _Parser(text)
    out = [p.term()]
    while p.peek()[0] == ",":
        p.next()
        out.append(p.term())
    _finish(p, None)
    return out


# ---------------------------------------------------------------------------
# Serialization


def format_sequent(s):
    return str(s)


def _witness_str(d):
    if d.rule in ("AndL", "OrR"):
        return str(d.side)
    if d.rule == "Cut":
        return fkey(d.formula)
    if d.rule in ("AllL", "ExR"):
        return term_str(d.term)
    if d.rule in ("AllR", "ExL", "All2R", "Ex2L"):
        return d.fvar
    if d.rule in ("All2L", "Ex2R"):
        return abstract_str(d.abstract)
    return ""


def format_derivation(d, indent=0):
    pad = "  " * indent
    head = f"{pad}({d.rule} {{{_witness_str(d)}}} {d.conclusion}"
    if not d.premises:
        return head + ")"
    parts = [head]
    for p in d.premises:
        parts.append(format_derivation(p, indent + 1))
    return "\n".join(parts) + ")"
