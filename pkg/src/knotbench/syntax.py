r"""Formulas, equations, substitutions, subformula closures.

Formulas are immutable trees over {var, 1, 0, /\, \/, *, \, /}.  Equations
live in the {join, fuse, 1} fragment and are kept fully distributed: each
side is a join of words, a word being a tuple of variable names (empty
tuple = the unit).  A mode flag distinguishes commutative words (compared
as multisets) from noncommutative ones (compared as tuples).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Optional


# ---------------------------------------------------------------------------
# formulas


@dataclass(frozen=True)
class Formula:
    kind: str  # var | one | zero | meet | join | fuse | ldiv | rdiv
    name: Optional[str] = None
    left: Optional["Formula"] = None
    right: Optional["Formula"] = None

    def __repr__(self):
        return "Formula(%s)" % render_formula(self)


ONE = Formula("one")
ZERO = Formula("zero")


def var(name: str) -> Formula:
    return Formula("var", name=name)


def meet(l, r):
    return Formula("meet", left=l, right=r)


def join(l, r):
    return Formula("join", left=l, right=r)


def fuse(l, r):
    return Formula("fuse", left=l, right=r)


def ldiv(l, r):
    return Formula("ldiv", left=l, right=r)


def rdiv(l, r):
    return Formula("rdiv", left=l, right=r)


def imp(l, r):
    # surface implication; same node as left division
    return ldiv(l, r)


BINARY = {"meet", "join", "fuse", "ldiv", "rdiv"}

# precedence: fuse > ldiv/rdiv > meet > join
_PREC = {"join": 1, "meet": 2, "ldiv": 3, "rdiv": 3, "fuse": 4}


def formula_size(f: Formula) -> int:
    """Symbol count: one per variable, constant, or connective."""
    if f.kind in ("var", "one", "zero"):
        return 1
    return 1 + formula_size(f.left) + formula_size(f.right)


def subformulas(f: Formula):
    """All subformulas, pre-order, with repeats."""
    yield f
    if f.kind in BINARY:
        yield from subformulas(f.left)
        yield from subformulas(f.right)


def formula_vars(f: Formula) -> set:
    return {g.name for g in subformulas(f) if g.kind == "var"}


def apply_subst(f: Formula, sub: dict) -> Formula:
    if f.kind == "var":
        return sub.get(f.name, f)
    if f.kind in BINARY:
        return Formula(f.kind, left=apply_subst(f.left, sub),
                       right=apply_subst(f.right, sub))
    return f


# ---------------------------------------------------------------------------
# rendering

_OPTXT = {"meet": "/\\", "join": "\\/", "fuse": "*", "rdiv": "/"}


def render_formula(f: Formula, commutative: bool = False) -> str:
    def rend(g, parent_prec, side):
        if g.kind == "var":
            return g.name
        if g.kind == "one":
            return "1"
        if g.kind == "zero":
            return "0"
        prec = _PREC[g.kind]
        if g.kind == "ldiv":
            op = "->" if commutative else "\\"
        else:
            op = _OPTXT[g.kind]
        # ldiv/rdiv are non-associative: parenthesize any nested division
        if g.kind in ("ldiv", "rdiv"):
            l = rend(g.left, prec + 1, "l")
            r = rend(g.right, prec + 1, "r")
        elif g.kind == "fuse":  # left-associative
            l = rend(g.left, prec, "l")
            r = rend(g.right, prec + 1, "r")
        else:  # meet, join: right-associative
            l = rend(g.left, prec + 1, "l")
            r = rend(g.right, prec, "r")
        s = "%s %s %s" % (l, op, r)
        if prec < parent_prec:
            s = "(" + s + ")"
        return s

    return rend(f, 0, "l")


# ---------------------------------------------------------------------------
# tokenizer shared by the formula and equation parsers

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<atom>[a-z][A-Za-z0-9_]*)|(?P<num>\d+)|(?P<op>"
    r"->|<=|=>|/\\|\\/|[*\\/()^=|,])|(?P<bad>\S))")


class ParseError(ValueError):
    pass


def _tokenize(text: str):
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            break
        if m.group("bad"):
            raise ParseError("unknown token %r at position %d"
                             % (m.group("bad"), m.start("bad")))
        if m.group("atom"):
            toks.append(("atom", m.group("atom"), m.start("atom")))
        elif m.group("num"):
            toks.append(("num", m.group("num"), m.start("num")))
        else:
            toks.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    return toks


class _Tokens:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self):
        t = self.peek()
        if t is None:
            raise ParseError("unexpected end of input")
        self.i += 1
        return t

    def eat(self, op):
        t = self.peek()
        if t and t[0] == "op" and t[1] == op:
            self.i += 1
            return True
        return False

    def expect(self, op):
        if not self.eat(op):
            t = self.peek()
            raise ParseError("expected %r, got %r" % (op, t and t[1]))

    def done(self):
        return self.i >= len(self.toks)


# ---------------------------------------------------------------------------
# formula parser
#
# join := meet ('\/' join)?
# meet := div ('/\' meet)?
# div  := fus (('\'|'/'|'->') fus)?     (non-associative)
# fus  := atom ('*' atom)*


def parse_formula(text: str) -> Formula:
    if not text.strip():
        raise ParseError("empty formula")
    ts = _Tokens(text)
    f = _p_join(ts)
    if not ts.done():
        raise ParseError("trailing input at token %r" % (ts.peek()[1],))
    return f


def _p_join(ts):
    l = _p_meet(ts)
    if ts.eat("\\/"):
        return join(l, _p_join(ts))
    return l


def _p_meet(ts):
    l = _p_div(ts)
    if ts.eat("/\\"):
        return meet(l, _p_meet(ts))
    return l


def _p_div(ts):
    l = _p_fuse(ts)
    t = ts.peek()
    if t and t[0] == "op" and t[1] in ("\\", "/", "->"):
        ts.next()
        r = _p_fuse(ts)
        if t[1] == "/":
            return rdiv(l, r)
        return ldiv(l, r)
    return l


def _p_fuse(ts):
    l = _p_atomf(ts)
    while ts.eat("*"):
        l = fuse(l, _p_atomf(ts))
    return l


def _p_atomf(ts):
    t = ts.next()
    if t[0] == "atom":
        return var(t[1])
    if t[0] == "num":
        if t[1] == "1":
            return ONE
        if t[1] == "0":
            return ZERO
        raise ParseError("unexpected number %r at position %d" % (t[1], t[2]))
    if t[0] == "op" and t[1] == "(":
        f = _p_join(ts)
        ts.expect(")")
        return f
    raise ParseError("unexpected token %r at position %d" % (t[1], t[2]))


# ---------------------------------------------------------------------------
# equations: joins of words over variables

Word = tuple  # tuple of variable names


def sort_word(w: Word, commutative: bool) -> Word:
    return tuple(sorted(w)) if commutative else tuple(w)


@dataclass(frozen=True)
class Equation:
    lhs: tuple  # tuple of Words
    rhs: tuple
    rel: str = "<="  # '<=' or '='
    commutative: bool = True

    def __post_init__(self):
        if not self.lhs or not self.rhs:
            raise ValueError("each side needs at least one joinand")

    def variables(self) -> set:
        out = set()
        for side in (self.lhs, self.rhs):
            for w in side:
                out.update(w)
        return out

    def __repr__(self):
        return "Equation(%s)" % render_equation(self)


def render_word(w: Word) -> str:
    if not w:
        return "1"
    parts = []
    i = 0
    while i < len(w):
        j = i
        while j < len(w) and w[j] == w[i]:
            j += 1
        parts.append(w[i] if j - i == 1 else "%s^%d" % (w[i], j - i))
        i = j
    return "*".join(parts)


def render_equation(e: Equation) -> str:
    def side(ws):
        return " \\/ ".join(render_word(w) for w in ws)

    return "%s %s %s" % (side(e.lhs), e.rel, side(e.rhs))


def _p_eq_word(ts):
    # word := factor ('*' factor)* ; factor := atom ('^' nat)? | '1'
    w = []
    while True:
        t = ts.next()
        if t[0] == "atom":
            name = t[1]
            k = 1
            if ts.eat("^"):
                n = ts.next()
                if n[0] != "num":
                    raise ParseError("expected exponent at position %d" % n[2])
                k = int(n[1])
            w.extend([name] * k)
        elif t[0] == "num" and t[1] == "1":
            pass
        else:
            raise ParseError("unexpected token %r in word at position %d"
                             % (t[1], t[2]))
        if not ts.eat("*"):
            break
    return tuple(w)


def _p_eq_side(ts, commutative):
    words = [sort_word(_p_eq_word(ts), commutative)]
    while ts.eat("\\/"):
        words.append(sort_word(_p_eq_word(ts), commutative))
    return tuple(dict.fromkeys(words))  # dedupe, keep order


def parse_equation(text: str, commutative: bool = True) -> Equation:
    """Parse `x^2*y <= x \\/ y` style equations.

    Exponent suffixes use `^`; relators are `<=` and `=`.
    """
    ts = _Tokens(text)
    lhs = _p_eq_side(ts, commutative)
    rel = None
    if ts.eat("<="):
        rel = "<="
    elif ts.eat("="):
        rel = "="
    else:
        t = ts.peek()
        raise ParseError("expected relator, got %r" % (t and t[1],))
    rhs = _p_eq_side(ts, commutative)
    if not ts.done():
        raise ParseError("trailing input at token %r" % (ts.peek()[1],))
    return Equation(lhs, rhs, rel, commutative)


def equation_from_formulas(l: Formula, r: Formula, rel: str = "<=",
                           commutative: bool = True) -> Equation:
    """Build a distributed Equation from {join,fuse,1} formulas."""
    return Equation(tuple(_distribute(l, commutative)),
                    tuple(_distribute(r, commutative)), rel, commutative)


def _distribute(f: Formula, commutative: bool):
    if f.kind == "one":
        return [()]
    if f.kind == "var":
        return [(f.name,)]
    if f.kind == "join":
        out = _distribute(f.left, commutative) + _distribute(f.right, commutative)
        return list(dict.fromkeys(sort_word(w, commutative) for w in out))
    if f.kind == "fuse":
        ls = _distribute(f.left, commutative)
        rs = _distribute(f.right, commutative)
        return list(dict.fromkeys(
            sort_word(a + b, commutative) for a in ls for b in rs))
    raise ParseError("equation sides must use only *, \\/ and 1 (got %s)"
                     % f.kind)


# ---------------------------------------------------------------------------
# tau / rho transformers


def tau(f: Formula) -> set:
    """Formula -> set of equations: {1 <= f} (formula-level)."""
    return {(ONE, "<=", f)}


def rho(lhs: Formula, rhs: Formula) -> Formula:
    """Equality lhs = rhs -> the formula (lhs\\rhs) /\\ (rhs\\lhs)."""
    return meet(ldiv(lhs, rhs), ldiv(rhs, lhs))


# ---------------------------------------------------------------------------
# formula sets


class FormulaSet:
    """Ordered list of distinct formulas with an index map."""

    def __init__(self, formulas: Iterable[Formula] = ()):
        self.formulas = []
        self.index = {}
        for f in formulas:
            self.add(f)

    def add(self, f: Formula) -> int:
        if f not in self.index:
            self.index[f] = len(self.formulas)
            self.formulas.append(f)
        return self.index[f]

    def __len__(self):
        return len(self.formulas)

    def __iter__(self):
        return iter(self.formulas)

    def __contains__(self, f):
        return f in self.index

    def __getitem__(self, i):
        return self.formulas[i]

    def __repr__(self):
        return "FormulaSet{%s}" % ", ".join(
            render_formula(f) for f in self.formulas)


def subformula_closure(fs: Iterable[Formula]) -> FormulaSet:
    """Smallest set containing the inputs and closed under immediate
    subformulas, in discovery (pre-order) order."""
    out = FormulaSet()
    for root in fs:
        for g in subformulas(root):
            out.add(g)
    return out
