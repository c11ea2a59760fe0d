"""Linearization and classification of {join, fuse, 1}-equations.

Equations over join, fuse and 1 are normalized into *simple* equations
(linear left-hand word, join of words on the right, same variables on
both sides).  The module also generates the knotted and weak-exchange
equation families and classifies equations by combinatorial/geometric
criteria: joinand-increasing/decreasing, hereditarily square, spineless
(one variable), preknotted, Z-equations (validity in the integers), and
multi-contractibility / multi-weakness.
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from math import gcd

from .syntax import (ONE, Equation, Word, fuse, imp, ldiv, meet, sort_word,
                     subformulas)


class Trivializing(Exception):
    """The equation admits only the one-element model."""


@dataclass(frozen=True)
class SimpleEquation:
    lhs: Word
    joinands: tuple  # tuple of Words
    commutative: bool = True

    def __post_init__(self):
        if not self.joinands:
            raise ValueError("need at least one joinand")
        if self.is_integrality:
            return
        if len(set(self.lhs)) != len(self.lhs):
            raise ValueError("left-hand variables must be pairwise distinct")
        lv = set(self.lhs)
        rv = set()
        for w in self.joinands:
            rv.update(w)
        if lv != rv:
            raise ValueError("every variable must occur on both sides")

    @property
    def is_integrality(self):
        return len(self.lhs) == 1 and self.joinands == ((),)

    def to_equation(self) -> Equation:
        return Equation((self.lhs,), self.joinands, "<=", self.commutative)

    def __repr__(self):
        return "SimpleEquation(%s)" % self.to_equation().__repr__()[9:-1]


def _fresh(base: str, i: int, taken: set) -> str:
    name = "%s_%d" % (base, i)
    while name in taken:
        name += "_"
    return name


def _linearize_one(s: Word, joinands, commutative: bool):
    """Linearize a single inequality  s <= join(joinands)."""
    allvars = set(s)
    for t in joinands:
        allvars.update(t)
    counts = {}
    for x in s:
        counts[x] = counts.get(x, 0) + 1
    # parts[x] lists the variables replacing x (left to right on the lhs)
    parts = {x: [x] for x in counts}
    for x, p in counts.items():
        if p > 1:
            parts[x] = [_fresh(x, i, allvars) for i in range(1, p + 1)]
    seen = {x: 0 for x in counts}
    new_lhs = []
    for x in s:
        new_lhs.append(parts[x][seen[x]])
        seen[x] += 1
    new_lhs = tuple(new_lhs)

    expanded = []
    for t in joinands:
        pools = [parts.get(x, [x]) for x in t]
        for choice in product(*pools):
            expanded.append(sort_word(tuple(choice), commutative))
    expanded = list(dict.fromkeys(expanded))

    # drop joinands mentioning right-only variables; if none survive the
    # equation forces 1 <= x and trivializes
    lv = set(new_lhs)
    kept = [t for t in expanded if set(t) <= lv]
    if not kept:
        raise Trivializing("equation entails 1 <= x")

    out = []
    rv = set()
    for t in kept:
        rv.update(t)
    for v in sorted(lv - rv):  # left-only variables force integrality
        out.append(SimpleEquation((v,), ((),), commutative))
    reduced = tuple(x for x in new_lhs if x in rv)
    out.append(SimpleEquation(sort_word(reduced, commutative),
                              tuple(sorted(kept)), commutative))
    return out


def linearize(e: Equation):
    """Convert a {join, fuse, 1}-equation into equivalent simple equations.

    Raises Trivializing when the input admits only the trivial model.
    """
    ineqs = [(e.lhs, e.rhs)]
    if e.rel == "=":
        ineqs.append((e.rhs, e.lhs))
    out = []
    for lhs, rhs in ineqs:
        for s in lhs:
            out.extend(_linearize_one(s, rhs, e.commutative))
    return tuple(dict.fromkeys(out))


@dataclass(frozen=True)
class KnottedSpec:
    m: int
    n: int

    def __post_init__(self):
        if self.n < 1 or self.m < 0 or self.m == self.n:
            raise ValueError("need n >= 1 and m != n")

    @property
    def mode(self):
        return "contraction" if self.n < self.m else "weakening"


def knotted_simple(k: KnottedSpec, commutative: bool = False) -> SimpleEquation:
    """The simple equation equivalent to x^n <= x^m."""
    if k.m == 0:
        return SimpleEquation(("x_1",), ((),), commutative)
    names = tuple("x_%d" % i for i in range(1, k.n + 1))
    joinands = dict.fromkeys(sort_word(w, commutative)
                             for w in product(names, repeat=k.m))
    return SimpleEquation(names, tuple(sorted(joinands)), commutative)


@dataclass(frozen=True)
class WeakCommSpec:
    a: tuple

    def __post_init__(self):
        a = tuple(self.a)
        object.__setattr__(self, "a", a)
        if len(a) < 2 or any(x < 0 for x in a) or sum(a) != len(a):
            raise ValueError("entries must be nonnegative and sum to their count")
        if all(x == 1 for x in a):
            raise ValueError("the all-ones vector gives a trivial equation")

    @property
    def r(self):
        return len(self.a) - 1

    @property
    def ell(self):
        return 2 * self.r + 1

    @property
    def fw(self):
        j = 0
        while j < self.r and self.a[j] == 1:
            j += 1
        return j

    @property
    def bw(self):
        j = 0
        while j < self.r and self.a[-1 - j] == 1:
            j += 1
        return j

    def normalized(self):
        """Left-multiply by x.y until the front wall is nonempty."""
        w = self
        while w.fw == 0:
            w = WeakCommSpec((1,) + w.a)
        return w


def _wall_word(xcount: int, ys) -> Word:
    ys = list(ys)
    assert len(ys) == max(xcount - 1, 0)
    w = []
    if xcount:
        w.append("x")
        for y in ys:
            w.extend([y, "x"])
    return tuple(w)


def _interleavings(ys, t):
    """All words with t x's threaded through the fixed list ys."""
    ys = list(ys)
    slots = len(ys) + t
    out = []
    for xpos in combinations(range(slots), t):
        xpos = set(xpos)
        w, yi = [], 0
        for i in range(slots):
            if i in xpos:
                w.append("x")
            else:
                w.append(ys[yi])
                yi += 1
        out.append(tuple(w))
    return out


def weakcomm_equations(w: WeakCommSpec):
    """The weak commutativity equation for a and its exchange family.

    Returns (e_a, family) where e_a is  x.y1.x...yr.x = x^a0.y1...yr.x^ar
    for the normalized exponent vector, and the family rearranges the x's
    in the middle part between the front and back walls in all ways.
    """
    nw = w.normalized()
    r, ell, fw, bw = nw.r, nw.ell, nw.fw, nw.bw
    ys = ["y%d" % i for i in range(1, ell)]
    lhs = ["x"]
    for i in range(r):
        lhs.extend([ys[i], "x"])
    rhs = ["x"] * nw.a[0]
    for i in range(r):
        rhs.append(ys[i])
        rhs.extend(["x"] * nw.a[i + 1])
    e_a = Equation((tuple(lhs),), (tuple(rhs),), "=", commutative=False)

    w1 = _wall_word(fw, ys[:fw - 1])
    w2 = _wall_word(bw, ys[ell - bw:ell - 1])
    mids = _interleavings(ys[fw - 1:ell - 1 - bw], ell - fw - bw)
    family = tuple(Equation((w1 + u + w2,), (w1 + v + w2,), "=", False)
                   for u, v in combinations(mids, 2))
    return e_a, family


# ---------------------------------------------------------------------------
# classification


@dataclass(frozen=True)
class Classification:
    joinand_increasing: str    # yes | no
    joinand_decreasing: str    # yes | no
    hereditarily_square: str   # yes | no | not_applicable
    spineless_1var: str        # yes | no | not_applicable
    preknotted: str            # contraction | weakening | no | unknown
    preknotted_witness: tuple  # exponent vector over sorted variables, or None
    z_equation: str            # yes | no
    z_witness: tuple           # coefficients over the rhs joinands, or None
    multicontractible: str     # yes | no | unknown
    multicontractible_witness: tuple
    multiweak: str             # yes | no | unknown
    multiweak_witness: tuple
    cap: int

    def as_dict(self):
        return dict(self.__dict__)


def basic_inequalities(e: Equation):
    """Split '=' and left-hand joins into (word, joinands) inequalities."""
    ineqs = [(e.lhs, e.rhs)]
    if e.rel == "=":
        ineqs.append((e.rhs, e.lhs))
    return [(s, rhs) for lhs, rhs in ineqs for s in lhs]


def _point(w: Word, names) -> tuple:
    return tuple(w.count(x) for x in names)


def _dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def _nullspace(cols, dim):
    """Basis of {c : sum_j c_j cols[j] = 0}, by Gaussian elimination."""
    k = len(cols)
    rows = [[Fraction(cols[j][i]) for j in range(k)] for i in range(dim)]
    pivots = []
    rank = 0
    for col in range(k):
        piv = next((r for r in range(rank, dim) if rows[r][col]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = 1 / rows[rank][col]
        rows[rank] = [x * inv for x in rows[rank]]
        for r in range(dim):
            if r != rank and rows[r][col]:
                f = rows[r][col]
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[rank])]
        pivots.append(col)
        rank += 1
    basis = []
    free = [c for c in range(k) if c not in pivots]
    for fc in free:
        vec = [Fraction(0)] * k
        vec[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            vec[pc] = -rows[r][fc]
        basis.append(vec)
    return basis


def _z_witness(m0, joinands):
    """Nonnegative integers c, not all zero, with (sum c)m0 = sum c_j m_j."""
    vecs = [tuple(a - b for a, b in zip(mj, m0)) for mj in joinands]
    k = len(vecs)
    dim = len(m0)
    for size in range(1, k + 1):
        for sup in combinations(range(k), size):
            basis = _nullspace([vecs[j] for j in sup], dim)
            if len(basis) != 1:
                continue  # minimal supports have a line of solutions
            g = basis[0]
            if any(x == 0 for x in g):
                continue
            if all(x < 0 for x in g):
                g = [-x for x in g]
            if any(x < 0 for x in g):
                continue
            mult = 1
            for x in g:
                d = x.denominator
                mult = mult * d // gcd(mult, d)
            c = [0] * k
            for j, x in zip(sup, g):
                c[j] = int(x * mult)
            return tuple(c)
    return None


def _preknotted_witness(m0, joinands, nvars, cap):
    for nvec in product(range(cap + 1), repeat=nvars):
        if not any(nvec):
            continue
        bs = {_dot(nvec, mj) for mj in joinands}
        if len(bs) != 1:
            continue
        b = bs.pop()
        a = _dot(nvec, m0)
        if a >= 1 and a != b:
            return ("contraction" if a < b else "weakening", nvec)
    return None


def _multi_witness(m0, joinands, nvars, cap, increasing):
    for avec in product(range(cap + 1), repeat=nvars):
        k = _dot(avec, m0)
        if k < 1:
            continue
        es = [_dot(avec, mj) for mj in joinands]
        if increasing and all(x > k for x in es):
            return avec
        if not increasing and all(x < k for x in es):
            return avec
    return None


def _member_increasing(s: SimpleEquation) -> bool:
    if s.is_integrality:
        return False
    lv = set(s.lhs)
    return any(lv <= set(t) for t in s.joinands)


def _member_decreasing(s: SimpleEquation) -> bool:
    if s.is_integrality:
        return True
    return any(len(set(t)) == len(t) for t in s.joinands)


def _word_has_square(w: Word) -> bool:
    n = len(w)
    for i in range(n):
        for l in range(1, (n - i) // 2 + 1):
            if w[i:i + l] == w[i + l:i + 2 * l]:
                return True
    return False


def _hereditarily_square(m0, joinands, names, commutative):
    def canon(w, keep):
        return sort_word(tuple(x for x in w if x in keep), commutative)

    for bits in product((False, True), repeat=len(names)):
        keep = {x for x, b in zip(names, bits) if b}
        left = canon(m0, keep)
        insts = [canon(t, keep) for t in joinands]
        if left in insts:
            continue
        if not any(_word_has_square(t) for t in insts):
            return False
    return True


def classify(e: Equation, preknotted_cap: int = None,
             multi_cap: int = 4) -> Classification:
    """Classify a {join, fuse, 1}-equation by its combinatorial flags."""
    try:
        members = linearize(e)
        trivializing = False
    except Trivializing:
        members = ()
        trivializing = True
    if trivializing:
        inc, dec = "yes", "no"
    else:
        inc = "yes" if all(_member_increasing(s) for s in members) else "no"
        dec = "yes" if all(_member_decreasing(s) for s in members) else "no"

    basics = basic_inequalities(e)
    pointed = []
    for m0w, joins in basics:
        names = tuple(sorted(set(m0w) | {x for t in joins for x in t}))
        pointed.append((m0w, joins, names,
                        _point(m0w, names), [_point(t, names) for t in joins]))

    if preknotted_cap is None:
        degrees = [sum(p) for (_, _, _, p0, ps) in pointed for p in [p0] + ps]
        preknotted_cap = 1 + max(degrees, default=0)

    z_flags, z_first = [], None
    for (_, _, names, p0, ps) in pointed:
        w = _z_witness(p0, ps)
        z_flags.append(w is not None)
        if w is not None and z_first is None:
            z_first = w
    z_eq = "yes" if z_flags and all(z_flags) else "no"
    z_wit = z_first if z_eq == "yes" else None

    def geom(finder):
        for (_, _, names, p0, ps) in pointed:
            got = finder(p0, ps, len(names))
            if got is not None:
                return got
        return None

    pk = geom(lambda p0, ps, n: _preknotted_witness(p0, ps, n, preknotted_cap))
    if pk is not None:
        preknotted, pk_wit = pk
    elif z_eq == "yes":
        preknotted, pk_wit = "no", None  # Z-equations are never preknotted
    else:
        preknotted, pk_wit = "unknown", None

    mc = geom(lambda p0, ps, n: _multi_witness(p0, ps, n, multi_cap, True))
    mw = geom(lambda p0, ps, n: _multi_witness(p0, ps, n, multi_cap, False))
    multicontractible = "yes" if mc is not None else (
        "no" if z_eq == "yes" else "unknown")
    multiweak = "yes" if mw is not None else (
        "no" if z_eq == "yes" else "unknown")

    applicable = all(set(m0w) == {x for t in joins for x in t}
                     for m0w, joins, *_ in pointed)
    if not applicable:
        hered = "not_applicable"
    else:
        hered = "yes" if all(
            _hereditarily_square(m0w, joins, names, e.commutative)
            for m0w, joins, names, _, _ in pointed) else "no"

    if (e.rel == "<=" and len(e.lhs) == 1 and len(e.variables()) == 1):
        m0w, joins = basics[0]
        exps = {len(t) for t in joins}
        pos = sorted(x for x in exps if x > 0)
        spineless = "yes" if len(m0w) > 0 and len(pos) >= 2 else "no"
    else:
        spineless = "not_applicable"

    return Classification(
        joinand_increasing=inc, joinand_decreasing=dec,
        hereditarily_square=hered, spineless_1var=spineless,
        preknotted=preknotted, preknotted_witness=pk_wit,
        z_equation=z_eq, z_witness=z_wit,
        multicontractible=multicontractible, multicontractible_witness=mc,
        multiweak=multiweak, multiweak_witness=mw,
        cap=preknotted_cap)


# ---------------------------------------------------------------------------
# deducibility helpers


def deduction_translate(gamma, phi, n: int):
    """(1 /\\ g1 /\\ ... /\\ gk)^n -> phi, right-associated throughout."""
    if n < 1:
        raise ValueError("exponent must be positive")
    acc = None
    for g in reversed(list(gamma)):
        acc = g if acc is None else meet(g, acc)
    body = ONE if acc is None else meet(ONE, acc)
    power = body
    for _ in range(n - 1):
        power = fuse(body, power)
    return imp(power, phi)


def pt_reduction(phi):
    """Contraction instances over the subformulas of phi."""
    subs = list(dict.fromkeys(subformulas(phi)))
    out = {ldiv(p, fuse(p, p)) for p in subs}
    out.update(ldiv(fuse(p, q), fuse(q, p)) for p in subs for q in subs)
    return out
