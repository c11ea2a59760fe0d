"""Composable normed quasi-orders, controlled bad sequences, hypersequent
encodings, and fast-growing function evaluators.

Order elements are plain hashable Python values whose shape follows the
spec: ints for Nat/Knotted, strings (or any atom) for Flat, tuples for
Product, (tag_index, value) pairs for Sum, frozensets for Majoring and
Minoring, tuples of elements for Higman.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional


class BudgetError(RuntimeError):
    """Raised when an evaluator would exceed its magnitude budget."""


DEFAULT_BUDGET = 10 ** 9


# ---------------------------------------------------------------------------
# order descriptors


@dataclass(frozen=True)
class OrderSpec:
    kind: str  # nat | flat | knotted | prod | sum | maj | min | hig
    m: int = 0
    n: int = 0
    atoms: Optional[frozenset] = None
    parts: tuple = ()

    def __repr__(self):
        return "OrderSpec(%s)" % render_order_spec(self)


def Nat() -> OrderSpec:
    return OrderSpec("nat")


def Flat(atoms=None) -> OrderSpec:
    """Discrete order; atoms=None accepts any hashable value."""
    return OrderSpec("flat", atoms=None if atoms is None else frozenset(atoms))


def Knotted(m: int, n: int) -> OrderSpec:
    if not 0 <= n < m:
        raise ValueError("knotted order needs 0 <= n < m")
    return OrderSpec("knotted", m=m, n=n)


def Product(parts) -> OrderSpec:
    return OrderSpec("prod", parts=tuple(parts))


def Sum(parts) -> OrderSpec:
    return OrderSpec("sum", parts=tuple(parts))


def Majoring(inner: OrderSpec) -> OrderSpec:
    return OrderSpec("maj", parts=(inner,))


def Minoring(inner: OrderSpec) -> OrderSpec:
    return OrderSpec("min", parts=(inner,))


def Higman(inner: OrderSpec) -> OrderSpec:
    return OrderSpec("hig", parts=(inner,))


def render_order_spec(spec: OrderSpec) -> str:
    if spec.kind == "nat":
        return "nat"
    if spec.kind == "flat":
        if spec.atoms is None:
            return "flat:*"
        return "flat:" + ",".join(sorted(map(str, spec.atoms)))
    if spec.kind == "knotted":
        return "knotted:%d,%d" % (spec.m, spec.n)
    if spec.kind == "prod":
        ps = spec.parts
        if ps and all(p == ps[0] for p in ps):
            return "%s^%d" % (render_order_spec(ps[0]), len(ps))
        return "prod(%s)" % ";".join(render_order_spec(p) for p in ps)
    if spec.kind == "sum":
        return "sum(%s)" % ";".join(render_order_spec(p) for p in spec.parts)
    name = {"maj": "maj", "min": "min", "hig": "higman"}[spec.kind]
    return "%s(%s)" % (name, render_order_spec(spec.parts[0]))


class OrderSpecError(ValueError):
    pass


def parse_order_spec(text: str) -> OrderSpec:
    """Parse the CLI order mini-language.

    Examples: `nat`, `knotted:5,2`, `flat:a,b,c`,
    `min(knotted:5,2^3)^4`, `higman(flat:a,b,c)`,
    `prod(nat;nat)`, `sum(nat;flat:a)`.
    A trailing `^k` raises the spec to a k-fold product.
    """
    s = text.strip()
    spec, rest = _pos_parse(s)
    if rest.strip():
        raise OrderSpecError("trailing input %r in order spec" % rest)
    return spec


def _pos_parse(s: str):
    s = s.lstrip()
    for name, ctor in (("min", Minoring), ("maj", Majoring),
                       ("higman", Higman), ("hig", Higman)):
        if s.startswith(name + "("):
            inner, rest = _pos_parse(s[len(name) + 1:])
            rest = rest.lstrip()
            if not rest.startswith(")"):
                raise OrderSpecError("missing ) in order spec")
            return _power(ctor(inner), rest[1:])
    for name, ctor in (("prod", Product), ("sum", Sum)):
        if s.startswith(name + "("):
            rest = s[len(name) + 1:]
            parts = []
            while True:
                inner, rest = _pos_parse(rest)
                parts.append(inner)
                rest = rest.lstrip()
                if rest.startswith(";"):
                    rest = rest[1:]
                    continue
                if rest.startswith(")"):
                    return _power(ctor(parts), rest[1:])
                raise OrderSpecError("missing ) in order spec")
    if s.startswith("nat"):
        return _power(Nat(), s[3:])
    if s.startswith("flat:"):
        rest = s[5:]
        atoms, rest = _take_atoms(rest)
        return _power(Flat(atoms), rest)
    if s.startswith("knotted:"):
        rest = s[8:]
        nums, rest = _take_atoms(rest)
        if len(nums) != 2:
            raise OrderSpecError("knotted takes two parameters")
        return _power(Knotted(int(nums[0]), int(nums[1])), rest)
    raise OrderSpecError("cannot parse order spec at %r" % s[:20])


def _take_atoms(s: str):
    out = []
    cur = ""
    i = 0
    while i < len(s) and (s[i].isalnum() or s[i] in "_,"):
        if s[i] == ",":
            out.append(cur)
            cur = ""
        else:
            cur += s[i]
        i += 1
    out.append(cur)
    return [a for a in out if a], s[i:]


def _power(spec: OrderSpec, rest: str):
    rest = rest.lstrip()
    while rest.startswith("^"):
        j = 1
        while j < len(rest) and rest[j].isdigit():
            j += 1
        spec = Product([spec] * int(rest[1:j]))
        rest = rest[j:].lstrip()
    return spec, rest


# ---------------------------------------------------------------------------
# comparison and norms


def leq(spec: OrderSpec, a, b) -> bool:
    k = spec.kind
    if k == "nat":
        return _nat(a) <= _nat(b)
    if k == "flat":
        if spec.atoms is not None and (a not in spec.atoms or b not in spec.atoms):
            raise ValueError("flat element outside the declared atom set")
        return a == b
    if k == "knotted":
        return knotted_leq(spec.m, spec.n, _nat(a), _nat(b))
    if k == "prod":
        if len(a) != len(spec.parts) or len(b) != len(spec.parts):
            raise ValueError("product arity mismatch")
        return all(leq(p, x, y) for p, x, y in zip(spec.parts, a, b))
    if k == "sum":
        (ta, va), (tb, vb) = a, b
        if ta != tb:
            return False
        return leq(spec.parts[ta], va, vb)
    if k == "maj":
        inner = spec.parts[0]
        return all(any(leq(inner, x, y) for y in b) for x in a)
    if k == "min":
        inner = spec.parts[0]
        return all(any(leq(inner, x, y) for x in a) for y in b)
    if k == "hig":
        return _higman_leq(spec.parts[0], tuple(a), tuple(b))
    raise ValueError("unknown spec kind %r" % k)


def _nat(a):
    if not isinstance(a, int) or a < 0:
        raise ValueError("expected a natural number, got %r" % (a,))
    return a


def knotted_leq(m: int, n: int, a: int, b: int) -> bool:
    """a <= b in the knotted order with parameters 0 <= n < m."""
    if not 0 <= n < m:
        raise ValueError("knotted order needs 0 <= n < m")
    if a < n or b < n:
        return a == b
    return a <= b and (b - a) % (m - n) == 0


def _higman_leq(inner, a, b):
    # greedy leftmost embedding; valid for arbitrary relations
    i = 0
    for y in b:
        if i < len(a) and leq(inner, a[i], y):
            i += 1
    return i == len(a)


def norm(spec: OrderSpec, a) -> int:
    k = spec.kind
    if k == "nat" or k == "knotted":
        return _nat(a)
    if k == "flat":
        return 0
    if k == "prod":
        return max((norm(p, x) for p, x in zip(spec.parts, a)), default=0)
    if k == "sum":
        t, v = a
        return norm(spec.parts[t], v)
    if k in ("maj", "min"):
        inner = spec.parts[0]
        return max([len(a)] + [norm(inner, x) for x in a])
    if k == "hig":
        inner = spec.parts[0]
        return max([len(a)] + [norm(inner, x) for x in a])
    raise ValueError("unknown spec kind %r" % k)


def reflect_knotted(m: int, n: int, a: int):
    """Strong reflection of the knotted order into Flat(m) x Nat.

    Returns (residue, a); a <=_{m,n} b iff the reflections compare in the
    product of equality on the residue and <= on the value.
    """
    if not 0 <= n < m:
        raise ValueError("knotted reflection needs 0 <= n < m")
    r = a if a < n else n + (a - n) % (m - n)
    return (r, a)


def is_controlled_bad(spec: OrderSpec, seq, f: Callable[[int], int],
                      t: int) -> bool:
    """True iff seq is bad (no leq pair i<j) and norm(seq[i]) <= f^i(t)."""
    bound = t
    prev = None
    for i, a in enumerate(seq):
        if i > 0:
            nxt = f(bound)
            if nxt < bound:
                raise ValueError("control function is not expansive at %d"
                                 % bound)
            bound = nxt
        if norm(spec, a) > bound:
            return False
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if leq(spec, seq[i], seq[j]):
                return False
    return True


# ---------------------------------------------------------------------------
# hypersequent encodings
#
# A component is handed in as (stoup, payload): stoup is None for the empty
# stoup or an index 0..d-1 into the ambient formula list; the payload is a
# multiplicity vector (commutative modes) or an index word (noncommutative).


def encode_ctr(components, d: int):
    """Contraction encoding: (X_0, ..., X_d) with X_i the set of antecedent
    multiplicity vectors of the components whose stoup is formula i-1
    (X_0 collects the empty-stoup components)."""
    groups = [set() for _ in range(d + 1)]
    for stoup, vec in components:
        i = 0 if stoup is None else stoup + 1
        groups[i].add(tuple(vec))
    return tuple(frozenset(g) for g in groups)


encode_wkn = encode_ctr  # same shape; compared under Majoring instead


def ctr_spec(d: int, m: int, n: int) -> OrderSpec:
    vec = Product([Knotted(m, n)] * d)
    return Product([Minoring(vec)] * (d + 1))


def wkn_spec(d: int, m: int, n: int) -> OrderSpec:
    """Weakening comparisons are the converse of the (n, m) contraction
    comparisons; callers compare encode(h), encode(h') under Majoring of
    that converse, i.e. leq(wkn_spec, X, Y) with the roles as documented
    in hs_leq."""
    vec = Product([Knotted(n, m)] * d)
    return Product([Majoring(vec)] * (d + 1))


def hs_leq_ctr(h1, h2, d: int, m: int, n: int) -> bool:
    """h1 is derivable from h2 by k(m,n) contraction (n < m), EC, EW."""
    return leq(ctr_spec(d, m, n), encode_ctr(h1, d), encode_ctr(h2, d))


def hs_leq_wkn(h1, h2, d: int, m: int, n: int) -> bool:
    """h2 is derivable from h1 by k(m,n) weakening (n > m), EC, EW.

    Coordinatewise the premise value v becomes v - m + n >= v, i.e. the
    conclusion dominates in the (m, n)-converse = (n, m) knotted order.
    """
    spec = Product([Majoring(Product([Knotted(n, m)] * d))] * (d + 1))
    return leq(spec, encode_wkn(h1, d), encode_wkn(h2, d))


def encode_wc(components, d: int):
    """Weak-commutativity encoding: per stoup, the set of (type, counts)
    pairs; the type tag is compared for equality, the counts under the
    shifted knotted order."""
    groups = [set() for _ in range(d + 1)]
    for stoup, typ, vec in components:
        i = 0 if stoup is None else stoup + 1
        groups[i].add((typ, tuple(vec)))
    return tuple(frozenset(g) for g in groups)


def wc_spec(d: int, ell: int, m: int, n: int) -> OrderSpec:
    pair = Product([Flat(), Product([Knotted(ell + m, ell + n)] * d)])
    return Product([Minoring(pair)] * (d + 1))


def encode_int_nc(components, d: int):
    """Noncommutative integral encoding: per stoup, the sequence of
    antecedent index words, in the fixed total order (reverse
    lexicographic) so equal hypersequents encode equally."""
    groups = [[] for _ in range(d + 1)]
    for stoup, word in components:
        i = 0 if stoup is None else stoup + 1
        groups[i].append(tuple(word))
    return tuple(tuple(sorted(g, reverse=True)) for g in groups)


def int_nc_spec(d: int) -> OrderSpec:
    return Product([Higman(Higman(Flat()))] * (d + 1))


# ---------------------------------------------------------------------------
# structural-rule derivation oracle


def order_equiv_oracle(h1, h2, d: int, m: int, n: int,
                       use_ec: bool = True, use_ew: bool = True,
                       cap: int = 200000) -> str:
    """Decide by explicit search whether h1 <| h2 for the structural rules
    {k(m,n), EC, EW}: for contraction (n < m) whether h1 is derivable from
    h2, for weakening (n > m) whether h2 is derivable from h1.

    Components are (stoup, multiplicity-vector) pairs.  Returns "yes",
    "no", or "unknown" (cap exhausted).
    """
    if n < m:
        src, tgt = h2, h1
    else:
        src, tgt = h1, h2
    src = _canon_hs(src)
    tgt = _canon_hs(tgt)
    tgt_counts = {}
    for c in tgt:
        tgt_counts[c] = tgt_counts.get(c, 0) + 1
    # multiplicities can only move toward the conclusion side; cap growth
    # for the weakening direction
    mult_cap = None
    if n > m:
        mult_cap = max([0] + [max(v, default=0) for _, v in tgt]) + (n - m)
    # a minimal derivation adds at most one EW component per target
    # occurrence, so the component count never needs to exceed this
    comp_cap = len(src) + len(tgt)
    seen = {src}
    frontier = [src]
    capped = False
    while frontier:
        if len(seen) > cap:
            capped = True
            break
        nxt = []
        for hs in frontier:
            if hs == tgt:
                return "yes"
            for succ in _struct_successors(hs, tgt_counts, m, n, use_ec,
                                           use_ew, mult_cap, comp_cap):
                if succ not in seen:
                    seen.add(succ)
                    nxt.append(succ)
        frontier = nxt
    if tgt in seen:
        return "yes"
    return "unknown" if capped else "no"


def _canon_hs(components):
    return tuple(sorted((s if s is not None else -1, tuple(v))
                        for s, v in components))


def _struct_successors(hs, tgt_counts, m, n, use_ec, use_ew, mult_cap,
                       comp_cap):
    comps = list(hs)
    # knotted step on one coordinate of one component
    for i, (s, v) in enumerate(comps):
        for j, x in enumerate(v):
            if x >= m:
                y = x - m + n
                if mult_cap is not None and y > mult_cap:
                    continue
                w = v[:j] + (y,) + v[j + 1:]
                yield tuple(sorted(comps[:i] + [(s, w)] + comps[i + 1:]))
    if use_ec:
        for i in range(len(comps)):
            for j in range(i + 1, len(comps)):
                if comps[i] == comps[j]:
                    yield tuple(sorted(comps[:j] + comps[j + 1:]))
                    break  # merging any equal pair is the same successor
    if use_ew:
        # weakening in a component is only useful up to the multiplicity the
        # target carries; adding the final form directly is always enough
        have = {}
        for c in comps:
            have[c] = have.get(c, 0) + 1
        if len(comps) < comp_cap:
            for c, want in tgt_counts.items():
                if have.get(c, 0) < want:
                    yield tuple(sorted(comps + [c]))


# ---------------------------------------------------------------------------
# fast-growing hierarchy


def fastgrow(k: int, x: int, budget: int = DEFAULT_BUDGET) -> int:
    """F_0(x) = x + 1, F_{k+1}(x) = F_k^{x+1}(x)."""
    if k < 0 or x < 0:
        raise ValueError("fastgrow needs k, x >= 0")
    if k == 0:
        return _chk(x + 1, budget)
    v = x
    for _ in range(x + 1):
        v = fastgrow(k - 1, v, budget)
    return v


def _chk(v: int, budget: int) -> int:
    if v > budget:
        raise BudgetError("value %d exceeds the magnitude budget %d"
                          % (v, budget))
    return v


def ack(n: int, budget: int = DEFAULT_BUDGET) -> int:
    """Ack(n) = F_n(n)."""
    return fastgrow(n, n, budget)


def vecF(a, n: int, trace: bool = False, budget: int = DEFAULT_BUDGET):
    """Vectorial fast-growing function F(a_m, ..., a_0; n) evaluated by the
    D0/D1/D2 rewriting.  D1 is applied batched (a_0 is drained in one
    step), matching the displayed traces.  Returns the value, or
    (value, steps) when trace is set, where steps are
    (rule, state-before, n-before) triples.
    """
    a = list(a)
    if not a or any(x < 0 for x in a) or n < 0:
        raise ValueError("vecF needs a nonempty vector of naturals")
    steps = []

    def log(rule):
        if trace:
            steps.append((rule, tuple(a), n))

    while True:
        if all(x == 0 for x in a):
            log("D0")
            return (n, steps) if trace else n
        if a[-1] > 0:  # a_0 is the last entry
            log("D1")
            n = _chk(n + a[-1], budget)
            a[-1] = 0
            continue
        # find the least index k+1 (from the low end) with a nonzero entry
        j = len(a) - 1
        while a[j] == 0:
            j -= 1
        log("D2")
        a[j] -= 1
        a[j + 1] = _chk(n + 1, budget)


def vecF_compositional(a, n: int, budget: int = DEFAULT_BUDGET) -> int:
    """Oracle: F(a_m..a_0; n) = F_m^{a_m}( ... F_0^{a_0}(n) ... )."""
    v = n
    for k, count in enumerate(reversed(list(a))):
        for _ in range(count):
            v = fastgrow(k, v, budget)
    return v


# ---------------------------------------------------------------------------
# ordinals in Cantor normal form and the Hardy / Cichon hierarchies
#
# An ordinal is a tuple of (exponent, coefficient) pairs with strictly
# decreasing exponents (themselves ordinals) and coefficients >= 1; () is 0.

ORD_ZERO = ()
ORD_ONE = (((), 1),)


def omega_power(exp, coeff: int = 1):
    return ((exp, coeff),)


def ord_check(alpha):
    prev = None
    for exp, c in alpha:
        ord_check(exp)
        if c < 1:
            raise ValueError("CNF coefficients must be >= 1")
        if prev is not None and not _ord_lt(exp, prev):
            raise ValueError("CNF exponents must strictly decrease")
        prev = exp
    return alpha


def _ord_lt(a, b):
    return _ord_cmp(a, b) < 0


def _ord_cmp(a, b):
    for (ea, ca), (eb, cb) in zip(a, b):
        c = _ord_cmp(ea, eb)
        if c != 0:
            return c
        if ca != cb:
            return -1 if ca < cb else 1
    return (len(a) > len(b)) - (len(a) < len(b))


def ord_from_nat(k: int):
    return (((), k),) if k else ()


def ord_is_successor(alpha) -> bool:
    return bool(alpha) and alpha[-1][0] == ()


def ord_pred(alpha):
    exp, c = alpha[-1]
    if exp != ():
        raise ValueError("not a successor ordinal")
    return alpha[:-1] + ((((), c - 1),) if c > 1 else ())


def ord_norm(alpha) -> int:
    """max over coefficients and exponent norms."""
    best = 0
    for exp, c in alpha:
        best = max(best, c, ord_norm(exp))
    return best


def fundamental(alpha, x: int):
    """The x-th member of the fixed fundamental sequence of a limit
    ordinal: (gamma + w^(b+1))_x = gamma + w^b * (x+1), and
    (gamma + w^lam)_x = gamma + w^(lam_x) for limit lam."""
    if not alpha or ord_is_successor(alpha):
        raise ValueError("fundamental sequences only exist for limits")
    gamma = alpha[:-1]
    exp, c = alpha[-1]
    if c > 1:
        gamma = gamma + ((exp, c - 1),)
    if ord_is_successor(exp):
        return gamma + ((ord_pred(exp), x + 1),)
    return gamma + ((fundamental(exp, x), 1),)


def _ord_depth(alpha) -> int:
    return 1 + max((_ord_depth(e) for e, _ in alpha), default=0)


def _check_eval_range(alpha):
    # evaluation is restricted to ordinals below w^w^w: exponents of
    # exponents must be natural numbers
    if _ord_depth(alpha) > 3:
        raise ValueError("evaluation restricted to ordinals below w^w^w")


def hardy(f: Callable[[int], int], alpha, x: int,
          budget: int = DEFAULT_BUDGET) -> int:
    """f^0 = id, f^(a+1) = f^a . f, f^lam(x) = f^(lam_x)(x)."""
    _check_eval_range(ord_check(alpha))
    steps = 0
    while alpha:
        if ord_is_successor(alpha):
            x = _chk(f(x), budget)
            alpha = ord_pred(alpha)
        else:
            alpha = fundamental(alpha, x)
        steps += 1
        if steps > budget:
            raise BudgetError("hardy evaluation exceeded the step budget")
    return x


def cichon(f: Callable[[int], int], alpha, x: int,
           budget: int = DEFAULT_BUDGET) -> int:
    """f_0 = 0, f_(a+1)(x) = 1 + f_a(f(x)), f_lam(x) = f_(lam_x)(x)."""
    _check_eval_range(ord_check(alpha))
    count = 0
    while alpha:
        if ord_is_successor(alpha):
            x = _chk(f(x), budget)
            alpha = ord_pred(alpha)
            count += 1
        else:
            alpha = fundamental(alpha, x)
        if count > budget:
            raise BudgetError("cichon evaluation exceeded the step budget")
    return count


def rel_fastgrow(f: Callable[[int], int], k: int, x: int,
                 budget: int = DEFAULT_BUDGET) -> int:
    """Fast-growing hierarchy relative to a base function f at finite
    levels: level 0 is f, level k+1 iterates level k (x+1) times."""
    if k == 0:
        return _chk(f(x), budget)
    v = x
    for _ in range(x + 1):
        v = rel_fastgrow(f, k - 1, v, budget)
    return v
