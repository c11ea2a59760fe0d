r"""Sequents, hypersequents, rule schemas, and proof machinery.

A sequent couples an antecedent (a multiset of formulas in commutative
mode, a list in noncommutative mode) with an optional stoup formula.  A
hypersequent is a finite multiset of sequents kept as a canonically
sorted tuple.  Rule schemas are written over metavariables (context,
formula, proposition, stoup, plus one implicit hypersequent variable)
and drive a complete backward-expansion enumerator, an absorbing
refinement for knotted contraction, wall/normal-form operations for
weakly commutative antecedents, size/norm accounting, and a proof
checker.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from itertools import permutations, product
from typing import Optional

from .equations import KnottedSpec, SimpleEquation, WeakCommSpec
from .syntax import (Formula, ONE, ZERO, formula_size, parse_formula,
                     render_formula, var)


# ---------------------------------------------------------------------------
# sequents and hypersequents


@dataclass(frozen=True)
class Sequent:
    ant: tuple  # tuple of Formula
    stoup: Optional[Formula] = None


def _fkey(f: Formula) -> str:
    return render_formula(f)


def sequent(ant, stoup=None, commutative: bool = True) -> Sequent:
    ant = tuple(ant)
    if commutative:
        ant = tuple(sorted(ant, key=_fkey))
    return Sequent(ant, stoup)


def _seq_key(s: Sequent):
    return ("" if s.stoup is None else _fkey(s.stoup),
            len(s.ant), tuple(_fkey(f) for f in s.ant))


def hyper(comps) -> tuple:
    """Canonical hypersequent: components sorted, multiset preserved."""
    return tuple(sorted(comps, key=_seq_key))


def render_sequent(s: Sequent) -> str:
    left = ", ".join(render_formula(f) for f in s.ant)
    right = "" if s.stoup is None else " " + render_formula(s.stoup)
    return "%s =>%s" % (left, right)


def render_hyper(h) -> str:
    return " | ".join(render_sequent(s) for s in h)


def parse_sequent(text: str, commutative: bool = True) -> Sequent:
    if "=>" not in text:
        raise ValueError("missing => in %r" % text)
    left, right = text.split("=>", 1)
    ant = tuple(parse_formula(p) for p in left.split(",") if p.strip())
    stoup = parse_formula(right) if right.strip() else None
    return sequent(ant, stoup, commutative)


def parse_hyper(text: str, commutative: bool = True) -> tuple:
    return hyper(parse_sequent(p, commutative) for p in text.split("|"))


# ---------------------------------------------------------------------------
# schematic language


@dataclass(frozen=True)
class FVar:
    """Formula metavariable; atomic ones match propositional atoms only."""
    name: str
    atomic: bool = False


@dataclass(frozen=True)
class MVar:
    """Context metavariable: a multiset or sequence of formulas."""
    name: str


@dataclass(frozen=True)
class PVar:
    """Stoup metavariable: matches a formula or the empty stoup."""
    name: str


@dataclass(frozen=True)
class SOp:
    """Schematic connective application."""
    kind: str  # meet | join | fuse | ldiv | rdiv
    left: object
    right: object


@dataclass(frozen=True)
class SchSeq:
    ant: tuple  # items: MVar | FVar | SOp | Formula
    stoup: object = None  # None | PVar | FVar | SOp | Formula


def _item_vars(item):
    if isinstance(item, (FVar, MVar, PVar)):
        yield item
    elif isinstance(item, SOp):
        yield from _item_vars(item.left)
        yield from _item_vars(item.right)


def _schseq_vars(s: SchSeq):
    for it in s.ant:
        yield from _item_vars(it)
    if s.stoup is not None:
        yield from _item_vars(s.stoup)


@dataclass(frozen=True)
class RuleSchema:
    name: str
    premises: tuple  # tuple of schematic hypersequents (tuples of SchSeq)
    conclusion: tuple  # schematic hypersequent
    hyper: bool = True
    initial: bool = False
    logical: bool = False
    structural: bool = False
    analytic: bool = False
    nc_free: bool = False  # instances do not increase nc-height

    def __post_init__(self):
        if self.structural and self.analytic:
            seen = Counter(v for c in self.conclusion for v in _schseq_vars(c))
            if any(n > 1 for n in seen.values()):
                raise ValueError("%s: conclusion is not linear" % self.name)
            for prem in self.premises:
                for comp in prem:
                    for v in _schseq_vars(comp):
                        if v not in seen:
                            raise ValueError("%s: premise variable %r not in "
                                             "conclusion" % (self.name, v))


def fm_rule(r: RuleSchema) -> int:
    """1 + the largest antecedent item count among active conclusions."""
    return 1 + max((len(c.ant) for c in r.conclusion), default=0)


def acn_rule(r: RuleSchema) -> int:
    return len(r.conclusion)


# ---------------------------------------------------------------------------
# calculi


@dataclass(frozen=True)
class Calculus:
    rules: tuple
    commutative: bool = True
    hyper: bool = True
    cut_removable: bool = True
    absorb: Optional[tuple] = None  # (KnottedSpec, k0, l0)
    wc: Optional[WeakCommSpec] = None
    gamma: tuple = ()

    def __post_init__(self):
        if (self.absorb or self.gamma) and any(
                r.name == "cut" for r in self.rules):
            raise ValueError("cut must be removed before refining")

    def rule(self, name: str) -> RuleSchema:
        for r in self.rules:
            if r.name == name:
                return r
        raise KeyError(name)


def fm(c: Calculus) -> int:
    return max(fm_rule(r) for r in c.rules)


def acn(c: Calculus) -> int:
    return max(acn_rule(r) for r in c.rules)


_G, _D, _S, _T = MVar("G"), MVar("D"), MVar("S"), MVar("T")
_A, _B = FVar("A"), FVar("B")
_P = PVar("P")
_p = FVar("p", atomic=True)


def base_calculus(commutative: bool = True, hyper: bool = True) -> Calculus:
    """The base hypersequent (or sequent) calculus for the full language."""
    def seq(*ant, stoup=None):
        return SchSeq(tuple(ant), stoup)

    def rule(name, prems, concl, **kw):
        return RuleSchema(name, tuple(tuple(p) for p in prems),
                          tuple(concl), hyper=hyper, **kw)

    rules = [
        rule("init", [], [seq(_p, stoup=_p)], initial=True),
        rule("0L", [], [seq(ZERO)], initial=True),
        rule("1R", [], [seq(stoup=ONE)], initial=True),
        rule("cut", [[seq(_S, stoup=_A)], [seq(_G, _A, _D, stoup=_P)]],
             [seq(_G, _S, _D, stoup=_P)], structural=True),
        rule("0R", [[seq(_G)]], [seq(_G, stoup=ZERO)], logical=True),
    ]
    if hyper:
        rules += [
            rule("ec", [[seq(_G, stoup=_P), seq(_G, stoup=_P)]],
                 [seq(_G, stoup=_P)], structural=True),
            rule("ew", [[]], [seq(_G, stoup=_P)], structural=True,
                 analytic=True),
        ]
    if commutative:
        rules += [
            rule("1L", [[seq(_G, stoup=_P)]], [seq(_G, ONE, stoup=_P)],
                 logical=True),
            rule("*L", [[seq(_G, _A, _B, stoup=_P)]],
                 [seq(_G, SOp("fuse", _A, _B), stoup=_P)], logical=True),
            rule("*R", [[seq(_G, stoup=_A)], [seq(_D, stoup=_B)]],
                 [seq(_G, _D, stoup=SOp("fuse", _A, _B))], logical=True),
            rule("vL", [[seq(_G, _A, stoup=_P)], [seq(_G, _B, stoup=_P)]],
                 [seq(_G, SOp("join", _A, _B), stoup=_P)], logical=True),
            rule("vR1", [[seq(_G, stoup=_A)]],
                 [seq(_G, stoup=SOp("join", _A, _B))], logical=True),
            rule("vR2", [[seq(_G, stoup=_B)]],
                 [seq(_G, stoup=SOp("join", _A, _B))], logical=True),
            rule("^L1", [[seq(_G, _A, stoup=_P)]],
                 [seq(_G, SOp("meet", _A, _B), stoup=_P)], logical=True),
            rule("^L2", [[seq(_G, _B, stoup=_P)]],
                 [seq(_G, SOp("meet", _A, _B), stoup=_P)], logical=True),
            rule("^R", [[seq(_G, stoup=_A)], [seq(_G, stoup=_B)]],
                 [seq(_G, stoup=SOp("meet", _A, _B))], logical=True),
            rule("->L", [[seq(_G, stoup=_A)], [seq(_D, _B, stoup=_P)]],
                 [seq(_G, _D, SOp("ldiv", _A, _B), stoup=_P)], logical=True),
            rule("->R", [[seq(_G, _A, stoup=_B)]],
                 [seq(_G, stoup=SOp("ldiv", _A, _B))], logical=True),
        ]
    else:
        rules += [
            rule("1L", [[seq(_G, _D, stoup=_P)]],
                 [seq(_G, ONE, _D, stoup=_P)], logical=True),
            rule("*L", [[seq(_G, _A, _B, _D, stoup=_P)]],
                 [seq(_G, SOp("fuse", _A, _B), _D, stoup=_P)], logical=True),
            rule("*R", [[seq(_G, stoup=_A)], [seq(_D, stoup=_B)]],
                 [seq(_G, _D, stoup=SOp("fuse", _A, _B))], logical=True),
            rule("vL", [[seq(_G, _A, _D, stoup=_P)],
                        [seq(_G, _B, _D, stoup=_P)]],
                 [seq(_G, SOp("join", _A, _B), _D, stoup=_P)], logical=True),
            rule("vR1", [[seq(_G, stoup=_A)]],
                 [seq(_G, stoup=SOp("join", _A, _B))], logical=True),
            rule("vR2", [[seq(_G, stoup=_B)]],
                 [seq(_G, stoup=SOp("join", _A, _B))], logical=True),
            rule("^L1", [[seq(_G, _A, _D, stoup=_P)]],
                 [seq(_G, SOp("meet", _A, _B), _D, stoup=_P)], logical=True),
            rule("^L2", [[seq(_G, _B, _D, stoup=_P)]],
                 [seq(_G, SOp("meet", _A, _B), _D, stoup=_P)], logical=True),
            rule("^R", [[seq(_G, stoup=_A)], [seq(_G, stoup=_B)]],
                 [seq(_G, stoup=SOp("meet", _A, _B))], logical=True),
            rule("\\L", [[seq(_G, stoup=_A)], [seq(_S, _B, _T, stoup=_P)]],
                 [seq(_S, _G, SOp("ldiv", _A, _B), _T, stoup=_P)],
                 logical=True),
            rule("\\R", [[seq(_A, _G, stoup=_B)]],
                 [seq(_G, stoup=SOp("ldiv", _A, _B))], logical=True),
            rule("/L", [[seq(_G, stoup=_A)], [seq(_S, _B, _T, stoup=_P)]],
                 [seq(_S, SOp("rdiv", _B, _A), _G, _T, stoup=_P)],
                 logical=True),
            rule("/R", [[seq(_G, _A, stoup=_B)]],
                 [seq(_G, stoup=SOp("rdiv", _B, _A))], logical=True),
        ]
    return Calculus(tuple(rules), commutative=commutative, hyper=hyper)


def delete_cut(c: Calculus) -> Calculus:
    rules = tuple(r for r in c.rules if r.name != "cut")
    return Calculus(rules, c.commutative, c.hyper, c.cut_removable,
                    c.absorb, c.wc, c.gamma)


def add_rules(c: Calculus, extra) -> Calculus:
    return Calculus(c.rules + tuple(extra), c.commutative, c.hyper,
                    c.cut_removable, c.absorb, c.wc, c.gamma)


def rule_from_simple(e: SimpleEquation, hyper: bool = True,
                     name: Optional[str] = None) -> RuleSchema:
    """The analytic structural rule corresponding to a simple equation."""
    if not isinstance(e, SimpleEquation):
        raise ValueError("need a simple equation")
    if name is None:
        name = "r[%s]" % repr(e.to_equation())[9:-1]
    fvars = {x: FVar(x) for x in e.lhs}

    def seq(body):
        if e.commutative:
            ant = (_G,) + body
        else:
            ant = (_G,) + body + (_D,)
        return SchSeq(ant, _P)

    concl = seq(tuple(fvars[x] for x in e.lhs))
    prems = tuple((seq(tuple(fvars[x] for x in w)),) for w in e.joinands)
    return RuleSchema(name, prems, (concl,), hyper=hyper,
                      structural=True, analytic=True)


def gamma_rules(gamma, hyper: bool = True) -> tuple:
    """One parametric single-premise deletion rule per formula."""
    out = []
    for psi in gamma:
        prem = (SchSeq((_S, psi, _T), _P),)
        concl = (SchSeq((_S, _T), _P),)
        out.append(RuleSchema("g[%s]" % render_formula(psi), (prem,), concl,
                              hyper=hyper, structural=True, analytic=True))
    return tuple(out)


def refine_absorbing(c: Calculus, k: KnottedSpec,
                     w: Optional[WeakCommSpec] = None) -> Calculus:
    """Absorb bounded knotted contraction and EC into every schema."""
    if k.mode != "contraction":
        raise ValueError("absorption is defined for contraction specs")
    f = fm(c)
    if w is None:
        k0 = (f - 1) * (k.m - 1)
    else:
        k0 = (f - 1) * (w.ell + k.m - 1)
    l0 = acn(c) if c.hyper else 0
    rules = tuple(r for r in c.rules if r.name != "cut")
    return Calculus(rules, c.commutative, c.hyper, c.cut_removable,
                    absorb=(k, k0, l0), wc=w, gamma=c.gamma)


# ---------------------------------------------------------------------------
# sizes and norms


def _sch_size(item) -> int:
    if isinstance(item, Formula):
        return formula_size(item)
    if isinstance(item, SOp):
        return 1 + _sch_size(item.left) + _sch_size(item.right)
    return 1  # FVar | MVar | PVar


def _schseq_size(s: SchSeq) -> int:
    n = sum(_sch_size(it) for it in s.ant)
    if len(s.ant) > 1:
        n += len(s.ant) - 1  # commas
    n += 1  # arrow
    if s.stoup is not None:
        n += _sch_size(s.stoup)
    return n


def _schhyper_size(comps, with_hvar: bool) -> int:
    n = sum(_schseq_size(s) for s in comps)
    bars = len(comps) - 1
    if with_hvar:
        n += 1
        bars += 1
    return n + max(bars, 0)


def size(obj) -> int:
    """Symbol count of the written representation."""
    if isinstance(obj, Formula):
        return formula_size(obj)
    if isinstance(obj, Sequent):
        n = sum(formula_size(f) for f in obj.ant) + max(len(obj.ant) - 1, 0)
        return n + 1 + (0 if obj.stoup is None else formula_size(obj.stoup))
    if isinstance(obj, RuleSchema):
        n = _schhyper_size(obj.conclusion, obj.hyper)
        for p in obj.premises:
            n += _schhyper_size(p, obj.hyper)
        return n
    if isinstance(obj, Calculus):
        return sum(size(r) for r in obj.rules)
    if isinstance(obj, tuple):  # hypersequent
        if not obj:
            return 0
        return sum(size(s) for s in obj) + len(obj) - 1
    raise TypeError("cannot size %r" % (obj,))


def _stoup_groups(h) -> int:
    per = Counter("" if s.stoup is None else _fkey(s.stoup) for s in h)
    return max(per.values(), default=0)


def norm_ctr(h) -> int:
    """max of the largest same-stoup component count and multiplicity."""
    mult = max((max(Counter(s.ant).values(), default=0) for s in h),
               default=0)
    return max(_stoup_groups(h), mult)


def norm_nc(h) -> int:
    """Same, with multiplicity replaced by antecedent length."""
    return max(_stoup_groups(h), max((len(s.ant) for s in h), default=0))


def counting(eta: int, rho: int, mu: int) -> dict:
    """Counting bounds for sequents and hypersequents."""
    n = (rho + 1) ** eta
    d_c = (eta + 1) * n
    return {"N": n, "D_c": d_c, "H": (mu + 1) ** d_c,
            "D_nc": (eta + 1) ** (rho + 1)}


# ---------------------------------------------------------------------------
# matching and instantiation


def _vkey(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, Formula):
        return _fkey(v)
    if isinstance(v, Sequent):
        return render_sequent(v)
    if isinstance(v, tuple):
        return "[" + "; ".join(_vkey(x) for x in v) + "]"
    return str(v)


def _env_key(env):
    return tuple(sorted((k, _vkey(v)) for k, v in env.items()))


def _match_f(item, f, env):
    """Match one schematic formula against a formula; env or None."""
    if f is None:
        return None
    if isinstance(item, Formula):
        return env if item == f else None
    if isinstance(item, FVar):
        if item.atomic and f.kind != "var":
            return None
        key = ("F", item.name)
        if key in env:
            return env if env[key] == f else None
        e2 = dict(env)
        e2[key] = f
        return e2
    if isinstance(item, SOp):
        if f.kind != item.kind:
            return None
        e2 = _match_f(item.left, f.left, env)
        if e2 is None:
            return None
        return _match_f(item.right, f.right, e2)
    return None


def _match_stoup(item, st, env):
    if item is None:
        return env if st is None else None
    if isinstance(item, PVar):
        key = ("P", item.name)
        if key in env:
            return env if env[key] == st else None
        e2 = dict(env)
        e2[key] = st
        return e2
    return _match_f(item, st, env)


def _compositions(c: int, k: int):
    if k == 1:
        yield (c,)
        return
    for first in range(c + 1):
        for rest in _compositions(c - first, k - 1):
            yield (first,) + rest


def _multiset_splits(rem, k):
    """All ways to split a sorted formula list into k multisets."""
    cnt = Counter(rem)
    forms = sorted(cnt, key=_fkey)
    per = [list(_compositions(cnt[f], k)) for f in forms]
    for combo in product(*per):
        groups = [[] for _ in range(k)]
        for f, parts in zip(forms, combo):
            for g, c in zip(groups, parts):
                g.extend([f] * c)
        yield [tuple(g) for g in groups]


def _dedup_envs(envs):
    seen = set()
    for e in envs:
        k = _env_key(e)
        if k not in seen:
            seen.add(k)
            yield e


def _match_ant_c(items, ant, env):
    """Commutative antecedent matching; yields extended envs."""
    cnt = Counter(ant)
    fixed, mvars = [], []
    for it in items:
        (mvars if isinstance(it, MVar) else fixed).append(it)
    pend = []
    for mv in mvars:
        key = ("M", mv.name)
        if key in env:
            need = Counter(env[key])
            if any(cnt[x] < c for x, c in need.items()):
                return
            cnt = cnt - need
        else:
            pend.append(mv)

    def assign(i, cnt, env):
        if i == len(fixed):
            rem = sorted(cnt.elements(), key=_fkey)
            if not pend:
                if not rem:
                    yield env
                return
            if len(pend) == 1:
                e2 = dict(env)
                e2[("M", pend[0].name)] = tuple(rem)
                yield e2
                return
            for groups in _multiset_splits(rem, len(pend)):
                e2 = dict(env)
                for mv, grp in zip(pend, groups):
                    e2[("M", mv.name)] = grp
                yield e2
            return
        for f in sorted(cnt, key=_fkey):
            if cnt[f] <= 0:
                continue
            e2 = _match_f(fixed[i], f, env)
            if e2 is not None:
                yield from assign(i + 1, cnt - Counter([f]), e2)

    yield from _dedup_envs(assign(0, cnt, env))


def _match_ant_nc(items, ant, env):
    """Sequence antecedent matching; yields extended envs."""
    def go(i, pos, env):
        if i == len(items):
            if pos == len(ant):
                yield env
            return
        it = items[i]
        if isinstance(it, MVar):
            key = ("M", it.name)
            if key in env:
                b = env[key]
                if ant[pos:pos + len(b)] == b:
                    yield from go(i + 1, pos + len(b), env)
                return
            for j in range(pos, len(ant) + 1):
                e2 = dict(env)
                e2[key] = ant[pos:j]
                yield from go(i + 1, j, e2)
        elif pos < len(ant):
            e2 = _match_f(it, ant[pos], env)
            if e2 is not None:
                yield from go(i + 1, pos + 1, e2)

    yield from _dedup_envs(go(0, 0, env))


def _match_schseq(comp: SchSeq, s: Sequent, env, commutative):
    e0 = _match_stoup(comp.stoup, s.stoup, env)
    if e0 is None:
        return
    if commutative:
        yield from _match_ant_c(comp.ant, s.ant, e0)
    else:
        yield from _match_ant_nc(comp.ant, s.ant, e0)


def _match_conclusion(rule: RuleSchema, h, commutative):
    """All envs instantiating the rule's conclusion to h."""
    k = len(rule.conclusion)
    if not rule.hyper and len(h) != k:
        return
    idx = range(len(h))
    for chosen in permutations(idx, k):
        envs = [{}]
        ok = True
        for comp, j in zip(rule.conclusion, chosen):
            nxt = []
            for env in envs:
                nxt.extend(_match_schseq(comp, h[j], env, commutative))
            envs = nxt
            if not envs:
                ok = False
                break
        if not ok:
            continue
        rest = hyper(h[j] for j in idx if j not in chosen)
        for env in envs:
            e2 = dict(env)
            if rule.hyper:
                e2[("H",)] = rest
            yield e2


def _inst_f(item, env) -> Formula:
    if isinstance(item, Formula):
        return item
    if isinstance(item, FVar):
        return env[("F", item.name)]
    if isinstance(item, SOp):
        return Formula(item.kind, left=_inst_f(item.left, env),
                       right=_inst_f(item.right, env))
    raise KeyError(item)


def _inst_schseq(comp: SchSeq, env, commutative) -> Sequent:
    ant = []
    for it in comp.ant:
        if isinstance(it, MVar):
            ant.extend(env[("M", it.name)])
        else:
            ant.append(_inst_f(it, env))
    st = comp.stoup
    if st is None:
        stoup = None
    elif isinstance(st, PVar):
        stoup = env[("P", st.name)]
    else:
        stoup = _inst_f(st, env)
    return sequent(ant, stoup, commutative)


def _inst_schhyper(comps, env, rule: RuleSchema, commutative) -> tuple:
    out = list(env[("H",)]) if rule.hyper else []
    out.extend(_inst_schseq(c, env, commutative) for c in comps)
    return hyper(out)


@dataclass(frozen=True)
class RuleInstance:
    rule: str
    conclusion: tuple  # the hypersequent actually concluded
    base: tuple  # base-instance conclusion (== conclusion when unabsorbed)
    premises: tuple
    record: tuple = ()


def _env_record(env):
    return tuple(sorted(((k[0], k[1] if len(k) > 1 else "", v)
                         for k, v in env.items()),
                        key=lambda t: (t[0], t[1])))


# ---------------------------------------------------------------------------
# absorption relations


def _ctr_counts_ok(a: int, b: int, k: int, spec: KnottedSpec) -> bool:
    """Can a copies contract to b copies within budget k?"""
    if a == b:
        return True
    d = spec.m - spec.n
    return (a > b and (a - b) % d == 0 and a - b <= k and b >= spec.n)


def _comp_ctr_le(s1: Sequent, s2: Sequent, k: int, spec: KnottedSpec) -> bool:
    if s1.stoup != s2.stoup:
        return False
    c1, c2 = Counter(s1.ant), Counter(s2.ant)
    if set(c1) != set(c2):
        return False
    return all(_ctr_counts_ok(c1[f], c2[f], k, spec) for f in c1)


def rel_ctr(h1, h2, k: int, spec: KnottedSpec) -> bool:
    """h2 arises from h1 by componentwise knotted contraction, each
    formula dropping at most k occurrences per component."""
    if len(h1) != len(h2):
        return False

    def match(i, used):
        if i == len(h1):
            return True
        for j in range(len(h2)):
            if j not in used and _comp_ctr_le(h1[i], h2[j], k, spec):
                if match(i + 1, used | {j}):
                    return True
        return False

    return match(0, frozenset())


def rel_ec(h1, h2, l: int) -> bool:
    """h2 arises from h1 by EC, each component dropping at most l copies."""
    c1, c2 = Counter(h1), Counter(h2)
    if set(c1) != set(c2):
        return False
    return all(0 <= c1[s] - c2[s] <= l for s in c1)


def rel_ctr_ec(h1, h2, k: int, l: int, spec: KnottedSpec) -> bool:
    """Composition: contraction within budget k, then EC within budget l."""
    c2 = Counter(h2)
    targets = list(c2)

    def feasible(i, load):
        if i == len(h1):
            return all(c2[t] <= load[t] <= c2[t] + l for t in targets)
        rem = len(h1) - i
        if sum(max(c2[t] - load[t], 0) for t in targets) > rem:
            return False
        for t in targets:
            if load[t] >= c2[t] + l:
                continue
            if _comp_ctr_le(h1[i], t, k, spec):
                load2 = dict(load)
                load2[t] += 1
                if feasible(i + 1, load2):
                    return True
        return False

    return feasible(0, {t: 0 for t in targets})


def _comp_ctr_preimages(s: Sequent, k: int, spec: KnottedSpec, commutative):
    """Sequents that contract to s within budget k (per formula)."""
    d = spec.m - spec.n
    if commutative:
        cnt = Counter(s.ant)
        forms = sorted(cnt, key=_fkey)
        opts = []
        for f in forms:
            b = cnt[f]
            o = [b]
            if b >= spec.n:
                o += [b + j * d for j in range(1, k // d + 1)]
            opts.append(o)
        for combo in product(*opts):
            ant = []
            for f, a in zip(forms, combo):
                ant.extend([f] * a)
            yield sequent(ant, s.stoup, True)
        return
    # noncommutative: extra copies are inserted next to an occurrence
    cnt = Counter(s.ant)
    forms = sorted(cnt, key=_fkey)
    opts = []
    for f in forms:
        b = cnt[f]
        o = [0]
        if b >= spec.n:
            o += [j * d for j in range(1, k // d + 1)]
        opts.append(o)
    for combo in product(*opts):
        words = [s.ant]
        for f, extra in zip(forms, combo):
            if not extra:
                continue
            nxt = []
            for w in words:
                for i, g in enumerate(w):
                    if g == f:
                        nxt.append(w[:i] + (f,) * extra + w[i:])
            words = nxt
        for w in dict.fromkeys(words):
            yield Sequent(w, s.stoup)


def _absorb_preimages(h, spec: KnottedSpec, k: int, l: int, commutative):
    """All h0 with h0 related to h by contraction then EC (bounded)."""
    cnt = Counter(h)
    comps = sorted(cnt, key=_seq_key)
    seen = set()
    for extras in product(*(range(l + 1) for _ in comps)):
        occs = []
        for s, e in zip(comps, extras):
            occs.extend([s] * (cnt[s] + e))
        pre = [list(dict.fromkeys(_comp_ctr_preimages(s, k, spec,
                                                      commutative)))
               for s in occs]
        for combo in product(*pre):
            h0 = hyper(combo)
            if h0 not in seen:
                seen.add(h0)
                yield h0


# ---------------------------------------------------------------------------
# walls, alpha operations, normal form


def _wall_params(w):
    if isinstance(w, WeakCommSpec):
        return w.ell, w.fw, w.bw
    ell, p, q = w
    return ell, p, q


def _lkey(x):
    return _fkey(x) if isinstance(x, Formula) else str(x)


def walls(w, word, letter):
    """Front wall, middle part, back wall of a word for a letter."""
    ell, p, q = _wall_params(w)
    word = tuple(word)
    occ = [i for i, x in enumerate(word) if x == letter]
    if len(occ) < ell:
        raise ValueError("needs at least %d occurrences" % ell)
    front_end = occ[p - 1] + 1 if p > 0 else 0
    back_start = occ[len(occ) - q] if q > 0 else len(word)
    return word[:front_end], word[front_end:back_start], word[back_start:]


def _alpha_letter(w, word, letter, typ: bool):
    ell, p, q = _wall_params(w)
    word = tuple(word)
    count = sum(1 for x in word if x == letter)
    if count < ell:
        return word
    front, mid, back = walls(w, word, letter)
    kk = (ell if typ else count) - p - q
    rest = tuple(x for x in mid if x != letter)
    return front + (letter,) * kk + rest + back


def alpha_N(w, word, letter=None):
    """Move middle occurrences to the front of the middle part."""
    if letter is not None:
        return _alpha_letter(w, word, letter, typ=False)
    out = tuple(word)
    for a in sorted(set(out), key=_lkey):
        out = _alpha_letter(w, out, a, typ=False)
    return out


def alpha_T(w, word, letter=None):
    """Same as alpha_N but truncating to the finitely many types."""
    if letter is not None:
        return _alpha_letter(w, word, letter, typ=True)
    out = tuple(word)
    for a in sorted(set(out), key=_lkey):
        out = _alpha_letter(w, out, a, typ=True)
    return out


def normalize(w, h):
    """Normalize every antecedent of a hypersequent through alpha_N."""
    return hyper(Sequent(alpha_N(w, s.ant), s.stoup) for s in h)


def _basic_step_seq(w, s1: Sequent, s2: Sequent) -> bool:
    """One basic weak-commutativity step between two sequents."""
    if s1.stoup != s2.stoup or Counter(s1.ant) != Counter(s2.ant):
        return False
    ell, p, q = _wall_params(w)
    for f in set(s1.ant):
        if sum(1 for x in s1.ant if x == f) < ell:
            continue
        f1, m1, b1 = walls(w, s1.ant, f)
        f2, m2, b2 = walls(w, s2.ant, f)
        if f1 == f2 and b1 == b2 and \
                tuple(x for x in m1 if x != f) == \
                tuple(x for x in m2 if x != f):
            return True
    return False


def basic_steps(w, h):
    """All hypersequents reachable from h by one basic instance."""
    out = set()
    lst = list(h)
    for i, s in enumerate(lst):
        for f in sorted(set(s.ant), key=_lkey):
            if sum(1 for x in s.ant if x == f) < _wall_params(w)[0]:
                continue
            front, mid, back = walls(w, s.ant, f)
            spine = tuple(x for x in mid if x != f)
            kk = len(mid) - len(spine)
            for pos in _interleave(spine, f, kk):
                s2 = Sequent(front + pos + back, s.stoup)
                h2 = hyper(lst[:i] + [s2] + lst[i + 1:])
                if h2 != h:
                    out.add(h2)
    return sorted(out, key=lambda g: tuple(map(_seq_key, g)))


def _interleave(spine, letter, k):
    """All words with k copies of letter threaded through the spine."""
    from itertools import combinations
    n = len(spine) + k
    for pos in combinations(range(n), k):
        posset = set(pos)
        word, it = [], iter(spine)
        for i in range(n):
            word.append(letter if i in posset else next(it))
        yield tuple(word)


# ---------------------------------------------------------------------------
# backward expansions


def _dedup(seq):
    return tuple(dict.fromkeys(seq))


def backward_expansions(c: Calculus, h) -> list:
    """Complete enumeration of rule instances concluding h."""
    out = []
    for rule in c.rules:
        if rule.name == "cut":
            continue
        if c.absorb is not None:
            spec, k0, l0 = c.absorb
            bases = _absorb_preimages(h, spec, k0, l0, c.commutative)
        else:
            bases = [h]
        for h0 in bases:
            for env in _match_conclusion(rule, h0, c.commutative):
                prems = _dedup(_inst_schhyper(p, env, rule, c.commutative)
                               for p in rule.premises)
                out.append((RuleInstance(rule.name, h, h0, prems,
                                         _env_record(env)), prems))
    if c.wc is not None and not c.commutative:
        for h2 in basic_steps(c.wc, h):
            out.append((RuleInstance("e", h, h, (h2,)), (h2,)))
    out.sort(key=lambda t: (t[0].rule, _vkey(t[0].premises),
                            _vkey(t[0].base),
                            tuple((k, n, _vkey(v))
                                  for k, n, v in t[0].record)))
    seen = set()
    uniq = []
    for inst, prems in out:
        key = (inst.rule, inst.base, prems, inst.record)
        if key not in seen:
            seen.add(key)
            uniq.append((inst, prems))
    return uniq


# ---------------------------------------------------------------------------
# proof checking


@dataclass(frozen=True)
class ProofTree:
    conclusion: tuple
    rule: str
    children: tuple = ()


@dataclass
class CheckResult:
    ok: bool
    height: int = 0
    nc_height: int = 0
    error: Optional[str] = None

    def __bool__(self):
        return self.ok


def check_proof(t: ProofTree, c: Calculus, assumptions=()) -> CheckResult:
    """Validate a proof tree bottom-up; report height and nc-height."""
    assumptions = set(assumptions)

    def fail(node, msg):
        return CheckResult(False, error="%s at %s" %
                           (msg, render_hyper(node.conclusion)))

    def walk(node):
        subs = [walk(ch) for ch in node.children]
        bad = next((r for r in subs if not r.ok), None)
        if bad is not None:
            return bad
        height = 1 + max((r.height for r in subs), default=0)
        if node.rule == "assume":
            if node.conclusion not in assumptions:
                return fail(node, "undeclared assumption")
            if node.children:
                return fail(node, "assumption with children")
            return CheckResult(True, 1, 1)
        if node.rule == "e":
            if c.wc is None or len(node.children) != 1:
                return fail(node, "misused basic step")
            prem = node.children[0].conclusion
            if not _one_basic(c.wc, prem, node.conclusion):
                return fail(node, "not a basic instance")
            return CheckResult(True, height, subs[0].nc_height)
        try:
            rule = c.rule(node.rule)
        except KeyError:
            return fail(node, "unknown rule %s" % node.rule)
        got = Counter(ch.conclusion for ch in node.children)
        found = False
        if c.absorb is not None:
            spec, k0, l0 = c.absorb
            bases = _absorb_preimages(node.conclusion, spec, k0, l0,
                                      c.commutative)
        else:
            bases = [node.conclusion]
        for h0 in bases:
            for env in _match_conclusion(rule, h0, c.commutative):
                prems = _dedup(_inst_schhyper(p, env, rule, c.commutative)
                               for p in rule.premises)
                if Counter(prems) == got:
                    found = True
                    break
            if found:
                break
        if not found:
            return fail(node, "no instance of %s matches" % node.rule)
        if rule.initial:
            return CheckResult(True, height, 1)
        if rule.nc_free and len(subs) == 1:
            return CheckResult(True, height, subs[0].nc_height)
        return CheckResult(True, height,
                           1 + sum(r.nc_height for r in subs))

    return walk(t)


def _one_basic(w, h1, h2) -> bool:
    """h1 and h2 differ in one component by a single basic step."""
    if len(h1) != len(h2):
        return False
    c1, c2 = Counter(h1), Counter(h2)
    only1 = list((c1 - c2).elements())
    only2 = list((c2 - c1).elements())
    if not only1 and not only2:
        return True  # trivial instance
    if len(only1) != 1 or len(only2) != 1:
        return False
    return _basic_step_seq(w, only1[0], only2[0])
