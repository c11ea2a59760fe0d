"""Terminating provability and deducibility procedures.

Two engine families sit on top of the calculus module.  Backward
engines run root-first proof search in an absorbing refined calculus and
prune any branch that stops being a bad sequence in the derivability
quasi-order, so exhaustion is a definitive "unprovable".  Forward
engines saturate a database of derived hypersequents stage by stage,
keeping only elements that are not derivable from an existing one, until
no stage adds anything; the goal is provable iff some database element
sits below it in the weakening-style order.  A budgeted naive backward
search covers logics outside the dispatch table, with an explicit
completeness warning.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from itertools import product
from typing import Optional

from .calculus import (Calculus, FVar, MVar, ProofTree, PVar, RuleSchema,
                       Sequent, _dedup, _fkey, _inst_schhyper, _match_f,
                       _match_stoup, _dedup_envs, _multiset_splits,
                       _schseq_vars, acn,
                       backward_expansions, base_calculus, basic_steps,
                       check_proof, counting, delete_cut, add_rules,
                       alpha_T, gamma_rules, hyper, norm_ctr, norm_nc,
                       refine_absorbing, rule_from_simple, sequent, size)
from .equations import (Equation, KnottedSpec, SimpleEquation, WeakCommSpec,
                        knotted_simple, linearize)
from .syntax import Formula, render_formula, subformula_closure


# ---------------------------------------------------------------------------
# derivability quasi-orders


def knotted_le(a: int, b: int, k: KnottedSpec) -> bool:
    """Multiplicity order generated by the knotted rule: for contraction
    a is reachable from b, for weakening b is reachable from a."""
    if a == b:
        return True
    if a > b:
        return False
    if k.mode == "contraction":
        return a >= k.n and b >= k.m and (b - a) % (k.m - k.n) == 0
    return a >= k.m and b >= k.n and (b - a) % (k.n - k.m) == 0


def _counts_le(ant1, ant2, k: KnottedSpec) -> bool:
    c1, c2 = Counter(ant1), Counter(ant2)
    return all(knotted_le(c1[f], c2[f], k) for f in set(c1) | set(c2))


def seq_le(s1: Sequent, s2: Sequent, k: KnottedSpec,
           w: Optional[WeakCommSpec] = None) -> bool:
    """Componentwise derivability: same stoup and knotted-related
    multiplicities; with a weak-commutativity spec, also equal antecedent
    type and thresholds shifted by the wall length."""
    if s1.stoup != s2.stoup:
        return False
    if w is None:
        return _counts_le(s1.ant, s2.ant, k)
    if alpha_T(w, s1.ant) != alpha_T(w, s2.ant):
        return False
    shifted = KnottedSpec(k.m + w.ell, k.n + w.ell)
    return _counts_le(s1.ant, s2.ant, shifted)


def _subseq(u, v) -> bool:
    it = iter(v)
    return all(any(x == y for y in it) for x in u)


def seq_le_sub(s1: Sequent, s2: Sequent) -> bool:
    """Same stoup and antecedent scattered-subword embedding."""
    return s1.stoup == s2.stoup and _subseq(s1.ant, s2.ant)


def hyper_le_ctr(h1, h2, k: KnottedSpec,
                 w: Optional[WeakCommSpec] = None) -> bool:
    """h1 is derivable from h2 by external weakening, knotted
    contraction, and external contraction (minoring lift)."""
    return all(any(seq_le(s1, s2, k, w) for s1 in h1) for s2 in h2)


def hyper_le_wkn(h1, h2, k: KnottedSpec,
                 w: Optional[WeakCommSpec] = None) -> bool:
    """h2 is derivable from h1 by external weakening, knotted weakening,
    and external contraction (majoring lift)."""
    return all(any(seq_le(s1, s2, k, w) for s2 in h2) for s1 in h1)


def hyper_le_int(h1, h2) -> bool:
    """Noncommutative integral derivability (majoring over embedding)."""
    return all(any(seq_le_sub(s1, s2) for s2 in h2) for s1 in h1)


# ---------------------------------------------------------------------------
# logic specifications, configs, verdicts


@dataclass(frozen=True)
class LogicSpec:
    """A target logic: commutativity mode, optional knotted axiom, and
    further analytic structural rules or equations."""
    mode: str = "commutative"  # commutative | weakcomm | noncommutative
    knotted: Optional[KnottedSpec] = None
    wc: Optional[WeakCommSpec] = None
    extra: tuple = ()
    constants: bool = True

    def __post_init__(self):
        if self.mode not in ("commutative", "weakcomm", "noncommutative"):
            raise ValueError("unknown mode %r" % self.mode)
        if self.mode == "weakcomm" and self.wc is None:
            raise ValueError("weakcomm mode needs a WeakCommSpec")
        if self.mode != "weakcomm" and self.wc is not None:
            raise ValueError("a WeakCommSpec only makes sense in weakcomm "
                             "mode")

    def engine(self) -> Optional[str]:
        """Dispatch: which terminating engine decides this logic."""
        k = self.knotted
        if k is None:
            return None
        if k.mode == "contraction":
            if self.mode == "commutative":
                return "backward-ctr"
            if self.mode == "weakcomm":
                return "backward-ctr-wc"
            return None
        if self.mode == "commutative":
            return "forward-wkn"
        if self.mode == "weakcomm":
            return "forward-wkn-wc"
        if (k.m, k.n) == (0, 1):
            return "forward-int-nc"
        return None


@dataclass
class SearchConfig:
    nodes: int = 10 ** 6
    stages: int = 10 ** 3
    naive_depth: int = 24
    deterministic: bool = True
    check_control: bool = False

    def __post_init__(self):
        if self.nodes < 1 or self.stages < 1 or self.naive_depth < 1:
            raise ValueError("budgets must be at least 1")


@dataclass
class Verdict:
    status: str  # provable | unprovable | budget
    proof: Optional[ProofTree] = None
    certificate: object = None
    stats: dict = field(default_factory=dict)
    warning: Optional[str] = None


class _Budget(Exception):
    pass


NAIVE_WARNING = ("naive bounded search: no terminating engine covers this "
                 "logic, so only 'provable' verdicts are definitive")


# ---------------------------------------------------------------------------
# compiling a logic into a calculus


def _extra_rules(extra, commutative: bool, hyper_mode: bool):
    out = []
    for x in extra:
        if isinstance(x, RuleSchema):
            out.append(x)
        elif isinstance(x, SimpleEquation):
            out.append(rule_from_simple(x, hyper=hyper_mode))
        elif isinstance(x, Equation):
            out.extend(rule_from_simple(s, hyper=hyper_mode)
                       for s in linearize(x))
        else:
            raise ValueError("cannot interpret extra rule %r" % (x,))
    return out


def compile_calculus(logic: LogicSpec, gamma=(),
                     hyper_mode: bool = True) -> Calculus:
    """Cut-free base calculus plus the logic's analytic rules and one
    deletion rule per assumption formula."""
    comm = logic.mode == "commutative"
    c = delete_cut(base_calculus(commutative=comm, hyper=hyper_mode))
    if not logic.constants:
        c = Calculus(tuple(r for r in c.rules
                           if r.name not in ("0L", "0R", "1L", "1R")),
                     c.commutative, c.hyper, c.cut_removable, c.absorb,
                     c.wc, c.gamma)
    extra = []
    if logic.knotted is not None:
        extra.append(rule_from_simple(
            knotted_simple(logic.knotted, commutative=comm),
            hyper=hyper_mode))
    extra.extend(_extra_rules(logic.extra, comm, hyper_mode))
    extra.extend(gamma_rules(gamma, hyper=hyper_mode))
    c = add_rules(c, extra)
    if logic.wc is not None:
        c = Calculus(c.rules, c.commutative, c.hyper, c.cut_removable,
                     c.absorb, logic.wc, c.gamma)
    return c


def _knotted_rule_name(calc: Calculus, k: KnottedSpec) -> str:
    name = rule_from_simple(knotted_simple(k, calc.commutative)).name
    calc.rule(name)  # raises KeyError when absent
    return name


def _hyper_formulas(h):
    for s in h:
        yield from s.ant
        if s.stoup is not None:
            yield s.stoup


def _build_omega(goal, calc: Calculus):
    """Subformula closure of the goal and every concrete formula
    embedded in a rule schema (assumption formulas in particular)."""
    seed = list(_hyper_formulas(goal))
    for r in calc.rules:
        for part in r.premises + (r.conclusion,):
            for comp in part:
                for it in comp.ant + (comp.stoup,):
                    if isinstance(it, Formula):
                        seed.append(it)
    return subformula_closure(seed)


def _omega_ok(h, omega) -> bool:
    return all(f in omega for f in _hyper_formulas(h))


def _control_record(calc: Calculus, omega, goal, engine: str) -> dict:
    """Control-function data recorded for diagnostics.  The uniform
    bound <H> is kept in factored form (eta, rho, mu): evaluating it can
    produce astronomically long integers."""
    nc = not calc.commutative
    rec = {"engine": engine, "eta": acn(calc), "rho": len(omega),
           "mu": (norm_nc if nc else norm_ctr)(goal)}
    if engine.startswith("backward"):
        rec["k0"] = calc.absorb[1]
        rec["M"] = "2<H>k0"
        rec["t"] = rec["mu"]
    elif engine == "forward-int-nc":
        rec["f"] = "2<H>(rho+2)^(2(x+1))"
    else:
        rec["M"] = "2<H>n"
        rec["t"] = "M"
    return rec


def _control_M(calc: Calculus, omega, goal) -> int:
    h = counting(acn(calc), len(omega), max(1, norm_ctr(goal)))["H"]
    return 2 * h * calc.absorb[1]


# ---------------------------------------------------------------------------
# backward engines


def _decide_backward(calc: Calculus, goal, cfg: SearchConfig, leq, wc: bool,
                     engine: str) -> Verdict:
    if calc.absorb is None:
        raise ValueError("backward engines need a refined absorbing "
                         "calculus")
    omega = _build_omega(goal, calc)
    control = _control_record(calc, omega, goal, engine)
    big_m = _control_M(calc, omega, goal) if cfg.check_control else None
    nodes = [0]
    proofs, failed, exps_of = {}, set(), {}
    le_cache = {}

    def cle(a, b):
        key = (a, b)
        if key not in le_cache:
            le_cache[key] = leq(a, b)
        return le_cache[key]

    plain_calc = Calculus(calc.rules, calc.commutative, calc.hyper,
                          calc.cut_removable, absorb=None, wc=calc.wc,
                          gamma=calc.gamma)
    full_of = {}

    def _collect(c, h, skip):
        """Distinct (rule, premises) pairs concluding h in calculus c;
        environment and base variants of the same premise tuple are
        interchangeable for search purposes.  Generated instances are
        charged to the node budget so that preimage-heavy calculi
        cannot stall inside a single expansion."""
        seen, out = set(skip), []
        for inst, prems in backward_expansions(c, h):
            nodes[0] += 1
            if nodes[0] > cfg.nodes:
                raise _Budget
            key = (inst.rule, prems)
            if key not in seen:
                seen.add(key)
                out.append((inst, prems))
        out.sort(key=lambda t: (max((size(p) for p in t[1]), default=0),
                                len(t[1])))
        return out

    def expansions(h):
        """Instances concluding h, cheapest first.  The unabsorbed
        instances (explicit structural steps included) already span the
        proof space, so the absorbed-preimage variants — which dominate
        the enumeration cost — are produced only when the plain ones do
        not settle h."""
        if h not in exps_of:
            exps_of[h] = _collect(plain_calc, h, ())
        yield from exps_of[h]
        if h not in full_of:
            keys = {(inst.rule, prems) for inst, prems in exps_of[h]}
            full_of[h] = _collect(calc, h, keys)
        yield from full_of[h]

    kspec = calc.absorb[0]

    def search(h, path, pathset):
        """Proof of h or None.  Positives are sound outright (each is a
        checked tree).  Misses are cached per sequent even though pruning
        is path-relative; the fixpoint loop below restores soundness.
        Both caches apply up to the proof order: a proved sequent settles
        everything reachable below it by absorbed structural steps, and a
        failed one settles everything above it."""
        if h in proofs:
            return proofs[h]
        for g, tr in proofs.items():
            if cle(h, g):
                tr2 = _derive_down(calc, kspec, tr, h, cle)
                proofs[h] = tr2
                return tr2
        if h in failed or any(cle(f, h) for f in failed):
            failed.add(h)
            return None
        nodes[0] += 1
        if nodes[0] > cfg.nodes:
            raise _Budget
        if big_m is not None:
            t0 = max(1, control["t"])
            assert (norm_nc if not calc.commutative else norm_ctr)(h) \
                <= big_m ** (len(path) + 1) * t0
        path2 = path + (h,)
        pset2 = pathset | {h}
        for inst, prems in expansions(h):
            if not prems:
                tr = ProofTree(h, inst.rule)
                proofs[h] = tr
                return tr
            if wc and inst.rule == "e":
                if prems[0] in pset2:
                    continue
            elif any(cle(a, p) for p in prems for a in path2):
                continue
            kids = []
            for p in prems:
                sub = search(p, path2, pset2)
                if sub is None:
                    break
                kids.append(sub)
            if len(kids) == len(prems):
                tr = ProofTree(h, inst.rule, tuple(kids))
                proofs[h] = tr
                return tr
        failed.add(h)
        return None

    # A cached miss can be wrong: the pruning that produced it compares
    # premises against the path, so a different route to the same sequent
    # might have succeeded.  But a pruned premise that is actually
    # provable makes some ancestor on the recording path provable with a
    # smaller proof (the premise dominates that ancestor in the proof
    # order).  So rerun with the misses cleared whenever a pass learns a
    # new positive; once a pass learns nothing new, a minimal provable
    # sequent among the misses would contradict its own minimality, and
    # the miss for the goal is definitive.
    passes = 0
    try:
        while True:
            passes += 1
            known = len(proofs)
            failed.clear()
            tree = search(goal, (), frozenset())
            if tree is not None or len(proofs) == known:
                break
    except _Budget:
        return Verdict("budget", stats={"nodes": nodes[0], "passes": passes,
                                        "control": control})
    stats = {"nodes": nodes[0], "expanded": len(exps_of), "passes": passes,
             "control": control}
    if tree is None:
        return Verdict("unprovable", certificate=stats, stats=stats)
    res = check_proof(tree, calc)
    if not res:
        raise RuntimeError("internal: reconstructed proof rejected: %s"
                           % res.error)
    stats["height"] = res.height
    return Verdict("provable", proof=tree, stats=stats)


def decide_backward_ctr(calc: Calculus, goal, cfg: SearchConfig) -> Verdict:
    """Backward search for a commutative knotted-contraction logic."""
    k = calc.absorb[0] if calc.absorb else None
    if k is None or k.mode != "contraction":
        raise ValueError("needs an absorbing contraction refinement")
    leq = lambda a, b: hyper_le_ctr(a, b, k)
    return _decide_backward(calc, goal, cfg, leq, False, "backward-ctr")


def decide_backward_ctr_wc(calc: Calculus, goal,
                           cfg: SearchConfig) -> Verdict:
    """Backward search for a weakly commutative contraction logic."""
    k = calc.absorb[0] if calc.absorb else None
    if k is None or k.mode != "contraction" or calc.wc is None:
        raise ValueError("needs a weakly commutative absorbing refinement")
    w = calc.wc
    leq = lambda a, b: hyper_le_ctr(a, b, k, w)
    return _decide_backward(calc, goal, cfg, leq, True, "backward-ctr-wc")


# ---------------------------------------------------------------------------
# forward engines: instance generation


def _slack_ant_c(items, ant, env, omega, atoms):
    """Commutative antecedent matching where the fixed positions may
    also be filled from the formula pool (minimal weakening fill)."""
    cnt = Counter(ant)
    fixed, pend = [], []
    for it in items:
        if isinstance(it, MVar):
            key = ("M", it.name)
            if key in env:
                cnt = cnt - (cnt & Counter(env[key]))
            else:
                pend.append(it)
        else:
            fixed.append(it)

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
        it = fixed[i]
        for f in sorted(cnt, key=_fkey):
            if cnt[f] > 0:
                e2 = _match_f(it, f, env)
                if e2 is not None:
                    yield from assign(i + 1, cnt - Counter([f]), e2)
        pool = atoms if isinstance(it, FVar) and it.atomic else omega
        for f in pool:
            e2 = _match_f(it, f, env)
            if e2 is not None:
                yield from assign(i + 1, cnt, e2)

    yield from _dedup_envs(assign(0, cnt, env))


def _slack_ant_nc(items, ant, env, omega, atoms):
    """Sequence antecedent matching with pool insertions at the fixed
    positions; the matched antecedent embeds into the instance."""
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
            return
        if pos < len(ant):
            e2 = _match_f(it, ant[pos], env)
            if e2 is not None:
                yield from go(i + 1, pos + 1, e2)
        pool = atoms if isinstance(it, FVar) and it.atomic else omega
        for f in pool:
            e2 = _match_f(it, f, env)
            if e2 is not None:
                yield from go(i + 1, pos, e2)

    yield from _dedup_envs(go(0, 0, env))


def _slack_match_seq(comp, s, env, commutative, omega, atoms):
    e0 = _match_stoup(comp.stoup, s.stoup, env)
    if e0 is None:
        return
    if commutative:
        yield from _slack_ant_c(comp.ant, s.ant, e0, omega, atoms)
    else:
        yield from _slack_ant_nc(comp.ant, s.ant, e0, omega, atoms)


def _slack_match_prem(prem, g, env, commutative, omega, atoms):
    """Match a premise's active components against the components of a
    database element, one-to-one, with minimal fill."""
    if len(prem) != len(g):
        return
    from itertools import permutations as perms
    for order in perms(range(len(g))):
        envs = [env]
        for comp, j in zip(prem, order):
            envs = [e2 for e in envs
                    for e2 in _slack_match_seq(comp, g[j], e, commutative,
                                               omega, atoms)]
            if not envs:
                break
        yield from envs


def _fill_conclusion(rule: RuleSchema, env, omega, atoms):
    """Instantiate conclusion-only metavariables from the pools."""
    missing = []
    for comp in rule.conclusion:
        for v in _schseq_vars(comp):
            if isinstance(v, FVar) and ("F", v.name) not in env:
                missing.append(("F", v.name, atoms if v.atomic else
                                list(omega)))
            elif isinstance(v, PVar) and ("P", v.name) not in env:
                missing.append(("P", v.name, [None] + list(omega)))
            elif isinstance(v, MVar) and ("M", v.name) not in env:
                missing.append(("M", v.name, [()]))
    missing = list(dict.fromkeys((k, n, tuple(p)) for k, n, p in missing))
    if not missing:
        yield env
        return
    for combo in product(*(p for _, _, p in missing)):
        e2 = dict(env)
        for (k, n, _), v in zip(missing, combo):
            e2[(k, n)] = v
        yield e2


def _e_closure(w: WeakCommSpec, h, cap: int = 256):
    """Bounded closure of a hypersequent under basic exchange steps."""
    seen = {h}
    frontier = [h]
    while frontier and len(seen) < cap:
        nxt = []
        for g in frontier:
            for g2 in basic_steps(w, g):
                if g2 not in seen:
                    seen.add(g2)
                    nxt.append(g2)
        frontier = nxt
    return seen


# ---------------------------------------------------------------------------
# forward engines: lifting proofs along the derivability order


def _lift_steps(calc: Calculus, k: Optional[KnottedSpec], h, target):
    """One-step upward derivations from h, guided by the target."""
    out = []
    lst = list(h)
    tletters = sorted({f for s in target for f in s.ant}, key=_fkey)
    if calc.hyper and len(lst) < len(target):
        for s in sorted(set(target), key=lambda s: _fkey(s.stoup)
                        if s.stoup else ""):
            out.append(("ew", hyper(lst + [s])))
    cnt = Counter(lst)
    for s, c in cnt.items():
        if c >= 2:
            rest = list((cnt - Counter([s])).elements())
            out.append(("ec", hyper(rest)))
    if k is not None and k.mode == "weakening":
        try:
            rname = _knotted_rule_name(calc, k)
        except KeyError:
            rname = None
        if rname is not None:
            d = k.n - k.m
            for i, s in enumerate(lst):
                if calc.commutative:
                    have = Counter(s.ant)
                    for f in tletters:
                        if have[f] >= k.m:
                            s2 = sequent(s.ant + (f,) * d, s.stoup, True)
                            out.append((rname,
                                        hyper(lst[:i] + [s2] + lst[i + 1:])))
                else:
                    ant = s.ant
                    for f in tletters:
                        for j in range(len(ant) - k.m + 1):
                            if ant[j:j + k.m] != (f,) * k.m:
                                continue
                            a2 = ant[:j] + (f,) * k.n + ant[j + k.m:]
                            s2 = Sequent(a2, s.stoup)
                            out.append((rname,
                                        hyper(lst[:i] + [s2] + lst[i + 1:])))
                    if k.m == 0:
                        for f in tletters:
                            for j in range(len(ant) + 1):
                                a2 = ant[:j] + (f,) * k.n + ant[j:]
                                s2 = Sequent(a2, s.stoup)
                                out.append((rname, hyper(
                                    lst[:i] + [s2] + lst[i + 1:])))
    if calc.wc is not None:
        for h2 in basic_steps(calc.wc, h):
            out.append(("e", h2))
    return out


def _derive_up(calc: Calculus, k: Optional[KnottedSpec], proof: ProofTree,
               target, leq) -> ProofTree:
    """Extend a proof of an element below the target (in the weakening
    order) into a proof of the target itself."""
    start = proof.conclusion
    if start == target:
        return proof
    back = {start: None}
    frontier = [start]
    while frontier:
        nxt = []
        for h in frontier:
            for rname, h2 in _lift_steps(calc, k, h, target):
                if h2 in back or not leq(h2, target):
                    continue
                back[h2] = (h, rname)
                if h2 == target:
                    chain = []
                    cur = h2
                    while back[cur] is not None:
                        prev, rn = back[cur]
                        chain.append((rn, cur))
                        cur = prev
                    t = proof
                    for rn, conc in reversed(chain):
                        t = ProofTree(conc, rn, (t,))
                    return t
                nxt.append(h2)
        frontier = nxt
    raise RuntimeError("internal: no derivation from %r up to %r"
                       % (start, target))


def _contract_steps(calc: Calculus, k: Optional[KnottedSpec], h, target):
    """One-step downward derivations from h, guided by the target."""
    out = []
    lst = list(h)
    if calc.hyper and len(lst) < len(target):
        for s in sorted(set(target), key=lambda s: _fkey(s.stoup)
                        if s.stoup else ""):
            out.append(("ew", hyper(lst + [s])))
    cnt = Counter(lst)
    for s, c in cnt.items():
        if c >= 2:
            rest = list((cnt - Counter([s])).elements())
            out.append(("ec", hyper(rest)))
    if k is not None and k.mode == "contraction":
        try:
            rname = _knotted_rule_name(calc, k)
        except KeyError:
            rname = None
        if rname is not None:
            d = k.m - k.n
            for i, s in enumerate(lst):
                if calc.commutative:
                    have = Counter(s.ant)
                    for f in sorted(have, key=_fkey):
                        if have[f] >= k.m:
                            a2 = list(s.ant)
                            for _ in range(d):
                                a2.remove(f)
                            s2 = sequent(tuple(a2), s.stoup, True)
                            out.append((rname,
                                        hyper(lst[:i] + [s2] + lst[i + 1:])))
                else:
                    ant = s.ant
                    for f in sorted(set(ant), key=_fkey):
                        for j in range(len(ant) - k.m + 1):
                            if ant[j:j + k.m] != (f,) * k.m:
                                continue
                            a2 = ant[:j] + (f,) * k.n + ant[j + k.m:]
                            s2 = Sequent(a2, s.stoup)
                            out.append((rname,
                                        hyper(lst[:i] + [s2] + lst[i + 1:])))
    if calc.wc is not None:
        for h2 in basic_steps(calc.wc, h):
            out.append(("e", h2))
    return out


def _derive_down(calc: Calculus, k: Optional[KnottedSpec], proof: ProofTree,
                 target, leq) -> ProofTree:
    """Extend a proof of an element above the target (in the contraction
    order) into a proof of the target itself."""
    start = proof.conclusion
    if start == target:
        return proof
    back = {start: None}
    frontier = [start]
    while frontier:
        nxt = []
        for h in frontier:
            for rname, h2 in _contract_steps(calc, k, h, target):
                if h2 in back or not leq(target, h2):
                    continue
                back[h2] = (h, rname)
                if h2 == target:
                    chain = []
                    cur = h2
                    while back[cur] is not None:
                        prev, rn = back[cur]
                        chain.append((rn, cur))
                        cur = prev
                    t = proof
                    for rn, conc in reversed(chain):
                        t = ProofTree(conc, rn, (t,))
                    return t
                nxt.append(h2)
        frontier = nxt
    raise RuntimeError("internal: no derivation from %r down to %r"
                       % (start, target))


# ---------------------------------------------------------------------------
# forward engines: saturation


def _initial_instances(calc: Calculus, omega, atoms):
    """Stage-zero database: all capped instances of the initial rules."""
    out = {}
    for rule in calc.rules:
        if not rule.initial:
            continue
        base = {("H",): ()}
        for env in _fill_conclusion(rule, base, omega, atoms):
            h = _inst_schhyper(rule.conclusion, env, rule, calc.commutative)
            if _omega_ok(h, omega):
                out.setdefault(h, ("init", rule.name))
    return out


def _decide_forward(calc: Calculus, k: Optional[KnottedSpec], goal,
                    cfg: SearchConfig, leq, engine: str) -> Verdict:
    omega = _build_omega(goal, calc)
    atoms = [f for f in omega if f.kind == "var"]
    control = _control_record(calc, omega, goal, engine)
    comm = calc.commutative
    wcs = calc.wc
    nodes = [0]

    def bump():
        nodes[0] += 1
        if nodes[0] > cfg.nodes:
            raise _Budget

    D = dict(_initial_instances(calc, omega, atoms))

    def witness(p, extra=()):
        for g in D:
            if leq(g, p):
                return g
        for g in extra:
            if leq(g, p):
                return g
        return None

    def goal_hit():
        return witness(goal)

    def instances(new_keys):
        """Rule instances whose premises all lie above the database."""
        skip = {"cut", "ew", "ec"}
        keys = list(D)
        for rule in calc.rules:
            if rule.initial or rule.name in skip or not rule.premises:
                continue
            npr = len(rule.premises)
            for tup in product(keys, repeat=npr):
                if not any(g in new_keys for g in tup):
                    continue
                bump()
                envs = [{("H",): ()}]
                for prem, g in zip(rule.premises, tup):
                    gs = _e_closure(wcs, g) if wcs is not None else (g,)
                    envs = [e2 for e in envs for gv in gs
                            for e2 in _slack_match_prem(prem, gv, e, comm,
                                                        omega, atoms)]
                    if not envs:
                        break
                for env0 in envs:
                    for env in _fill_conclusion(rule, env0, omega, atoms):
                        concl = _inst_schhyper(rule.conclusion, env, rule,
                                               comm)
                        prems = _dedup(_inst_schhyper(p, env, rule, comm)
                                       for p in rule.premises)
                        yield rule.name, concl, prems

    try:
        stage = 0
        new_keys = set(D)
        hit = goal_hit()
        while hit is None and new_keys:
            if stage >= cfg.stages:
                return Verdict("budget",
                               stats={"stage": stage, "db": len(D),
                                      "nodes": nodes[0],
                                      "control": control})
            added = {}
            for rname, concl, prems in instances(new_keys):
                if not _omega_ok(concl, omega):
                    continue
                if concl in D or concl in added:
                    continue
                pairs = []
                for p in prems:
                    wit = witness(p) if _omega_ok(p, omega) else None
                    if wit is None:
                        pairs = None
                        break
                    pairs.append((p, wit))
                if pairs is None:
                    continue
                if witness(concl, added) is not None:
                    continue
                added[concl] = (rname, tuple(pairs))
            D.update(added)
            new_keys = set(added)
            stage += 1
            hit = goal_hit()
    except _Budget:
        return Verdict("budget", stats={"stage": stage, "db": len(D),
                                        "nodes": nodes[0],
                                        "control": control})

    stats = {"stages": stage, "db": len(D), "nodes": nodes[0],
             "control": control}
    if hit is None:
        cert = {"stabilized_at": stage, "size": len(D),
                "database": tuple(D)}
        return Verdict("unprovable", certificate=cert, stats=stats)

    memo = {}

    def rebuild(h):
        if h in memo:
            return memo[h]
        just = D[h]
        if just[0] == "init":
            t = ProofTree(h, just[1])
        else:
            rname, pairs = just
            kids = tuple(_derive_up(calc, k, rebuild(w), p, leq)
                         for p, w in pairs)
            t = ProofTree(h, rname, kids)
        memo[h] = t
        return t

    tree = _derive_up(calc, k, rebuild(hit), goal, leq)
    res = check_proof(tree, calc)
    if not res:
        raise RuntimeError("internal: reconstructed proof rejected: %s"
                           % res.error)
    stats["height"] = res.height
    return Verdict("provable", proof=tree, stats=stats)


def decide_forward_wkn(calc: Calculus, k: KnottedSpec, goal,
                       cfg: SearchConfig) -> Verdict:
    """Forward saturation for a commutative knotted-weakening logic."""
    if k.mode != "weakening" or not calc.commutative:
        raise ValueError("needs a commutative weakening spec")
    leq = lambda a, b: hyper_le_wkn(a, b, k)
    return _decide_forward(calc, k, goal, cfg, leq, "forward-wkn")


def decide_forward_wkn_wc(calc: Calculus, k: KnottedSpec, goal,
                          cfg: SearchConfig) -> Verdict:
    """Forward saturation for a weakly commutative weakening logic."""
    if k.mode != "weakening" or calc.wc is None or calc.commutative:
        raise ValueError("needs a weakly commutative weakening calculus")
    w = calc.wc
    leq = lambda a, b: hyper_le_wkn(a, b, k, w)
    return _decide_forward(calc, k, goal, cfg, leq, "forward-wkn-wc")


def decide_forward_int_nc(calc: Calculus, goal,
                          cfg: SearchConfig) -> Verdict:
    """Forward saturation for a noncommutative integral logic."""
    if calc.commutative:
        raise ValueError("needs a noncommutative calculus")
    k = KnottedSpec(0, 1)
    _knotted_rule_name(calc, k)
    return _decide_forward(calc, k, goal, cfg, hyper_le_int,
                           "forward-int-nc")


# ---------------------------------------------------------------------------
# naive bounded backward search


def naive_backward(calc: Calculus, goal, cfg: SearchConfig) -> Verdict:
    """Depth- and node-budgeted backward search with loop checking.
    'unprovable' is reported only when no cutoff was ever hit."""
    nodes = [0]
    cut = [False]
    exps_of = {}

    def expansions(h):
        if h not in exps_of:
            got = backward_expansions(calc, h)
            exps_of[h] = sorted(
                got, key=lambda t: (len(t[1]),
                                    max((size(p) for p in t[1]), default=0)))
        return exps_of[h]

    def search(h, path, depth):
        nodes[0] += 1
        if nodes[0] > cfg.nodes:
            raise _Budget
        exps = expansions(h)
        for inst, prems in exps:
            if not prems:
                return ProofTree(h, inst.rule)
        if depth == 0:
            if any(prems for _, prems in exps):
                cut[0] = True
            return None
        path2 = path + (h,)
        for inst, prems in exps:
            if not prems or any(p in path2 for p in prems):
                continue
            kids = []
            for p in prems:
                sub = search(p, path2, depth - 1)
                if sub is None:
                    break
                kids.append(sub)
            else:
                return ProofTree(h, inst.rule, tuple(kids))
        return None

    try:
        tree = search(goal, (), cfg.naive_depth)
    except _Budget:
        return Verdict("budget", stats={"nodes": nodes[0]},
                       warning=NAIVE_WARNING)
    stats = {"nodes": nodes[0], "depth": cfg.naive_depth}
    if tree is not None:
        res = check_proof(tree, calc)
        if not res:
            raise RuntimeError("internal: naive proof rejected: %s"
                               % res.error)
        stats["height"] = res.height
        return Verdict("provable", proof=tree, stats=stats,
                       warning=NAIVE_WARNING)
    if cut[0]:
        return Verdict("budget", stats=stats, warning=NAIVE_WARNING)
    return Verdict("unprovable", certificate=stats, stats=stats,
                   warning=NAIVE_WARNING)


def sequent_space(omega, mult_cap: int, commutative: bool):
    """Single sequents with antecedent material drawn from omega (per-
    formula multiplicity at most mult_cap) and stoup in omega or empty."""
    forms = sorted(omega, key=_fkey)
    stoups = [None] + forms
    if commutative:
        for counts in product(range(mult_cap + 1), repeat=len(forms)):
            ant = tuple(f for f, c in zip(forms, counts) for _ in range(c))
            for st in stoups:
                yield sequent(ant, st, True)
    else:
        total = mult_cap * len(forms)
        for n in range(total + 1):
            for ant in product(forms, repeat=n):
                if any(ant.count(f) > mult_cap for f in set(ant)):
                    continue
                for st in stoups:
                    yield Sequent(ant, st)


def saturation_heights(calc: Calculus, omega, mult_cap: int) -> dict:
    """Minimal proof heights over the capped sequent space, by exhaustive
    bottom-up level iteration.  This is a bounded oracle independent of
    the wqo-pruned engines: instances whose premises leave the capped
    space are simply unusable, so membership is sound and absence only
    means 'no proof within the cap'."""
    space = [hyper([s]) for s in sequent_space(omega, mult_cap,
                                               calc.commutative)]
    exps = {}
    for h in space:
        seen, out = set(), []
        for inst, prems in backward_expansions(calc, h):
            key = (inst.rule, prems)
            if key not in seen:
                seen.add(key)
                out.append(prems)
        exps[h] = out
    heights = {}
    level = 0
    while True:
        level += 1
        added = []
        for h in space:
            if h in heights:
                continue
            for prems in exps[h]:
                if all(p in heights and heights[p] < level for p in prems):
                    added.append(h)
                    break
        if not added:
            return heights
        for h in added:
            heights[h] = level


# ---------------------------------------------------------------------------
# drivers


def _needs_hyper(logic: LogicSpec) -> bool:
    """Only genuinely multi-component extra rules need the hypersequent
    layer; for single-component ('local') rule sets the sequent system
    is equivalent and far smaller to search."""
    for x in logic.extra:
        if isinstance(x, RuleSchema):
            if len(x.conclusion) > 1 or any(len(p) > 1 for p in x.premises):
                return True
    return False


def deduce(logic: LogicSpec, gamma, phi, cfg: Optional[SearchConfig] = None,
           budgeted_naive: bool = False) -> Verdict:
    """Decide whether phi follows from the assumption set gamma."""
    cfg = cfg or SearchConfig()
    gamma = tuple(gamma)
    comm = logic.mode == "commutative"
    goal = hyper([sequent((), phi, comm)])
    eng = logic.engine()
    if eng is None:
        if not budgeted_naive:
            raise ValueError("no terminating engine covers this logic; "
                             "pass budgeted_naive=True for bounded search")
        calc = compile_calculus(logic, gamma, hyper_mode=False)
        return naive_backward(calc, goal, cfg)
    calc = compile_calculus(logic, gamma, hyper_mode=_needs_hyper(logic))
    if eng == "backward-ctr":
        return decide_backward_ctr(refine_absorbing(calc, logic.knotted),
                                   goal, cfg)
    if eng == "backward-ctr-wc":
        return decide_backward_ctr_wc(
            refine_absorbing(calc, logic.knotted, logic.wc), goal, cfg)
    if eng == "forward-wkn":
        return decide_forward_wkn(calc, logic.knotted, goal, cfg)
    if eng == "forward-wkn-wc":
        return decide_forward_wkn_wc(calc, logic.knotted, goal, cfg)
    return decide_forward_int_nc(calc, goal, cfg)


def prove(logic: LogicSpec, phi, cfg: Optional[SearchConfig] = None,
          budgeted_naive: bool = False) -> Verdict:
    """Decide provability of phi in the logic."""
    return deduce(logic, (), phi, cfg, budgeted_naive)
