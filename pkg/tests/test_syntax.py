import pytest
from hypothesis import given, strategies as st

from knotbench import syntax as S


def test_parse_constants():
    assert S.parse_formula("1") == S.ONE
    assert S.parse_formula("0") == S.ZERO


def test_parse_identity_shape():
    f = S.parse_formula("p \\ p")
    assert f == S.ldiv(S.var("p"), S.var("p"))


def test_parse_join_of_fusions():
    f = S.parse_formula("(p*q) \\/ (q*p)")
    assert f == S.join(S.fuse(S.var("p"), S.var("q")),
                       S.fuse(S.var("q"), S.var("p")))


def test_arrow_is_left_division():
    assert S.parse_formula("p -> q") == S.parse_formula("p \\ q")


def test_precedence():
    # * binds tighter than \, which binds tighter than /\, then \/
    f = S.parse_formula("p * q \\ r /\\ s \\/ t")
    assert f.kind == "join"
    assert f.left.kind == "meet"
    assert f.left.left.kind == "ldiv"
    assert f.left.left.left == S.fuse(S.var("p"), S.var("q"))


def test_parse_errors():
    with pytest.raises(S.ParseError):
        S.parse_formula("p 2")
    with pytest.raises(S.ParseError):
        S.parse_formula("")
    with pytest.raises(S.ParseError):
        S.parse_formula("p \\ q \\ r")  # divisions are non-associative
    with pytest.raises(S.ParseError):
        S.parse_formula("p ?")


def test_subformula_closure():
    fs = S.subformula_closure([S.parse_formula("p \\ q")])
    assert list(fs) == [S.parse_formula("p \\ q"), S.var("p"), S.var("q")]
    fs = S.subformula_closure([S.parse_formula("p /\\ 1")])
    assert list(fs) == [S.parse_formula("p /\\ 1"), S.var("p"), S.ONE]
    assert len(S.subformula_closure([])) == 0


def test_subformula_closure_idempotent_monotone():
    a = S.subformula_closure([S.parse_formula("(p*q) \\ r")])
    b = S.subformula_closure(list(a))
    assert list(a) == list(b)
    bigger = S.subformula_closure([S.parse_formula("(p*q) \\ r"),
                                   S.parse_formula("r \\/ s")])
    assert set(a.formulas) <= set(bigger.formulas)


def test_tau():
    p = S.var("p")
    assert S.tau(p) == {(S.ONE, "<=", p)}
    assert S.tau(S.ONE) == {(S.ONE, "<=", S.ONE)}
    f = S.meet(p, S.var("q"))
    assert S.tau(f) == {(S.ONE, "<=", f)}


def test_rho():
    p, q = S.var("p"), S.var("q")
    assert S.rho(p, q) == S.meet(S.ldiv(p, q), S.ldiv(q, p))
    assert S.rho(S.ONE, S.ONE) == S.meet(S.ldiv(S.ONE, S.ONE),
                                         S.ldiv(S.ONE, S.ONE))
    pq, qp = S.fuse(p, q), S.fuse(q, p)
    assert S.rho(pq, qp) == S.meet(S.ldiv(pq, qp), S.ldiv(qp, pq))


def test_equation_parse_and_render():
    e = S.parse_equation("x^2 <= x^3")
    assert e.lhs == (("x", "x"),)
    assert e.rhs == (("x", "x", "x"),)
    assert e.rel == "<="
    e2 = S.parse_equation("x*y <= y*x \\/ 1", commutative=False)
    assert e2.lhs == (("x", "y"),)
    assert e2.rhs == (("y", "x"), ())
    assert S.parse_equation(S.render_equation(e2), commutative=False) == e2


def test_equation_commutative_words_sorted():
    e = S.parse_equation("y*x <= x \\/ y")
    assert e.lhs == (("x", "y"),)


def test_equation_from_formulas_distributes():
    l = S.parse_formula("x * (y \\/ 1)")
    r = S.parse_formula("x")
    e = S.equation_from_formulas(l, r, "<=")
    assert set(e.lhs) == {("x", "y"), ("x",)}


def test_equation_invariants():
    with pytest.raises(ValueError):
        S.Equation((), (("x",),))


# property: printing then parsing is the identity

_atoms = st.sampled_from(["p", "q", "r", "s1"])


def _formulas():
    base = st.one_of(_atoms.map(S.var), st.just(S.ONE), st.just(S.ZERO))
    return st.recursive(
        base,
        lambda kids: st.tuples(
            st.sampled_from(["meet", "join", "fuse", "ldiv", "rdiv"]),
            kids, kids).map(lambda t: S.Formula(t[0], left=t[1], right=t[2])),
        max_leaves=12)


@given(_formulas())
def test_roundtrip(f):
    assert S.parse_formula(S.render_formula(f)) == f


@given(_formulas())
def test_roundtrip_commutative_rendering(f):
    assert S.parse_formula(S.render_formula(f, commutative=True)) == f
