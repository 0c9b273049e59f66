import numpy as np
import pytest
from hypothesis import given, strategies as st

from levimax import catalog
from levimax.expr import (
    BinOp,
    Call,
    Const,
    DivisionPoleError,
    DslSyntaxError,
    NonRealExpressionError,
    Param,
    Pow,
    UnknownIdentifierError,
    Var,
    eval_gradient_norms,
    eval_jet2,
    eval_scalar,
    parse_defining_function,
    parse_expression,
    to_source,
)

from conftest import random_poly

EX1 = "param t = 1\n(2/3)*re(z1)^3 - t*abs2(z2)*re(z1) - im(z3)"


def test_parse_example1_tree():
    f = parse_defining_function(EX1)
    assert f.params == {"t": 1.0}
    assert f.n == 3
    cubic = BinOp("*", BinOp("/", Const(2.0), Const(3.0)), Pow(Call("re", Var(1)), 3))
    assert isinstance(f.ast, BinOp) and f.ast.op == "-"
    assert f.ast.left.left == cubic
    assert f.ast.right == Call("im", Var(3))
    assert f.ast.left.right.left.left == Param("t")


def test_abs2_matches_product():
    f = parse_defining_function("abs2(z1)")
    g = parse_defining_function("re(z1*conj(z1))")
    for z in (1 + 2j, -0.3j, 4.0):
        assert eval_scalar(f, [z]) == pytest.approx(eval_scalar(g, [z]))


@pytest.mark.parametrize(
    "text, column",
    [("re(z1", 6), ("re(z1) +", 9), ("abs2(z1) * * z2", 12)],
)
def test_syntax_error_columns(text, column):
    with pytest.raises(DslSyntaxError) as err:
        parse_defining_function(text)
    assert err.value.line == 1
    assert err.value.column == column


def test_error_line_numbers_count_header():
    with pytest.raises(DslSyntaxError) as err:
        parse_defining_function("param t = 1\n\nre(z1) + )")
    assert err.value.line == 3


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifierError):
        parse_defining_function("re(z1) + s")
    with pytest.raises(UnknownIdentifierError):
        parse_defining_function("sin(z1)")


def test_non_real_top_level():
    with pytest.raises(NonRealExpressionError):
        parse_defining_function("z1 + re(z2)")
    parse_defining_function("re(z1) * im(z2) - abs2(z3)")


def test_let_and_dim_headers():
    f = parse_defining_function("dim 4\nlet s = abs2(z1) + abs2(z2)\ns^2 - im(z3)")
    assert f.n == 4
    assert eval_scalar(f, [1, 1j, 0, 0]) == pytest.approx(4.0)


def test_param_override():
    f = parse_defining_function(EX1)
    g = f.with_params(t=5.0)
    z = [0.1, 0.5, 0.0]
    assert eval_scalar(g, z) == pytest.approx((2 / 3) * 0.001 - 5 * 0.25 * 0.1)
    assert eval_scalar(f, z, {"t": 5.0}) == pytest.approx(eval_scalar(g, z))
    with pytest.raises(KeyError):
        f.with_params(u=1.0)


def test_jet_of_abs2():
    jet = eval_jet2(parse_defining_function("abs2(z1)"), [2, 0, 0])
    assert jet.value == 4.0
    assert jet.dz[0] == pytest.approx(2.0)
    assert jet.dzdzbar[0, 0] == pytest.approx(1.0)


@pytest.mark.parametrize("t", [0.5, 1.0, 5.0])
def test_example1_dz3_constant(t):
    f = catalog.load("example1", t=t)
    rng = np.random.default_rng(3)
    for _ in range(10):
        z = rng.normal(size=3) + 1j * rng.normal(size=3)
        assert eval_jet2(f, z).dz[2] == pytest.approx(0.5j, abs=1e-15)


def test_quartic_levi_entry():
    jet = eval_jet2(parse_defining_function("(1/4)*abs2(z1)^2"), [2])
    assert jet.dzdzbar[0, 0] == pytest.approx(4.0)


def test_gradient_norms():
    d, g = eval_gradient_norms(eval_jet2(parse_defining_function("-im(z3)"), [0, 0, 0]))
    assert d == pytest.approx(0.5)
    assert g == pytest.approx(1 / np.sqrt(2))
    d, _ = eval_gradient_norms(eval_jet2(parse_defining_function("re(z1)"), [3 + 1j]))
    assert d == pytest.approx(0.5)
    d, _ = eval_gradient_norms(eval_jet2(catalog.load("example2", t=2.0), [1, 0, 0.3j]))
    assert d * d == pytest.approx(0.5)


def test_division_pole():
    f = parse_defining_function("abs2(z1)/(abs2(z1) + abs2(z2))")
    with pytest.raises(DivisionPoleError) as err:
        eval_jet2(f, [0, 0])
    assert "abs2" in err.value.subexpression


def test_dzbar_is_conjugate_and_hermitian_exact():
    f = catalog.load("example2", t=2.5)
    rng = np.random.default_rng(9)
    for _ in range(20):
        z = rng.normal(size=3) + 1j * rng.normal(size=3)
        jet = eval_jet2(f, z)
        assert np.array_equal(jet.dzbar, np.conj(jet.dz))
        assert np.array_equal(jet.dzdzbar, np.conj(jet.dzdzbar.T))
        assert np.array_equal(jet.dzdz, jet.dzdz.T)


@pytest.mark.parametrize("name", sorted(catalog.SOURCES))
def test_corpus_round_trip(name):
    f = catalog.load(name)
    g = parse_defining_function(f.source())
    assert g.ast == f.ast
    assert g.params == f.params


_leaf = st.one_of(
    st.integers(1, 3).map(Var),
    st.floats(0, 100, allow_nan=False).map(Const),
    st.just(Param("t")),
)


def _extend(children):
    return st.one_of(
        st.tuples(st.sampled_from(["re", "im", "abs2", "conj"]), children).map(lambda a: Call(*a)),
        st.tuples(st.sampled_from("+-*/"), children, children).map(lambda a: BinOp(*a)),
        st.tuples(children, st.integers(0, 4)).map(lambda a: Pow(*a)),
    )


@given(st.recursive(_leaf, _extend, max_leaves=12))
def test_round_trip_random_trees(node):
    assert parse_expression(to_source(node), ["t"]) == node


def _wirtinger_fd(f, z, h=1e-5):
    """Wirtinger derivatives from central differences of the real value."""
    n = z.size
    x = np.concatenate([z.real, z.imag])

    def val(v):
        return eval_scalar(f, v[:n] + 1j * v[n:])

    d = 2 * n
    g = np.empty(d)
    H = np.empty((d, d))
    e = np.eye(d) * h
    for a in range(d):
        g[a] = (val(x + e[a]) - val(x - e[a])) / (2 * h)
        for b in range(a, d):
            H[a, b] = H[b, a] = (
                val(x + e[a] + e[b]) - val(x + e[a] - e[b]) - val(x - e[a] + e[b]) + val(x - e[a] - e[b])
            ) / (4 * h * h)
    gx, gy = g[:n], g[n:]
    hxx, hyy, hxy = H[:n, :n], H[n:, n:], H[:n, n:]
    dz = 0.5 * (gx - 1j * gy)
    dzdzbar = 0.25 * (hxx + hyy + 1j * (hxy - hxy.T))
    dzdz = 0.25 * (hxx - hyy - 1j * (hxy + hxy.T))
    return dz, dzdzbar, dzdz


@given(st.integers(0, 2**32 - 1))
def test_jets_match_finite_differences(seed):
    # 60 expressions x 17 points covers the thousand-point budget
    rng = np.random.default_rng(seed)
    n = 2
    f = parse_defining_function(f"dim {n}\nre({random_poly(rng, n, deg=3, terms=4)})")
    for _ in range(17):
        z = 0.7 * (rng.uniform(-1, 1, n) + 1j * rng.uniform(-1, 1, n))
        jet = eval_jet2(f, z)
        dz, dzdzbar, dzdz = _wirtinger_fd(f, z)
        assert np.all(np.abs(jet.dz - dz) <= 1e-6 * np.maximum(1.0, np.abs(dz)))
        assert np.all(np.abs(jet.dzdzbar - dzdzbar) <= 1e-4 * np.maximum(1.0, np.abs(dzdzbar)))
        assert np.all(np.abs(jet.dzdz - dzdz) <= 1e-4 * np.maximum(1.0, np.abs(dzdz)))
