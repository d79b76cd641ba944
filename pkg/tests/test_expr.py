"""Parser, printer, differentiation, and cutoff evaluation."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hoferlab import expr as E
from hoferlab.errors import DomainError, ExprSyntaxError, UnknownIdentifier


def test_parse_product():
    e = E.parse("2*x1")
    assert e == E.Mul(E.Const(2.0), E.Var("x1"))


def test_parse_precedence():
    e = E.parse("t*t*x1 + sin(t)")
    assert isinstance(e, E.Add)
    assert isinstance(e.left, E.Mul)
    assert e.right == E.Call("sin", E.Var("t"))


def test_parse_incomplete_has_offset():
    with pytest.raises(ExprSyntaxError) as err:
        E.parse("x1+")
    assert err.value.offset == 3


def test_parse_unknown_identifier():
    with pytest.raises(UnknownIdentifier):
        E.parse("foo + 1")
    with pytest.raises(UnknownIdentifier):
        E.parse("zeta(2)")


def test_unary_binds_tighter_than_power():
    e = E.parse("-x1^2")
    assert e == E.IntPow(E.Neg(E.Var("x1")), 2)
    assert float(E.evaluate(e, [(3.0, 0.0)], 0.0)[0]) == 9.0


@pytest.mark.parametrize("src", [
    "2*x1",
    "t*t*x1 + sin(t)",
    "(x1 + y1)^2",
    "-x1^2",
    "x1^-2",
    "step(x1, 0.25, 0.75)",
    "step_d(t, 0.25, 0.75, 2)",
    "sqrt(x1^2 + y1^2)",
    "x1/(1 + t)",
    "2 - -3*t",
    "exp(-t)*cos(2*y2)",
])
def test_print_parse_roundtrip(src):
    tree = E.parse(src)
    assert E.parse(E.to_source(tree)) == tree


# random tree generator for the roundtrip property
_leaf = st.sampled_from([E.Var("x1"), E.Var("y1"), E.Var("t"),
                         E.Const(2.0), E.Const(-0.5), E.Const(3.25)])


def _trees(depth):
    # built through the normalizing constructors, like parse and diff do
    if depth == 0:
        return _leaf
    sub = _trees(depth - 1)
    return st.one_of(
        _leaf,
        st.builds(E.add, sub, sub),
        st.builds(E.sub, sub, sub),
        st.builds(E.mul, sub, sub),
        st.builds(E.neg, sub),
        st.builds(lambda a: E.intpow(a, 3), sub),
        st.builds(lambda a: E.call("sin", a), sub),
        st.builds(lambda a: E.step(a, 0.25, 0.75), sub),
    )


@given(_trees(3))
@settings(max_examples=150, deadline=None)
def test_roundtrip_property(tree):
    assert E.parse(E.to_source(tree)) == tree


def test_diff_t_linear():
    assert E.diff_t(E.parse("t*x1"), 1) == E.Var("x1")
    assert E.diff_t(E.parse("x1"), 1) == E.Const(0.0)


def test_diff_t_order_zero_is_identity():
    e = E.parse("sin(t)*x1 + t^3")
    assert E.diff_t(e, 0) is e


def test_diff_t_order_guard():
    with pytest.raises(ValueError):
        E.diff_t(E.parse("t"), 9)
    with pytest.raises(ValueError):
        E.diff_t(E.parse("t"), -1)


def test_diff_t_sin_second_derivative():
    # order-4 central stencil on the undifferentiated expression
    e = E.parse("sin(t)*x1")
    d2 = E.diff_t(e, 2)
    got = float(E.evaluate(d2, [(2.0, 0.0)], 0.3)[0])
    h = 1e-2
    f = lambda t: float(E.evaluate(e, [(2.0, 0.0)], t)[0])
    stencil = (-f(0.3 + 2 * h) + 16 * f(0.3 + h) - 30 * f(0.3)
               + 16 * f(0.3 - h) - f(0.3 - 2 * h)) / (12 * h ** 2)
    assert got == pytest.approx(stencil, abs=1e-6)
    assert got == pytest.approx(-2.0 * math.sin(0.3), rel=1e-12)


@pytest.mark.parametrize("src,order", [
    ("t^4 - 2*t^2 + t", 3),
    ("sin(2*t)*cos(t)", 2),
    ("exp(-t)*x1 + t*t*y1", 4),
    ("step(t, 0.25, 0.75)*x1", 2),
    ("sqrt(1 + t^2)", 3),
])
def test_diff_t_matches_finite_differences(src, order):
    e = E.parse(src)
    d = E.diff_t(e, order)
    pt = [(0.7, -0.4)]
    for t0 in (0.05, 0.45, 0.62):
        h = 4e-3
        offsets = np.arange(-5, 6)
        vals = np.array([float(E.evaluate(e, pt, t0 + j * h)[0]) for j in offsets])
        poly = np.polyfit(offsets * h, vals, 8)
        fd = np.polyder(np.poly1d(poly), order)(0.0)
        sym = float(E.evaluate(d, pt, t0)[0])
        assert sym == pytest.approx(fd, rel=1e-5, abs=2e-4 * max(1.0, abs(sym)))


def test_evaluate_examples():
    assert E.evaluate(E.parse("2*x1"), [(1.0, 0.0)], 5.0)[0] == 2.0
    zeros = E.evaluate(E.parse("0"), [(1, 2), (3, 4), (0, 0)], 0.1)
    assert np.array_equal(zeros, np.zeros(3))


def test_evaluate_dimension_check():
    with pytest.raises(UnknownIdentifier):
        E.evaluate(E.parse("x2"), [(1.0, 2.0)], 0.0)


def test_division_guard():
    e = E.parse("x1/y1")
    with pytest.raises(DomainError):
        E.evaluate(e, [(1.0, 0.0)], 0.0)
    with pytest.raises(DomainError):
        E.parse("1/0")


def test_sqrt_domain():
    with pytest.raises(DomainError):
        E.evaluate(E.parse("sqrt(x1)"), [(-1.0, 0.0)], 0.0)


def test_step_plateaus_and_range():
    s = np.linspace(-1.2, 1.2, 2001)
    vals = E.step_values(s, 0.25, 0.75)
    assert np.all(vals >= 0.0) and np.all(vals <= 1.0)
    assert np.all(vals[np.abs(s) <= 0.25] == 1.0)
    assert np.all(vals[np.abs(s) >= 0.75] == 0.0)
    # all derivatives vanish on and beyond the plateaus
    for d in range(1, 6):
        dv = E.step_values(s, 0.25, 0.75, d)
        assert np.all(dv[np.abs(s) <= 0.25] == 0.0)
        assert np.all(dv[np.abs(s) >= 0.75] == 0.0)
        assert np.all(np.isfinite(dv))


def test_step_monotone_transition():
    s = np.linspace(0.25001, 0.74999, 500)
    vals = E.step_values(s, 0.25, 0.75)
    assert np.all(np.diff(vals) <= 1e-12)


def test_step_narrow_window_snaps_to_plateau():
    vals = E.step_values(np.array([0.9999e-3, 1.4999e-3]), 1e-3, 1.5e-3, 0)
    assert np.all(np.isfinite(vals))
    dv = E.step_values(np.linspace(1.01e-3, 1.49e-3, 50), 1e-3, 1.5e-3, 2)
    assert np.all(np.isfinite(dv))


def test_substitute_time_reversal():
    e = E.parse("t*x1")
    flipped = E.substitute_time(e, E.parse("1 - t"))
    assert float(E.evaluate(flipped, [(2.0, 0.0)], 0.25)[0]) == pytest.approx(1.5)


def test_operator_sugar_builds_trees():
    x1, t = E.Var("x1"), E.Var("t")
    e = 2.0 * x1 + t ** 2 - x1 / 4.0
    got = float(E.evaluate(e, [(2.0, 0.0)], 3.0)[0])
    assert got == pytest.approx(2 * 2 + 9 - 0.5)


def test_spatial_dimension():
    assert E.spatial_dimension(E.parse("t")) == 0
    assert E.spatial_dimension(E.parse("x1 + y1")) == 2
    assert E.spatial_dimension(E.parse("y3")) == 6
