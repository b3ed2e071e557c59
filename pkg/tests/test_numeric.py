from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from kmst.numeric import LinearForm, as_rational, eval_form, format_rational, intersect, min_on_interval

rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)
forms = st.builds(LinearForm, rationals, rationals)


def test_eval_examples():
    assert eval_form(LinearForm(0, 1), F(3, 2)) == F(3, 2)
    assert eval_form(LinearForm(2, 0), 7) == 2
    assert eval_form(LinearForm(1, F(-1, 2)), 4) == -1


def test_intersect_examples():
    assert intersect(LinearForm(0, 1), LinearForm(2, -1)) == 1
    assert intersect(LinearForm(0, 1), LinearForm(3, 1)) is None
    assert intersect(LinearForm(5, 0), LinearForm(5, 0)) is None


def test_min_on_interval_examples():
    assert min_on_interval([LinearForm(0, 1), LinearForm(2, -1)], 0, 2) == (0, 1, 1)
    assert min_on_interval([LinearForm(1, 0)], -3, 5) == (0, 0, None)
    assert min_on_interval([LinearForm(0, 1), LinearForm(0, 2)], 1, 2) == (0, 0, None)


def test_min_on_interval_rejects_bad_input():
    with pytest.raises(ValueError):
        min_on_interval([], 0, 1)
    with pytest.raises(ValueError):
        min_on_interval([LinearForm(0, 1)], 1, 1)


def test_as_rational_is_exact():
    assert as_rational("3/6") == F(1, 2)
    assert as_rational(4) == F(4)
    with pytest.raises(TypeError):
        as_rational(0.5)
    with pytest.raises(TypeError):
        as_rational(True)


def test_format_rational():
    assert format_rational(F(4, 2)) == "2"
    assert format_rational(F(-3, 6)) == "-1/2"


def test_form_arithmetic():
    f, g = LinearForm(1, 2), LinearForm(F(1, 3), -1)
    assert f + g == LinearForm(F(4, 3), 1)
    assert f - g == LinearForm(F(2, 3), 3)
    assert -f == LinearForm(-1, -2)
    assert f.half() == LinearForm(F(1, 2), 1)
    assert hash(LinearForm("2/4", 0)) == hash(LinearForm(F(1, 2), 0))


@given(rationals, rationals, rationals)
def test_eval_matches_unreduced_cross_multiplication(a, b, lam):
    # a + b*lam over the common denominator, never reducing
    num = a.numerator * b.denominator * lam.denominator + b.numerator * lam.numerator * a.denominator
    den = a.denominator * b.denominator * lam.denominator
    assert LinearForm(a, b)(lam) * den == num


@given(forms, forms)
def test_intersect_is_symmetric(f, g):
    x = intersect(f, g)
    assert x == intersect(g, f)
    if x is not None:
        assert f(x) == g(x)
    else:
        assert f.slope == g.slope


@given(st.lists(forms, min_size=1, max_size=5), rationals, st.fractions(min_value=F(1, 8), max_value=10, max_denominator=8))
def test_min_on_interval_against_sampling(fs, lo, width):
    hi = lo + width
    at_lo, at_hi, cross = min_on_interval(fs, lo, hi)
    assert all(fs[at_lo](lo) <= f(lo) for f in fs)
    assert all(fs[at_hi](hi) <= f(hi) for f in fs)
    # the envelope winner just right of lo: smallest value, then smallest slope
    w = min(range(len(fs)), key=lambda i: (fs[i](lo), fs[i].slope, i))
    samples = [lo + width * F(j, 64) for j in range(1, 65)]
    if cross is None:
        assert all(fs[w](x) <= f(x) for x in samples for f in fs)
    else:
        assert lo < cross < hi
        assert all(fs[w](x) <= f(x) for x in samples if x <= cross for f in fs)
        after = (cross + hi) / 2
        assert any(f(after) < fs[w](after) for f in fs)
