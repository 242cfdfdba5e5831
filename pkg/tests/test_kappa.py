from fractions import Fraction as F

import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from virmart.kappa import (K, ONE, ZERO, KappaRational, PoleError, as_krat, central_charge,
                           krat_arith, krat_eval, weight_hrho, weight_hrs)

from strategies import kappa_rationals
from sympy_oracle import k as sk, krat as to_sympy

C_GENERIC = 13 - F(3, 2) * K - 24 / K


class TestArithmeticExamples:
    def test_inverse(self):
        assert krat_arith(K, 1 / K, "mul") == ONE

    def test_common_denominator(self):
        assert krat_arith((K - 4) / K, 4 / K, "add") == ONE

    def test_pole_only_on_evaluation(self):
        v = krat_arith(1, K - 6, "div")
        assert v.evaluate(5) == -1
        with pytest.raises(PoleError):
            v.evaluate(6)

    def test_division_by_zero(self):
        with pytest.raises(ZeroDivisionError):
            krat_arith(K, K - K, "div")

    def test_unknown_op(self):
        with pytest.raises(ValueError):
            krat_arith(K, K, "pow")


@pytest.mark.parametrize("k0,c", [(6, 0), (8, -2), (4, 1)])
def test_central_charge_values(k0, c):
    assert krat_eval(C_GENERIC, k0) == c
    assert central_charge(k0) == c


def test_central_charge_symbolic_form():
    c = central_charge()
    assert c == (-F(3, 2) * K * K + 13 * K - 24) / K
    assert c.to_json() == {"num": ["-24", "13", "-3/2"], "den": ["0", "1"]}
    # invariant under k -> 16/k
    flipped = KappaRational.from_coeffs([F(-3, 2) * 256, 13 * 16, -24], [0, 16])
    assert flipped == c


def test_central_charge_at_zero():
    with pytest.raises(ZeroDivisionError):
        central_charge(0)


def test_eval_requires_positive_kappa():
    with pytest.raises(ValueError):
        krat_eval(K, -1)


@pytest.mark.parametrize("kappa,r,s,want", [
    (8, 1, 2, F(-1, 8)),
    (6, 2, 1, F(5, 8)),
    (K, 0, 1, (8 - K) / 16),
    (6, 1, 2, 0),
    (6, 1, 1, 0),
])
def test_kac_weights(kappa, r, s, want):
    assert weight_hrs(kappa, r, s) == as_krat(want)


def test_kac_weight_symmetries():
    for r in range(-4, 5):
        for s in range(-4, 5):
            h = weight_hrs(K, r, s)
            assert weight_hrs(K, -r, -s) == h
            assert h + r * s == weight_hrs(K, r, -s)


def test_rho_weight_roots_and_value():
    assert weight_hrho(K, 0) == ZERO
    assert weight_hrho(K, K - 4) == ZERO
    assert weight_hrho(6, -2) == as_krat(F(1, 3))


def test_canonical_form():
    v = KappaRational.from_coeffs([2, 2], [4, 4])
    assert v == as_krat(F(1, 2)) and v.is_constant
    w = KappaRational.from_coeffs([1], [0, 3])
    assert w.den_coeffs() == [0, 1]
    assert w.num_coeffs() == [F(1, 3)]


@given(kappa_rationals(), kappa_rationals(), kappa_rationals())
def test_field_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + b == b + a and a * b == b * a
    assert a - a == ZERO
    if a:
        assert a * (1 / a) == ONE
        assert (b / a) * a == b


@given(kappa_rationals(), kappa_rationals(), st.sampled_from(["add", "sub", "mul", "div"]))
def test_arithmetic_matches_sympy(a, b, op):
    if op == "div" and not b:
        return
    got = to_sympy(krat_arith(a, b, op))
    sa, sb = to_sympy(a), to_sympy(b)
    want = {"add": sa + sb, "sub": sa - sb, "mul": sa * sb, "div": sa / sb}[op]
    assert sp.simplify(got - want) == 0


@given(kappa_rationals())
def test_canonicalization_idempotent(a):
    again = KappaRational.from_coeffs(a.num_coeffs(), a.den_coeffs())
    assert again == a and hash(again) == hash(a)
    assert a.den_coeffs()[-1] == 1


@given(kappa_rationals(), kappa_rationals(), st.sampled_from([F(6), F(8), F(1, 3), F(7, 2)]))
def test_evaluation_is_a_homomorphism(a, b, k0):
    try:
        ea, eb = a.evaluate(k0), b.evaluate(k0)
    except PoleError:
        return
    assert (a * b).evaluate(k0) == ea * eb
    assert (a + b).evaluate(k0) == ea + eb
    assert ea == as_krat(F(str(to_sympy(a).subs(sk, sp.Rational(k0.numerator, k0.denominator)))))


@given(kappa_rationals())
def test_json_and_string_round_trip(a):
    from virmart.rhoparse import parse_rho
    assert KappaRational.from_json(a.to_json()) == a
    assert parse_rho(str(a)) == a
