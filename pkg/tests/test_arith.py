import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from plustrace.arith import (
    Discriminant,
    FactoredDiscriminant,
    as_fraction,
    delta_table,
    divisors,
    ell_constant,
    epsilon,
    factorizations,
    is_fundamental,
    kronecker,
    mod_inverse,
    sigma1,
    tau,
    tau_table,
    zeta_one_plus,
)
from plustrace.errors import DomainError, UnsupportedParameterError

import oracles


@pytest.mark.parametrize("a,n,want", [(4, 3, 1), (7, 1, 1), (-3, 5, -1), (1, 0, 1), (-1, 0, 1), (2, 0, 0)])
def test_kronecker_examples(a, n, want):
    assert kronecker(a, n) == want


def test_kronecker_matches_euler_criterion():
    for a in range(-60, 61):
        for n in range(-60, 61):
            assert kronecker(a, n) == oracles.kronecker(a, n), (a, n)


def test_kronecker_negative_one_extension():
    for a in range(-20, 21):
        assert kronecker(a, -1) == (1 if a >= 0 else -1)


def test_kronecker_multiplicative_in_n():
    for a in range(-200, 201, 7):
        for n1 in range(-30, 31):
            for n2 in range(-30, 31):
                assert kronecker(a, n1 * n2) == kronecker(a, n1) * kronecker(a, n2)


@given(st.integers(-10**6, 10**6), st.integers(-10**6, 10**6))
def test_kronecker_random_against_oracle(a, n):
    assert kronecker(a, n) == oracles.kronecker(a, n)


def test_epsilon():
    assert epsilon(1) == 1 and epsilon(3) == 1j and epsilon(5) == 1
    for d in range(-51, 52, 2):
        assert epsilon(d) ** 2 == kronecker(-1, d)
    with pytest.raises(DomainError):
        epsilon(4)


def test_mod_inverse():
    assert mod_inverse(3, 4) == 3
    assert mod_inverse(7, 12) == 7
    for c in range(1, 60):
        assert mod_inverse(1, c) == 1 % c
        for d in range(-30, 30):
            if math.gcd(d, c) == 1:
                x = mod_inverse(d, c)
                assert 0 <= x < c and (d * x) % c == 1 % c
    with pytest.raises(DomainError):
        mod_inverse(2, 4)


def test_tau_sigma():
    assert tau(12) == 6 and tau(-3) == 2 and sigma1(6) == 12
    t = tau_table(2000)
    for n in range(1, 2001):
        ds = [d for d in range(1, n + 1) if n % d == 0]
        assert tau(n) == len(ds) == t[n]
        assert sigma1(n) == sum(ds)
        assert divisors(n) == ds
    with pytest.raises(DomainError):
        tau(0)


def test_ell_constant():
    assert ell_constant(Fraction(1, 4)) == 8.447
    assert ell_constant("1/5") == 28.117
    assert ell_constant(0.25) == 8.447
    with pytest.raises(UnsupportedParameterError):
        ell_constant(Fraction(1, 3))


def test_zeta_against_mpmath():
    for delta in (Fraction(1, 4), Fraction(1, 5), Fraction(1, 10), Fraction(1, 50), Fraction(1, 7)):
        assert abs(zeta_one_plus(delta) - oracles.zeta(1 + float(delta))) <= 1e-12
    assert abs(zeta_one_plus(Fraction(1, 4)) - 4.59511) < 1e-5
    assert abs(zeta_one_plus(Fraction(1, 5)) - 5.59158) < 1e-5
    assert zeta_one_plus(Fraction(1, 5)) > zeta_one_plus(Fraction(1, 4))
    with pytest.raises(DomainError):
        zeta_one_plus(0)


def test_delta_table():
    t = delta_table("1/4")
    assert t.ell == 8.447 and t.zeta_val > 1


def test_as_fraction():
    assert as_fraction("1/4") == Fraction(1, 4)
    assert as_fraction(0.05) == Fraction(1, 20)
    assert as_fraction(3) == 3


def test_fundamental():
    assert [d for d in range(-30, 30) if is_fundamental(d)] == [
        -24, -23, -20, -19, -15, -11, -8, -7, -4, -3, 1, 5, 8, 12, 13, 17, 21, 24, 28, 29,
    ]
    assert Discriminant(-12).is_fundamental is False
    with pytest.raises(DomainError):
        Discriminant(-5)


def _fact_oracle(D):
    out = []
    for d in range(-abs(D), abs(D) + 1):
        if d and D % d == 0 and is_fundamental(d) and (D // d) % 4 in (0, 1):
            out.append((d, D // d))
    return sorted(out, key=lambda p: (abs(p[0]), p[0] < 0))


def test_factorizations():
    pairs = lambda D: [(f.d, f.d_prime) for f in factorizations(D)]
    assert pairs(-3) == [(1, -3), (-3, 1)]
    assert pairs(-12) == [(1, -12), (-3, 4)]
    assert pairs(-4) == [(1, -4), (-4, 1)]
    for D in range(-3, -401, -1):
        if D % 4 in (0, 1):
            assert pairs(D) == _fact_oracle(D)
            for f in factorizations(D):
                assert (f.d < 0) != (f.d_prime < 0)
    with pytest.raises(DomainError):
        factorizations(-5)


def test_factored_discriminant_validation():
    with pytest.raises(DomainError):
        FactoredDiscriminant.of(-12, -4)
    with pytest.raises(DomainError):
        FactoredDiscriminant(-12, 2, -6)
