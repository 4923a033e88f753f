import math
from fractions import Fraction

import mpmath
import pytest

from plustrace.arith import FactoredDiscriminant
from plustrace.bounds import (
    TheoremParams,
    check_theorem1,
    check_theorem2,
    corollary3_threshold,
    main_term,
    nearest_integer_recovery,
    recovery_ladder,
    theorem1_rhs,
    theorem2_lhs,
    theorem2_rhs,
)
from plustrace.errors import DomainError, UnsupportedParameterError
from plustrace.modeval import rectangle_sum

FD = FactoredDiscriminant.of
Z14 = 4.595111825842944


def test_theorem2_rhs_formula():
    p = TheoremParams(1, FD(-3, 1), Fraction(1, 10), Fraction(1, 4))
    want = (
        # |D|^(13/12 + delta/2) m^(3/2) tau(D) tau(m) with |D| = 3, m = 1
        3 ** (13 / 12 + 1 / 8) * 1 * 2 * 1 * 0.1 ** (1 / 12) * Z14**2 * 8.447
        * math.log(2 * math.sqrt(3) / 0.1) * math.log(4) * 24957
    )
    assert theorem2_rhs(p) == pytest.approx(want, rel=1e-12)


def test_theorem2_rhs_sign_split():
    a = theorem2_rhs(TheoremParams(1, FD(-3, -3), Fraction(1, 10), Fraction(1, 4)))
    b = theorem2_rhs(TheoremParams(1, FD(-3, 1), Fraction(1, 10), Fraction(1, 4)))
    assert a / b == pytest.approx(106954 / 24957)
    c = theorem2_rhs(TheoremParams(2, FD(-3, 1), Fraction(1, 20), Fraction(1, 4)))
    d = theorem2_rhs(TheoremParams(2, FD(-3, -3), Fraction(1, 20), Fraction(1, 4)))
    assert c / d == pytest.approx(2 * 24957 / 106954)


def test_theorem2_rhs_domain():
    with pytest.raises(DomainError):
        theorem2_rhs(TheoremParams(2, FD(-3, 1), Fraction(1, 10), Fraction(1, 4)))
    assert theorem2_rhs(TheoremParams(2, FD(-3, 1), Fraction(1, 10), Fraction(1, 4)), strict=False) > 0
    with pytest.raises(UnsupportedParameterError):
        TheoremParams(1, FD(-3, 1), Fraction(1, 10), Fraction(1, 3))
    with pytest.raises(DomainError):
        TheoremParams(1, FD(-3, 1), 0, Fraction(1, 4))


def test_theorem2_lhs_composition():
    p = TheoremParams(1, FD(-3, 1), Fraction(3, 20), Fraction(1, 4))
    lhs = theorem2_lhs(p)
    rect = rectangle_sum(1, p.fd, p.Y, True).value
    with mpmath.workprec(200):
        assert abs(lhs.value - abs(-248 + 8 - rect)) <= lhs.err
    assert lhs.certified


def test_main_term():
    assert main_term(1, FD(-3, 1)) == 8
    assert main_term(2, FD(-4, 1)) == 36
    assert main_term(1, FD(-23, 1)) == 72
    assert main_term(1, FD(-3, -3)) == 0


def test_empty_rectangle_lhs():
    p = TheoremParams(1, FD(-7, 1), Fraction(2), Fraction(1, 4))
    lhs = theorem2_lhs(p)
    assert abs(lhs.value - abs(-4119 + 24)) <= lhs.err
    p = TheoremParams(1, FD(-20, -4), Fraction(3), Fraction(1, 4))
    assert theorem2_lhs(p).value > 0  # no main term for d != 1


def test_check_theorem2_report():
    r = check_theorem2(TheoremParams(1, FD(-23, 1), Fraction(1, 10), Fraction(1, 5)))
    assert r.passed and r.margin > 0
    d = r.to_dict()
    assert d["pass"] and d["params"]["Y"] == "1/10" and d["notes"]["trace_certified"]


def test_check_theorem1():
    r = check_theorem1(1, FD(-3, 1), Fraction(1, 4))
    assert r.passed and r.margin > 1e3
    assert r.rhs > 1e6
    want = (
        3 ** (13 / 12 + 1 / 8) * 2 * Z14**2 * 8.447 * math.log(2 * math.sqrt(3)) * math.log(4) * 2e6
    )
    assert theorem1_rhs(1, FD(-3, 1), Fraction(1, 4)) == pytest.approx(want, rel=1e-12)
    assert theorem1_rhs(1, FD(-3, -3), Fraction(1, 4)) / want == pytest.approx(8.5 / 2)


def test_corollary_threshold():
    t = corollary3_threshold(1, FD(-3, -3))
    assert isinstance(t, mpmath.mpf)
    assert abs(t / (mpmath.mpf(10) ** -100 * mpmath.mpf(3) ** -11) - 1) < 1e-15
    t = corollary3_threshold(2, FD(-20, 5))
    assert abs(t / (mpmath.mpf(10) ** -100 * mpmath.mpf(20) ** -11 * mpmath.mpf(2) ** -21) - 1) < 1e-15


def test_recovery_empty_rectangle():
    r = nearest_integer_recovery(1, FD(-3, 1), 2)
    assert r.candidate == -8 and not r.matches


def test_recovery_ladder_reports_smallest_success():
    # for D = -3 the residual shrinks with Y; the ladder finds where rounding starts to work
    best, attempts = recovery_ladder(1, FD(-3, 1), [Fraction(1, 20), Fraction(1, 200), Fraction(1, 2000)])
    assert [a.Y for a in attempts] == [Fraction(1, 20), Fraction(1, 200), Fraction(1, 2000)]
    ok = [a.Y for a in attempts if a.matches]
    assert best == (min(ok) if ok else None)
