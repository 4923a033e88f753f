"""Explicit error bounds for twisted traces and their numerical verification.

The main term is 24 delta_d sigma_1(m) H(D) with H(D) = sum_Q 1/omega_Q over the reduced
forms of discriminant D (the weighting the traces themselves use); delta_d = 1 for d = 1
and 0 otherwise. log is the natural logarithm throughout.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import mpmath
from mpmath import mpf

from .arith import FactoredDiscriminant, as_fraction, ell_constant, sigma1, tau, zeta_one_plus
from .errors import DomainError
from .modeval import PrecisionPolicy, rectangle_sum, trace
from .qform import hurwitz_class_number
from .report import BoundReport

__all__ = [
    "TheoremParams",
    "Recovery",
    "main_term",
    "theorem2_rhs",
    "theorem2_lhs",
    "check_theorem2",
    "theorem1_rhs",
    "theorem1_lhs",
    "check_theorem1",
    "corollary3_threshold",
    "nearest_integer_recovery",
    "recovery_ladder",
]


@dataclass(frozen=True)
class TheoremParams:
    m: int
    fd: FactoredDiscriminant
    Y: Fraction
    delta: Fraction

    def __post_init__(self):
        object.__setattr__(self, "Y", as_fraction(self.Y))
        object.__setattr__(self, "delta", as_fraction(self.delta))
        if self.m < 1:
            raise DomainError(f"m must be positive, got {self.m}")
        if self.Y <= 0:
            raise DomainError(f"Y must be positive, got {self.Y}")
        ell_constant(self.delta)

    @property
    def in_range(self):
        """Whether 0 < Y <= 1/(2 pi m), the range in which the bound is asserted."""
        return float(self.Y) <= 1 / (2 * math.pi * self.m)

    def as_dict(self):
        return {"m": self.m, "D": self.fd.D, "d": self.fd.d, "Y": self.Y, "delta": self.delta}


def main_term(m, fd):
    """24 delta_d sigma_1(m) H(D) as an exact rational."""
    if fd.d != 1:
        return Fraction(0)
    return 24 * sigma1(m) * hurwitz_class_number(fd.D)


def _common(fd, m, delta):
    D = abs(fd.D)
    dl = float(delta)
    return (
        D ** (13 / 12 + dl / 2)
        * tau(D)
        * tau(m)
        * zeta_one_plus(dl) ** 2
        * ell_constant(delta)
        * abs(math.log(dl))
    )


def theorem2_rhs(p, strict=True):
    """|D|^(13/12+d/2) m^(3/2) tau(D) tau(m) Y^(1/3-d) zeta(1+d)^2 ell(d) log(2|D|^(1/2)/Y) |log d| * C

    with C = 106954 for d < 0 and 24957 m for d > 0.
    """
    if strict and not p.in_range:
        raise DomainError(f"Y={p.Y} exceeds 1/(2 pi m) for m={p.m}")
    Y = float(p.Y)
    const = 106954 if p.fd.d < 0 else 24957 * p.m
    return (
        _common(p.fd, p.m, p.delta)
        * p.m**1.5
        * Y ** (1 / 3 - float(p.delta))
        * math.log(2 * math.sqrt(abs(p.fd.D)) / Y)
        * const
    )


class Lhs(NamedTuple):
    value: mpf
    err: mpf
    certified: bool


def _lhs(m, fd, Y, with_conjugate, policy):
    tr = trace(m, fd, policy)
    rect = rectangle_sum(m, fd, Y, with_conjugate)
    mt = main_term(m, fd)
    with mpmath.workprec(max(tr.prec, rect.prec) + 32):
        v = abs(tr.value + mpf(mt.numerator) / mt.denominator - rect.value)
        err = tr.err + rect.err + abs(v) * mpf(2) ** (2 - max(tr.prec, rect.prec))
    return Lhs(v, err, tr.certified)


def theorem2_lhs(p, policy=PrecisionPolicy()):
    """|Tr_d j_m(z_D) + 24 delta_d sigma_1(m) H(D) - sum_{R(Y)} chi_d(Q)(e(-m z_Q) - e(-m conj z_Q))|"""
    return _lhs(p.m, p.fd, p.Y, True, policy)


def check_theorem2(p, policy=PrecisionPolicy(), strict=True):
    rhs = theorem2_rhs(p, strict=strict)
    lhs = theorem2_lhs(p, policy)
    return BoundReport(
        "theorem2",
        p.as_dict(),
        lhs.value,
        rhs,
        err=lhs.err,
        notes={"trace_certified": lhs.certified, "in_range": p.in_range},
    )


def theorem1_rhs(m, fd, delta):
    """|D|^(13/12+d/2) m^(7/6+d) tau(D) tau(m) zeta(1+d)^2 ell(d) log(2 m |D|^(1/2)) |log d| * C

    with C = 8.5e6 for d < 0 and 2e6 m for d > 0.
    """
    delta = as_fraction(delta)
    const = 8.5e6 if fd.d < 0 else 2e6 * m
    return (
        _common(fd, m, delta)
        * m ** (7 / 6 + float(delta))
        * math.log(2 * m * math.sqrt(abs(fd.D)))
        * const
    )


def theorem1_lhs(m, fd, policy=PrecisionPolicy()):
    """|Tr_d j_m(z_D) + 24 delta_d sigma_1(m) H(D) - sum_{R(1/m)} chi_d(Q) e(-m z_Q)|"""
    return _lhs(m, fd, Fraction(1, m), False, policy)


def check_theorem1(m, fd, delta, policy=PrecisionPolicy()):
    delta = as_fraction(delta)
    rhs = theorem1_rhs(m, fd, delta)
    lhs = theorem1_lhs(m, fd, policy)
    return BoundReport(
        "theorem1",
        {"m": m, "D": fd.D, "d": fd.d, "Y": Fraction(1, m), "delta": delta},
        lhs.value,
        rhs,
        err=lhs.err,
        notes={"trace_certified": lhs.certified},
    )


def corollary3_threshold(m, fd):
    """10^-100 |D|^-11 m^-13 (d < 0) or m^-21 (d > 0), as an mpf.

    Rectangles this thin contain on the order of 10^100 forms, so the value is only
    reported, never used to enumerate.
    """
    e = 13 if fd.d < 0 else 21
    with mpmath.workprec(64):
        return mpf(10) ** -100 * mpf(abs(fd.D)) ** -11 * mpf(m) ** -e


class Recovery(NamedTuple):
    candidate: int
    matches: bool
    trace: int
    approximation: mpf
    Y: Fraction


def nearest_integer_recovery(m, fd, Y, policy=PrecisionPolicy()):
    """Round -24 delta_d sigma_1(m) H(D) + (rectangle sum with conjugates) and compare with the trace."""
    Y = as_fraction(Y)
    rect = rectangle_sum(m, fd, Y, True)
    mt = main_term(m, fd)
    with mpmath.workprec(rect.prec + 16):
        approx = rect.value - mpf(mt.numerator) / mt.denominator
        cand = int(mpmath.nint(approx))
    tr = trace(m, fd, policy)
    return Recovery(cand, tr.certified and cand == tr.rounded, tr.rounded, approx, Y)


def recovery_ladder(m, fd, Ys, policy=PrecisionPolicy()):
    """Try each Y, largest first. Returns (smallest Y that recovers the trace or None, attempts)."""
    attempts = [nearest_integer_recovery(m, fd, Y, policy) for Y in sorted(map(as_fraction, Ys), reverse=True)]
    ok = [r.Y for r in attempts if r.matches]
    return (min(ok) if ok else None), attempts
