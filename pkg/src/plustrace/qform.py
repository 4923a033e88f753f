"""Positive definite binary quadratic forms, CM points and genus characters."""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath

from .arith import as_fraction, is_discriminant, kronecker
from .errors import DomainError, InternalError

__all__ = [
    "QuadForm",
    "CMPoint",
    "reduce",
    "is_reduced",
    "reduced_forms",
    "class_number",
    "hurwitz_class_number",
    "omega",
    "genus_char",
    "cm_point",
    "forms_in_rectangle",
]


@dataclass(frozen=True, order=True)
class QuadForm:
    """The form a x^2 + b x y + c y^2, written [a, b, c]."""

    a: int
    b: int
    c: int

    def __post_init__(self):
        if self.a <= 0 or self.discriminant >= 0:
            raise DomainError(f"[{self.a}, {self.b}, {self.c}] is not positive definite")

    @property
    def discriminant(self):
        return self.b * self.b - 4 * self.a * self.c

    @property
    def content(self):
        return math.gcd(math.gcd(self.a, self.b), self.c)

    def __call__(self, x, y):
        return self.a * x * x + self.b * x * y + self.c * y * y

    def __iter__(self):
        yield from (self.a, self.b, self.c)

    def __repr__(self):
        return f"[{self.a},{self.b},{self.c}]"


def _check_disc(D):
    if D >= 0 or not is_discriminant(D):
        raise DomainError(f"{D} is not a negative discriminant")


def is_reduced(Q):
    a, b, c = Q
    if not (abs(b) <= a <= c):
        return False
    if (abs(b) == a or a == c) and b < 0:
        return False
    return True


def reduce(Q):
    """The unique reduced form equivalent to Q under SL2(Z)."""
    a, b, c = Q
    while True:
        # translate b into (-a, a]
        k = (a - b) // (2 * a)
        b, c = b + 2 * k * a, a * k * k + b * k + c
        if a > c or (a == c and b < 0):
            a, b, c = c, -b, a
        else:
            break
    return QuadForm(a, b, c)


@lru_cache(maxsize=4096)
def _reduced_forms(D):
    out = []
    a = 1
    while 3 * a * a <= -D:
        for b in range(-a + 1, a + 1):
            if (b * b - D) % (4 * a):
                continue
            c = (b * b - D) // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            out.append(QuadForm(a, b, c))
        a += 1
    return tuple(out)


def reduced_forms(D):
    """All reduced forms of discriminant D (primitive or not), ordered by (a, b)."""
    _check_disc(D)
    return list(_reduced_forms(D))


def class_number(D):
    """Number of reduced forms of discriminant D, imprimitive forms included."""
    return len(reduced_forms(D))


def hurwitz_class_number(D):
    """Sum of 1/omega_Q over the reduced forms of discriminant D."""
    return sum((Fraction(1, omega(Q)) for Q in reduced_forms(D)), Fraction(0))


def omega(Q):
    a, b, c = reduce(Q)
    if b == 0 and a == c:
        return 2
    if a == b == c:
        return 3
    return 1


def _spiral(bound):
    """Primitive vectors (x, y), one per +-pair, shell by shell in max(|x|, |y|)."""
    yield (0, 1)
    for r in range(1, bound + 1):
        ys = [0] + [s * k for k in range(1, r + 1) for s in (1, -1)]
        for y in ys:
            if math.gcd(r, y) == 1:
                yield (r, y)
        for x in range(r - 1, 0, -1):
            if math.gcd(x, r) == 1:
                yield (x, r)
                yield (x, -r)


def admissible_values(d, Q, count=None):
    """Values n = Q(x, y) with gcd(n, d) = 1, in the deterministic scan order."""
    found = []
    for x, y in _spiral(2 * abs(d) + 2):
        n = Q(x, y)
        if n != 0 and math.gcd(n, d) == 1:
            found.append(n)
            if count is not None and len(found) >= count:
                break
    return found


def genus_char(d, Q):
    """The genus character chi_d evaluated on Q."""
    a, b, c = Q
    if d == 1:
        return 1
    if math.gcd(math.gcd(math.gcd(a, b), c), d) > 1:
        return 0
    vals = admissible_values(d, Q, count=1)
    if not vals:
        raise InternalError(f"no value of {Q!r} coprime to {d} within the scan bound")
    return kronecker(d, vals[0])


@dataclass(frozen=True)
class CMPoint:
    """The root (-b + i sqrt(|D|)) / (2a) of Q(x, 1), kept exactly."""

    re: Fraction
    abs_disc: int
    a: int

    @property
    def im_squared(self):
        return Fraction(self.abs_disc, 4 * self.a * self.a)

    def im(self, prec=None):
        with mpmath.workprec(prec or mpmath.mp.prec):
            return mpmath.sqrt(self.abs_disc) / (2 * self.a)

    def to_mpc(self, prec=None):
        with mpmath.workprec(prec or mpmath.mp.prec):
            return mpmath.mpc(mpmath.mpf(self.re.numerator) / self.re.denominator, self.im())

    def __complex__(self):
        return complex(float(self.re), math.sqrt(self.abs_disc) / (2 * self.a))


def cm_point(Q):
    a, b, c = Q
    return CMPoint(Fraction(-b, 2 * a), -Q.discriminant, a)


def forms_in_rectangle(D, Y):
    """All forms of discriminant D whose CM point has -1/2 <= x < 1/2 and y > Y."""
    _check_disc(D)
    Y = as_fraction(Y)
    if Y <= 0:
        raise DomainError(f"Y must be positive, got {Y}")
    out = []
    a = 1
    # y = sqrt(|D|)/(2a) > Y  <=>  4 a^2 Y^2 < |D|
    while 4 * a * a * Y * Y < -D:
        for b in range(-a + 1, a + 1):
            if (b * b - D) % (4 * a) == 0:
                out.append(QuadForm(a, b, (b * b - D) // (4 * a)))
        a += 1
    return out
