"""Number-theoretic primitives used by the exponential-sum and trace code."""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError, UnsupportedParameterError

__all__ = [
    "Discriminant",
    "FactoredDiscriminant",
    "DeltaTable",
    "kronecker",
    "epsilon",
    "mod_inverse",
    "factorize",
    "divisors",
    "tau",
    "sigma1",
    "tau_table",
    "ell_constant",
    "zeta_one_plus",
    "delta_table",
    "as_fraction",
    "is_discriminant",
    "is_fundamental",
    "is_squarefree",
    "factorizations",
]


def kronecker(a, n):
    """Extended Kronecker symbol (a/n) for arbitrary integers a, n."""
    a, n = int(a), int(n)
    if n == 0:
        return 1 if abs(a) == 1 else 0
    result = 1
    if n < 0:
        n = -n
        if a < 0:
            result = -result
    v = (n & -n).bit_length() - 1
    if v:
        if a % 2 == 0:
            return 0
        n >>= v
        if v % 2 and a % 8 in (3, 5):
            result = -result
    # Jacobi symbol (a/n), n odd positive
    a %= n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def epsilon(d):
    """1 if d = 1 mod 4, i if d = 3 mod 4."""
    d = int(d)
    if d % 2 == 0:
        raise DomainError(f"epsilon is defined for odd d only, got {d}")
    return 1 + 0j if d % 4 == 1 else 1j


def mod_inverse(d, c):
    if c <= 0:
        raise DomainError(f"modulus must be positive, got {c}")
    if math.gcd(d, c) != 1:
        raise DomainError(f"{d} is not invertible modulo {c}")
    return pow(d, -1, c) if c > 1 else 0


def factorize(n):
    """Prime factorization of |n| by trial division, as {p: e}."""
    n = abs(int(n))
    if n == 0:
        raise DomainError("cannot factor 0")
    out = {}
    for p in (2, 3):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    p, step = 5, 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += step
        step = 6 - step
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def divisors(n):
    """Sorted positive divisors of |n|."""
    ds = [1]
    for p, e in factorize(n).items():
        ds = [d * p**k for d in ds for k in range(e + 1)]
    return sorted(ds)


def tau(n):
    """Number of positive divisors of |n|."""
    if n == 0:
        raise DomainError("tau(0) is undefined")
    return math.prod(e + 1 for e in factorize(n).values())


def sigma1(m):
    if m <= 0:
        raise DomainError(f"sigma1 needs a positive integer, got {m}")
    return math.prod((p ** (e + 1) - 1) // (p - 1) for p, e in factorize(m).items())


def tau_table(N):
    """Array t with t[c] = tau(c) for 1 <= c <= N (t[0] = 0)."""
    t = np.zeros(N + 1, dtype=np.int64)
    for i in range(1, N + 1):
        t[i::i] += 1
    return t


# Published divisor-bound constants: tau(c) <= ell(delta) * c**delta for all c >= 1.
_ELL = {Fraction(1, 4): 8.447, Fraction(1, 5): 28.117}


def as_fraction(x, max_den=10**6):
    """Parse '1/4', 0.25, Fraction(1, 4), ... into an exact Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x).limit_denominator(max_den)


def ell_constant(delta):
    delta = as_fraction(delta)
    try:
        return _ELL[delta]
    except KeyError:
        raise UnsupportedParameterError(
            f"divisor-bound constant only tabulated for delta in {{1/4, 1/5}}, got {delta}"
        ) from None


# B_2, B_4, ..., B_20
_BERNOULLI = [
    Fraction(1, 6), Fraction(-1, 30), Fraction(1, 42), Fraction(-1, 30), Fraction(5, 66),
    Fraction(-691, 2730), Fraction(7, 6), Fraction(-3617, 510), Fraction(43867, 798),
    Fraction(-174611, 330),
]


def _zeta_em(s, N=12, K=8):
    """Euler-Maclaurin value of zeta(s) for real s > 1, with a remainder bound."""
    head = math.fsum(n ** -s for n in range(1, N))
    tail = [N ** (1 - s) / (s - 1), 0.5 * N ** -s]
    rising = s  # s (s+1) ... (s+2k-2)
    terms = []
    for k in range(1, K + 2):
        b = float(_BERNOULLI[k - 1]) / math.factorial(2 * k)
        terms.append(b * rising * N ** (-s - 2 * k + 1))
        rising *= (s + 2 * k - 1) * (s + 2 * k)
    # for real s > 1 the remainder is bounded by the first omitted term
    return head + math.fsum(tail + terms[:K]), abs(terms[K])


def zeta_one_plus(delta):
    """zeta(1 + delta) to absolute error <= 1e-12."""
    delta = float(as_fraction(delta)) if not isinstance(delta, float) else delta
    if delta <= 0:
        raise DomainError(f"zeta(1+delta) needs delta > 0, got {delta}")
    value, rem = _zeta_em(1.0 + delta)
    assert rem < 1e-13
    return value


@dataclass(frozen=True)
class DeltaTable:
    delta: Fraction
    ell: float
    zeta_val: float


def delta_table(delta):
    delta = as_fraction(delta)
    return DeltaTable(delta, ell_constant(delta), zeta_one_plus(float(delta)))


def is_discriminant(D):
    return D % 4 in (0, 1)


def is_squarefree(n):
    n = abs(n)
    if n == 0:
        return False
    return all(e == 1 for e in factorize(n).values())


def is_fundamental(D):
    if D == 1:
        return True
    if D == 0:
        return False
    if D % 4 == 1:
        return is_squarefree(D)
    if D % 4 == 0:
        return (D // 4) % 4 in (2, 3) and is_squarefree(D // 4)
    return False


@dataclass(frozen=True)
class Discriminant:
    value: int

    def __post_init__(self):
        if self.value == 0 or not is_discriminant(self.value):
            raise DomainError(f"{self.value} is not a discriminant")

    @property
    def is_fundamental(self):
        return is_fundamental(self.value)


@dataclass(frozen=True)
class FactoredDiscriminant:
    """A negative discriminant D = d * d_prime with d fundamental."""

    D: int
    d: int
    d_prime: int

    def __post_init__(self):
        if self.D >= 0 or not is_discriminant(self.D):
            raise DomainError(f"D={self.D} is not a negative discriminant")
        if self.d * self.d_prime != self.D:
            raise DomainError(f"{self.d} * {self.d_prime} != {self.D}")
        if not is_fundamental(self.d):
            raise DomainError(f"d={self.d} is not fundamental")
        if not is_discriminant(self.d_prime):
            raise DomainError(f"d'={self.d_prime} is not a discriminant")

    @classmethod
    def of(cls, D, d):
        if d == 0 or D % d:
            raise DomainError(f"{d} does not divide {D}")
        return cls(D, d, D // d)


def factorizations(D):
    """All factorizations D = d d' with d fundamental (d = 1 included), by |d| ascending."""
    if D >= 0 or not is_discriminant(D):
        raise DomainError(f"{D} is not a negative discriminant")
    out = []
    for g in divisors(D):
        for d in (g, -g):
            dp, r = divmod(D, d)
            if r == 0 and is_fundamental(d) and is_discriminant(dp):
                out.append(FactoredDiscriminant(D, d, dp))
    out.sort(key=lambda f: (abs(f.d), f.d < 0))
    return out
