"""Arbitrary-precision evaluation of j, j_m, twisted traces and rectangle sums.

Values are mpmath numbers carried together with an absolute error radius; every
operation adds a rounding radius of 2^(2 - prec) relative to its result.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple

import mpmath
from mpmath import mpf, mpc

from .arith import FactoredDiscriminant, as_fraction
from .errors import DomainError, InternalError
from .qform import CMPoint, cm_point, forms_in_rectangle, genus_char, omega, reduced_forms

__all__ = [
    "BigComplex",
    "QExpansion",
    "TraceReport",
    "PrecisionPolicy",
    "RectangleSum",
    "j_qexp",
    "faber_poly",
    "eval_j",
    "eval_jm",
    "trace",
    "rectangle_sum",
]

_SAFETY = mpf(1) + mpf(2) ** -40
_SQRT3_2 = math.sqrt(3) / 2


def _radius(x):
    """Round a nonnegative error radius up, at 53 bits."""
    with mpmath.workprec(53):
        return mpf(x) * _SAFETY


def _ulp(prec):
    return mpf(2) ** (2 - prec)


@dataclass(frozen=True)
class BigComplex:
    """re + i im at `prec` bits with absolute error radius `err`."""

    re: mpf
    im: mpf
    prec: int
    err: mpf = mpf(0)

    @classmethod
    def from_mpc(cls, z, prec, err=0):
        z = mpc(z)
        return cls(z.real, z.imag, prec, _radius(err))

    @classmethod
    def zero(cls, prec):
        return cls(mpf(0), mpf(0), prec)

    def to_mpc(self):
        return mpc(self.re, self.im)

    def abs_upper(self):
        with mpmath.workprec(64):
            return _radius(abs(mpc(self.re, self.im)) + self.err)

    def _wrap(self, z, err, prec):
        with mpmath.workprec(64):
            rnd = abs(z) * _ulp(prec)
        return BigComplex(z.real, z.imag, prec, _radius(err + rnd))

    def __add__(self, other):
        prec = min(self.prec, other.prec)
        with mpmath.workprec(prec):
            z = self.to_mpc() + other.to_mpc()
        return self._wrap(z, self.err + other.err, prec)

    def __neg__(self):
        return BigComplex(-self.re, -self.im, self.prec, self.err)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        prec = min(self.prec, other.prec)
        with mpmath.workprec(prec):
            z = self.to_mpc() * other.to_mpc()
        with mpmath.workprec(64):
            a, b = abs(self.to_mpc()), abs(other.to_mpc())
            err = a * other.err + b * self.err + self.err * other.err
        return self._wrap(z, err, prec)

    def scale(self, q):
        q = Fraction(q)
        with mpmath.workprec(self.prec):
            z = self.to_mpc() * q.numerator / q.denominator
        with mpmath.workprec(64):
            err = self.err * abs(q.numerator) / q.denominator
        return self._wrap(z, err, self.prec)


# ---------------------------------------------------------------------------
# q-expansion of j and Faber polynomials


@dataclass(frozen=True)
class QExpansion:
    """Integer coefficients c(-1), c(0), ..., c(N) of j."""

    coeffs: tuple
    N: int

    def __getitem__(self, n):
        if not -1 <= n <= self.N:
            raise IndexError(n)
        return self.coeffs[n + 1]


def _mul_trunc(a, b, L):
    out = [0] * L
    for i, x in enumerate(a[:L]):
        if x:
            for j, y in enumerate(b[: L - i]):
                out[i + j] += x * y
    return out


_J_CACHE = [1]  # c(-1), c(0), ... computed so far


def j_qexp(N):
    """Exact coefficients of j through q^N, from q^{-1} prod (1-q^n)^{-24} E_4^3."""
    if N < 0:
        raise DomainError(f"N must be nonnegative, got {N}")
    if len(_J_CACHE) < N + 2:
        L = max(N + 2, 2 * len(_J_CACHE))  # degrees 0..L-1 of E4^3 prod, i.e. c(-1)..c(L-2)
        e4 = [1] + [240 * sum(d**3 for d in range(1, n + 1) if n % d == 0) for n in range(1, L)]
        # prod 1/(1-q^n) by geometric expansion of each factor, then the 24th power
        p = [1] + [0] * (L - 1)
        for n in range(1, L):
            for i in range(n, L):
                p[i] += p[i - n]
        p2 = _mul_trunc(p, p, L)
        p4 = _mul_trunc(p2, p2, L)
        p8 = _mul_trunc(p4, p4, L)
        p16 = _mul_trunc(p8, p8, L)
        p24 = _mul_trunc(p16, p8, L)
        e43 = _mul_trunc(_mul_trunc(e4, e4, L), e4, L)
        _J_CACHE[:] = _mul_trunc(e43, p24, L)
    return QExpansion(tuple(_J_CACHE[: N + 2]), N)


@lru_cache(maxsize=None)
def faber_poly(m):
    """Coefficients (a_0, ..., a_m) of the monic P_m with P_m(j) = q^{-m} + O(q)."""
    if m < 1:
        raise DomainError(f"m must be positive, got {m}")
    J = j_qexp(m + 1)
    # q-expansions of j^k as {exponent: coeff}; j^k is exact through q^(m-k+1)
    base = {n: J[n] for n in range(-1, m + 2)}
    pows = [{0: 1}]
    for _ in range(m):
        prev, cur = pows[-1], {}
        for e1, x in prev.items():
            for e2, y in base.items():
                if e1 + e2 <= m:
                    cur[e1 + e2] = cur.get(e1 + e2, 0) + x * y
        pows.append(cur)
    # the lowest exponent of j^k is -k, so elimination is triangular
    coeffs = [0] * (m + 1)
    coeffs[m] = 1
    series = dict(pows[m])
    for e in range(-m + 1, 1):
        k = -e
        t = series.get(e, 0)
        if t:
            coeffs[k] -= t
            for ee, v in pows[k].items():
                series[ee] = series.get(ee, 0) - t * v
    assert all(series.get(e, 0) == 0 for e in range(-m + 1, 1))
    return tuple(coeffs)


# ---------------------------------------------------------------------------
# evaluation of j and j_m


def _log_tail(N, y):
    """log of an upper bound for sum_{n>N} e^{4 pi sqrt n - 2 pi y n}, or +inf."""
    n1 = N + 1
    ratio = 2 * math.pi / math.sqrt(n1) - 2 * math.pi * y
    if ratio >= 0:
        return math.inf
    # sqrt(n1 + k) <= sqrt(n1) + k / (2 sqrt(n1)) gives a geometric majorant
    return 4 * math.pi * math.sqrt(n1) - 2 * math.pi * y * n1 - math.log1p(-math.exp(ratio))


def _as_point(z, prec):
    """(z as mpc at prec, its absolute error, y as float)."""
    if isinstance(z, CMPoint):
        if z.abs_disc < 3 * z.a * z.a:
            raise DomainError("CM point lies below Im z = sqrt(3)/2")
        with mpmath.workprec(prec + 10):
            v = z.to_mpc()
        return v, mpf(2) ** (2 - prec) * (1 + abs(v)), float(mpmath.im(v))
    if isinstance(z, BigComplex):
        v, e = z.to_mpc(), z.err
    else:
        v, e = mpc(z), mpf(0)
    y = float(v.imag)
    if y < _SQRT3_2 * (1 - 1e-12):
        raise DomainError(f"Im z = {y} is below sqrt(3)/2")
    return v, e, y


def eval_j(z, target_err, prec=None):
    """j(z) for Im z >= sqrt(3)/2 as a BigComplex whose err covers truncation and rounding.

    The q-series is cut where the tail, estimated with |c(n)| <= e^{4 pi sqrt n}, drops
    below target_err/2. Without `prec` the working precision is chosen so the total
    error stays below target_err.
    """
    with mpmath.workprec(64):
        log_target = float(mpmath.log(mpf(target_err)))
    _, _, y = _as_point(z, 64)
    N = 1
    while _log_tail(N, y) > log_target - math.log(2):
        N += 1
    log_tail = _log_tail(N, y)
    # |c(n)| e^{-2 pi y n} summed, and with a factor |n|, bound magnitudes
    log_s = max(2 * math.pi * y, math.log(744.0)) + math.log(N + 2)
    if prec is None:
        prec = max(64, int((log_s - log_target) / math.log(2)) + int(math.log2(N + 4)) + 16)
    zz, ez, _ = _as_point(z, prec)
    J = j_qexp(N)
    with mpmath.workprec(prec + 16):
        q = mpmath.expjpi(2 * zz)
        acc = mpc(0)
        for n in range(N, -1, -1):
            acc = acc * q + J[n]
        val = acc + 1 / q
    with mpmath.workprec(64):
        aq = abs(q)
        s_abs = 1 / aq + sum(J[n] * aq**n for n in range(0, N + 1))
        s_der = 1 / aq + sum(n * J[n] * aq**n for n in range(1, N + 1))
        rel_q = (2 * math.pi * abs(zz) + 4) * mpf(2) ** (1 - prec) + 2 * mpmath.pi * ez
        err = (
            mpmath.exp(log_tail)
            + (2 * N + 6) * _ulp(prec) * s_abs
            + 1.01 * rel_q * s_der
        )
    return BigComplex(val.real, val.imag, prec, _radius(err))


def eval_jm(m, z, target_err, prec=None):
    """j_m(z) = P_m(j(z)) with the error of j propagated through the polynomial."""
    coeffs = faber_poly(m)
    if m == 1 and prec is None:
        jv = eval_j(z, target_err / 2)
    else:
        rough = eval_j(z, 1.0, prec=64).abs_upper() + 1
        with mpmath.workprec(64):
            dp = sum(i * abs(a) * rough ** (i - 1) for i, a in enumerate(coeffs) if i)
        jv = eval_j(z, target_err / (2 * dp), prec)
    prec = jv.prec
    with mpmath.workprec(prec + 16):
        x = jv.to_mpc()
        acc = mpc(0)
        for a in reversed(coeffs):
            acc = acc * x + a
    with mpmath.workprec(64):
        r = abs(x) + jv.err
        prop = jv.err * sum(i * abs(a) * r ** (i - 1) for i, a in enumerate(coeffs) if i)
        horner = (2 * m + 2) * _ulp(prec) * sum(abs(a) * r**i for i, a in enumerate(coeffs))
    return BigComplex(acc.real, acc.imag, prec, _radius(prop + horner))


# ---------------------------------------------------------------------------
# twisted traces


@dataclass(frozen=True)
class PrecisionPolicy:
    start_bits: int = 128
    max_bits: int = 4096

    def ladder(self):
        p = self.start_bits
        while True:
            yield min(p, self.max_bits)
            if p >= self.max_bits:
                return
            p *= 2


@dataclass(frozen=True)
class TraceReport:
    m: int
    D: int
    d: int
    value: mpf
    err: mpf
    rounded: int
    certified: bool
    prec: int
    imag: mpf = mpf(0)

    @property
    def distance(self):
        return abs(self.value - self.rounded)

    def to_dict(self):
        return {
            "m": self.m,
            "D": self.D,
            "d": self.d,
            "value": mpmath.nstr(self.value, 30, min_fixed=-math.inf, max_fixed=math.inf),
            "err": float(self.err),
            "rounded": self.rounded,
            "certified": self.certified,
            "precision_bits": self.prec,
        }


_RESOLVED = mpf(2) ** -64


@lru_cache(maxsize=4096)
def _trace(m, fd, policy):
    forms = [(Q, genus_char(fd.d, Q)) for Q in reduced_forms(fd.D)]
    for prec in policy.ladder():
        total = BigComplex.zero(prec)
        for Q, chi in forms:
            if chi == 0:
                continue
            v = eval_jm(m, cm_point(Q), mpf(2) ** (-(prec // 2)), prec)
            total = total + v.scale(Fraction(chi, omega(Q)))
        with mpmath.workprec(prec):
            rounded = int(mpmath.nint(total.re))
            dist = abs(total.re - rounded)
        if abs(total.im) > total.err:
            raise InternalError(f"trace has imaginary part {total.im} > err {total.err}")
        certified = bool(dist + total.err < mpf(1) / 4)
        # stop once the value is pinned down to _RESOLVED, integral or not
        if total.err < _RESOLVED or prec >= policy.max_bits:
            return TraceReport(m, fd.D, fd.d, total.re, total.err, rounded, certified, prec, total.im)
    raise AssertionError("unreachable")


def trace(m, fd, precision_policy=PrecisionPolicy()):
    """Tr_d j_m(z_D) = sum over reduced Q of chi_d(Q) j_m(z_Q) / omega_Q, rounded with a certificate."""
    if m < 1:
        raise DomainError(f"m must be positive, got {m}")
    if not isinstance(fd, FactoredDiscriminant):
        fd = FactoredDiscriminant.of(*fd)
    return _trace(m, fd, precision_policy)


# ---------------------------------------------------------------------------
# rectangle sums


class RectangleSum(NamedTuple):
    value: mpf
    err: mpf
    imag: mpf
    count: int
    prec: int


def rectangle_precision(m, D):
    return 64 + math.ceil(1.5 * math.pi * m * math.sqrt(-D) / math.log(2))


def _paired(forms):
    """Order forms so that [a, b, c] and [a, -b, c] are adjacent."""
    by_key = {(Q.a, Q.b): Q for Q in forms}
    out = []
    for Q in forms:
        if Q.b < 0 and (Q.a, -Q.b) in by_key:
            continue
        out.append(Q)
        if Q.b > 0 and (Q.a, -Q.b) in by_key:
            out.append(by_key[(Q.a, -Q.b)])
    return out


@lru_cache(maxsize=4096)
def _rectangle_sum(m, fd, Y, with_conjugate):
    forms = forms_in_rectangle(fd.D, Y)
    prec = rectangle_precision(m, fd.D)
    r = -fd.D
    total = mpc(0)
    mag = mpf(0)
    n = 0
    with mpmath.workprec(prec):
        sq = mpmath.sqrt(r)
        for Q in _paired(forms):
            chi = genus_char(fd.d, Q)
            if chi == 0:
                continue
            # e(-m z) = e^{pi i m b / a} e^{pi m sqrt|D| / a}
            phase = mpmath.expjpi(mpf(m * Q.b) / Q.a)
            grow = mpmath.exp(mpmath.pi * m * sq / Q.a)
            term = grow
            if with_conjugate:
                term = grow - 1 / grow
            total += chi * phase * term
            mag += abs(term)
            n += 1
    with mpmath.workprec(64):
        per_term = (math.pi * m * math.sqrt(r) + 8) * _ulp(prec)
        err = _radius(mag * per_term + (n + 2) * _ulp(prec) * mag)
    return RectangleSum(total.real, err, total.imag, n, prec)


def rectangle_sum(m, fd, Y, with_conjugate):
    """sum_{z_Q in R(Y)} chi_d(Q) (e(-m z_Q) [- e(-m conj z_Q)]), real part with error."""
    if m < 1:
        raise DomainError(f"m must be positive, got {m}")
    Y = as_fraction(Y)
    if Y <= 0:
        raise DomainError(f"Y must be positive, got {Y}")
    out = _rectangle_sum(m, fd, Y, bool(with_conjugate))
    if abs(out.imag) > out.err:
        raise InternalError(f"rectangle sum has imaginary part {out.imag} > err {out.err}")
    return out
