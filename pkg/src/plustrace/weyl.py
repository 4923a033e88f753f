"""Quadratic Weyl sums T_m(d, d'; c), computed directly and through Kohnen's identity.

    T_m(d, d'; c) = sum_{b mod c, b^2 = D (c)} chi_d([c/4, b, (b^2 - D)/c]) e(2 m b / c)
                  = sum_{n | (m, c/4)} (d/n) sqrt(2n/c) S_{1/2}^+(d', m^2 d / n^2, c/n)
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from . import _kernel
from .arith import FactoredDiscriminant, divisors, kronecker
from .errors import DomainError
from .kloosterman import HALF, _roots, s_plus
from .qform import QuadForm, genus_char
from .report import BoundReport

__all__ = [
    "WeylSumValue",
    "TailSeries",
    "sqrt_residues",
    "weyl_direct",
    "weyl_kohnen",
    "kohnen_identity_check",
    "tail_series",
]

_U = 2.0**-53


@dataclass(frozen=True)
class WeylSumValue:
    m: int
    fd: FactoredDiscriminant
    c: int
    value: float
    err: float
    imag: float = 0.0


def _check(m, c):
    if m < 1:
        raise DomainError(f"m must be positive, got {m}")
    if c <= 0 or c % 4:
        raise DomainError(f"c must be a positive multiple of 4, got {c}")


def sqrt_residues(D, c):
    """All b in [0, c) with b^2 = D mod c, ascending."""
    return [int(b) for b in _kernel.sqrt_residues(D, c)]


@lru_cache(maxsize=65536)
def _weighted_roots(d, D, c):
    """(b, chi_d([c/4, b, (b^2 - D)/c])) for each square root b of D mod c."""
    out = []
    for b in sqrt_residues(D, c):
        num = b * b - D
        assert num % c == 0
        chi = genus_char(d, QuadForm(c // 4, b, num // c))
        if chi:
            out.append((b, chi))
    return tuple(out)


def weyl_direct(m, fd, c):
    _check(m, c)
    terms = _weighted_roots(fd.d, fd.D, c)
    if not terms:
        return WeylSumValue(m, fd, c, 0.0, 0.0)
    cs, sn = _roots(c)
    bs = np.array([b for b, _ in terms], dtype=np.int64)
    chis = np.array([x for _, x in terms], dtype=float)
    idx = (2 * m * bs) % c
    re = float(chis @ cs[idx])
    im = float(chis @ sn[idx])
    k = len(terms)
    return WeylSumValue(m, fd, c, re, k * (k + 16) * 2 * _U, im)


def weyl_kohnen(m, fd, c):
    _check(m, c)
    total, err = 0.0, 0.0
    for n in divisors(math.gcd(m, c // 4)):
        chi = kronecker(fd.d, n)
        if chi == 0:
            continue
        s = s_plus(HALF, fd.d_prime, (m // n) ** 2 * fd.d, c // n)
        w = math.sqrt(2 * n / c)
        total += chi * w * s.value
        err += w * s.err + 4 * _U * abs(w * s.value)
    return WeylSumValue(m, fd, c, total, err)


def kohnen_identity_check(m, fd, c, tol=1e-8):
    """Compare the two evaluations of T_m(d, d'; c)."""
    a = weyl_direct(m, fd, c)
    b = weyl_kohnen(m, fd, c)
    params = {"m": m, "D": fd.D, "d": fd.d, "d_prime": fd.d_prime, "c": c, "tol": tol}
    return BoundReport(
        "kohnen_identity",
        params,
        abs(a.value - b.value),
        tol + a.err + b.err,
        notes={"direct": a.value, "kohnen": b.value},
    )


class TailSeries(NamedTuple):
    sinh_part: float
    exp_part: float
    err: float


def tail_series(m, fd, Y, c_max):
    """Truncated sums over 4 | c of T_m(d, d'; c) against sinh and exp weights.

    sinh_part = sum_{2 sqrt|D|/Y <= c <= c_max} T_m(c) sinh(4 pi m sqrt|D| / c)
    exp_part  = sum_{c < 2 sqrt|D|/Y}           T_m(c) exp(-4 pi m sqrt|D| / c)

    The sinh series converges only conditionally; its truncation error is not bounded
    here, and ``err`` covers floating-point error only.
    """
    if not 0 < Y <= 1 / (2 * math.pi * m):
        raise DomainError(f"need 0 < Y <= 1/(2 pi m), got Y={Y}")
    if c_max % 4:
        raise DomainError(f"c_max must be a multiple of 4, got {c_max}")
    r = math.sqrt(-fd.D)
    start = 2 * r / Y
    if c_max < start:
        raise DomainError(f"c_max={c_max} is below the series start {start:.6g}")
    sinh_part = exp_part = err = 0.0
    for c in range(4, c_max + 1, 4):
        t = weyl_direct(m, fd, c)
        x = 4 * math.pi * m * r / c
        if c >= start:
            w = math.sinh(x)
            sinh_part += t.value * w
        else:
            w = math.exp(-x)
            exp_part += t.value * w
        err += t.err * w + 4 * _U * abs(t.value * w)
    return TailSeries(sinh_part, exp_part, err)
