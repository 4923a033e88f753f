"""Plus-space Kloosterman sums S_k^+(m, n, c) for k = +-1/2 and their partial sums.

    S_k^+(m, n, c) = e(-k/4) sum_{d mod c} (c/d) eps_d^{2k} e((m dbar + n d)/c)
                     * (1 if 8 | c, 2 if 4 || c)

The sum is real; its imaginary residue is reported next to the value.
"""

import cmath
import csv
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple

import mpmath
import numpy as np

from . import _kernel
from .arith import as_fraction, ell_constant, tau, zeta_one_plus
from .errors import DomainError
from .report import BoundReport, Estimate

__all__ = [
    "PlusKloostermanValue",
    "BoundReport",
    "Estimate",
    "ZetaTruncation",
    "KloostermanCache",
    "s_plus",
    "s_plus_matrix",
    "s_infty_infty",
    "partial_sum",
    "partial_sums",
    "theorem51_rhs",
    "check_theorem51",
    "theorem51_reports",
    "zeta_partial",
    "weil_rhs",
    "check_weil",
    "admissible",
]

HALF = Fraction(1, 2)
FLOAT_PREC = 53
MAX_PREC = 4096


@dataclass(frozen=True)
class PlusKloostermanValue:
    k: Fraction
    m: int
    n: int
    c: int
    value: float
    err: float
    imag: float = 0.0

    def __float__(self):
        return float(self.value)


def _ksign(k):
    k = as_fraction(k)
    if k == HALF:
        return 1
    if k == -HALF:
        return -1
    raise DomainError(f"weight must be 1/2 or -1/2, got {k}")


def admissible(k, m):
    """(-1)^(k - 1/2) m = 0, 1 mod 4."""
    return (_ksign(k) * m) % 4 in (0, 1)


def _validate(ksign, m, n, c):
    if c <= 0 or c % 4:
        raise DomainError(f"c must be a positive multiple of 4, got {c}")
    for name, v in (("m", m), ("n", n)):
        if (ksign * v) % 4 not in (0, 1):
            raise DomainError(f"{name}={v} violates the plus-space congruence for k={ksign}/2")


@lru_cache(maxsize=256)
def _tables(c):
    return _kernel.unit_table(c)


@lru_cache(maxsize=256)
def _roots(c):
    ang = (2 * np.pi / c) * np.arange(c)
    return np.cos(ang), np.sin(ang)


def _roundoff(nterms, length, prec):
    # each root of unity carries <= ~(4 pi + 2) u; summation of `length` terms <= length u per term
    return nterms * (length + 16) * 2.0 ** (1 - prec)


def _raw_sum(h, c, prec, roots=None):
    """sum_r h[r] e(r/c) and its error bound at the given precision."""
    nterms = int(h.sum())
    if prec <= FLOAT_PREC:
        cs, sn = roots if roots is not None else _roots(c)
        return complex(float(h @ cs), float(h @ sn)), _roundoff(nterms, c, FLOAT_PREC)
    nz = np.nonzero(h)[0]
    with mpmath.workprec(prec):
        s = mpmath.mpc(0)
        for r in nz:
            s += int(h[r]) * mpmath.expjpi(mpmath.mpf(2 * int(r)) / c)
        val = complex(s)
    return val, _roundoff(nterms, len(nz), prec)


def _finish(ksign, m, n, c, raw, err):
    factor = 1 if c % 8 == 0 else 2
    z = raw * cmath.exp(-2j * math.pi * ksign / 8) * factor
    err = factor * (err + 4 * abs(raw) * 2.0**-FLOAT_PREC)
    return PlusKloostermanValue(Fraction(ksign, 2), m, n, c, z.real, err, z.imag)


def s_plus(k, m, n, c, prec=FLOAT_PREC):
    """S_k^+(m, n, c); precision (bits) escalates until err <= 1e-10 * c."""
    ksign = _ksign(k)
    _validate(ksign, m, n, c)
    ds, inv, off = _tables(c)
    h = _kernel.histogram(c, ds, inv, off, ksign, m, n)
    while True:
        raw, err = _raw_sum(h, c, prec)
        out = _finish(ksign, m, n, c, raw, err)
        if out.err <= 1e-10 * c or prec >= MAX_PREC:
            return out
        prec *= 2


def s_plus_matrix(k, ms, ns, c):
    """Matrix [S_k^+(m, n, c)]_{m in ms, n in ns} as complex values, plus a uniform error bound.

    Uses one matrix product per modulus; the real part is the sum, the imaginary part the
    rounding residue.
    """
    ksign = _ksign(k)
    ms = np.asarray(ms, dtype=np.int64)
    ns = np.asarray(ns, dtype=np.int64)
    for m in ms:
        _validate(ksign, int(m), 0, c)
    for n in ns:
        _validate(ksign, 0, int(n), c)
    ds, inv, off = _tables(c)
    off = off.copy()
    if ksign < 0:
        off[ds % 4 == 3] += c // 2
    cs, sn = _roots(c)
    roots = cs + 1j * sn
    A = roots[np.outer(ms % c, inv) % c]
    B = roots[(np.outer(ds, ns % c) + off[:, None]) % c]
    factor = 1 if c % 8 == 0 else 2
    S = (A @ B) * (cmath.exp(-2j * math.pi * ksign / 8) * factor)
    phi = len(ds)
    err = factor * phi * (phi + 32) * 2.0 ** (1 - FLOAT_PREC)
    return S, err


def s_infty_infty(m, n, c):
    """S_{oo,oo}(m, n, c, nu_theta) through its relation with S_{1/2}^+."""
    v = s_plus(HALF, m, n, c)
    factor = 1 if c % 8 == 0 else 2
    return cmath.exp(2j * math.pi / 8) * v.value / factor


def weil_rhs(m, n, c):
    if c <= 0 or c % 4:
        raise DomainError(f"c must be a positive multiple of 4, got {c}")
    g = math.gcd(math.gcd(abs(m), abs(n)), c)
    return 2 * tau(c) * math.sqrt(g) * math.sqrt(c)


def check_weil(k, m, n, c):
    v = s_plus(k, m, n, c)
    return BoundReport(
        "weil",
        {"k": as_fraction(k), "m": m, "n": n, "c": c},
        abs(v.value),
        weil_rhs(m, n, c),
        err=v.err,
    )


# ---------------------------------------------------------------------------
# on-disk cache


class KloostermanCache:
    """Append-only CSV store of S_k^+ values keyed by (k, m, n, c).

    Columns: k_num, m, n, c, value_decimal, err_decimal (k = k_num / 2). Every record
    is checked against the Weil bound when the file is read. One writer at a time; a
    readonly cache keeps new values in memory only.
    """

    FIELDS = ("k_num", "m", "n", "c", "value_decimal", "err_decimal")

    def __init__(self, path, readonly=False):
        self.path = os.fspath(path)
        self.readonly = readonly
        self._data = {}
        if os.path.exists(self.path):
            self._load()
        self._fh = None

    def _load(self):
        with open(self.path, newline="") as fh:
            for row in csv.DictReader(fh):
                k2, m, n, c = (int(row[f]) for f in self.FIELDS[:4])
                value, err = float(row["value_decimal"]), float(row["err_decimal"])
                if abs(value) > weil_rhs(m, n, c) + err:
                    raise ValueError(
                        f"cached S^+ record ({k2}/2, {m}, {n}, {c}) = {value} violates the Weil bound"
                    )
                self._data[(k2, m, n, c)] = PlusKloostermanValue(
                    Fraction(k2, 2), m, n, c, value, err
                )

    def __len__(self):
        return len(self._data)

    def __contains__(self, key):
        return key in self._data

    def get(self, k, m, n, c):
        return self._data.get((_ksign(k), m, n, c))

    def put(self, v):
        key = (int(v.k * 2), v.m, v.n, v.c)
        if key in self._data:
            return
        if self.readonly:
            self._data[key] = PlusKloostermanValue(v.k, v.m, v.n, v.c, v.value, v.err)
            return
        if self._fh is None:
            new = not os.path.exists(self.path) or os.path.getsize(self.path) == 0
            self._fh = open(self.path, "a", newline="")
            if new:
                self._fh.write(",".join(self.FIELDS) + "\n")
        self._fh.write(f"{key[0]},{v.m},{v.n},{v.c},{v.value:.19e},{v.err:.19e}\n")
        self._data[key] = PlusKloostermanValue(v.k, v.m, v.n, v.c, v.value, v.err)

    def flush(self):
        if self._fh is not None:
            self._fh.flush()

    def close(self):
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def cached_s_plus(cache, k, m, n, c):
    if cache is None:
        return s_plus(k, m, n, c)
    v = cache.get(k, m, n, c)
    if v is None:
        v = s_plus(k, m, n, c)
        cache.put(v)
    return v


# ---------------------------------------------------------------------------
# partial sums of S+ / c and their explicit bound


def _check_mn(m, n):
    if m <= 0 or n >= 0:
        raise DomainError(f"need m > 0 and n < 0, got m={m}, n={n}")
    _validate(1, m, n, 4)


def partial_sums(pairs, x_max, cache=None):
    """Running sums sum_{4|c<=x} S_{1/2}^+(m, n, c)/c at every jump point x = 4, 8, ..., x_max.

    Returns {(m, n): (cs, values, errs)} with numpy arrays of cumulative values. Terms are
    accumulated in ascending c, so results do not depend on how the work was split.
    """
    pairs = [tuple(p) for p in pairs]
    for m, n in pairs:
        _check_mn(m, n)
    cs = np.arange(4, int(x_max) + 1, 4, dtype=np.int64)
    terms = {p: np.empty(len(cs)) for p in pairs}
    errs = {p: np.empty(len(cs)) for p in pairs}
    for i, c in enumerate(cs):
        c = int(c)
        todo = []
        for p in pairs:
            v = cache.get(HALF, p[0], p[1], c) if cache is not None else None
            if v is None:
                todo.append(p)
            else:
                terms[p][i], errs[p][i] = v.value / c, v.err / c
        if not todo:
            continue
        ds, inv, off = _kernel.unit_table(c)
        roots = _roots(c) if c <= 4096 else _roots.__wrapped__(c)
        for p in todo:
            h = _kernel.histogram(c, ds, inv, off, 1, p[0], p[1])
            raw, err = _raw_sum(h, c, FLOAT_PREC, roots)
            v = _finish(1, p[0], p[1], c, raw, err)
            if cache is not None:
                cache.put(v)
            terms[p][i], errs[p][i] = v.value / c, v.err / c
    if cache is not None:
        cache.flush()
    return {p: (cs, np.cumsum(terms[p]), np.cumsum(errs[p])) for p in pairs}


def partial_sum(m, n, x, cache=None):
    """sum_{4|c<=x} S_{1/2}^+(m, n, c)/c with its accumulated error."""
    _check_mn(m, n)
    if x < 4:
        return Estimate(0.0, 0.0)
    cs, vals, errs = partial_sums([(m, n)], math.floor(x), cache)[(m, n)]
    return Estimate(float(vals[-1]), float(errs[-1]))


def theorem51_rhs(m, n, x, delta):
    """26 x^(1/6+delta) m^(3/4) |n|^(1/4) tau(m)^(1/2) tau(n)^(1/2) zeta(1+delta)^2 ell(delta) |log delta| log x"""
    delta = as_fraction(delta)
    ell = ell_constant(delta)
    dl = float(delta)
    return (
        26
        * x ** (1 / 6 + dl)
        * m**0.75
        * abs(n) ** 0.25
        * math.sqrt(tau(m) * tau(n))
        * zeta_one_plus(dl) ** 2
        * ell
        * abs(math.log(dl))
        * math.log(x)
    )


def check_theorem51(m, n, x, delta, cache=None):
    ps = partial_sum(m, n, x, cache)
    params = {"m": m, "n": n, "x": x, "delta": as_fraction(delta)}
    return BoundReport("theorem51", params, abs(ps.value), theorem51_rhs(m, n, x, delta), err=ps.err)


def theorem51_reports(pairs, deltas, x_max, cache=None):
    """Check the partial-sum bound at every jump point 4 | x <= x_max."""
    deltas = [as_fraction(d) for d in deltas]
    for d in deltas:
        ell_constant(d)
    sums = partial_sums(pairs, x_max, cache)
    out = []
    for (m, n), (cs, vals, errs) in sums.items():
        for delta in deltas:
            dl = float(delta)
            const = (
                26 * m**0.75 * abs(n) ** 0.25 * math.sqrt(tau(m) * tau(n))
                * zeta_one_plus(dl) ** 2 * ell_constant(delta) * abs(math.log(dl))
            )
            xs = cs.astype(float)
            rhs = const * xs ** (1 / 6 + dl) * np.log(xs)
            for x, v, e, r in zip(cs, vals, errs, rhs):
                out.append(
                    BoundReport(
                        "theorem51",
                        {"m": m, "n": n, "x": int(x), "delta": delta},
                        abs(float(v)),
                        float(r),
                        err=float(e),
                    )
                )
    return out


# ---------------------------------------------------------------------------
# truncated Selberg-Kloosterman zeta function


class ZetaTruncation(NamedTuple):
    value: complex
    tail_bound: float
    err: float


def _tail_bound(m, n, sigma, c_max):
    """Bound for sum_{4|c>c_max} 2 tau(c) (m,n,c)^(1/2) c^(1/2 - 2 sigma)."""
    K = c_max // 4
    if m == 0 and n == 0:
        g, extra = 1.0, 0.5  # (0, 0, c) = c
    else:
        g, extra = math.sqrt(math.gcd(abs(m), abs(n))), 0.0
    best = math.inf
    for delta in (Fraction(1, 4), Fraction(1, 5)):
        e = 0.5 + float(delta) + extra - 2 * sigma
        if e >= -1:
            continue
        # tau(c) <= ell c^delta;  sum_{k>K} (4k)^e <= int_K^oo (4t)^e dt  (and 4^e + int_1^oo if K = 0)
        integral = 4**e * (K ** (e + 1) / (-(e + 1)) if K > 0 else 1 + 1 / (-(e + 1)))
        best = min(best, 2 * ell_constant(delta) * g * integral)
    return best


def zeta_partial(m, n, s, c_max):
    """sum_{4|c<=c_max} S_{1/2}^+(m, n, c) / c^(2s) with a tail bound, for Re(s) > 3/4."""
    s = complex(s)
    if s.real <= 0.75:
        raise DomainError(f"Re(s) must exceed 3/4, got {s.real}")
    if c_max < 0 or c_max % 4:
        raise DomainError(f"c_max must be a non-negative multiple of 4, got {c_max}")
    _validate(1, m, n, 4)
    total, err = 0j, 0.0
    for c in range(4, c_max + 1, 4):
        v = s_plus(HALF, m, n, c)
        w = cmath.exp(-2 * s * math.log(c))
        total += v.value * w
        err += v.err * abs(w)
    return ZetaTruncation(total, _tail_bound(m, n, s.real, c_max), err)
