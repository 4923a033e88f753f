"""Compiled inner loops for the plus-space Kloosterman sums.

Every term of S_k^+(m, n, c) is a c-th root of unity: (c/d) is +-1 = e(0 or 1/2),
eps_d^{2k} is 1 or +-i = e(0 or +-1/4) and 4 | c, so the whole term is e(r/c) for an
integer r computed exactly. The kernels only ever produce integer histograms over r.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _jacobi(a, n):
    a %= n
    r = 1
    while a:
        while a % 2 == 0:
            a //= 2
            t = n % 8
            if t == 3 or t == 5:
                r = -r
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            r = -r
        a %= n
    return r if n == 1 else 0


@njit(cache=True)
def unit_table(c):
    """Units d mod c, their inverses, and the offset r_d with (c/d) eps_d = e(r_d / c)."""
    nmax = c // 2
    ds = np.empty(nmax, np.int64)
    inv = np.empty(nmax, np.int64)
    off = np.empty(nmax, np.int64)
    v = 0
    u = c
    while u % 2 == 0:
        u //= 2
        v += 1
    q = c // 4
    k = 0
    for d in range(1, c, 2):
        r0, r1 = c, d
        t0, t1 = 0, 1
        while r1:
            qq = r0 // r1
            r0, r1 = r1, r0 - qq * r1
            t0, t1 = t1, t0 - qq * t1
        if r0 != 1:
            continue
        # (c/d) = (2/d)^v (u/d) for d > 0 odd
        s = _jacobi(u, d)
        if v % 2 == 1 and (d % 8 == 3 or d % 8 == 5):
            s = -s
        o = 0
        if s < 0:
            o += 2 * q
        if d % 4 == 3:
            o += q
        ds[k] = d
        inv[k] = t0 % c
        off[k] = o
        k += 1
    return ds[:k], inv[:k], off[:k]


@njit(cache=True)
def histogram(c, ds, inv, off, ksign, m, n):
    """h[r] = #{d : m dbar + n d + (offset of weight) = r mod c}.

    ksign = +1 uses eps_d, ksign = -1 uses eps_d^{-1}.
    """
    h = np.zeros(c, np.int64)
    mm = m % c
    nn = n % c
    q = c // 4
    for i in range(ds.shape[0]):
        o = off[i]
        if ksign < 0 and ds[i] % 4 == 3:
            # eps_d^{-1} = -i = e(3/4) instead of e(1/4)
            o += 2 * q
        r = (mm * inv[i] + nn * ds[i] + o) % c
        h[r] += 1
    return h


@njit(cache=True)
def sqrt_residues(D, c):
    """All b in [0, c) with b^2 = D mod c."""
    out = np.empty(c, np.int64)
    k = 0
    Dm = D % c
    for b in range(c):
        if (b * b) % c == Dm:
            out[k] = b
            k += 1
    return out[:k]
