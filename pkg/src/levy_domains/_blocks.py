"""Coefficient arithmetic for the telescoping block measure.

Blocks are delimited by B_m = 2**(m*m).  For n >= 2 the coefficient pair
(a_n, a_-n) has exactly one nonzero entry; the signed radial weight

    c_k = k * (a_k - a_-k)

satisfies sum_{k >= K} c_k = sum_{|n| >= K} n a_n, and |c_k| = k (a_k + a_-k).
All logarithms are natural.
"""
from __future__ import annotations

import math
from functools import lru_cache
from math import isqrt

import numpy as np
from scipy.special import zeta

LN2 = math.log(2.0)
# ell_m = 1/log(B_m + 1) is summed directly up to this index, then by Hurwitz zeta
_ELL_DIRECT = 60
# cross-block alternating tails are summed to this many blocks
_CROSS_BLOCKS = 200_000


def inv_log(x):
    """1/log(x) for x > 1; exact for arbitrarily large Python ints."""
    if isinstance(x, (int, np.integer)):
        return 1.0 / math.log(int(x))
    return 1.0 / np.log(x)


def log_gap(x):
    """1/log(x) - 1/log(x+1), without cancellation for large x."""
    x = np.asarray(x, dtype=float)
    return np.log1p(1.0 / x) / (np.log(x) * np.log1p(x))


def block_of(n: int) -> int:
    """Largest m with 2**(m*m) <= n (n >= 1)."""
    return isqrt(int(n).bit_length() - 1)


def boundary(m: int) -> int:
    return 1 << (m * m)


def is_boundary(n: int) -> bool:
    return n >= 2 and n == boundary(block_of(n))


def interior_sign(m: int) -> int:
    """Sign of c_k for 2**(m*m) < k < 2**((m+1)**2): + for odd m."""
    return 1 if m % 2 == 1 else -1


def boundary_sign(m: int) -> int:
    """Sign of c_k at k = 2**(m*m): + for even m."""
    return 1 if m % 2 == 0 else -1


def coeff(n: int) -> tuple[float, float]:
    """Return (a_n, a_-n)."""
    n = int(n)
    if n < 0:
        a, b = coeff(-n)
        return b, a
    if n <= 1:
        return 0.0, 0.0
    m = block_of(n)
    if n == boundary(m):
        val = (inv_log(n) + inv_log(n + 1)) / n
        return (val, 0.0) if m % 2 == 0 else (0.0, val)
    val = float(log_gap(n)) / n
    return (val, 0.0) if m % 2 == 1 else (0.0, val)


def signed_weight(k: int) -> float:
    """c_k = k (a_k - a_-k)."""
    a, b = coeff(k)
    return k * (a - b)


def weights(k_lo: int, k_hi: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized (k, c_k) for k_lo <= k <= k_hi, k_lo >= 2."""
    k = np.arange(k_lo, k_hi + 1, dtype=np.int64)
    kf = k.astype(float)
    c = log_gap(kf)
    bits = np.floor(np.log2(kf)).astype(np.int64)
    # floor(log2) can be off by one near powers of two in floating point
    bits = np.where((1 << bits) > k, bits - 1, bits)
    bits = np.where((1 << (bits + 1)) <= k, bits + 1, bits)
    m = np.floor(np.sqrt(bits)).astype(np.int64)
    m = np.where(m * m > bits, m - 1, m)
    m = np.where((m + 1) * (m + 1) <= bits, m + 1, m)
    sign = np.where(m % 2 == 1, 1.0, -1.0)
    at_b = k == (np.int64(1) << (m * m))
    c = np.where(at_b, 1.0 / np.log(kf) + 1.0 / np.log1p(kf), c)
    sign = np.where(at_b, -sign, sign)
    return k, sign * c


def ell(m):
    """ell_m = 1/log(B_m + 1), vectorized over m >= 1."""
    m = np.asarray(m, dtype=float)
    return 1.0 / (m * m * LN2 + np.log1p(np.exp2(-m * m)))


def ell_tail(M: int) -> float:
    """sum_{m >= M} ell_m (M >= 1); log1p(2**-m^2) is below 1e-300 past m = 33."""
    if M <= _ELL_DIRECT:
        head = math.fsum(ell(np.arange(M, _ELL_DIRECT + 1)))
        return head + float(zeta(2.0, _ELL_DIRECT + 1)) / LN2
    return float(zeta(2.0, M)) / LN2


def _block_containing(k: int) -> int:
    """Block j with 2**(j*j) < k <= 2**((j+1)**2), k >= 2."""
    return block_of(k - 1)


def tail_sum_parts(k: int) -> tuple[float, float]:
    """sum_{|n| >= k} n a_n as (value, error bound), k >= 2.

    In-block telescoping for the rest of the block holding k, then the
    boundary term, then whole blocks as an alternating series of block units
    eps_m (ell_m + ell_{m+1}) truncated after _CROSS_BLOCKS blocks.
    """
    k = int(k)
    if k < 2:
        raise ValueError("k must be >= 2")
    j = _block_containing(k)
    B = boundary(j + 1)
    eps = interior_sign(j)
    parts = [eps * (inv_log(k) - inv_log(B)) if k < B else 0.0]
    parts.append(boundary_sign(j + 1) * (inv_log(B) + inv_log(B + 1)))
    m = np.arange(j + 1, j + 1 + _CROSS_BLOCKS, dtype=float)
    signs = np.where(m % 2 == 1, 1.0, -1.0)
    units = signs * (ell(m) + ell(m + 1))
    parts.extend(units.tolist())
    last = j + 1 + _CROSS_BLOCKS
    nxt = (1.0 if last % 2 == 1 else -1.0) * float(ell(last) + ell(last + 1))
    # averaging the partial sums brackets the limit of an alternating series
    parts.append(0.5 * nxt)
    return math.fsum(parts), 0.5 * abs(nxt)


def tail_sum(k: int) -> float:
    return tail_sum_parts(k)[0]


def abs_tail(k: int) -> float:
    """sum_{|n| >= k} |n| a_n = 1/log k + 2 sum_{m > j} ell_m, j the block of k."""
    k = int(k)
    j = _block_containing(k)
    return inv_log(k) + 2.0 * ell_tail(j + 1)


@lru_cache(maxsize=None)
def abs_moment_closed() -> float:
    """sum_{|n| >= 2} |n| a_n in closed block form."""
    return abs_tail(2)


@lru_cache(maxsize=None)
def signed_total() -> float:
    """sum_{|n| >= 2} n a_n."""
    return tail_sum(2)


def tail_mass_bound(N: int) -> float:
    """Upper bound on sum_{|n| > N} a_n (the mass beyond radius N)."""
    return abs_tail(N + 1) / (N + 1)


# --- weighted series over the radial weights -------------------------------

K_DIRECT = 4096
K_FAR = 2.0 ** 60


@lru_cache(maxsize=8)
def direct_weights(k_hi: int) -> tuple[np.ndarray, np.ndarray]:
    """Cached read-only (k as float, c_k) for 2 <= k <= k_hi."""
    k, c = weights(2, k_hi)
    kf = k.astype(float)
    kf.setflags(write=False)
    c.setflags(write=False)
    return kf, c


def _gk_fixed(F, lo: float, hi: float, ratio: float = 2.0):
    """Fixed GK15 on geometric panels of the given ratio covering [lo, hi]."""
    from .quadrature import NODES, W_KRONROD

    n = max(1, math.ceil(math.log(hi / lo) / math.log(ratio)))
    edges = lo * (hi / lo) ** (np.arange(n + 1) / n)
    edges[-1] = hi
    e = np.asarray(edges)
    half = 0.5 * np.diff(e)
    mid = 0.5 * (e[1:] + e[:-1])
    x = (mid[:, None] + half[:, None] * NODES[None, :]).ravel()
    fx = np.asarray(F(x))
    w = (half[:, None] * W_KRONROD[None, :]).ravel()
    return np.tensordot(w, fx, axes=(0, 0))


def _em_interior(dg, sgn, a, b, ratio):
    """Midpoint Euler-Maclaurin sum of sgn |c_k| dg(k) over interior k in [a, b]."""
    def F(x):
        d = log_gap(x)
        return sgn * d.reshape(d.shape + (1,) * (np.ndim(dg(x[:1])) - 1)) * dg(x)

    lo, hi = a - 0.5, b + 0.5
    deriv = F(np.array([hi - 0.25, hi + 0.25])) * 2.0
    deriv_lo = F(np.array([lo - 0.25, lo + 0.25])) * 2.0
    return _gk_fixed(F, lo, hi, ratio) - ((deriv[1] - deriv[0]) - (deriv_lo[1] - deriv_lo[0])) / 24.0


def series(g, *, signed: bool, g_inf=0.0, k_direct: int = K_DIRECT, k_far: float = K_FAR,
           ratio: float = 2.0):
    """sum_{k >= 2} w_k g(k) with w_k = c_k (signed) or |c_k|.

    ``g`` maps a float array of radii (n,) to (n, ...).  Terms up to
    ``k_direct`` are summed exactly; block interiors beyond are replaced by
    their midpoint Euler-Maclaurin integral (with first derivative
    correction) and block boundaries are added exactly.  ``g_inf`` is the
    limit of g at infinity, carried through exact tail sums; g - g_inf must be
    negligible beyond ``k_far``.  An integer ``k_far`` makes the result the
    partial sum over k <= k_far.  Oscillatory g needs a ``ratio`` close to 1.
    """
    kf, c = direct_weights(k_direct)
    if not signed:
        c = np.abs(c)
    gk = np.asarray(g(kf))
    g_inf = np.asarray(g_inf, dtype=gk.dtype if np.iscomplexobj(gk) else float)
    total = np.tensordot(c, gk, axes=(0, 0))
    tail = tail_sum(k_direct + 1) if signed else abs_tail(k_direct + 1)
    total = total + g_inf * tail

    def dg(x):
        return np.asarray(g(x)) - g_inf

    m = block_of(k_direct)
    while boundary(m) <= k_far:
        a = max(boundary(m) + 1, k_direct + 1)
        b_int = boundary(m + 1) - 1
        b = min(float(b_int), k_far)
        sgn = 1.0 if not signed else float(interior_sign(m))
        if b >= a:
            total = total + _em_interior(dg, sgn, a, b, ratio)
        nb = boundary(m + 1)
        if k_direct < nb <= k_far:
            wb = inv_log(nb) + inv_log(nb + 1)
            if signed:
                wb *= boundary_sign(m + 1)
            total = total + wb * dg(np.array([float(nb)]))[0]
        m += 1
    return total


# --- radial functionals used by the block measure --------------------------

@lru_cache(maxsize=1)
def radial_mass() -> float:
    """sum_{k >= 2} |c_k| / k (total mass per unit direction weight)."""
    return float(series(lambda x: 1.0 / x, signed=False))


@lru_cache(maxsize=1)
def radial_compensator() -> float:
    """sum_{k >= 2} c_k / (1 + k^2)."""
    return float(series(lambda x: 1.0 / (1.0 + x * x), signed=True))


def partial(g, k_hi: int, *, signed: bool):
    """sum_{2 <= k <= k_hi} w_k g(k) for smooth g."""
    if k_hi < 2:
        return 0.0
    if k_hi <= K_DIRECT:
        kf, c = direct_weights(k_hi)
        w = c if signed else np.abs(c)
        return np.tensordot(w, np.asarray(g(kf)), axes=(0, 0))
    return series(g, signed=signed, k_far=int(k_hi))


def tail_series(g, k_lo: int, *, signed: bool, k_far: float = K_FAR):
    """sum_{k >= k_lo} w_k g(k) for smooth g vanishing at infinity.

    Avoids the cancellation of a full sum minus a partial sum when the tail
    is tiny compared to the head.
    """
    k_lo = max(int(k_lo), 2)
    if k_lo <= K_DIRECT:
        return series(g, signed=signed, k_far=k_far) - partial(g, k_lo - 1, signed=signed)
    m = _block_containing(k_lo)
    total = 0.0
    a = k_lo
    while boundary(m + 1) <= k_far or a <= k_far:
        nb = boundary(m + 1)
        b = min(nb - 1, k_far)
        if b >= a:
            sgn = 1.0 if not signed else float(interior_sign(m))
            total = total + _em_interior(g, sgn, a, b, 2.0)
        if a <= nb <= k_far:
            wb = inv_log(nb) + inv_log(nb + 1)
            if signed:
                wb *= boundary_sign(m + 1)
            total = total + wb * np.asarray(g(np.array([float(nb)])))[0]
        if nb > k_far:
            break
        m += 1
        a = nb + 1
    return total


def _weights_float(k_hi):
    k, c = weights(2, k_hi)
    return k.astype(float), c


def _interior_amp(x):
    """|c_k| / k inside a block, extended to real x."""
    return log_gap(x) / x


def _abel_tail(p: int, w: float):
    """sum_{k >= p} a(k) e^{iwk} with a the interior amplitude, by two Abel steps.

    Accurate when p |w| is large; the neglected term is below
    |Delta^2 a_p| / |1 - e^{iw}|^3.
    """
    x = float(p) + np.arange(3.0)
    a = _interior_amp(x)
    d1 = a[1] - a[0]
    d2 = a[2] - 2.0 * a[1] + a[0]
    z = complex(math.cos(w), math.sin(w))
    q = z / (1.0 - z)
    phase = math.fmod(w * p, 2.0 * math.pi)
    zp = complex(math.cos(phase), math.sin(phase))
    return zp / (1.0 - z) * (a[0] + q * d1 + q * q * d2)


# beyond this many radial units the oscillatory sum is replaced by Abel tails
_ABEL_START = 64.0


def oscillatory(w: float) -> complex:
    """sum_{k >= 2} (|c_k| cos(wk) + i c_k sin(wk)) / k for real w."""
    w = math.remainder(float(w), 2.0 * math.pi)
    if w == 0.0:
        return complex(radial_mass())
    aw = abs(w)
    X = max(K_DIRECT, math.ceil(_ABEL_START / aw))
    if X <= 1 << 16:
        kf, c = direct_weights(X) if X <= K_DIRECT else _weights_float(X)
        amp = np.abs(c) / kf
        ph = w * kf
        head = complex(math.fsum(amp * np.cos(ph)), math.fsum(c / kf * np.sin(ph)))
    else:
        # panels span at most a quarter period at the far end
        r = 1.0 + 0.5 * math.pi / _ABEL_START
        re = series(lambda x: np.cos(w * x) / x, signed=False, k_far=X, ratio=r)
        im = series(lambda x: np.sin(w * x) / x, signed=True, k_far=X, ratio=r)
        head = complex(float(re), float(im))
    total = head
    m = block_of(X)
    while True:
        B = boundary(m + 1)
        p = X + 1 if boundary(m) <= X else boundary(m) + 1
        eps = interior_sign(m)
        amp_p = float(_interior_amp(float(p)))
        if amp_p / min(1.0, abs(math.sin(aw / 2))) < 1e-30:
            break
        if p < B:
            total += _abel_tail(p, eps * w) - _abel_tail(B, eps * w)
        if B > X:
            sgn = boundary_sign(m + 1)
            ph = math.fmod(w * B, 2.0 * math.pi)
            wb = (inv_log(B) + inv_log(B + 1)) / B
            total += wb * complex(math.cos(ph), sgn * math.sin(ph))
        m += 1
    return total


def jump_radial(w: float) -> complex:
    """sum_k (|c_k|(cos(wk) - 1) + i c_k (sin(wk) - wk/(1+k^2))) / k."""
    return oscillatory(w) - radial_mass() - 1j * float(w) * radial_compensator()
