"""The telescoping block measure, its near-symmetric variants and their identities.

Coefficients live on blocks (2^(m^2), 2^((m+1)^2)].  Inside a block only one
of a_n, a_-n is nonzero and the radial tail telescopes to

    sum_{|n| >= k} n a_n = ±1/ln k      (+ on odd blocks, - on even blocks),

so the first moment is finite, the tail is barely integrable against ds/s,
and log-moments diverge.  All logarithms are natural.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _accel, _blocks
from .core import Triplet, mean
from .measures import BlockE2, _check_directions

STREAM_N = 1 << 25
# block-tail checks used by the identity table
TAIL_KS = (3, 5, 16, 17, 100, 512, 513, 1 << 16, (1 << 16) + 1)


def coeff(n: int) -> tuple[float, float]:
    """(a_n, a_-n)."""
    return _blocks.coeff(n)


def block_index(n: int) -> int:
    """m with 2^(m^2) <= |n| < 2^((m+1)^2)."""
    return _blocks.block_of(abs(int(n)))


def tail_sign(k: int) -> int:
    """Sign of sum_{|n| >= k} n a_n: + when k sits in an odd block (boundary included)."""
    return _blocks.interior_sign(_blocks.block_of(int(k) - 1))


def tail_sum(k: int) -> float:
    """sum_{|n| >= k} n a_n by in-block telescoping and the cross-block series."""
    if int(k) < 2:
        raise ValueError("tail_sum needs k >= 2")
    return _blocks.tail_sum(int(k))


def tail_sum_streamed(k: int, N: int = STREAM_N) -> float:
    """Direct summation over k <= |n| <= N plus the closed-form remainder beyond N."""
    head, _ = _accel.stream_block_sums(int(k), int(N))
    return head + _blocks.tail_sum(int(N) + 1)


@dataclass(frozen=True)
class AbsMoment:
    value: float
    error: float
    forward: float
    reverse: float
    remainder: float
    finite: bool = True


def abs_moment(N: int = STREAM_N) -> AbsMoment:
    """sum_{|n| >= 2} |n| a_n, streamed in two orders plus the analytic remainder.

    The remainder sum_{|n| > N} |n| a_n = 1/ln(N+1) + 2 sum_{later blocks} ell_m
    is closed form; the reported error is the order disagreement plus the
    closed form's own rounding.
    """
    _, fwd = _accel.stream_block_sums(2, N, False)
    _, rev = _accel.stream_block_sums(2, N, True)
    rem = _blocks.abs_tail(N + 1)
    value = 0.5 * (fwd + rev) + rem
    closed = _blocks.abs_moment_closed()
    err = abs(fwd - rev) + abs(value - closed) + 4 * np.finfo(float).eps * value
    return AbsMoment(value, err, fwd + rem, rev + rem, rem)


def abs_moment_partial(n_hi: int) -> float:
    """sum_{2 <= |n| <= n_hi} |n| a_n."""
    return _accel.stream_block_sums(2, int(n_hi))[1]


def default_directions(dim: int = 1):
    """S0 = {e_1} with unit weight."""
    xi = np.zeros((1, dim))
    xi[0, 0] = 1.0
    return xi, np.array([1.0])


def build_nu(directions=None, lam=None, *, dim: int = 1, tilde: bool = False) -> BlockE2:
    if directions is None:
        directions, lam = default_directions(dim)
    return BlockE2(directions, lam if lam is not None else np.ones(len(directions)), tilde=tilde)


def build_mu(directions=None, lam=None, A=None, *, dim: int | None = None) -> Triplet:
    """Mean-zero triplet with the block Levy measure.

    gamma = -int x |x|^2/(1+|x|^2) nu(dx), the centering that kills the mean.
    """
    if dim is None:
        dim = 1 if directions is None else np.atleast_2d(directions).shape[1]
    nu = build_nu(directions, lam, dim=dim)
    A = np.zeros((nu.dim, nu.dim)) if A is None else np.asarray(A, dtype=float)
    return Triplet(A, nu, -np.asarray(nu.centered_mean_term()))


def build_mu_tilde(directions=None, lam=None, *, dim: int | None = None) -> Triplet:
    """Compound Poisson triplet with cumulant int (e^{i<z,x>} - 1) nu~(dx).

    nu~ adds mass lambda/(2 ln 2) at 2 xi, which cancels the first moment, so
    the no-centering form needs gamma = int x/(1+|x|^2) nu~(dx).
    """
    if dim is None:
        dim = 1 if directions is None else np.atleast_2d(directions).shape[1]
    nu = build_nu(directions, lam, dim=dim, tilde=True)
    gamma = np.asarray(nu.first_moment()) - np.asarray(nu.centered_mean_term())
    return Triplet(np.zeros((nu.dim, nu.dim)), nu, gamma)


# ---------------------------------------------------------------------------
# the tail integrals int_1^t s^-1 (int_(|x|>s) x nu) ds

_DIRECT_K = 1 << 16


def _unit_tail_pieces(k_hi: int) -> tuple[np.ndarray, np.ndarray]:
    """(T_k, ln((k+1)/k)) for 1 <= k < k_hi, T_k the unit-weight tail on (k, k+1)."""
    kf = np.arange(1, k_hi, dtype=float)
    total = _blocks.tail_sum(2)
    T = np.full(kf.size, total)
    if kf.size > 1:
        _, c = _blocks.weights(2, k_hi - 1)
        # the tail on (k, k+1) is sum_{j > k} c_j
        T[1:] = total - np.cumsum(c)[: kf.size - 1]
    return T, np.log1p(1.0 / kf)


def tail_log_integral(t: float, *, absolute: bool = False) -> float:
    """int_1^t s^-1 (±)|tail(s)| ds per unit direction weight (tilde atom excluded).

    Up to 2^16 the tail is summed exactly from the weights; beyond, each block
    contributes sign * sum_k ln(1+1/k)/ln(k+1) evaluated by quadrature of the
    step integrand over whole-integer panels.
    """
    t = float(t)
    if t <= 1.0:
        return 0.0
    k_cut = int(min(math.floor(t), _DIRECT_K))
    T, w = _unit_tail_pieces(k_cut)
    vals = np.abs(T) if absolute else T
    total = math.fsum(vals * w)
    if t <= _DIRECT_K:
        frac = math.log(t / k_cut) if t > k_cut else 0.0
        return total + frac * (abs(tail_sum(k_cut + 1)) if absolute else tail_sum(k_cut + 1))
    lo = float(_DIRECT_K)
    m = _blocks.block_of(_DIRECT_K)
    while lo < t:
        hi = min(float(_blocks.boundary(m + 1)), t)
        sgn = 1.0 if absolute else float(_blocks.interior_sign(m))
        # on (k, k+1) with B_m <= k < B_{m+1} the tail is sign/ln(k+1)
        total += sgn * _step_integral(lo, hi)
        lo = hi
        m += 1
    return total


def _step_integral(lo: float, hi: float) -> float:
    """int_lo^hi ds / (s ln(floor(s) + 1)), lo integer.

    Whole unit steps give sum_k ln(1+1/k)/ln(k+1), a smooth function of k,
    summed by midpoint Euler-Maclaurin on geometric panels; the fractional
    last step is added exactly.
    """
    a = int(lo)
    b = int(math.floor(hi))

    def g(x):
        return np.log1p(1.0 / x) / np.log1p(x)

    total = 0.0
    if b > a:
        total += float(_blocks._em_interior(lambda x: g(x) / _blocks.log_gap(x), 1.0, a, b - 1, 2.0))
    if hi > b:
        total += math.log(hi / b) / math.log(b + 1.0)
    return total


@dataclass
class TailIntegralReport:
    mean_abs: float
    abs_first_moment: float
    checkpoints: list
    signed_integral: list
    increments: list
    block_values: list
    abs_integral: list
    loglog_ratios: list
    log_moment_partials: list

    @property
    def max_increment(self) -> float:
        return max(abs(x) for x in self.increments)


def tail_integral_checks(mu: Triplet | None = None, ks=range(20, 41), ratio_ks=range(16, 33),
                     j: int | None = None) -> TailIntegralReport:
    """Numerical checks of the conditions that put mu in D but not D0 for f = 1/s."""
    mu = build_mu() if mu is None else mu
    nu = mu.nu
    if j is None:
        j = int(np.argmax(np.abs(nu.xi_bar)))
    xj = float(nu.xi_bar[j])
    m = mean(mu)
    ts = [2.0 ** k for k in ks]
    signed = [xj * tail_log_integral(t) for t in ts]
    incr = list(np.diff(signed))
    # the same integral read at block boundaries, where the alternation is complete
    blocks = [(float(_blocks.boundary(b)), xj * tail_log_integral(float(_blocks.boundary(b))))
              for b in range(2, 8)]
    rts = [2.0 ** k for k in ratio_ks]
    absint = [abs(xj) * tail_log_integral(t, absolute=True) for t in rts]
    ratios = [v / math.log(math.log(t)) for v, t in zip(absint, rts)]
    logm = [(2.0 ** k, float(nu.lam_total * _blocks.partial(np.log, int(2 ** k), signed=False)))
            for k in (8, 16, 24, 32, 40, 48, 56)]
    return TailIntegralReport(
        mean_abs=float(np.linalg.norm(m)) if m is not None else math.inf,
        abs_first_moment=float(nu.abs_tail_moment(1.0)),
        checkpoints=ts, signed_integral=signed, increments=incr, block_values=blocks,
        abs_integral=absint, loglog_ratios=ratios, log_moment_partials=logm)


def identity_table(dim: int = 1) -> list[dict]:
    """Rows (identity, value, expected, error, ok) for the displayed identities."""
    rows = []
    for k in TAIL_KS:
        val = tail_sum(k)
        exp = tail_sign(k) / math.log(k)
        rows.append({"identity": f"tail_sum({k}) = {'+' if exp > 0 else '-'}1/ln {k}",
                     "value": val, "expected": exp, "error": abs(val - exp),
                     "ok": abs(val - exp) < 1e-9})
    am = abs_moment()
    rows.append({"identity": "sum |n| a_n < inf", "value": am.value, "expected": None,
                 "error": am.error, "ok": am.error < 1e-9})
    mu = build_mu(dim=dim)
    m = float(np.linalg.norm(mean(mu)))
    rows.append({"identity": "mean(mu) = 0", "value": m, "expected": 0.0, "error": m,
                 "ok": m < 1e-9})
    nut = build_nu(dim=dim, tilde=True)
    fm = float(np.linalg.norm(nut.first_moment()))
    rows.append({"identity": "int x nu~(dx) = 0", "value": fm, "expected": 0.0, "error": fm,
                 "ok": fm < 1e-9})
    mt = float(np.linalg.norm(mean(build_mu_tilde(dim=dim))))
    rows.append({"identity": "mean(mu~) = 0", "value": mt, "expected": 0.0, "error": mt,
                 "ok": mt < 1e-9})
    return rows


__all__ = ["coeff", "block_index", "tail_sign", "tail_sum", "tail_sum_streamed", "abs_moment",
           "abs_moment_partial", "AbsMoment", "default_directions", "build_nu", "build_mu",
           "build_mu_tilde", "tail_log_integral", "tail_integral_checks", "TailIntegralReport",
           "identity_table", "_check_directions"]
