"""Deterministic integrand families, mask sets and the domination order.

Built-in families carry closed forms for int f, int |f| and int f^2 over any
window, which the classifier uses as exact tail descriptors.
"""
from __future__ import annotations

import csv
import dataclasses
import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.special import gamma as gamma_fn, gammainc

from .errors import ConfigError

INF = math.inf
DOMINATION_SLACK = 1e-12
# breakpoint listing limit for AlternatingInvS windows
_ALT_DIRECT = 1 << 22
_BOOLE_START = 1000


# ---------------------------------------------------------------------------
# masks

def _normalize(intervals: Iterable[tuple[float, float]]) -> tuple[tuple[float, float], ...]:
    ivs = sorted((float(l), float(r)) for l, r in intervals if r > l)
    out: list[list[float]] = []
    for l, r in ivs:
        if out and l <= out[-1][1]:
            out[-1][1] = max(out[-1][1], r)
        else:
            out.append([l, r])
    return tuple((l, r) for l, r in out)


class MaskSet:
    """Finite union of disjoint half-open intervals [l, r)."""

    def __init__(self, intervals: Iterable[tuple[float, float]] = ()):
        self._ivs = _normalize(intervals)

    @classmethod
    def full(cls, a: float = 0.0) -> "MaskSet":
        return cls([(a, INF)])

    @classmethod
    def empty(cls) -> "MaskSet":
        return cls([])

    def intervals_in(self, lo: float, hi: float) -> list[tuple[float, float]]:
        """Pieces of the mask inside [lo, hi)."""
        return [(max(l, lo), min(r, hi)) for l, r in self._ivs if r > lo and l < hi]

    @property
    def bounded(self) -> bool:
        return not self._ivs or self._ivs[-1][1] < INF

    def materialized(self, hi: float) -> "MaskSet":
        return self

    def indicator(self, s):
        s = np.asarray(s, dtype=float)
        hi = float(np.max(s)) + 1.0 if s.size else 0.0
        ivs = self.intervals_in(-INF, max(hi, 0.0) if math.isfinite(hi) else INF)
        if not ivs:
            return np.zeros(s.shape)
        left = np.array([l for l, _ in ivs])
        right = np.array([r for _, r in ivs])
        j = np.searchsorted(left, s, side="right") - 1
        ok = j >= 0
        jj = np.clip(j, 0, None)
        return np.where(ok & (s < right[jj]), 1.0, 0.0)

    def edges_in(self, lo: float, hi: float) -> list[float]:
        pts = set()
        for l, r in self.intervals_in(lo, hi):
            for p in (l, r):
                if lo < p < hi:
                    pts.add(p)
        return sorted(pts)

    def intersect(self, other: "MaskSet | None") -> "MaskSet":
        if other is None:
            return self
        return _IntersectMask(self, other)

    def to_spec(self) -> str:
        return "mask:" + ";".join(f"{l!r},{r!r}" for l, r in self._ivs)

    def __eq__(self, other):
        return isinstance(other, MaskSet) and type(other) is MaskSet and self._ivs == other._ivs

    def __hash__(self):
        return hash(self._ivs)

    def __repr__(self):
        return f"MaskSet({list(self._ivs)!r})"


class LazyMaskSet(MaskSet):
    """Mask generated on demand by ``oracle(lo, hi) -> intervals in [lo, hi)``.

    Windows are materialized in doubling chunks from ``start`` and cached;
    a lock keeps concurrent queries consistent.
    """

    def __init__(self, oracle: Callable[[float, float], Iterable[tuple[float, float]]],
                 start: float = 1.0, label: str = "lazy"):
        super().__init__(())
        if start <= 0:
            raise ConfigError("lazy masks need a positive start")
        self._oracle = oracle
        self._start = float(start)
        self._done = float(start)
        self._parts: list[tuple[float, float]] = []
        self._lock = threading.Lock()
        self.label = label

    @property
    def bounded(self) -> bool:
        return False

    def _ensure(self, hi: float):
        if hi <= self._done:
            return
        with self._lock:
            while self._done < hi:
                nxt = self._done * 2.0
                new = list(self._oracle(self._done, nxt))
                self._parts = list(_normalize(self._parts + [(l, min(r, nxt)) for l, r in new]))
                self._done = nxt

    def intervals_in(self, lo, hi):
        if not math.isfinite(hi):
            raise ConfigError("lazy masks can only be queried on bounded windows")
        self._ensure(hi)
        with self._lock:
            parts = list(self._parts)
        return [(max(l, lo), min(r, hi)) for l, r in parts if r > lo and l < hi]

    def materialized(self, hi: float) -> MaskSet:
        return MaskSet(self.intervals_in(0.0, hi))

    def to_spec(self):
        return f"lazy:{self.label}"

    def __eq__(self, other):
        return self is other

    def __hash__(self):
        return id(self)

    def __repr__(self):
        return f"LazyMaskSet({self.label!r}, materialized to {self._done:g})"


class _IntersectMask(MaskSet):
    def __init__(self, a: MaskSet, b: MaskSet):
        super().__init__(())
        self.a, self.b = a, b

    @property
    def bounded(self):
        return self.a.bounded or self.b.bounded

    def intervals_in(self, lo, hi):
        out = []
        for l1, r1 in self.a.intervals_in(lo, hi):
            for l2, r2 in self.b.intervals_in(l1, r1):
                out.append((l2, r2))
        return list(_normalize(out))

    def materialized(self, hi):
        return MaskSet(self.intervals_in(0.0, hi))

    def to_spec(self):
        return self.a.to_spec() + "&" + self.b.to_spec()

    def __eq__(self, other):
        return self is other

    def __hash__(self):
        return id(self)


def parse_mask(spec: str) -> MaskSet:
    """Parse ``mask:l1,r1;l2,r2;...`` (``inf`` allowed as a right end)."""
    if not spec.startswith("mask:"):
        raise ConfigError(f"mask spec must start with 'mask:': {spec!r}")
    body = spec[5:].strip()
    ivs = []
    for part in filter(None, body.split(";")):
        try:
            l, r = (float(x) for x in part.split(","))
        except ValueError as exc:
            raise ConfigError(f"bad mask interval {part!r}") from exc
        if not (0 <= l < r):
            raise ConfigError(f"mask interval needs 0 <= l < r: {part!r}")
        ivs.append((l, r))
    return MaskSet(ivs)


# ---------------------------------------------------------------------------
# integrand families

@dataclass(frozen=True, eq=False)
class IntegrandFn:
    """Base class: subclasses define ``_base`` and closed-form window integrals."""

    mask: MaskSet | None = field(default=None, kw_only=True)
    family = "abstract"
    locally_sq_integrable = True
    support_start = 0.0
    # |f| ~ s^-decay at infinity (None when not a power law)
    decay = None

    # -- pointwise ---------------------------------------------------------
    def _base(self, s: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, s):
        s_arr = np.asarray(s, dtype=float)
        v = self._base(s_arr)
        if self.mask is not None:
            v = v * self.mask.indicator(s_arr)
        return v if np.ndim(s) else float(v)

    # -- structure ---------------------------------------------------------
    def _family_breaks(self, lo: float, hi: float) -> list[float]:
        return [p for p in (self.support_start,) if lo < p < hi]

    def breakpoints(self, lo: float, hi: float) -> list[float]:
        pts = set(self._family_breaks(lo, hi))
        if self.mask is not None:
            pts.update(self.mask.edges_in(lo, hi))
        return sorted(pts)

    def _pieces(self, a: float, b: float) -> list[tuple[float, float]]:
        a = max(a, 0.0)
        if b <= a:
            return []
        if self.mask is None:
            return [(a, b)]
        return self.mask.intervals_in(a, b)

    # -- closed-form integrals (unmasked family over [a, b]) ---------------
    def _int_pow(self, a: float, b: float, p: float) -> float:
        """int_a^b |f|^p for p in {1, 2}."""
        raise NotImplementedError

    def _int_signed(self, a: float, b: float) -> float:
        return self._int_pow(a, b, 1)

    def sq_integral(self, a: float, b: float) -> float:
        """int_a^b f(s)^2 ds (may be inf when b is inf)."""
        return math.fsum(self._int_pow(l, r, 2) for l, r in self._pieces(a, b))

    def abs_integral(self, a: float, b: float) -> float:
        return math.fsum(self._int_pow(l, r, 1) for l, r in self._pieces(a, b))

    def integral(self, a: float, b: float) -> float:
        return math.fsum(self._int_signed(l, r) for l, r in self._pieces(a, b))

    # -- tail descriptors ----------------------------------------------------
    def _base_sq_finite(self) -> bool:
        return True

    def _base_abs_finite(self) -> bool:
        return True

    def _tail_finite(self, base_finite: bool, which: str) -> bool | None:
        """Finiteness of int_0^inf |f|^p; None when a lazy mask leaves it open."""
        if base_finite:
            return True
        if self.mask is None:
            return False
        if self.mask.bounded:
            return True
        if isinstance(self.mask, MaskSet) and type(self.mask) is MaskSet:
            return False  # last interval reaches infinity
        return None

    @property
    def sq_integrable(self) -> bool | None:
        return self._tail_finite(self._base_sq_finite(), "sq")

    @property
    def abs_integrable(self) -> bool | None:
        return self._tail_finite(self._base_abs_finite(), "abs")

    @property
    def masked(self) -> bool:
        return self.mask is not None

    def unmasked(self) -> "IntegrandFn":
        return dataclasses.replace(self, mask=None)

    def spec(self) -> str:
        raise NotImplementedError

    def __repr__(self):
        m = "" if self.mask is None else f" & {self.mask.to_spec()}"
        return f"<{self.spec()}{m}>"


def _power_integral(a: float, b: float, q: float) -> float:
    """int_a^b s^-q ds for 0 < a <= b <= inf."""
    if b <= a:
        return 0.0
    if q == 1.0:
        return math.log(b) - math.log(a) if math.isfinite(b) else INF
    if not math.isfinite(b):
        return a ** (1 - q) / (q - 1) if q > 1 else INF
    return (b ** (1 - q) - a ** (1 - q)) / (1 - q)


@dataclass(frozen=True, eq=False)
class PowerDecay(IntegrandFn):
    """s^(-1/alpha) on [1, inf), 0 before."""

    alpha: float = 1.0
    family = "PowerDecay"
    support_start = 1.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ConfigError("PowerDecay needs alpha > 0")

    @property
    def decay(self):
        return 1.0 / self.alpha

    def _base(self, s):
        with np.errstate(divide="ignore"):
            return np.where(s >= 1.0, np.power(np.maximum(s, 1.0), -self.decay), 0.0)

    def _int_pow(self, a, b, p):
        a = max(a, 1.0)
        return _power_integral(a, b, p * self.decay)

    def _base_sq_finite(self):
        return 2.0 * self.decay > 1.0

    def _base_abs_finite(self):
        return self.decay > 1.0

    def spec(self):
        return f"pow:{self.alpha!r}"


@dataclass(frozen=True, eq=False)
class InvS(PowerDecay):
    """s^-1 on [1, inf)."""

    alpha: float = field(default=1.0, init=False)
    family = "InvS"

    def spec(self):
        return "invs"


@dataclass(frozen=True, eq=False)
class AlternatingInvS(IntegrandFn):
    """+s^-1 on [n, n+1) for odd n, -s^-1 for even n >= 2, 0 on [0, 1)."""

    family = "AlternatingInvS"
    support_start = 1.0
    decay = 1.0

    def _base(self, s):
        n = np.floor(s)
        sign = np.where(n % 2 == 1, 1.0, -1.0)
        with np.errstate(divide="ignore"):
            return np.where(s >= 1.0, sign / np.maximum(s, 1.0), 0.0)

    def _family_breaks(self, lo, hi):
        lo_i = max(1, math.floor(lo) + 1)
        hi_i = math.ceil(hi) - 1
        if hi_i - lo_i > _ALT_DIRECT:
            raise ConfigError("AlternatingInvS window has too many sign changes to list")
        pts = list(range(lo_i, hi_i + 1)) if math.isfinite(hi) else []
        if lo < 1.0 < hi and 1 not in pts:
            pts.insert(0, 1)
        return [float(p) for p in pts]

    def _int_pow(self, a, b, p):
        return _power_integral(max(a, 1.0), b, float(p))

    def _int_signed(self, a, b):
        a = max(a, 1.0)
        if b <= a:
            return 0.0
        if not math.isfinite(b):
            return self._int_signed(a, math.floor(a) + 1.0) + _alt_tail(math.floor(a) + 1)
        n_a, n_b = math.floor(a), math.floor(b)
        if n_a == n_b:
            return _alt_sign(n_a) * math.log(b / a)
        head = _alt_sign(n_a) * math.log((n_a + 1) / a)
        tail = _alt_sign(n_b) * math.log(b / n_b)
        return head + _alt_blocks(n_a + 1, n_b) + tail

    def _base_sq_finite(self):
        return True

    def _base_abs_finite(self):
        return False

    def spec(self):
        return "alt-invs"


def _alt_sign(n: int) -> float:
    return 1.0 if n % 2 == 1 else -1.0


def _alt_blocks(n0: int, n1: int) -> float:
    """sum_{n0 <= n < n1} sign(n) log(1 + 1/n)."""
    if n1 <= n0:
        return 0.0
    return _alt_tail(n0) - _alt_tail(n1)


def _alt_tail(n0: int) -> float:
    """sum_{n >= n0} sign(n) log(1 + 1/n): direct to n = 1000, Boole summation after."""
    N = max(int(n0), _BOOLE_START)
    head = 0.0
    if n0 < N:
        n = np.arange(n0, N, dtype=float)
        head = math.fsum(np.where(n % 2 == 1, 1.0, -1.0) * np.log1p(1.0 / n))
    # sum_{n >= N} (-1)^n g(n) = (-1)^N (g/2 - g1/4 + g3/48) up to the fifth derivative
    g = math.log1p(1.0 / N)
    g1 = 1.0 / (N + 1) - 1.0 / N
    g3 = 2.0 / (N + 1) ** 3 - 2.0 / N ** 3
    boole = (1.0 if N % 2 == 0 else -1.0) * (g / 2 - g1 / 4 + g3 / 48)
    return head - boole


@dataclass(frozen=True, eq=False)
class ExpDecay(IntegrandFn):
    """exp(-c s^alpha) on [0, inf)."""

    c: float = 1.0
    alpha: float = 1.0
    family = "ExpDecay"
    support_start = 0.0

    def __post_init__(self):
        if not (self.c > 0 and self.alpha > 0):
            raise ConfigError("ExpDecay needs c > 0 and alpha > 0")

    def _base(self, s):
        return np.where(s >= 0.0, np.exp(-self.c * np.power(np.maximum(s, 0.0), self.alpha)), 0.0)

    def _family_breaks(self, lo, hi):
        return []

    def _int_pow(self, a, b, p):
        # int_a^b exp(-k s^alpha) ds = k^(-1/alpha)/alpha * Gamma(1/alpha) [P(1/alpha, k b^alpha) - P(., k a^alpha)]
        a = max(a, 0.0)
        if b <= a:
            return 0.0
        k = self.c * p
        r = 1.0 / self.alpha
        pb = 1.0 if not math.isfinite(b) else float(gammainc(r, k * b ** self.alpha))
        pa = float(gammainc(r, k * a ** self.alpha))
        return k ** (-r) * r * float(gamma_fn(r)) * (pb - pa)

    def spec(self):
        return f"exp:{self.c!r}:{self.alpha!r}"


@dataclass(frozen=True, eq=False)
class PiecewiseTable(IntegrandFn):
    """Polynomial pieces in (s - start) on [start, end), zero outside."""

    rows: tuple = ()
    source: str = ""
    family = "PiecewiseTable"

    def __post_init__(self):
        rows = []
        for start, end, coeffs in self.rows:
            if not (0 <= start < end < INF):
                raise ConfigError(f"table piece needs 0 <= start < end < inf: {start}, {end}")
            rows.append((float(start), float(end), tuple(float(c) for c in coeffs)))
        rows.sort()
        for (s0, e0, _), (s1, _, _) in zip(rows, rows[1:]):
            if s1 < e0:
                raise ConfigError("table pieces overlap")
        if not rows:
            raise ConfigError("table needs at least one piece")
        object.__setattr__(self, "rows", tuple(rows))

    @property
    def support_start(self):
        return self.rows[0][0]

    @property
    def support_end(self):
        return self.rows[-1][1]

    def _base(self, s):
        out = np.zeros(np.shape(s))
        for start, end, coeffs in self.rows:
            sel = (s >= start) & (s < end)
            if np.any(sel):
                out = np.where(sel, np.polynomial.polynomial.polyval(s - start, coeffs), out)
        return out

    def _family_breaks(self, lo, hi):
        pts = {p for start, end, _ in self.rows for p in (start, end)}
        return sorted(p for p in pts if lo < p < hi)

    def _poly_pieces(self, a, b):
        for start, end, coeffs in self.rows:
            l, r = max(a, start), min(b, end)
            if r > l:
                yield l - start, r - start, np.polynomial.Polynomial(coeffs)

    def _int_pow(self, a, b, p):
        total = []
        for l, r, poly in self._poly_pieces(a, b):
            if p == 2:
                P = (poly * poly).integ()
                total.append(P(r) - P(l))
            else:
                # split at real roots inside the piece so |poly| integrates exactly
                roots = [x.real for x in poly.roots() if abs(x.imag) < 1e-12 and l < x.real < r] \
                    if poly.degree() > 0 else []
                P = poly.integ()
                edges = [l, *sorted(roots), r]
                total.extend(abs(P(e1) - P(e0)) for e0, e1 in zip(edges, edges[1:]))
        return math.fsum(total)

    def _int_signed(self, a, b):
        total = []
        for l, r, poly in self._poly_pieces(a, b):
            P = poly.integ()
            total.append(P(r) - P(l))
        return math.fsum(total)

    def spec(self):
        return f"table:{self.source}" if self.source else "table:<inline>"

    @classmethod
    def from_csv(cls, path: str) -> "PiecewiseTable":
        rows = []
        with open(path, newline="") as fh:
            for rec in csv.reader(fh):
                if not rec or rec[0].strip().startswith("#"):
                    continue
                try:
                    vals = [float(x) for x in rec]
                except ValueError:
                    if not rows:
                        continue  # header line
                    raise ConfigError(f"bad table row {rec!r}")
                if len(vals) < 3:
                    raise ConfigError(f"table row needs start,end,c0,...: {rec!r}")
                rows.append((vals[0], vals[1], tuple(vals[2:])))
        return cls(rows=tuple(rows), source=str(path))


# ---------------------------------------------------------------------------
# operations

def eval_integrand(f: IntegrandFn, s):
    """Pointwise value with the mask applied."""
    return f(s)


def apply_mask(f: IntegrandFn, D: MaskSet | None) -> IntegrandFn:
    """f * 1_D; masks compose by intersection."""
    if D is None:
        return f
    mask = D if f.mask is None else f.mask.intersect(D)
    return dataclasses.replace(f, mask=mask)


def _modulus_key(f: IntegrandFn):
    """Closed-form description of |f| for unmasked built-ins."""
    if isinstance(f, (PowerDecay, AlternatingInvS)):
        return ("pow", f.decay)
    if isinstance(f, ExpDecay):
        return ("exp", f.c, f.alpha)
    return None


def _exact_dominates(k1, k2, lo: float, hi: float) -> bool | None:
    """|f2| <= |f1| on [lo, hi] from closed forms; None when not comparable."""
    if k1[0] == "pow" and k2[0] == "pow":
        if hi <= 1.0:
            return True  # both vanish before 1 (and equal 1 at s = 1)
        return k2[1] >= k1[1]
    if k1[0] == "exp" and k2[0] == "exp":
        (_, c1, a1), (_, c2, a2) = k1, k2
        # exponent gap g(s) = c2 s^a2 - c1 s^a1 must stay >= 0; in log s it is
        # log c2 + a2 x vs log c1 + a1 x, a comparison of two lines
        def ok(x):
            return math.log(c2) + a2 * x >= math.log(c1) + a1 * x - 1e-15
        right = ok(math.log(hi)) if math.isfinite(hi) else a2 >= a1 if a2 != a1 else c2 >= c1
        left = ok(math.log(lo)) if lo > 0 else (a2 <= a1 if a2 != a1 else c2 >= c1)
        return left and right
    return None


def _grid(lo: float, hi: float, per_log: int) -> np.ndarray:
    pts = []
    if lo < 1.0:
        pts.append(np.linspace(lo, min(hi, 1.0), per_log))
    a = max(lo, 1.0)
    if hi > a:
        n = max(2, int(math.ceil(math.log(hi / a) * per_log)) + 1)
        pts.append(np.geomspace(a, hi, n))
    return np.concatenate(pts) if pts else np.array([lo])


def dominates(f1: IntegrandFn, f2: IntegrandFn, window: tuple[float, float] = (0.0, 1e4),
              grid: int = 4096) -> bool:
    """True iff |f2| <= |f1| (+1e-12) on the window.

    Exact for unmasked built-ins with comparable closed forms, and for masked
    f2 whose mask lies inside f1's mask; otherwise grid points plus every
    breakpoint (both one-sided limits) are checked.
    """
    lo, hi = map(float, window)
    if f1 is f2:
        return True
    k1, k2 = _modulus_key(f1.unmasked()), _modulus_key(f2.unmasked())
    if k1 is not None and k2 is not None and math.isfinite(hi):
        inside = f1.mask is None or (
            f2.mask is not None and _mask_within(f2.mask, f1.mask, lo, hi))
        if inside:
            verdict = _exact_dominates(k1, k2, lo, hi)
            if verdict is not None:
                return verdict
    if not math.isfinite(hi):
        raise ConfigError("grid domination needs a bounded window")
    s = _grid(lo, hi, grid)
    bps = set(f1.breakpoints(lo, hi)) | set(f2.breakpoints(lo, hi))
    if bps:
        b = np.array(sorted(bps))
        s = np.concatenate([s, b, np.nextafter(b, -INF)])
    s = s[(s >= lo) & (s <= hi)]
    return bool(np.all(np.abs(f2(s)) <= np.abs(f1(s)) + DOMINATION_SLACK))


def _mask_within(inner: MaskSet, outer: MaskSet, lo: float, hi: float) -> bool:
    out = outer.intervals_in(lo, hi)
    for l, r in inner.intervals_in(lo, hi):
        if not any(ol <= l and r <= orr for ol, orr in out):
            return False
    return True


# ---------------------------------------------------------------------------
# spec strings

def integrand_spec(f: IntegrandFn) -> str:
    """Spec string that ``parse_integrand`` reads back, mask included."""
    base = f.unmasked().spec()
    return base if f.mask is None else f"{base}+{f.mask.to_spec()}"


def parse_integrand(spec: str) -> IntegrandFn:
    """Parse "pow:A", "exp:C:A", "invs", "alt-invs", "table:F.csv".

    A mask may be appended as "SPEC+mask:l1,r1;l2,r2".
    """
    spec = spec.strip()
    base, _, mask_spec = spec.partition("+")
    head, *args = base.split(":")
    try:
        if head == "pow" and len(args) == 1:
            f = PowerDecay(alpha=float(args[0]))
        elif head == "exp" and len(args) == 2:
            f = ExpDecay(c=float(args[0]), alpha=float(args[1]))
        elif head == "invs" and not args:
            f = InvS()
        elif head == "alt-invs" and not args:
            f = AlternatingInvS()
        elif head == "table" and args:
            f = PiecewiseTable.from_csv(":".join(args))
        else:
            raise ConfigError(f"unknown integrand spec {spec!r}")
    except ValueError as exc:
        raise ConfigError(f"bad integrand spec {spec!r}: {exc}") from exc
    if mask_spec:
        f = apply_mask(f, parse_mask(mask_spec))
    return f
