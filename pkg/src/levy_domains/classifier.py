"""Membership in the four domain classes of an improper integral mapping.

For a triplet mu and integrand f the classes are nested,

    D0 (absolutely definable) ⊂ D (improper) ⊂ Dc (compensated) ⊂ De (essential),

and membership is decided from four conditions on f and the drift integrand
h(s) = f(s) gamma + int f(s) x (1/(1+|f(s)x|^2) - 1/(1+|x|^2)) nu(dx):

    gauss : int f^2 ds tr A < inf
    levy  : int ds int (|f(s)x|^2 ∧ 1) nu(dx) < inf
    drift : int_0^t h ds converges as t -> inf
    abs   : int_0^inf |h| ds < inf

Analytic rules keyed to the measure and integrand families decide first;
checkpoint numerics supply evidence and a fallback.  Nothing is reported as
Member or NonMember unless a rule or a numeric threshold supports it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import brentq

from .core import Triplet, gamma_scaled, mean
from .errors import HypothesisViolated, QuadratureFailure, RootIsolationFailure, UnsupportedMeasure
from .integrands import (AlternatingInvS, ExpDecay, IntegrandFn, InvS, LazyMaskSet, MaskSet,
                         PiecewiseTable, PowerDecay, apply_mask)
from .measures import AnalyticTail, BlockE2, FiniteAtomic, ScaledMeasure
from . import _blocks
from .quadrature import integrate

EPS_CONV = 1e-8
SCALE_BOUND = 1e3
K_MAX = 40
ROOT_BUDGET = 10 ** 6
GRID_PER_DOUBLING = 64
CLASSES = ("D0", "D", "Dc", "De")


class Status(str, Enum):
    MEMBER = "Member"
    NONMEMBER = "NonMember"
    UNDETERMINED = "Undetermined"


class Finiteness(str, Enum):
    FINITE = "Finite"
    INFINITE = "Infinite"
    UNDETERMINED = "Undetermined"


class Convergence(str, Enum):
    CONVERGENT = "Convergent"
    DIVERGENT = "Divergent"
    UNDETERMINED = "Undetermined"


def _fin(flag: bool | None) -> Finiteness:
    if flag is None:
        return Finiteness.UNDETERMINED
    return Finiteness.FINITE if flag else Finiteness.INFINITE


@dataclass
class Evidence:
    condition: str  # gauss, levy, drift, abs, compensator-q, analytic-rule
    record: dict

    def to_json(self):
        return {"condition": self.condition, "record": _jsonable(self.record)}


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, Enum):
        return x.value
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    if isinstance(x, np.integer):
        return int(x)
    return x


_ORDER = {c: i for i, c in enumerate(CLASSES)}


def check_chain(status: dict) -> None:
    """Raise ValueError unless Member propagates up and NonMember down the chain."""
    for c in CLASSES:
        for c2 in CLASSES:
            if _ORDER[c] < _ORDER[c2]:
                if status[c] is Status.MEMBER and status[c2] is not Status.MEMBER:
                    raise ValueError(f"{c} Member but {c2} {status[c2].value}")
                if status[c2] is Status.NONMEMBER and status[c] is not Status.NONMEMBER:
                    raise ValueError(f"{c2} NonMember but {c} {status[c].value}")


@dataclass(frozen=True)
class DomainVerdict:
    D0: Status
    D: Status
    Dc: Status
    De: Status
    evidence: tuple = ()
    q: tuple | None = None

    def __post_init__(self):
        check_chain(self.as_dict())

    def as_dict(self) -> dict:
        return {c: getattr(self, c) for c in CLASSES}

    @property
    def undetermined_only(self) -> bool:
        return any(s is Status.UNDETERMINED for s in self.as_dict().values())

    def to_json(self) -> dict:
        out = {c: getattr(self, c).value for c in CLASSES}
        out["q"] = None if self.q is None else list(self.q)
        out["evidence"] = [e.to_json() for e in self.evidence]
        return out


@dataclass
class ConditionResult:
    condition: str
    verdict: Enum
    value: object = None
    partials: list = field(default_factory=list)
    tail_bound: float | None = None
    rule: str | None = None

    def evidence(self) -> Evidence:
        rec = {"verdict": self.verdict, "value": self.value}
        if self.partials:
            rec["partials"] = self.partials
        if self.tail_bound is not None:
            rec["tail_bound"] = self.tail_bound
        if self.rule:
            rec["rule"] = self.rule
        return Evidence(self.condition, rec)


# ---------------------------------------------------------------------------
# drift integrand

class DriftIntegrand:
    """h(s) = gamma^{f(s)}, the location parameter of mu scaled by f(s)."""

    def __init__(self, mu: Triplet, f: IntegrandFn):
        self.mu, self.f = mu, f
        self.dim = mu.dim

    @property
    def is_zero(self) -> bool:
        nu = self.mu.nu
        return not np.any(self.mu.gamma) and (nu.is_zero or nu.symmetric)

    def __call__(self, s) -> np.ndarray:
        fs = np.atleast_1d(np.asarray(self.f(s), dtype=float))
        out = np.zeros((fs.size, self.dim))
        nz = fs != 0
        if np.any(nz) and not self.is_zero:
            out[nz] = np.asarray(gamma_scaled(self.mu, fs[nz])).reshape(-1, self.dim)
        return out

    def component(self, j: int):
        return lambda s: self(s)[:, j]


def drift_h(mu: Triplet, f: IntegrandFn) -> DriftIntegrand:
    return DriftIntegrand(mu, f)


# ---------------------------------------------------------------------------
# family descriptors

def _lazy_parts(mask) -> list:
    if mask is None:
        return []
    if isinstance(mask, LazyMaskSet):
        return [mask]
    if hasattr(mask, "a") and hasattr(mask, "b"):
        return _lazy_parts(mask.a) + _lazy_parts(mask.b)
    return []


@dataclass
class _FShape:
    kind: str            # compact, exp, power, alt, unknown
    decay: float | None  # |f| ~ s^-decay for power and alt
    lazy: list


def _shape(f: IntegrandFn) -> _FShape:
    lazy = _lazy_parts(f.mask)
    if f.mask is not None and f.mask.bounded:
        return _FShape("compact", None, lazy)
    if isinstance(f, PiecewiseTable):
        return _FShape("compact", None, lazy)
    if isinstance(f, ExpDecay):
        return _FShape("exp", None, lazy)
    if isinstance(f, AlternatingInvS):
        return _FShape("alt", 1.0, lazy)
    if isinstance(f, PowerDecay):
        return _FShape("power", f.decay, lazy)
    return _FShape("unknown", None, lazy)


def _nu_kind(nu) -> str:
    while isinstance(nu, ScaledMeasure):
        nu = nu.base
    if isinstance(nu, FiniteAtomic):
        return "none" if nu.is_zero else "atomic"
    if isinstance(nu, BlockE2):
        return "block"
    if isinstance(nu, AnalyticTail):
        return nu.kind
    return "other"


def _mean_scale(mu: Triplet) -> float:
    s = float(np.linalg.norm(mu.gamma))
    if not mu.nu.is_zero:
        t = mu.nu.abs_tail_moment(0.0)
        if math.isfinite(t):
            s += t
    return max(1.0, s)


def _mean_is_zero(mu: Triplet, m) -> bool:
    return m is not None and float(np.linalg.norm(m)) <= 1e-12 * _mean_scale(mu)


@dataclass
class _Rules:
    levy: Finiteness | None = None
    drift: Convergence | None = None
    absolute: Finiteness | None = None
    dc: Status | None = None
    q: np.ndarray | None = None
    cite: list = field(default_factory=list)


def _levy_rule(mu: Triplet, shape: _FShape, f: IntegrandFn) -> tuple[Finiteness | None, str]:
    nu = mu.nu
    if nu.is_zero:
        return Finiteness.FINITE, "nu = 0"
    if shape.kind == "compact":
        return Finiteness.FINITE, "compactly supported integrand"
    if shape.kind == "exp":
        p = 1.0 / f.alpha
        ok = nu.log_moment_finite(p)
        return _fin(ok), f"exp-decay log-moment test: int (log+|x|)^{p:g} nu(dx) {'<' if ok else '='} inf"
    if shape.kind in ("power", "alt"):
        p = shape.decay
        if p <= 0.5:
            return Finiteness.INFINITE, f"int s^-{2 * p:g} ds = inf"
        ok = nu.power_moment_finite(1.0 / p)
        return _fin(ok), f"power-decay rule: int_(|x|>1) |x|^{1 / p:g} nu(dx) {'<' if ok else '='} inf"
    return None, "no analytic rule"


def _drift_rules(mu: Triplet, shape: _FShape, f: IntegrandFn) -> _Rules:
    """Rules for (drift, abs, compensated) assuming the gauss and levy conditions hold."""
    r = _Rules()
    d = mu.dim
    zero = np.zeros(d)
    if DriftIntegrand(mu, f).is_zero:
        r.drift, r.absolute, r.dc, r.q = Convergence.CONVERGENT, Finiteness.FINITE, Status.MEMBER, zero
        r.cite.append("symmetric nu and gamma = 0 give h = 0")
        return r
    if shape.kind in ("compact", "exp"):
        r.drift, r.absolute, r.dc, r.q = Convergence.CONVERGENT, Finiteness.FINITE, Status.MEMBER, zero
        r.cite.append("compact support" if shape.kind == "compact"
                      else "exp-decay integrand: all four classes coincide with the log-moment test")
        return r
    if shape.kind not in ("power", "alt"):
        return r
    p = shape.decay
    kind = _nu_kind(mu.nu)
    m = mean(mu)
    if m is None:
        if kind == "pareto" and p * _base_alpha(mu.nu) > 1.0:
            # levy finite forces p > 1/alpha >= 1, and |h(f)| = O(f^alpha) + O(f)
            r.drift, r.absolute, r.dc, r.q = Convergence.CONVERGENT, Finiteness.FINITE, Status.MEMBER, zero
            r.cite.append("infinite-mean pareto tail: |h(s)| = O(s^-p*alpha), integrable")
        return r
    m = np.asarray(m, dtype=float)
    m_zero = _mean_is_zero(mu, m)
    # h = f m - R(f) with R(u) = int u x |ux|^2/(1+|ux|^2) nu(dx)
    if kind in ("none", "atomic"):
        remainder = "integrable"
    elif kind == "pareto":
        remainder = "integrable" if p * _base_alpha(mu.nu) > 1.0 else None
    elif kind == "block":
        remainder = "integrable" if p > 1.0 else ("conditional" if p == 1.0 else None)
    else:
        remainder = None
    if remainder is None:
        return r
    if remainder == "integrable":
        r.cite.append("remainder int |R(f(s))| ds < inf")
        if shape.kind == "alt":
            r.drift, r.dc, r.q = Convergence.CONVERGENT, Status.MEMBER, zero
            r.absolute = Finiteness.FINITE if m_zero else Finiteness.INFINITE
            r.cite.append("int f converges (alternating blocks); int |f| = inf")
        elif p > 1.0 or m_zero:
            r.drift, r.absolute, r.dc, r.q = Convergence.CONVERGENT, Finiteness.FINITE, Status.MEMBER, zero
            r.cite.append("int |f| < inf" if p > 1.0 else "mean zero")
        else:
            r.drift, r.absolute, r.dc, r.q = Convergence.DIVERGENT, Finiteness.INFINITE, Status.MEMBER, m
            r.cite.append("G(t) = m int_0^t f + O(1) with int f = inf and m != 0; q = m")
        return r
    # block measure with |f| = 1/s: the first-moment tail is ±c/log s alternating by block
    r.cite.append("block tail int_(|x|>s) x nu = ±c/log s: int s^-1 (tail) ds converges, "
                  "not absolutely")
    r.absolute = Finiteness.INFINITE
    if shape.kind == "alt":
        r.drift, r.dc, r.q = Convergence.CONVERGENT, Status.MEMBER, zero
    elif m_zero:
        r.drift, r.dc, r.q = Convergence.CONVERGENT, Status.MEMBER, zero
    else:
        r.drift, r.dc, r.q = Convergence.DIVERGENT, Status.MEMBER, m
        r.cite.append("m != 0: G(t) = m log t + O(1); q = m")
    return r


def _base_alpha(nu) -> float:
    while isinstance(nu, ScaledMeasure):
        nu = nu.base
    return nu.alpha


# ---------------------------------------------------------------------------
# checkpoint numerics

def default_checkpoints(f: IntegrandFn, k_max: int = K_MAX) -> np.ndarray:
    """t = a 2^k, k = 0..k_max, with a = max(support start, 1).

    Alternating integrands change sign at every integer, so their grid stops
    at 2^12 to keep the per-panel breakpoint list small.
    """
    a = max(float(f.support_start), 1.0)
    if isinstance(f, AlternatingInvS):
        k_max = min(k_max, 12)
    return a * 2.0 ** np.arange(k_max + 1)


def _window_integral(func, f: IntegrandFn, lo: float, hi: float):
    if hi <= lo:
        return 0.0
    try:
        return integrate(func, lo, hi, points=f.breakpoints(lo, hi)).value
    except ValueError as exc:
        raise QuadratureFailure(str(exc)) from exc


def _cumulative(func, f: IntegrandFn, ts, start: float = 0.0) -> np.ndarray:
    """[int_start^t func ds for t in ts], accumulated window by window."""
    out, acc, lo = [], 0.0, start
    for t in ts:
        acc = acc + np.asarray(_window_integral(func, f, lo, float(t)))
        out.append(np.array(acc, dtype=float))
        lo = float(t)
    return np.array(out)


def drift_partials(mu: Triplet, f: IntegrandFn, ts, *, absolute: bool = False,
                   component: int | None = None) -> np.ndarray:
    """G(t) = int_0^t h ds (or int |h|) on the checkpoints; shape (len(ts), d)."""
    h = DriftIntegrand(mu, f)
    if h.is_zero:
        shape = (len(ts),) if component is not None else (len(ts), mu.dim)
        return np.zeros(shape)
    if component is not None:
        hj = h.component(component)
        func = (lambda s: np.abs(hj(s))) if absolute else hj
    elif absolute:
        def func(s):
            return np.linalg.norm(h(s), axis=1)
    else:
        func = h
    return _cumulative(func, f, ts)


def _drift_lipschitz(mu: Triplet) -> float:
    """L with |h(s)| <= L |f(s)| whenever |f(s)| <= 1."""
    L = float(np.linalg.norm(mu.gamma))
    if not mu.nu.is_zero:
        L += mu.nu.abs_tail_moment(0.0)
    return L


def _drift_tail_bound(mu: Triplet, f: IntegrandFn, T: float) -> float:
    L = _drift_lipschitz(mu)
    if L == 0.0:
        return 0.0
    if not math.isfinite(L):
        return math.inf
    grid = np.geomspace(max(T, 1e-300), max(T, 1.0) * 2.0 ** 20, 257)
    if np.any(np.abs(f(grid)) > 1.0):
        return math.inf
    try:
        return L * f.abs_integral(T, math.inf)
    except Exception:  # lazy masks cannot be queried to infinity
        return math.inf


def _numeric_convergence(partials: np.ndarray, tail_bound: float) -> Convergence:
    G = np.atleast_2d(partials.reshape(len(partials), -1))
    norms = np.linalg.norm(G, axis=1)
    if len(G) >= 2:
        incr = np.linalg.norm(np.diff(G, axis=0), axis=1)
        if incr[-1] < EPS_CONV and math.isfinite(tail_bound):
            return Convergence.CONVERGENT
    if len(G) >= 5:
        scale0 = max(float(norms[:2].max()), 1e-300)
        run = 0
        for k in range(1, len(norms)):
            if norms[k] > norms[k - 1] and norms[k] > SCALE_BOUND * scale0:
                run += 1
                if run >= 4:
                    return Convergence.DIVERGENT
            else:
                run = 0
    return Convergence.UNDETERMINED


def _partials_record(ts, partials) -> list:
    return [[float(t), np.asarray(p).tolist()] for t, p in zip(ts, partials)]


# ---------------------------------------------------------------------------
# the four conditions

def cond_gaussian(mu: Triplet, f: IntegrandFn, T: float | None = None) -> ConditionResult:
    """tr A int_0^T f^2 ds and the finiteness of its limit."""
    tr = float(np.trace(mu.A))
    T = float(default_checkpoints(f)[-1] if T is None else T)
    if tr == 0.0:
        return ConditionResult("gauss", Finiteness.FINITE, 0.0, tail_bound=0.0, rule="tr A = 0")
    value = tr * f.sq_integral(0.0, T)
    ok = f.sq_integrable
    if ok is None and _shape(f).lazy and f.unmasked().sq_integrable:
        ok = True  # a masked integrand is dominated by its base
    tail = None
    if ok is not None:
        try:
            tail = tr * f.sq_integral(T, math.inf)
        except Exception:
            tail = None
    rule = {True: "int f^2 < inf", False: "int f^2 = inf", None: "int f^2 not decided"}[ok]
    return ConditionResult("gauss", _fin(ok), value, tail_bound=tail, rule=rule)


def _tsm_along(nu, f: IntegrandFn):
    if isinstance(nu, FiniteAtomic):
        r2 = nu.radii ** 2
        w = nu.masses

        def func(s):
            u2 = np.asarray(f(s), dtype=float) ** 2
            return np.minimum(u2[:, None] * r2[None, :], 1.0) @ w
        return func
    if isinstance(nu, AnalyticTail) and nu.kind == "log_atoms":
        r, m = nu._atoms_radial()
        far = nu._far_mass()

        def func(s):
            u = np.abs(np.asarray(f(s), dtype=float))
            with np.errstate(over="ignore"):
                v = np.minimum(np.outer(u, r) ** 2, 1.0) @ m + far
            return nu.w_total * np.where(u > 0, v, 0.0)
        return func

    def func(s):
        fs = np.asarray(f(s), dtype=float)
        return np.array([nu.trunc_second_moment(float(u)) if u != 0 else 0.0 for u in fs])
    return func


def _pow_int(p: float, a, b):
    """int_a^b s^-2p ds."""
    if p == 0.5:
        return np.log(b / a)
    return (b ** (1.0 - 2 * p) - a ** (1.0 - 2 * p)) / (1.0 - 2 * p)


def _swap_kernel(x, p: float, l: float, r: float):
    """int_l^r min(x^2 s^-2p, 1) ds for radii x; the crossover is s = x^(1/p)."""
    x = np.asarray(x, dtype=float)
    s_star = np.clip(x ** (1.0 / p), l, r)
    return (s_star - l) + x * x * _pow_int(p, s_star, r)


def _block_swap_window(p: float, l: float, r: float) -> float:
    """sum_k |c_k|/k int_l^r min(k^2 s^-2p, 1) ds, split where the kernel has kinks."""
    K1 = min(math.floor(l ** p), 2 ** 62)
    K2 = min(math.floor(r ** p), 2 ** 62)
    low = float(_blocks.partial(lambda x: x * _pow_int(p, l, r), K1, signed=False))

    def mid(x):
        return ((x ** (1.0 / p) - l) + x * x * _pow_int(p, x ** (1.0 / p), r)) / x
    middle = 0.0
    if K2 > K1:
        middle = float(_blocks.partial(mid, K2, signed=False)) - float(
            _blocks.partial(mid, K1, signed=False))
    far = float(_blocks.tail_series(lambda x: (r - l) / x, K2 + 1, signed=False))
    return low + middle + far


def _levy_swapped(nu, f: IntegrandFn, T: float):
    """Fubini form of int_0^T tsm(f(s)) ds for the block measure and power integrands.

    Returns None outside that case.
    """
    if not (isinstance(nu, BlockE2) and isinstance(f, PowerDecay)):
        return None
    p = f.decay
    pieces = [(max(a, 1.0), b) for a, b in f._pieces(1.0, T)]
    val = 0.0
    for a, b in pieces:
        if b > a:
            val += nu.lam_total * _block_swap_window(p, a, b)
            ex = nu.extra
            if ex is not None:
                val += float(_swap_kernel(ex.radii, p, a, b) @ ex.masses)
    return val


def levy_partials(mu: Triplet, f: IntegrandFn, ts) -> np.ndarray:
    if mu.nu.is_zero:
        return np.zeros(len(ts))
    swapped = [_levy_swapped(mu.nu, f, float(t)) for t in ts]
    if all(v is not None for v in swapped):
        return np.array(swapped)
    return _cumulative(_tsm_along(mu.nu, f), f, ts)


def cond_levy(mu: Triplet, f: IntegrandFn, T: float | None = None) -> ConditionResult:
    """int_0^T ds int (|f(s) x|^2 ∧ 1) nu(dx) and the finiteness of its limit."""
    T = float(default_checkpoints(f)[-1] if T is None else T)
    shape = _shape(f)
    verdict, rule = _levy_rule(mu, shape, f)
    if verdict is None and shape.lazy:
        base, _ = _levy_rule(mu, _shape(f.unmasked()), f.unmasked())
        if base is Finiteness.FINITE:
            verdict, rule = base, "masked integrand dominated by a Finite base"
    value = 0.0 if mu.nu.is_zero else float(levy_partials(mu, f, [T])[-1])
    return ConditionResult("levy", verdict or Finiteness.UNDETERMINED, value, rule=rule)


def cond_drift_convergence(mu: Triplet, f: IntegrandFn, checkpoints=None) -> ConditionResult:
    """Convergence of G(t) = int_0^t h ds as t -> inf."""
    ts = default_checkpoints(f) if checkpoints is None else np.asarray(checkpoints, dtype=float)
    h = DriftIntegrand(mu, f)
    if h.is_zero:
        return ConditionResult("drift", Convergence.CONVERGENT, np.zeros(mu.dim).tolist(),
                               _partials_record(ts, np.zeros((len(ts), mu.dim))), 0.0, "h = 0")
    G = drift_partials(mu, f, ts)
    tail = _drift_tail_bound(mu, f, float(ts[-1]))
    rules = _drift_rules(mu, _shape(f), f)
    if rules.drift is not None:
        verdict, rule = rules.drift, "; ".join(rules.cite)
    else:
        verdict, rule = _numeric_convergence(G, tail), "checkpoint extrapolation"
    return ConditionResult("drift", verdict, G[-1].tolist(), _partials_record(ts, G), tail, rule)


def cond_drift_absolute(mu: Triplet, f: IntegrandFn, T: float | None = None,
                        checkpoints=None) -> ConditionResult:
    """int_0^T |h(s)| ds and the finiteness of its limit."""
    ts = default_checkpoints(f) if checkpoints is None else np.asarray(checkpoints, dtype=float)
    if T is not None:
        ts = ts[ts < T]
        ts = np.append(ts, float(T))
    h = DriftIntegrand(mu, f)
    if h.is_zero:
        return ConditionResult("abs", Finiteness.FINITE, 0.0, tail_bound=0.0, rule="h = 0")
    H = drift_partials(mu, f, ts, absolute=True)
    tail = _drift_tail_bound(mu, f, float(ts[-1]))
    rules = _drift_rules(mu, _shape(f), f)
    if rules.absolute is not None:
        verdict, rule = rules.absolute, "; ".join(rules.cite)
    elif math.isfinite(tail):
        verdict, rule = Finiteness.FINITE, "|h| <= L|f| with int |f| < inf"
    else:
        verdict, rule = Finiteness.UNDETERMINED, "no rule; partials only"
    return ConditionResult("abs", verdict, float(H[-1]), _partials_record(ts, H), tail, rule)


# ---------------------------------------------------------------------------
# classification

def _lsq_compensator(G: np.ndarray, F: np.ndarray) -> np.ndarray:
    """q minimising sum |G(t) - q F(t) - c|^2 over the checkpoints."""
    Fc = F - F.mean()
    den = float(Fc @ Fc)
    if den == 0.0:
        return np.zeros(G.shape[1])
    return (Fc @ (G - G.mean(axis=0))) / den


def _certificate(f: IntegrandFn, mu: Triplet):
    for lz in _shape(f).lazy:
        cert = getattr(lz, "certificate", None)
        if (cert and cert.get("mu_hash") == mu.config_hash()
                and cert.get("base_spec") == f.unmasked().spec()):
            return cert
    return None


def _status_from(de: Status, d: Status, d0: Status, dc: Status) -> dict:
    st = {"D0": d0, "D": d, "Dc": dc, "De": de}
    # enforce the chain with the strongest available statements
    if st["D0"] is Status.MEMBER:
        st["D"] = Status.MEMBER
    if st["D"] is Status.MEMBER:
        st["Dc"] = Status.MEMBER
    if st["Dc"] is Status.MEMBER:
        st["De"] = Status.MEMBER
    if st["De"] is Status.NONMEMBER:
        st["Dc"] = Status.NONMEMBER
    if st["Dc"] is Status.NONMEMBER:
        st["D"] = Status.NONMEMBER
    if st["D"] is Status.NONMEMBER:
        st["D0"] = Status.NONMEMBER
    return st


def classify(mu: Triplet, f: IntegrandFn, checkpoints=None) -> DomainVerdict:
    """Decide membership of mu in D0, D, Dc and De for the integrand f."""
    ts = default_checkpoints(f) if checkpoints is None else np.asarray(checkpoints, dtype=float)
    T = float(ts[-1])
    ev = []
    shape = _shape(f)

    gauss = cond_gaussian(mu, f, T)
    levy = cond_levy(mu, f, T)
    ev += [gauss.evidence(), levy.evidence()]
    if Finiteness.INFINITE in (gauss.verdict, levy.verdict):
        de = Status.NONMEMBER
    elif gauss.verdict is Finiteness.FINITE and levy.verdict is Finiteness.FINITE:
        de = Status.MEMBER
    else:
        de = Status.UNDETERMINED
    if de is not Status.MEMBER:
        st = _status_from(de, Status.UNDETERMINED, Status.UNDETERMINED, Status.UNDETERMINED)
        return DomainVerdict(**st, evidence=tuple(ev))

    cert = _certificate(f, mu)
    if cert is not None:
        return _classify_certified(mu, f, ts, cert, ev)

    drift = cond_drift_convergence(mu, f, ts)
    absolute = cond_drift_absolute(mu, f, checkpoints=ts)
    ev += [drift.evidence(), absolute.evidence()]
    d = {Convergence.CONVERGENT: Status.MEMBER, Convergence.DIVERGENT: Status.NONMEMBER}.get(
        drift.verdict, Status.UNDETERMINED)
    if d is Status.MEMBER:
        d0 = {Finiteness.FINITE: Status.MEMBER, Finiteness.INFINITE: Status.NONMEMBER}.get(
            absolute.verdict, Status.UNDETERMINED)
    elif d is Status.NONMEMBER:
        d0 = Status.NONMEMBER
    else:
        d0 = Status.MEMBER if absolute.verdict is Finiteness.FINITE else Status.UNDETERMINED

    q = None
    if d0 is Status.MEMBER or d is Status.MEMBER:
        dc, q = Status.MEMBER, np.zeros(mu.dim)
    else:
        dc, q, rec = _compensator(mu, f, ts, shape)
        ev.append(Evidence("compensator-q", rec))
    st = _status_from(de, d, d0, dc)
    return DomainVerdict(**st, evidence=tuple(ev), q=None if q is None else tuple(float(x) for x in q))


def _compensator(mu: Triplet, f: IntegrandFn, ts, shape: _FShape):
    """Search q with int (h - f q) convergent: symmetric shortcut, rule, or fit."""
    G = drift_partials(mu, f, ts)
    F = np.array([f.integral(0.0, float(t)) for t in ts])
    q_fit = _lsq_compensator(G, F)
    rec = {"q_fit": q_fit}
    nu = mu.nu
    if nu.is_zero or nu.symmetric:
        q, rule = np.asarray(mu.gamma, dtype=float), "symmetric nu: h = f gamma, q = gamma"
        status = Status.MEMBER
    else:
        rules = _drift_rules(mu, shape, f)
        if rules.dc is not None:
            q, rule, status = rules.q, "; ".join(rules.cite), rules.dc
        else:
            q, rule, status = q_fit, "least-squares fit", None
    resid = G - np.outer(F, q)
    rec.update(q=q, rule=rule, partials=_partials_record(ts, resid))
    incr = np.linalg.norm(np.diff(resid, axis=0), axis=1) if len(ts) > 1 else np.zeros(1)
    rec["last_increment"] = float(incr[-1])
    if status is None:
        # the residual drift is h - f q; its absolute tail is bounded like h itself
        tail = _drift_tail_bound(mu, f, float(ts[-1])) + float(np.linalg.norm(q)) * _abs_tail(f, ts[-1])
        rec["tail_bound"] = tail
        status = (Status.MEMBER if incr[-1] < EPS_CONV and math.isfinite(tail)
                  else Status.UNDETERMINED)
    return status, (q if status is Status.MEMBER else None), rec


def _abs_tail(f: IntegrandFn, T: float) -> float:
    try:
        return f.abs_integral(float(T), math.inf)
    except Exception:
        return math.inf


def _classify_certified(mu, f, ts, cert, ev) -> DomainVerdict:
    """Masked integrand built from a sign set of h_j: the masked drift diverges."""
    j = cert["coordinate"]
    G = drift_partials(mu, f, ts, component=j)
    ev.append(Evidence("drift", {
        "verdict": Convergence.DIVERGENT,
        "rule": (f"mask is the {cert['side']} sign set of h_{j}; the base drift converges "
                 "while int |h_j| = inf, so both signed parts diverge"),
        "partials": _partials_record(ts, G)}))
    dc = Status.NONMEMBER if cert.get("log_log") else Status.UNDETERMINED
    if cert.get("log_log"):
        ev.append(Evidence("compensator-q", {
            "rule": ("tail int_(|x|>s) x_j nu ~ c/log s with f = 1/s: for every q the masked "
                     "drift int 1_D (h_j - q_j/s) ds diverges along a sequence t_n")}))
    st = _status_from(Status.MEMBER, Status.NONMEMBER, Status.NONMEMBER, dc)
    return DomainVerdict(**st, evidence=tuple(ev))


# ---------------------------------------------------------------------------
# sign sets and defeating masks

def _sign_grid(lo: float, hi: float, breaks) -> np.ndarray:
    pts = {lo, hi, *breaks}
    if lo < 1.0:
        pts.update(np.linspace(lo, min(hi, 1.0), GRID_PER_DOUBLING + 1).tolist())
    g_lo = max(lo, 1.0)
    if hi > g_lo:
        n = max(2, math.ceil(math.log2(hi / g_lo) * GRID_PER_DOUBLING) + 1)
        pts.update(np.geomspace(g_lo, hi, n).tolist())
    return np.array(sorted(p for p in pts if lo <= p <= hi))


def sign_sets(h: DriftIntegrand, j: int = 0, window=None):
    """(D+, D-, D0): where h_j > 0, < 0 and = 0 inside the window.

    h_j is sampled on a geometric grid refined at the integrand's
    breakpoints; every sign change inside a continuous piece is located by
    bracketing.
    """
    f = h.f
    if window is None:
        window = (max(f.support_start, 1.0), float(default_checkpoints(f)[-1]))
    lo, hi = float(window[0]), float(window[1])
    if hi <= lo:
        return MaskSet(), MaskSet(), MaskSet()
    if h.is_zero:
        return MaskSet(), MaskSet(), MaskSet([(lo, hi)])
    try:
        breaks = f.breakpoints(lo, hi)
    except Exception as exc:
        raise RootIsolationFailure(f"cannot list breakpoints on [{lo}, {hi}): {exc}") from exc
    if len(breaks) > ROOT_BUDGET:
        raise RootIsolationFailure(f"{len(breaks)} breakpoints exceed the budget {ROOT_BUDGET}")
    bset = set(breaks) | {hi}
    x = _sign_grid(lo, hi, breaks)

    def hj(s):
        return h(np.atleast_1d(s))[:, j]

    right = hj(x[:-1])                       # value just right of each node
    ends = np.array([np.nextafter(b, -np.inf) if b in bset else b for b in x[1:]])
    left = hj(ends)                          # value just left of the next node
    sa, sb = np.sign(right), np.sign(left)
    changes = int(np.count_nonzero(sa * sb < 0))
    if changes > ROOT_BUDGET:
        raise RootIsolationFailure(f"{changes} sign changes exceed the budget {ROOT_BUDGET}")
    segs = {1.0: [], -1.0: [], 0.0: []}
    for i in range(len(x) - 1):
        a, b, u, v = x[i], x[i + 1], sa[i], sb[i]
        if u == v:
            segs[u].append((a, b))
        elif u * v < 0:
            r = brentq(lambda s: float(hj(s)[0]), a, ends[i], xtol=1e-12 * max(1.0, a), maxiter=200)
            segs[u].append((a, r))
            segs[v].append((r, b))
        else:
            segs[u or v].append((a, b))
    return MaskSet(segs[1.0]), MaskSet(segs[-1.0]), MaskSet(segs[0.0])


@dataclass
class DefeatingMask:
    j: int
    D: LazyMaskSet
    side: str
    partials: list
    weights: dict
    verified: bool

    def __iter__(self):
        return iter((self.j, self.D, self.side))


def _log_log_tail(nu, j: int, ks=range(8, 41)) -> tuple[float, float]:
    """Fit |int_(|x|>s) x_j nu| ~ c / log s over s = 2^k; returns (c, relative spread)."""
    s = 2.0 ** np.array(list(ks), dtype=float)
    vals = np.array([abs(float(np.asarray(nu.signed_tail(x))[j])) for x in s]) * np.log(s)
    c = float(np.median(vals))
    if c <= 0.0:
        return 0.0, math.inf
    return c, float(np.max(np.abs(vals / c - 1.0)))


def _loglog_weight(mask: MaskSet, lo: float, hi: float) -> float:
    """int_(D ∩ [e, hi]) ds / (s log s) = sum of log log increments."""
    tot = 0.0
    for a, b in mask.intervals_in(max(lo, math.e), hi):
        tot += math.log(math.log(b)) - math.log(math.log(a))
    return tot


def build_defeating_mask(mu: Triplet, f1: IntegrandFn, k_max: int = 32) -> DefeatingMask:
    """Sign-set mask D with int 1_D h_j ds -> ±inf, so mu leaves D for f1 1_D."""
    v = classify(mu, f1)
    if not (v.D is Status.MEMBER and v.D0 is Status.NONMEMBER):
        raise HypothesisViolated(
            f"need D Member and D0 NonMember for the base integrand, got D={v.D.value}, "
            f"D0={v.D0.value}")
    h = DriftIntegrand(mu, f1)
    ts = default_checkpoints(f1, k_max)
    a, T = float(ts[0]), float(ts[-1])
    totals = [float(drift_partials(mu, f1, ts, absolute=True, component=j)[-1])
              for j in range(mu.dim)]
    j = int(np.argmax(totals))
    plus, minus, _ = sign_sets(h, j, (a, T))
    w = {"+": _loglog_weight(plus, a, T), "-": _loglog_weight(minus, a, T)}
    side = "+" if w["+"] >= w["-"] else "-"
    pick = 0 if side == "+" else 1

    def oracle(lo, hi):
        return sign_sets(h, j, (lo, hi))[pick].intervals_in(lo, hi)

    D = LazyMaskSet(oracle, start=a, label=f"D{side}(h_{j})")
    c, spread = _log_log_tail(mu.nu, j) if not mu.nu.symmetric else (0.0, math.inf)
    D.certificate = {
        "coordinate": j, "side": side, "mu_hash": mu.config_hash(), "base_spec": f1.spec(),
        "log_log": bool(isinstance(f1, InvS) and f1.mask is None and c > 0 and spread < 0.15),
    }
    G = drift_partials(mu, apply_mask(f1, D), ts, component=j)
    sgn = 1.0 if side == "+" else -1.0
    tail = sgn * G[-5:]
    verified = bool(np.all(np.diff(tail) > 0) and tail[-1] > 0)
    return DefeatingMask(j, D, side, _partials_record(ts, G), w, verified)


@dataclass
class T5aReport:
    coordinate: int
    c_tail: float
    tail_spread: float
    c_fit: float
    table: list           # [t, int_1^t |h_j|, ratio to log log t]
    ratio_ok: bool
    side: str
    mask: LazyMaskSet
    q_rows: list          # per q: q, final partial, monotone tail flag, partials
    q_lsq: float

    def to_json(self) -> dict:
        d = {k: getattr(self, k) for k in ("coordinate", "c_tail", "tail_spread", "c_fit",
                                            "table", "ratio_ok", "side", "q_lsq", "q_rows")}
        d["mask"] = [list(iv) for iv in self.mask.intervals_in(0.0, self.table[-1][0])]
        return _jsonable(d)


def verify_t5a(mu: Triplet, checkpoints=None, fit_from: float = 2.0 ** 16) -> T5aReport:
    """Numerical evidence that the sign-set mask defeats compensation for f = 1/s.

    Checks the hypotheses (D membership for 1/s, and a first-moment tail of
    order c/log s in some coordinate), tabulates int_1^t |h_j| against
    log log t, and for a grid of q containing the least-squares optimum
    records the masked compensated drift int 1_D (h_j - q/s) ds.
    """
    f = InvS()
    ts = (2.0 ** np.arange(0, 33) if checkpoints is None
          else np.asarray(checkpoints, dtype=float))
    if mu.nu.is_zero or mu.nu.symmetric:
        raise HypothesisViolated("tail condition fails: int_(|x|>s) x nu vanishes for symmetric nu")
    fits = [_log_log_tail(mu.nu, j) for j in range(mu.dim)]
    j = int(np.argmax([c for c, _ in fits]))
    c, spread = fits[j]
    if c <= 0.0 or spread >= 0.15:
        raise HypothesisViolated(f"tail condition fails: |tail| log s is not stable (spread {spread:.3g})")
    v = classify(mu, f)
    if v.D is not Status.MEMBER:
        raise HypothesisViolated(f"mu is not in D for 1/s (got {v.D.value})")

    H = drift_partials(mu, f, ts, component=j, absolute=True)
    table = []
    for t, val in zip(ts, H):
        ll = math.log(math.log(t)) if t > math.e else float("nan")
        table.append([float(t), float(val), float(val / ll) if ll > 0 else float("nan")])
    sel = ts >= fit_from
    if sel.sum() >= 2:
        c_fit = float(np.polyfit(np.log(np.log(ts[sel])), H[sel], 1)[0])
    else:
        c_fit = float("nan")
    ratio_ok = bool(abs(table[-1][2] / c - 1.0) <= 0.15)

    dm = build_defeating_mask(mu, f, k_max=int(round(math.log2(ts[-1]))))
    fm = apply_mask(f, dm.D)
    A = drift_partials(mu, fm, ts, component=j)
    B = np.array([fm.integral(0.0, float(t)) for t in ts])
    q_lsq = float(_lsq_compensator(A[:, None], B)[0])
    rows = []
    for q in sorted({0.0, q_lsq, c, -c, 0.1 * c, -0.1 * c, 10 * q_lsq}):
        G = A - q * B
        tail = np.abs(G[-5:])
        rows.append({"q": q, "final": float(G[-1]),
                     "monotone_tail": bool(np.all(np.diff(tail) > 0)),
                     "partials": _partials_record(ts, G)})
    return T5aReport(j, c, spread, c_fit, table, ratio_ok, dm.side, dm.D, rows, q_lsq)
