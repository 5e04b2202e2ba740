"""Randomized verification suites for the domain classifier.

The monotonicity suite draws (mu, f1, f2) with |f2| <= |f1| and checks the
inclusions that hold in general:

    de-monotone        mu in De(f1)  =>  mu in De(f2)
    d0-monotone        mu in D0(f1)  =>  mu in D0(f2)
    dc-symmetric       nu symmetric, mu in Dc(f1)  =>  mu in Dc(f2)
    d-symmetric        nu symmetric, gamma = 0, mu in D(f1)  =>  mu in D(f2)
    d-inclusion        mu in D(f1), and either mu in D0(f1) or f2 has D = De,
                       =>  mu in D(f2)

A check is violated only when its premise is Member and its conclusion is
NonMember; draws with an Undetermined verdict in a check are counted apart.

The log-moment suite compares the four verdicts for exponential integrands
e^(-c s^alpha) with a direct p-series test of int (log+ |x|)^(1/alpha) nu(dx).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .classifier import Status, classify
from .core import Triplet
from .integrands import (AlternatingInvS, ExpDecay, InvS, MaskSet, PowerDecay, apply_mask,
                         dominates, integrand_spec)
from .measures import AnalyticTail, FiniteAtomic

CHECKS = ("de-monotone", "d0-monotone", "dc-symmetric", "d-symmetric", "d-inclusion")
POW_ALPHAS = (0.3, 0.7, 1.0, 1.5, 1.9, 3.0)
EXP_GRID = tuple((c, a) for c in (0.5, 1.0, 2.0) for a in (0.5, 1.0, 2.0))

M, N, U = Status.MEMBER, Status.NONMEMBER, Status.UNDETERMINED


# ---------------------------------------------------------------------------
# random draws

def _directions(rng, dim, n):
    v = rng.standard_normal((n, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def random_atomic(rng, dim: int = 1, symmetric: bool = False, max_atoms: int = 3) -> FiniteAtomic:
    n = int(rng.integers(1, max_atoms + 1))
    r = np.exp(rng.uniform(math.log(0.1), math.log(50.0), n))
    pts = _directions(rng, dim, n) * r[:, None]
    w = rng.uniform(0.2, 2.0, n)
    if symmetric:
        pts, w = np.concatenate([pts, -pts]), np.concatenate([w, w])
    return FiniteAtomic(pts, w, dim=dim)


def random_tail(rng, dim: int = 1, symmetric: bool = False, kind: str | None = None) -> AnalyticTail:
    kind = kind or ("pareto" if rng.random() < 0.5 else "log_atoms")
    alpha = float(rng.uniform(0.2, 1.9) if kind == "pareto" else rng.uniform(1.2, 4.0))
    xi = _directions(rng, dim, 1)
    w = np.array([float(rng.uniform(0.5, 2.0))])
    if symmetric:
        xi, w = np.concatenate([xi, -xi]), np.concatenate([w, w])
    return AnalyticTail(xi, w, alpha=alpha, kappa=float(rng.uniform(0.5, 2.0)), kind=kind)


def random_triplet(rng, *, dim: int | None = None, symmetric: bool | None = None) -> Triplet:
    dim = dim or (1 if rng.random() < 0.8 else 2)
    symmetric = bool(rng.random() < 0.4) if symmetric is None else symmetric
    A = np.zeros((dim, dim))
    if rng.random() < 0.4:
        L = rng.standard_normal((dim, dim))
        A = L @ L.T
    u = rng.random()
    if u < 0.15 and np.any(A):
        nu = FiniteAtomic.zero(dim)
    elif u < 0.6:
        nu = random_atomic(rng, dim, symmetric)
    else:
        nu = random_tail(rng, dim, symmetric)
    gamma = np.zeros(dim) if rng.random() < 0.35 else rng.standard_normal(dim)
    return Triplet(A, nu, gamma)


def random_mask(rng) -> MaskSet:
    """A few bounded intervals, optionally followed by an unbounded one."""
    cuts = np.sort(np.exp(rng.uniform(0.0, math.log(1e3), 2 * int(rng.integers(1, 4)))))
    ivs = [(float(a), float(b)) for a, b in zip(cuts[::2], cuts[1::2])]
    if rng.random() < 0.6:
        ivs.append((float(cuts[-1]) * 2.0, math.inf))
    return MaskSet(ivs)


def _random_base(rng):
    u = rng.random()
    if u < 0.4:
        return PowerDecay(alpha=float(rng.choice(POW_ALPHAS)))
    if u < 0.75:
        c, a = EXP_GRID[int(rng.integers(len(EXP_GRID)))]
        return ExpDecay(c=c, alpha=a)
    return InvS() if rng.random() < 0.5 else AlternatingInvS()


def random_pair(rng):
    """(f1, f2) with |f2| <= |f1| everywhere."""
    f1 = _random_base(rng)
    u = rng.random()
    if u < 0.45:
        f2 = apply_mask(f1, random_mask(rng))
    elif isinstance(f1, PowerDecay) and not isinstance(f1, InvS):
        smaller = [a for a in POW_ALPHAS if a <= f1.alpha]
        f2 = PowerDecay(alpha=float(rng.choice(smaller)))
    elif isinstance(f1, ExpDecay):
        f2 = ExpDecay(c=f1.c * float(rng.choice([1.0, 2.0, 4.0])), alpha=f1.alpha)
    elif isinstance(f1, InvS):
        f2 = AlternatingInvS()
    elif isinstance(f1, AlternatingInvS):
        f2 = InvS()
    else:
        f2 = apply_mask(f1, random_mask(rng))
    return f1, f2


# ---------------------------------------------------------------------------
# monotonicity suite

def _d_equals_de(f) -> bool:
    """Families whose D and De coincide for every mu (unmasked only)."""
    if f.mask is not None:
        return False
    if isinstance(f, ExpDecay):
        return True
    return isinstance(f, PowerDecay) and not isinstance(f, InvS) and f.decay > 1.0


def check_draw(mu: Triplet, f1, f2, v1=None, v2=None) -> dict:
    """{check: 'pass' | 'fail' | 'undetermined' | 'n/a'} for one draw."""
    v1 = v1 or classify(mu, f1)
    v2 = v2 or classify(mu, f2)
    sym = bool(getattr(mu.nu, "symmetric", False))

    def implies(premise, concl):
        if premise is N:
            return "pass"
        if premise is U:
            return "undetermined"
        if concl is N:
            return "fail"
        return "undetermined" if concl is U else "pass"

    out = {"de-monotone": implies(v1.De, v2.De), "d0-monotone": implies(v1.D0, v2.D0)}
    out["dc-symmetric"] = implies(v1.Dc, v2.Dc) if sym else "n/a"
    out["d-symmetric"] = implies(v1.D, v2.D) if sym and not np.any(mu.gamma) else "n/a"
    if v1.D0 is M or _d_equals_de(f2):
        out["d-inclusion"] = implies(v1.D, v2.D)
    elif v1.D is N:
        out["d-inclusion"] = "pass"
    else:
        out["d-inclusion"] = "n/a"
    return out


@dataclass
class SuiteReport:
    name: str
    draws: int
    seed: int
    passed: dict = field(default_factory=dict)
    failed: dict = field(default_factory=dict)
    undetermined: dict = field(default_factory=dict)
    undetermined_draws: int = 0
    failures: list = field(default_factory=list)

    @property
    def undetermined_fraction(self) -> float:
        return self.undetermined_draws / self.draws if self.draws else 0.0

    @property
    def ok(self) -> bool:
        return not any(self.failed.values()) and self.undetermined_fraction < 0.1

    def lines(self) -> list[str]:
        out = []
        for c in self.passed:
            flag = "PASS" if self.failed[c] == 0 else "FAIL"
            out.append(f"{flag} {c}: {self.passed[c]} pass, {self.failed[c]} fail, "
                       f"{self.undetermined[c]} undetermined")
        out.append(f"undetermined draws: {self.undetermined_draws}/{self.draws}")
        return out

    def to_json(self) -> dict:
        return {"suite": self.name, "draws": self.draws, "seed": self.seed, "passed": self.passed,
                "failed": self.failed, "undetermined": self.undetermined,
                "undetermined_draws": self.undetermined_draws, "failures": self.failures,
                "ok": self.ok}


def monotonicity_suite(draws: int = 200, seed: int = 7) -> SuiteReport:
    rng = np.random.default_rng(seed)
    rep = SuiteReport("monotonicity", draws, seed, {c: 0 for c in CHECKS},
                      {c: 0 for c in CHECKS}, {c: 0 for c in CHECKS})
    for i in range(draws):
        mu = random_triplet(rng)
        f1, f2 = random_pair(rng)
        assert dominates(f1, f2, (0.0, 1e4), grid=256)
        res = check_draw(mu, f1, f2)
        if "undetermined" in res.values():
            rep.undetermined_draws += 1
        for c, r in res.items():
            if r == "pass":
                rep.passed[c] += 1
            elif r == "fail":
                rep.failed[c] += 1
                rep.failures.append({"draw": i, "check": c, "mu": mu.to_json(),
                                     "f1": integrand_spec(f1), "f2": integrand_spec(f2)})
            elif r == "undetermined":
                rep.undetermined[c] += 1
    return rep


# ---------------------------------------------------------------------------
# log-moment suite

def random_log_atomic(rng, dim: int = 1):
    """Finite atoms or e^n-atoms with mass n^-alpha, plus random A and gamma."""
    A = np.zeros((dim, dim))
    if rng.random() < 0.3:
        L = rng.standard_normal((dim, dim))
        A = L @ L.T
    if rng.random() < 0.4:
        nu = random_atomic(rng, dim, bool(rng.random() < 0.5))
    else:
        nu = random_tail(rng, dim, bool(rng.random() < 0.5), kind="log_atoms")
    return Triplet(A, nu, rng.standard_normal(dim))


def log_moment_series_finite(nu, p: float) -> bool:
    """Direct test of int (log+ |x|)^p nu(dx) < inf.

    Finite atoms give a finite sum.  Atoms e^n with mass ~ n^-a give
    sum n^(p - a), a p-series that converges iff a - p > 1.
    """
    if isinstance(nu, FiniteAtomic):
        return True
    if isinstance(nu, AnalyticTail) and nu.kind == "log_atoms":
        return nu.alpha - p > 1.0
    raise TypeError(f"no series test for {type(nu).__name__}")


def log_moment_suite(n_measures: int = 50, seed: int = 7) -> SuiteReport:
    rng = np.random.default_rng(seed)
    name = "log-moment"
    rep = SuiteReport(name, n_measures * len(EXP_GRID), seed, {name: 0}, {name: 0}, {name: 0})
    for i in range(n_measures):
        mu = random_log_atomic(rng, 1 if rng.random() < 0.8 else 2)
        for c, a in EXP_GRID:
            v = classify(mu, ExpDecay(c=c, alpha=a))
            want = M if log_moment_series_finite(mu.nu, 1.0 / a) else N
            got = set(v.as_dict().values())
            if got == {want}:
                rep.passed[name] += 1
            else:
                rep.failed[name] += 1
                if U in got:
                    rep.undetermined[name] += 1
                    rep.undetermined_draws += 1
                rep.failures.append({"measure": i, "c": c, "alpha": a, "want": want.value,
                                     "got": {k: s.value for k, s in v.as_dict().items()}})
    return rep


SUITES = {"monotonicity": monotonicity_suite, "log-moment": log_moment_suite}
