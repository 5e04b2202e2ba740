"""Monte Carlo for finite-activity Levy processes and their deterministic integrals.

Paths are compound Poisson plus a Brownian part and a linear drift.  Y_t = int_0^t f dX is evaluated exactly on the jumps.  Masks
D^p that partition the time axis split Y_t into components Y_t^p that add up
to Y_t pathwise.

Every path draws from its own Philox stream keyed by (seed, path index), so
results do not depend on how paths are spread over workers.

Long horizons for the block measure use a band surrogate.  On the time band
[2^j, 2^(j+1)) only the jumps larger than delta 2^j are drawn.  The smaller
jumps are replaced, on each mask piece, by a Gaussian with their exact mean
and covariance.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _accel, _blocks
from .core import Triplet
from .errors import ConfigError, InfiniteActivity, UnsupportedMeasure
from .integrands import IntegrandFn, MaskSet, apply_mask
from .measures import AnalyticTail, BlockE2, FiniteAtomic, ScaledMeasure

TABLE_N = 1 << 22          # block radii up to here come from an inverse-cdf table
BAND_TOP = 62              # radial bands 2^j < k <= 2^(j+1) for j < BAND_TOP
Z99 = 2.5758293035489004   # two-sided 99% normal quantile


def rng_for(seed: int, path: int, stream: int = 0) -> np.random.Generator:
    """Counter-based stream for one path; ``stream`` selects a disjoint counter range."""
    key = (int(seed) & (2 ** 64 - 1)) | (int(path) << 64)
    return np.random.Generator(np.random.Philox(key=key, counter=[0, 0, 0, int(stream)]))


# ---------------------------------------------------------------------------
# jump laws

@lru_cache(maxsize=1)
def _block_table():
    k, c = _blocks.weights(2, TABLE_N)
    w = np.abs(c) / k
    cum = np.cumsum(w)
    sign = np.sign(c)
    return cum, sign


def _k_sign(k: np.ndarray) -> np.ndarray:
    """Sign of c_k for arbitrary (possibly huge) integer radii."""
    out = np.empty(k.size)
    for i, kk in enumerate(k.tolist()):
        kk = int(kk)
        m = _blocks.block_of(kk)
        out[i] = _blocks.boundary_sign(m) if kk == _blocks.boundary(m) else _blocks.interior_sign(m)
    return out


@dataclass
class _Band:
    lo: int
    hi: int
    interior: float                  # interior mass
    boundaries: tuple = ()           # (k, mass) of boundary atoms inside

    @property
    def mass(self) -> float:
        return self.interior + sum(m for _, m in self.boundaries)


def _band(lo: int, hi: int) -> _Band:
    bnd = []
    m = _blocks.block_of(lo)
    while _blocks.boundary(m) <= hi:
        B = _blocks.boundary(m)
        if B >= lo:
            bnd.append((B, (_blocks.inv_log(B) + _blocks.inv_log(B + 1)) / B))
        m += 1
    total = float(_blocks.tail_series(lambda x: 1.0 / x, lo, signed=False, k_far=hi))
    return _Band(lo, hi, total - sum(w for _, w in bnd), tuple(bnd))


def _sample_band(band: _Band, n: int, rng: np.random.Generator) -> np.ndarray:
    """n radii from the block weights restricted to [lo, hi] (exact, by rejection).

    Interior proposal: x with density ~ x^-2 on [lo, hi+1), k = floor(x), so
    q(k) ~ 1/(k(k+1)); the target |c_k|/k = log_gap(k)/k has ratio
    (k+1) log_gap(k) to it, decreasing in k.
    """
    out = np.empty(n, dtype=np.float64)
    if n == 0:
        return out
    u = rng.random(n)
    is_b = np.zeros(n, dtype=bool)
    acc = 0.0
    for B, w in band.boundaries:
        sel = (u >= acc / band.mass) & (u < (acc + w) / band.mass)
        out[sel] = float(B)
        is_b |= sel
        acc += w
    need = np.flatnonzero(~is_b)
    lo, hi1 = float(band.lo), float(band.hi) + 1.0
    bset = {float(B) for B, _ in band.boundaries}
    ratio_max = (lo + 1.0) * float(_blocks.log_gap(lo))
    while need.size:
        m = need.size
        x = 1.0 / (1.0 / lo - rng.random(m) * (1.0 / lo - 1.0 / hi1))
        k = np.minimum(np.floor(x), float(band.hi))
        ok = rng.random(m) * ratio_max <= (k + 1.0) * _blocks.log_gap(k)
        if bset:
            ok &= ~np.isin(k, list(bset))
        out[need[ok]] = k[ok]
        need = need[~ok]
    return out


class _BlockRadial:
    """Radial law |c_k|/k on k > K_min (k >= 2), sampled exactly."""

    def __init__(self, k_min: int = 1):
        cum, sign = _block_table()
        self.k_min = max(int(k_min), 1)
        self.cum, self.sign = cum, sign
        lo_idx = self.k_min - 1          # cum index of k = k_min is k_min - 2
        self.cum_lo = float(cum[lo_idx - 1]) if lo_idx >= 1 and self.k_min < TABLE_N else (
            float(cum[-1]) if self.k_min >= TABLE_N else 0.0)
        self.table_mass = float(cum[-1]) - self.cum_lo if self.k_min < TABLE_N else 0.0
        self.bands = []
        j = max(22, int(self.k_min).bit_length() - 1)
        while j < BAND_TOP:
            lo = max((1 << j) + 1, self.k_min + 1)
            hi = 1 << (j + 1)
            if lo <= hi:
                self.bands.append(_band(lo, hi))
            j += 1
        self.band_mass = np.array([b.mass for b in self.bands])
        self.mass = self.table_mass + float(self.band_mass.sum())
        self.dropped = _blocks.tail_mass_bound(1 << BAND_TOP)

    def sample(self, n_table: int, n_bands: np.ndarray, rng: np.random.Generator):
        """(radii, signs) for the given counts per component."""
        parts = []
        if n_table:
            u = self.cum_lo + rng.random(n_table) * self.table_mass
            idx = np.minimum(np.searchsorted(self.cum, u, side="right"), self.cum.size - 1)
            parts.append((idx + 2.0, self.sign[idx]))
        for b, cnt in zip(self.bands, n_bands):
            if cnt:
                k = _sample_band(b, int(cnt), rng)
                parts.append((k, _k_sign(k)))
        if not parts:
            return np.empty(0), np.empty(0)
        return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])

    def draw(self, rate_time: float, rng: np.random.Generator):
        """Radii and signs of a Poisson(rate_time * mass) sample."""
        n_table = int(rng.poisson(rate_time * self.table_mass)) if self.table_mass > 0 else 0
        n_bands = rng.poisson(rate_time * self.band_mass) if self.bands else np.zeros(0, int)
        return self.sample(n_table, n_bands, rng)


@dataclass
class JumpLaw:
    """Finite jump law: rate ν(R^d) and an exact sampler of sizes."""
    nu: object
    rate: float
    dropped: float = 0.0

    def draw(self, duration: float, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError


class _AtomicLaw(JumpLaw):
    def __init__(self, nu, points, masses, dropped=0.0):
        super().__init__(nu, float(np.sum(masses)), dropped)
        self.points = np.asarray(points, dtype=float)
        self.cum = np.cumsum(masses)

    def draw(self, duration, rng):
        n = int(rng.poisson(duration * self.rate)) if self.rate > 0 else 0
        if n == 0:
            return np.zeros((0, self.points.shape[1] if self.points.ndim == 2 else 1))
        idx = np.searchsorted(self.cum, rng.random(n) * self.cum[-1], side="right")
        return self.points[np.minimum(idx, len(self.points) - 1)]


class _BlockLaw(JumpLaw):
    def __init__(self, nu: BlockE2, k_min: int = 1):
        self.radial = _BlockRadial(k_min)
        self.lam = nu.lam
        self.xi = nu.directions
        ex = nu.extra if k_min < 2 else None
        self.extra = None if ex is None else _AtomicLaw(ex, ex.atoms()[0], ex.atoms()[1])
        rate = nu.lam_total * self.radial.mass + (0.0 if ex is None else ex.total_mass())
        super().__init__(nu, rate, nu.lam_total * self.radial.dropped)

    def draw(self, duration, rng):
        k, sgn = self.radial.draw(duration * float(self.lam.sum()), rng)
        dirs = self.xi[np.searchsorted(np.cumsum(self.lam), rng.random(k.size) * self.lam.sum(),
                                       side="right").clip(0, len(self.lam) - 1)]
        x = (k * sgn)[:, None] * dirs
        if self.extra is not None:
            x = np.concatenate([x, self.extra.draw(duration, rng)])
        return x


class _ParetoLaw(JumpLaw):
    def __init__(self, nu: AnalyticTail):
        super().__init__(nu, nu.total_mass())
        self.w = np.asarray(nu.weights, dtype=float)
        self.xi = nu.directions
        self.alpha = nu.alpha

    def draw(self, duration, rng):
        n = int(rng.poisson(duration * self.rate))
        r = rng.random(n) ** (-1.0 / self.alpha)
        idx = np.searchsorted(np.cumsum(self.w), rng.random(n) * self.w.sum(), side="right")
        return r[:, None] * self.xi[idx.clip(0, len(self.w) - 1)]


def jump_law(nu) -> JumpLaw:
    if isinstance(nu, FiniteAtomic):
        pts, ms, _ = nu.atoms()
        return _AtomicLaw(nu, pts, ms)
    if isinstance(nu, BlockE2):
        return _BlockLaw(nu)
    if isinstance(nu, AnalyticTail) and nu.kind == "pareto":
        return _ParetoLaw(nu)
    if isinstance(nu, (AnalyticTail, ScaledMeasure)):
        try:
            pts, ms, dropped = nu.atoms()
        except (NotImplementedError, UnsupportedMeasure) as exc:
            raise InfiniteActivity(f"cannot sample {type(nu).__name__}") from exc
        return _AtomicLaw(nu, pts, ms, dropped)
    raise InfiniteActivity(f"no finite-activity sampler for {type(nu).__name__}")


def _cp_location(nu) -> np.ndarray:
    """int x/(1+|x|^2) nu(dx): the drift a compound Poisson sum carries relative to gamma."""
    if nu.is_zero:
        return np.zeros(nu.dim)
    if isinstance(nu, AnalyticTail) and nu.kind == "pareto":
        from scipy.integrate import quad
        a = nu.alpha
        rad = quad(lambda r: r ** -a / (1 + r * r), 1.0, np.inf)[0] * a * nu.kappa
        return rad * (nu.weights @ nu.directions)
    fm = getattr(nu, "first_moment", None)
    if fm is not None:
        return np.asarray(fm()) - np.asarray(nu.centered_mean_term())
    try:
        pts, ms, _ = nu.atoms()
    except (NotImplementedError, UnsupportedMeasure) as exc:
        raise ConfigError(f"no compound Poisson drift for {type(nu).__name__}") from exc
    return (ms / (1 + np.sum(pts ** 2, axis=1))) @ pts


def drift_rate(mu: Triplet) -> np.ndarray:
    """b with X_t = (jumps) + (Brownian) + b t having triplet (tA, t nu, t gamma)."""
    return np.asarray(mu.gamma, dtype=float) - _cp_location(mu.nu)


# ---------------------------------------------------------------------------
# paths and integrals

@dataclass
class PathRealization:
    T: float
    times: np.ndarray                 # sorted jump times in (0, T]
    sizes: np.ndarray                 # (n, d)
    drift_rate: np.ndarray
    seed: int
    path_index: int = 0
    A: np.ndarray | None = None       # Gaussian covariance; int f dW is drawn per grid cell
    truncation_bound: float = 0.0     # jump mass not represented by the sampler

    @property
    def dim(self) -> int:
        return self.drift_rate.size


def _gauss_grid(T: float, per_doubling: int = 16) -> np.ndarray:
    head = np.linspace(0.0, min(1.0, T), per_doubling + 1)
    if T <= 1.0:
        return head
    n = max(1, math.ceil(math.log2(T) * per_doubling))
    return np.concatenate([head, np.geomspace(1.0, T, n + 1)[1:]])


def _sqrt_psd(A: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(A)
    return v * np.sqrt(np.clip(w, 0.0, None))


def _draw_jumps(law: JumpLaw, T: float, rng, dim: int):
    x = law.draw(T, rng).reshape(-1, dim)
    t = rng.random(x.shape[0]) * T
    order = np.argsort(t, kind="stable")
    return t[order], x[order]


def sample_path(mu: Triplet, T: float, seed: int, path_index: int = 0, *,
                law: JumpLaw | None = None,
                b: np.ndarray | None = None) -> PathRealization:
    """One path on (0, T]: compound Poisson jumps and drift; the Gaussian part is
    drawn per integrand in ``integrate_path`` from the path's own substreams."""
    T = float(T)
    if not T > 0:
        raise ConfigError("T must be positive")
    rng = rng_for(seed, path_index)
    d = mu.dim
    b = drift_rate(mu) if b is None else b
    if mu.nu.is_zero:
        times, sizes, dropped = np.zeros(0), np.zeros((0, d)), 0.0
    else:
        law = law or jump_law(mu.nu)
        times, sizes = _draw_jumps(law, T, rng, d)
        dropped = law.dropped
    A = np.asarray(mu.A, dtype=float) if np.any(mu.A) else None
    return PathRealization(T, times, sizes, b, int(seed), int(path_index), A, dropped)


@dataclass
class Partition:
    """Labelled disjoint intervals covering [0, T); uncovered time gets label 'rest'."""
    labels: list
    masks: list                      # MaskSet per label (materialized on [0, T])
    edges: np.ndarray
    seg_labels: np.ndarray           # label index per segment between edges

    @classmethod
    def build(cls, masks: dict | None, T: float) -> "Partition":
        if not masks:
            return cls(["all"], [None], np.zeros(0), np.zeros(1, dtype=np.int64))
        labels = list(masks)
        rest = len(labels)
        ivs = sorted((l, r, i) for i, lab in enumerate(labels)
                     for l, r in masks[lab].intervals_in(0.0, T) if r > l)
        # seg[j] labels the times s with exactly j edges <= s
        edges, seg, cur = [], [rest], 0.0
        for l, r, i in ivs:
            if l < cur - 1e-12 * max(1.0, cur):
                raise ConfigError("masks overlap")
            edges += [l, r]
            seg += [i, rest]
            cur = r
        return cls._merged(labels + ["rest"], [masks[x] for x in labels] + [None], edges, seg)

    @classmethod
    def _merged(cls, names, lab_masks, edges, seg):
        """Drop repeated edges and merge equal neighbouring labels."""
        e2, s2 = [], [seg[0]]
        for e, lab in zip(edges, seg[1:]):
            if e2 and e <= e2[-1]:
                s2[-1] = lab
                if len(s2) > 1 and s2[-2] == lab:
                    e2.pop()
                    s2.pop()
                continue
            if lab == s2[-1]:
                continue
            e2.append(e)
            s2.append(lab)
        return cls(names, lab_masks, np.array(e2, dtype=float), np.array(s2, dtype=np.int64))

    def label_of(self, s) -> np.ndarray:
        return self.seg_labels[np.searchsorted(self.edges, np.asarray(s, dtype=float), side="right")]

    def pieces(self, lo: float, hi: float):
        """(l, r, label) segments of the partition inside [lo, hi)."""
        cuts = [lo] + [e for e in self.edges.tolist() if lo < e < hi] + [hi]
        out = []
        for l, r in zip(cuts[:-1], cuts[1:]):
            if r > l:
                out.append((l, r, int(self.label_of(0.5 * (l + r)))))
        return out

    def masked(self, f: IntegrandFn, label: int, T: float) -> IntegrandFn:
        ivs = [(l, r) for l, r, lab in self.pieces(0.0, T) if lab == label]
        return apply_mask(f, MaskSet(ivs))


@dataclass
class IntegralSample:
    times: np.ndarray
    values: np.ndarray                         # (n_cp, d)
    components: dict = field(default_factory=dict)   # label -> (n_cp, d)


def _drift_parts(f: IntegrandFn, b: np.ndarray, part: Partition, ts: np.ndarray) -> np.ndarray:
    """(n_cp, n_labels, d) of b int_0^t 1_{D^p} f ds."""
    out = np.zeros((ts.size, len(part.labels), b.size))
    if not np.any(b):
        return out
    T = float(ts[-1])
    for lab in range(len(part.labels)):
        g = part.masked(f, lab, T) if part.labels != ["all"] else f
        vals = np.array([g.integral(0.0, float(t)) for t in ts])
        out[:, lab, :] = vals[:, None] * b[None, :]
    return out


def _gauss_pseudo_jumps(f: IntegrandFn, path: PathRealization, part: Partition, ts):
    """int f dW as pseudo-jumps, exact in law.

    On each grid cell S = int_cell f dW ~ N(0, int_cell f^2 A) comes from
    substream 2.  A cell cut by the partition into pieces with variances v_j
    gets X_j + (v_j / v)(S - sum X_k), X_j ~ N(0, v_j A) from substream 3,
    the conditional law of the pieces given their sum.  The grid contains the
    checkpoints, so no piece straddles one.  Hence the total does
    not depend on the masks and the pieces add up to it exactly.
    """
    d = path.dim
    if path.A is None:
        return np.zeros(0), np.zeros((0, d))
    L = _sqrt_psd(path.A)
    ts = np.asarray(ts, dtype=float)
    grid = np.union1d(_gauss_grid(float(ts[-1])), ts)
    rs = rng_for(path.seed, path.path_index, stream=2)
    rp = rng_for(path.seed, path.path_index, stream=3)
    z = rs.standard_normal((grid.size - 1, d))
    times, contrib = [], []
    for (g0, g1), zc in zip(zip(grid[:-1], grid[1:]), z):
        pcs = part.pieces(g0, g1)
        v = np.array([f.sq_integral(l, r) for l, r, _ in pcs])
        vt = float(v.sum())
        if vt <= 0.0:
            continue
        S = math.sqrt(vt) * (L @ zc)
        if len(pcs) == 1:
            xs = [S]
        else:
            X = np.sqrt(v)[:, None] * (rp.standard_normal((len(pcs), d)) @ L.T)
            xs = list(X + np.outer(v / vt, S - X.sum(axis=0)))
        for (l, r, _), x in zip(pcs, xs):
            times.append(0.5 * (l + r))
            contrib.append(x)
    if not times:
        return np.zeros(0), np.zeros((0, d))
    return np.array(times), np.array(contrib)


def integrate_path(f: IntegrandFn, path: PathRealization, checkpoints, masks: dict | None = None
                   ) -> IntegralSample:
    """Y_t = sum_{s_i <= t} f(s_i) dX_i + b int_0^t f + Brownian part, at the checkpoints."""
    ts = np.asarray(checkpoints, dtype=float)
    part = Partition.build(masks, max(path.T, float(ts[-1])))
    comp = _accumulate_one(f, path, ts, part)
    out = IntegralSample(ts, comp.sum(axis=1))
    for i, lab in enumerate(part.labels):
        out.components[lab] = comp[:, i, :]
    return out


def _accumulate_one(f, path, ts, part) -> np.ndarray:
    gt, gc = _gauss_pseudo_jumps(f, path, part, ts)
    fv = np.asarray(f(path.times), dtype=float) if path.times.size else np.zeros(0)
    t_all = np.concatenate([path.times, gt])
    c_all = np.concatenate([fv[:, None] * path.sizes, gc]) if t_all.size else np.zeros((0, path.dim))
    order = np.argsort(t_all, kind="stable")
    acc = _accel.accumulate_paths(np.array([0, t_all.size], dtype=np.int64), t_all[order],
                                  np.ascontiguousarray(c_all[order]), ts, part.edges,
                                  part.seg_labels, len(part.labels))[0]
    return acc + _drift_parts(f, path.drift_rate, part, ts)


# ---------------------------------------------------------------------------
# band surrogate for long horizons (block measure only)

@dataclass
class _BandPlan:
    """Per time band [s0, s1): big-jump law and small-jump Gaussian pieces."""
    s0: float
    s1: float
    law: _BlockLaw
    pieces: list            # (l, r, label, mean vector, covariance) per mask piece


def _small_moments(nu: BlockE2, K: int):
    """(int_{|x|<=K} x nu, int_{|x|<=K} x x^T nu) for K >= 2."""
    fm = np.asarray(nu.first_moment())
    mean = fm - np.asarray(nu.signed_tail(float(K)))
    second = float(_blocks.partial(lambda x: x, K, signed=False))
    S = second * (nu.directions.T * nu.lam) @ nu.directions
    ex = nu.extra
    if ex is not None:
        pts, ms, _ = ex.atoms()
        S = S + (pts.T * ms) @ pts
    return mean, S


def _band_plans(mu: Triplet, f: IntegrandFn, part: Partition, T0: float, T: float, delta: float):
    nu = mu.nu
    if not isinstance(nu, BlockE2):
        raise ConfigError("the band surrogate is implemented for the block measure only")
    plans = []
    s0 = T0
    while s0 < T:
        s1 = min(2.0 * s0, T)
        K = max(2, int(math.floor(delta * s0)))
        law = _BlockLaw(nu, k_min=K)
        m, S = _small_moments(nu, K)
        pcs = []
        for l, r, lab in part.pieces(s0, s1):
            i1 = f.integral(l, r)
            i2 = f.sq_integral(l, r)
            pcs.append((l, r, lab, i1 * m, i2 * S))
        plans.append(_BandPlan(s0, s1, law, pcs))
        s0 = s1
    return plans


def _surrogate_path(mu, f, part, ts, T0, plans, seed, idx, exact_law, b):
    """Exact on (0, T0], band surrogate after; returns (n_cp, n_labels, d)."""
    path = sample_path(mu, T0, seed, idx, law=exact_law, b=b)
    rng = rng_for(seed, idx, stream=1)
    times = [path.times]
    contrib = [np.asarray(f(path.times), dtype=float)[:, None] * path.sizes
               if path.times.size else np.zeros((0, mu.dim))]
    for plan in plans:
        x = plan.law.draw(plan.s1 - plan.s0, rng).reshape(-1, mu.dim)
        t = plan.s0 + rng.random(x.shape[0]) * (plan.s1 - plan.s0)
        times.append(t)
        contrib.append(np.asarray(f(t), dtype=float)[:, None] * x)
        for l, r, lab, m, S in plan.pieces:
            if np.any(S):
                g = rng.multivariate_normal(m, S, method="eigh")
            else:
                g = m
            times.append(np.array([0.5 * (l + r)]))
            contrib.append(np.asarray(g, dtype=float)[None, :])
    gt, gc = _gauss_pseudo_jumps(f, path, part, ts)
    times.append(gt)
    contrib.append(gc)
    t_all = np.concatenate(times)
    c_all = np.concatenate(contrib)
    order = np.argsort(t_all, kind="stable")
    acc = _accel.accumulate_paths(np.array([0, t_all.size], dtype=np.int64), t_all[order],
                                  np.ascontiguousarray(c_all[order]), ts, part.edges,
                                  part.seg_labels, len(part.labels))[0]
    return acc + _drift_parts(f, path.drift_rate, part, ts)


# ---------------------------------------------------------------------------
# Monte Carlo

@dataclass
class MCResult:
    times: np.ndarray
    labels: list
    mean: np.ndarray        # (n_cp, n_labels + 1, d); last label is the total
    std: np.ndarray
    ci_lo: np.ndarray
    ci_hi: np.ndarray
    gamma: np.ndarray       # deterministic gamma_t^p, same shape
    centered_mean: np.ndarray
    centered_std: np.ndarray
    n_paths: int
    seed: int
    surrogate: dict | None = None
    values: np.ndarray | None = None   # (n_paths, n_cp, n_labels + 1, d) when kept
    truncation_bound: float = 0.0

    @property
    def all_labels(self) -> list:
        return list(self.labels) + ["all"]

    def rows(self):
        """CSV rows (t, mask, mean, std, ci_lo, ci_hi, gamma_t); component suffix when d > 1."""
        d = self.mean.shape[2]
        for c, t in enumerate(self.times):
            for li, lab in enumerate(self.all_labels):
                for j in range(d):
                    name = lab if d == 1 else f"{lab}[{j}]"
                    yield (float(t), name, float(self.mean[c, li, j]), float(self.std[c, li, j]),
                           float(self.ci_lo[c, li, j]), float(self.ci_hi[c, li, j]),
                           float(self.gamma[c, li, j]))


def resolve_masks(mu: Triplet, f: IntegrandFn, masks, T: float, j: int = 0):
    """None, a dict of MaskSets, or 'from-h' for the sign sets (D+, D-, D0) of h_j on [0, T]."""
    if masks is None or isinstance(masks, dict):
        return masks
    if masks == "from-h":
        from .classifier import DriftIntegrand, sign_sets
        p, m, z = sign_sets(DriftIntegrand(mu, f), j, (0.0, T))
        return {"+": p, "-": m, "0": z}
    raise ConfigError(f"unknown mask request {masks!r}")


def gamma_partials(mu: Triplet, f: IntegrandFn, part: Partition, ts) -> np.ndarray:
    """(n_cp, n_labels, d) of int_0^t 1_{D^p} h ds."""
    from .classifier import drift_partials
    T = float(ts[-1])
    out = np.zeros((len(ts), len(part.labels), mu.dim))
    for lab in range(len(part.labels)):
        g = part.masked(f, lab, T) if part.labels != ["all"] else f
        out[:, lab, :] = drift_partials(mu, g, ts)
    return out


def _run_chunk(args):
    mu, f, part, ts, idx, seed, mode, T0, plans = args
    res = []
    law = None if mu.nu.is_zero else jump_law(mu.nu)
    b = drift_rate(mu)
    for i in idx:
        if mode == "exact":
            path = sample_path(mu, float(ts[-1]), seed, i, law=law, b=b)
            res.append(_accumulate_one(f, path, ts, part))
        else:
            res.append(_surrogate_path(mu, f, part, ts, T0, plans, seed, i, law, b))
    return np.array(res)


def n_workers(requested: int | None = None) -> int:
    if requested:
        return max(1, int(requested))
    env = os.environ.get("LEVY_DOMAINS_THREADS")
    if env:
        return max(1, int(env))
    return 1


def monte_carlo(mu: Triplet, f: IntegrandFn, masks=None, checkpoints=(1.0,), n_paths: int = 1000,
                seed: int = 0, *, workers: int | None = None, exact_until: float = 2.0 ** 14,
                delta: float = 1e-3, keep_values: bool = False) -> MCResult:
    """Per-checkpoint statistics of Y_t^p over independent paths.

    Horizons beyond ``exact_until`` switch to the band surrogate after the
    largest power of two not above it (block measure only).
    """
    ts = np.sort(np.asarray(checkpoints, dtype=float))
    T = float(ts[-1])
    masks = resolve_masks(mu, f, masks, T)
    part = Partition.build(masks, T)
    mode, T0, plans, info = "exact", T, None, None
    if T > exact_until and not mu.nu.is_zero:
        T0 = 2.0 ** math.floor(math.log2(exact_until))
        plans = _band_plans(mu, f, part, T0, T, delta)
        mode = "surrogate"
        info = {"exact_until": T0, "delta": delta, "bands": len(plans)}
    w = n_workers(workers)
    chunks = [list(c) for c in np.array_split(np.arange(n_paths), max(1, w * 4)) if len(c)]
    jobs = [(mu, f, part, ts, c, seed, mode, T0, plans) for c in chunks]
    if w > 1:
        with ProcessPoolExecutor(max_workers=w) as ex:
            parts = list(ex.map(_run_chunk, jobs))
    else:
        parts = [_run_chunk(j) for j in jobs]
    vals = np.concatenate(parts)                               # (n, n_cp, L, d)
    vals = np.concatenate([vals, vals.sum(axis=2, keepdims=True)], axis=2)
    gam = gamma_partials(mu, f, part, ts)
    gam = np.concatenate([gam, gam.sum(axis=1, keepdims=True)], axis=1)
    mean = vals.mean(axis=0)
    std = vals.std(axis=0, ddof=1) if n_paths > 1 else np.zeros_like(mean)
    se = std / math.sqrt(n_paths)
    cen = vals - gam[None]
    dropped = 0.0 if mu.nu.is_zero else jump_law(mu.nu).dropped
    return MCResult(ts, list(part.labels), mean, std, mean - Z99 * se, mean + Z99 * se, gam,
                    cen.mean(axis=0), cen.std(axis=0, ddof=1) if n_paths > 1 else np.zeros_like(mean),
                    n_paths, int(seed), info, vals if keep_values else None, dropped * T)


def empirical_cf(values: np.ndarray, z: np.ndarray) -> tuple[complex, float]:
    """Mean of exp(i<z, Y>) and its standard error."""
    v = np.atleast_2d(values.reshape(values.shape[0], -1))
    e = np.exp(1j * (v @ np.atleast_1d(z)))
    m = e.mean()
    se = math.sqrt((np.var(e.real, ddof=1) + np.var(e.imag, ddof=1)) / len(e))
    return complex(m), se


def write_csv(result: MCResult, path) -> None:
    import csv
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "mask", "mean", "std", "ci_lo", "ci_hi", "gamma_t"])
        for row in result.rows():
            w.writerow([repr(x) if isinstance(x, float) else x for x in row])
