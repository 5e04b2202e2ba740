"""Levy measure families with exact or closed-form functionals.

Every family answers the same questions: truncated second moment
int (|ux|^2 ∧ 1) nu(dx), the drift correction of the scaled triplet, the
Levy-Khintchine jump integral, first-moment tails, and moment finiteness
tests used by the classifier's analytic rules.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import mpmath
from scipy.special import hyp2f1, zeta

from . import _blocks
from .errors import ConfigError, InvalidDirections, UnsupportedMeasure
from .quadrature import quad as quad_scalar

DEFAULT_TOL = 1e-10


def _x_over(x):
    """x / (1 + x^2) without overflow for huge |x|."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        big = np.abs(x) > 1.0
        return np.where(big, 1.0 / (x + 1.0 / np.where(big, x, 1.0)), x / (1.0 + x * x))


def _as_points(points, dim=None) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1) if dim in (None, 1) else pts.reshape(1, -1)
    return pts


class LevyMeasure:
    """Interface shared by all families.  Values are immutable."""

    dim: int
    symmetric: bool = False

    @property
    def is_zero(self) -> bool:
        return False

    # -- functionals ------------------------------------------------------
    def total_mass(self) -> float:
        raise NotImplementedError

    def trunc_second_moment(self, u: float = 1.0) -> float:
        """int (|u x|^2 ∧ 1) nu(dx)."""
        raise NotImplementedError

    def drift_correction(self, u):
        """int u x (1/(1+|ux|^2) - 1/(1+|x|^2)) nu(dx); array u gives shape (n, d)."""
        raise NotImplementedError

    def jump_integral(self, z, tol: float = DEFAULT_TOL) -> complex:
        """int (e^{i<z,x>} - 1 - i<z,x>/(1+|x|^2)) nu(dx)."""
        raise NotImplementedError

    def abs_tail_moment(self, s: float) -> float:
        """int_{|x|>s} |x| nu(dx) (may be inf)."""
        raise NotImplementedError

    def abs_first_tail(self) -> float:
        """int_{|x|>1} |x| nu(dx) (may be inf)."""
        return self.abs_tail_moment(1.0)

    def centered_mean_term(self) -> np.ndarray | None:
        """int x |x|^2/(1+|x|^2) nu(dx), or None when the first moment is infinite."""
        raise NotImplementedError

    def signed_tail(self, s: float) -> np.ndarray:
        """int_{|x|>s} x nu(dx)."""
        raise NotImplementedError

    def log_moment_finite(self, p: float) -> bool:
        """Whether int (log+ |x|)^p nu(dx) < inf."""
        raise NotImplementedError

    def power_moment_finite(self, q: float) -> bool:
        """Whether int_{|x|>1} |x|^q nu(dx) < inf."""
        raise NotImplementedError

    def atoms(self, max_radius: float | None = None):
        """Finite atom list (points, masses, dropped_mass_bound)."""
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError

    # -- helpers ----------------------------------------------------------
    def scaled(self, u: float) -> "LevyMeasure":
        if u == 1.0:
            return self
        if u == 0.0:
            return FiniteAtomic.zero(self.dim)
        return ScaledMeasure(self, float(u))


# ---------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class FiniteAtomic(LevyMeasure):
    """Finitely many atoms; every functional is an exact finite sum."""

    points: np.ndarray
    masses: np.ndarray
    dim: int = 1
    symmetric: bool = field(init=False, default=False)

    def __post_init__(self):
        pts = _as_points(self.points, self.dim)
        w = np.asarray(self.masses, dtype=float).ravel()
        if pts.shape[0] != w.size:
            raise ConfigError("points and masses differ in length")
        if pts.size and pts.shape[1] != self.dim:
            object.__setattr__(self, "dim", pts.shape[1])
        pts = pts.reshape(-1, self.dim)
        if np.any(w <= 0):
            raise ConfigError("atom masses must be strictly positive")
        if np.any(np.linalg.norm(pts, axis=1) == 0):
            raise ConfigError("atoms at the origin are not allowed")
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "masses", w)
        object.__setattr__(self, "symmetric", self._check_symmetric())

    @classmethod
    def zero(cls, dim: int = 1) -> "FiniteAtomic":
        return cls(np.zeros((0, dim)), np.zeros(0), dim=dim)

    def _check_symmetric(self) -> bool:
        if self.masses.size == 0:
            return True
        key = lambda p, w: (tuple(np.round(p, 12)), round(float(w), 12))
        a = sorted(key(p, w) for p, w in zip(self.points, self.masses))
        b = sorted(key(-p, w) for p, w in zip(self.points, self.masses))
        return a == b

    @property
    def is_zero(self) -> bool:
        return self.masses.size == 0

    @property
    def radii(self) -> np.ndarray:
        return np.linalg.norm(self.points, axis=1)

    def total_mass(self) -> float:
        return math.fsum(self.masses)

    def trunc_second_moment(self, u: float = 1.0) -> float:
        return math.fsum(self.masses * np.minimum((u * self.radii) ** 2, 1.0))

    def drift_correction(self, u):
        u_arr = np.atleast_1d(np.asarray(u, dtype=float))
        r2 = self.radii ** 2
        fac = 1.0 / (1.0 + np.outer(u_arr ** 2, r2)) - 1.0 / (1.0 + r2)[None, :]
        out = u_arr[:, None] * ((fac * self.masses[None, :]) @ self.points)
        return out if np.ndim(u) else out[0]

    def jump_integral(self, z, tol: float = DEFAULT_TOL) -> complex:
        z = np.atleast_1d(np.asarray(z, dtype=float))
        w = self.points @ z
        r2 = self.radii ** 2
        terms = np.expm1(1j * w) - 1j * w / (1.0 + r2)
        return complex(np.sum(self.masses * terms))

    def abs_tail_moment(self, s: float) -> float:
        r = self.radii
        return math.fsum(self.masses[r > s] * r[r > s])

    def centered_mean_term(self):
        r2 = self.radii ** 2
        return (self.masses * r2 / (1.0 + r2)) @ self.points if self.masses.size else np.zeros(self.dim)

    def first_moment(self) -> np.ndarray:
        return self.masses @ self.points if self.masses.size else np.zeros(self.dim)

    def signed_tail(self, s: float) -> np.ndarray:
        sel = self.radii > s
        return self.masses[sel] @ self.points[sel] if sel.any() else np.zeros(self.dim)

    def log_moment_finite(self, p: float) -> bool:
        return True

    def power_moment_finite(self, q: float) -> bool:
        return True

    def atoms(self, max_radius=None):
        return self.points, self.masses, 0.0

    def to_json(self) -> dict:
        return {"variant": "finite_atomic",
                "atoms": [{"x": p.tolist(), "w": float(w)} for p, w in zip(self.points, self.masses)]}


# ---------------------------------------------------------------------------
def _check_directions(directions, lam):
    xi = _as_points(directions)
    if xi.shape[0] == 1 and np.asarray(directions).ndim == 1:
        xi = np.asarray(directions, dtype=float).reshape(1, -1)
    lam = np.asarray(lam, dtype=float).ravel()
    if xi.shape[0] != lam.size or lam.size == 0:
        raise InvalidDirections("need one weight per direction")
    if np.any(lam <= 0):
        raise InvalidDirections("direction weights must be positive")
    norms = np.linalg.norm(xi, axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-12):
        raise InvalidDirections("directions must be unit vectors")
    for i in range(len(xi)):
        for j in range(len(xi)):
            if np.allclose(xi[i], -xi[j], atol=1e-12):
                raise InvalidDirections("S0 and -S0 must be disjoint")
    if np.linalg.norm(lam @ xi) < 1e-12:
        raise InvalidDirections("int xi lambda(dxi) must be nonzero")
    return xi, lam


@dataclass(frozen=True, eq=False)
class BlockE2(LevyMeasure):
    """Telescoping block measure nu(B) = int lambda(dxi) sum_n 1_B(n xi) a_n.

    ``tilde`` adds mass lambda/(2 log 2) at radius 2 along each direction.
    Radial sums are evaluated with the block series engine in ``_blocks``.
    """

    directions: np.ndarray
    lam: np.ndarray
    tilde: bool = False
    dim: int = field(init=False, default=1)

    def __post_init__(self):
        xi, lam = _check_directions(self.directions, self.lam)
        xi.setflags(write=False)
        lam.setflags(write=False)
        object.__setattr__(self, "directions", xi)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "dim", xi.shape[1])

    @property
    def xi_bar(self) -> np.ndarray:
        """int xi lambda(dxi)."""
        return self.lam @ self.directions

    @property
    def lam_total(self) -> float:
        return float(self.lam.sum())

    @property
    def extra(self) -> FiniteAtomic | None:
        if not self.tilde:
            return None
        return FiniteAtomic(2.0 * self.directions, self.lam / (2.0 * _blocks.LN2), dim=self.dim)

    def _plus_extra(self, value, fn):
        ex = self.extra
        return value if ex is None else value + fn(ex)

    def total_mass(self) -> float:
        m = self.lam_total * _blocks.radial_mass()
        return self._plus_extra(m, lambda e: e.total_mass())

    def trunc_second_moment(self, u: float = 1.0) -> float:
        u = abs(float(u))
        if u == 0.0:
            return 0.0
        # |c_k|/k * min(u^2 k^2, 1) splits at k = 1/u into two smooth sums
        K = math.floor(1.0 / u)
        low = float(_blocks.partial(lambda x: u * u * x, K, signed=False))
        high = float(_blocks.tail_series(lambda x: 1.0 / x, K + 1, signed=False))
        return self._plus_extra(self.lam_total * (low + high), lambda e: e.trunc_second_moment(u))

    def _odd(self, g, g_inf=0.0):
        return _blocks.series(g, signed=True, g_inf=g_inf)

    def drift_correction(self, u):
        u_arr = np.atleast_1d(np.asarray(u, dtype=float))
        nz = u_arr != 0
        vals = np.zeros(u_arr.size)
        if nz.any():
            uu = u_arr[nz]
            g = lambda x: 1.0 / (1.0 + np.outer(x * x, uu * uu)) - (1.0 / (1.0 + x * x))[:, None]
            vals[nz] = uu * self._odd(g)
        out = vals[:, None] * self.xi_bar[None, :]
        ex = self.extra
        if ex is not None:
            out = out + ex.drift_correction(u_arr)
        return out if np.ndim(u) else out[0]

    def jump_integral(self, z, tol: float = DEFAULT_TOL) -> complex:
        z = np.atleast_1d(np.asarray(z, dtype=float))
        total = 0j
        for xi, lam in zip(self.directions, self.lam):
            w = float(xi @ z)
            if w != 0.0:
                total += lam * _blocks.jump_radial(w)
        return self._plus_extra(total, lambda e: e.jump_integral(z, tol))

    def abs_tail_moment(self, s: float) -> float:
        val = self.lam_total * _blocks.abs_tail(max(2, math.floor(s) + 1))
        return self._plus_extra(val, lambda e: e.abs_tail_moment(s))

    def centered_mean_term(self):
        odd = _blocks.signed_total() - self._odd(lambda x: 1.0 / (1.0 + x * x))
        val = odd * self.xi_bar
        return self._plus_extra(val, lambda e: e.centered_mean_term())

    def first_moment(self) -> np.ndarray:
        val = _blocks.signed_total() * self.xi_bar
        return self._plus_extra(val, lambda e: e.first_moment())

    def signed_tail(self, s: float) -> np.ndarray:
        k = max(2, math.floor(s) + 1)
        val = _blocks.tail_sum(k) * self.xi_bar
        ex = self.extra
        if ex is not None:
            val = val + ex.signed_tail(s)
        return val

    def log_moment_finite(self, p: float) -> bool:
        return True

    def power_moment_finite(self, q: float) -> bool:
        # |c_k| ~ 1/(k log^2 k): sum |c_k| k^(q-1) converges iff q <= 1
        return q <= 1.0

    def atoms(self, max_radius=None):
        N = int(max_radius or (1 << 22))
        k, c = _blocks.weights(2, N)
        kf = k.astype(float)
        sign = np.sign(c)
        mass = np.abs(c) / kf
        pts, ws = [], []
        for xi, lam in zip(self.directions, self.lam):
            pts.append((sign * kf)[:, None] * xi[None, :])
            ws.append(lam * mass)
        ex = self.extra
        if ex is not None:
            pts.append(ex.points)
            ws.append(ex.masses)
        dropped = self.lam_total * _blocks.tail_mass_bound(N)
        return np.concatenate(pts), np.concatenate(ws), dropped

    def to_json(self) -> dict:
        return {"variant": "block_e2",
                "directions": self.directions.tolist(),
                "lambda": self.lam.tolist(),
                "tilde": bool(self.tilde)}


# ---------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class AnalyticTail(LevyMeasure):
    """Radial tail with closed-form functionals, mixed over finitely many directions.

    kind="pareto": nu(|x| > r) = kappa r^-alpha on r >= 1, 0 < alpha < 2.
    kind="log_atoms": atoms at |x| = e^n (n >= 1) with mass kappa n^-alpha,
    alpha > 1; every log moment below alpha - 1 is finite but no power moment is.
    Each direction carries the radial law times its weight.
    """

    directions: np.ndarray
    weights: np.ndarray
    alpha: float = 1.0
    kappa: float = 1.0
    kind: str = "pareto"
    dim: int = field(init=False, default=1)
    symmetric: bool = field(init=False, default=False)

    N_MAX = 700  # e^700 is near the float range limit

    def __post_init__(self):
        xi = np.asarray(self.directions, dtype=float)
        xi = xi.reshape(-1, 1) if xi.ndim == 1 else xi
        w = np.asarray(self.weights, dtype=float).ravel()
        if xi.shape[0] != w.size or np.any(w <= 0):
            raise ConfigError("analytic tail needs a positive weight per direction")
        if np.any(np.abs(np.linalg.norm(xi, axis=1) - 1.0) > 1e-12):
            raise ConfigError("directions must be unit vectors")
        if self.kind == "pareto" and not 0.0 < self.alpha < 2.0:
            raise ConfigError("pareto tail needs 0 < alpha < 2")
        if self.kind == "log_atoms" and not self.alpha > 1.0:
            raise ConfigError("log_atoms needs alpha > 1 for a finite measure")
        if self.kind not in ("pareto", "log_atoms"):
            raise ConfigError(f"unknown analytic tail kind {self.kind!r}")
        if not self.kappa > 0:
            raise ConfigError("kappa must be positive")
        xi.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "directions", xi)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "dim", xi.shape[1])
        object.__setattr__(self, "symmetric", FiniteAtomic(xi, w, dim=xi.shape[1]).symmetric)

    @property
    def w_total(self) -> float:
        return float(self.weights.sum())

    @property
    def xi_bar(self) -> np.ndarray:
        return self.weights @ self.directions

    # -- radial pieces (unit direction weight) ---------------------------
    def radial_tail(self, r: float) -> float:
        """nu(|x| > r) per unit weight."""
        if self.kind == "pareto":
            return self.kappa * (1.0 if r < 1 else r ** -self.alpha)
        n0 = 1 if r < math.e else math.floor(math.log(r)) + 1
        return self.kappa * float(zeta(self.alpha, n0))

    def _atoms_radial(self, n_max=None):
        n = np.arange(1, (n_max or self.N_MAX) + 1, dtype=float)
        return np.exp(n), self.kappa * n ** (-self.alpha)

    def _far_mass(self) -> float:
        return self.kappa * float(zeta(self.alpha, self.N_MAX + 1))

    def _pareto_I(self, u: float) -> float:
        """int_1^inf r^-alpha / (1 + u^2 r^2) dr = int_0^1 y^alpha / (y^2 + u^2) dy."""
        a = self.alpha
        if u >= 1.0:
            return float(hyp2f1(1.0, (a + 1) / 2, (a + 3) / 2, -1.0 / (u * u))) / (u * u * (a + 1))
        # for small u rewrite around y = inf to keep hyp2f1 in its unit disc
        # int_0^1 y^a/(y^2+u^2) = int_0^inf - int_1^inf
        if abs(a - 1.0) < 1e-2 and a != 1.0:
            # closed forms cancel badly near alpha = 1
            return float(quad_scalar(lambda y: y ** a / (y * y + u * u), 0.0, 1.0, points=(u,)))
        whole = 0.5 * math.pi * u ** (a - 1) / math.cos(0.5 * math.pi * a) if a < 1 else None
        if whole is not None:
            tail = float(hyp2f1(1.0, (1 - a) / 2, (3 - a) / 2, -u * u)) / (1 - a)
            return whole - tail
        if a == 1.0:
            return 0.5 * math.log1p(u * u) - math.log(u)
        if 1.0 < a < 2.0:
            # int_0^1 y^(a-2) dy - u^2 (int_0^inf - int_1^inf) y^(a-2)/(y^2+u^2) dy
            whole = u ** (a - 1.0) * 0.5 * math.pi / math.sin(0.5 * math.pi * (a - 1.0))
            tail = u * u * float(hyp2f1(1.0, (3 - a) / 2, (5 - a) / 2, -u * u)) / (3 - a)
            return 1.0 / (a - 1.0) - whole + tail
        return float(quad_scalar(lambda y: y ** a / (y * y + u * u), 0.0, 1.0, points=(u,)))

    def _radial_tsm(self, u: float) -> float:
        if u == 0.0:
            return 0.0
        if self.kind == "log_atoms":
            r, m = self._atoms_radial()
            with np.errstate(over="ignore"):
                val = float(np.minimum((u * r) ** 2, 1.0) @ m)
            return val + self._far_mass()
        a, k = self.alpha, self.kappa
        if u >= 1.0:
            return k
        # u^2 k a (u^(a-2) - 1)/(2-a) + k u^a, kept in powers of u so tiny u cannot overflow
        ua = u ** a
        return k * a * (ua - u * u) / (2 - a) + k * ua

    def _radial_drift(self, u: np.ndarray) -> np.ndarray:
        """u int r (1/(1+u^2 r^2) - 1/(1+r^2)) rho(dr)."""
        if self.kind == "log_atoms":
            r, m = self._atoms_radial()
            # u r (1/(1+(ur)^2) - 1/(1+r^2)) written with x/(1+x^2) to survive r ~ e^700
            with np.errstate(over="ignore"):
                vals = _x_over(np.outer(u, r)) - np.outer(u, _x_over(r))
            return vals @ m
        i1 = self._pareto_I(1.0)
        return np.array([v * self.kappa * self.alpha * (self._pareto_I(abs(v)) - i1) if v else 0.0
                         for v in u])

    def _radial_jump(self, w: float, tol: float) -> complex:
        if w == 0.0:
            return 0j
        if self.kind == "log_atoms":
            r, m = self._atoms_radial()
            with np.errstate(over="ignore", invalid="ignore"):
                comp = np.where(r < 1e150, w * r / (1 + r * r), 0.0)
            osc = np.expm1(1j * w * r)
            bound = 2.0 * self._far_mass()
            if bound > tol:
                raise UnsupportedMeasure(
                    f"log_atoms jump integral: mass beyond e^{self.N_MAX} bounds the error "
                    f"by {bound:.2g} > tol {tol:.2g}")
            return complex(np.sum(m * (osc - 1j * comp)))
        a, k = self.alpha, self.kappa
        # int_1^inf e^{iwr} r^{-a-1} dr is the generalized exponential integral E_{a+1}(-iw)
        e = complex(mpmath.expint(a + 1, mpmath.mpc(0, -w)))
        return k * a * (e - 1.0 / a - 1j * w * self._pareto_I(1.0))

    # -- interface ---------------------------------------------------------
    def total_mass(self) -> float:
        return self.w_total * self.radial_tail(0.0)

    def trunc_second_moment(self, u: float = 1.0) -> float:
        return self.w_total * self._radial_tsm(abs(float(u)))

    def drift_correction(self, u):
        u_arr = np.atleast_1d(np.asarray(u, dtype=float))
        out = self._radial_drift(u_arr)[:, None] * self.xi_bar[None, :]
        return out if np.ndim(u) else out[0]

    def jump_integral(self, z, tol: float = DEFAULT_TOL) -> complex:
        z = np.atleast_1d(np.asarray(z, dtype=float))
        return sum(wt * self._radial_jump(float(xi @ z), tol)
                   for xi, wt in zip(self.directions, self.weights))

    def _first_finite(self) -> bool:
        return self.kind == "pareto" and self.alpha > 1.0

    def abs_tail_moment(self, s: float) -> float:
        if not self._first_finite():
            return math.inf
        s1 = max(float(s), 1.0)
        return self.w_total * self.kappa * self.alpha * s1 ** (1 - self.alpha) / (self.alpha - 1.0)

    def centered_mean_term(self):
        if not self._first_finite():
            return None
        a = self.alpha
        return self.xi_bar * self.kappa * a * (1.0 / (a - 1.0) - self._pareto_I(1.0))

    def signed_tail(self, s: float) -> np.ndarray:
        v = self.xi_bar
        if not self._first_finite():
            return np.where(v != 0, np.sign(v) * math.inf, 0.0)
        s1 = max(float(s), 1.0)
        return v * self.kappa * self.alpha * s1 ** (1 - self.alpha) / (self.alpha - 1)

    def log_moment_finite(self, p: float) -> bool:
        if self.kind == "pareto":
            return True
        return self.alpha - p > 1.0

    def power_moment_finite(self, q: float) -> bool:
        if self.kind == "pareto":
            return q < self.alpha
        return q <= 0.0

    def atoms(self, max_radius=None):
        if self.kind == "pareto":
            raise UnsupportedMeasure("pareto tail has no atomic representation")
        n_max = self.N_MAX if max_radius is None else max(1, min(self.N_MAX, int(math.log(max_radius))))
        r, m = self._atoms_radial(n_max)
        pts = np.concatenate([r[:, None] * xi[None, :] for xi in self.directions])
        ws = np.concatenate([wt * m for wt in self.weights])
        dropped = self.w_total * self.kappa * float(zeta(self.alpha, n_max + 1))
        return pts, ws, dropped

    def to_json(self) -> dict:
        return {"variant": "analytic_tail", "kind": self.kind,
                "directions": self.directions.tolist(), "weights": self.weights.tolist(),
                "alpha": self.alpha, "kappa": self.kappa}


# ---------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class ScaledMeasure(LevyMeasure):
    """Pushforward of ``base`` under x -> u x."""

    base: LevyMeasure
    u: float

    def __post_init__(self):
        if isinstance(self.base, ScaledMeasure):
            object.__setattr__(self, "u", self.u * self.base.u)
            object.__setattr__(self, "base", self.base.base)

    @property
    def dim(self):
        return self.base.dim

    @property
    def symmetric(self):
        return self.base.symmetric

    @property
    def is_zero(self):
        return self.base.is_zero

    def total_mass(self):
        return self.base.total_mass()

    def trunc_second_moment(self, u: float = 1.0):
        return self.base.trunc_second_moment(u * self.u)

    def drift_correction(self, v):
        v_arr = np.atleast_1d(np.asarray(v, dtype=float))
        out = self.base.drift_correction(v_arr * self.u) - v_arr[:, None] * self.base.drift_correction(self.u)[None, :]
        return out if np.ndim(v) else out[0]

    def jump_integral(self, z, tol: float = DEFAULT_TOL):
        z = np.atleast_1d(np.asarray(z, dtype=float))
        corr = self.base.drift_correction(self.u)
        return self.base.jump_integral(self.u * z, tol) - 1j * float(z @ corr)

    def abs_tail_moment(self, s):
        return abs(self.u) * self.base.abs_tail_moment(s / abs(self.u))

    def centered_mean_term(self):
        # int ux |ux|^2/(1+|ux|^2) nu(dx) = u * (base term) - drift_correction(u)
        b = self.base.centered_mean_term()
        if b is None:
            return None
        return self.u * b - self.base.drift_correction(self.u)

    def signed_tail(self, s):
        return self.u * self.base.signed_tail(s / abs(self.u))

    def log_moment_finite(self, p):
        return self.base.log_moment_finite(p)

    def power_moment_finite(self, q):
        return self.base.power_moment_finite(q)

    def atoms(self, max_radius=None):
        pts, ws, dropped = self.base.atoms(None if max_radius is None else max_radius / abs(self.u))
        return pts * self.u, ws, dropped

    def to_json(self):
        d = dict(self.base.to_json())
        d["scale"] = self.u * d.get("scale", 1.0)
        return d


# ---------------------------------------------------------------------------
def measure_from_json(obj: dict, dim: int) -> LevyMeasure:
    known = {"variant", "atoms", "directions", "lambda", "tilde", "weights", "alpha",
             "kappa", "kind", "scale"}
    extra = set(obj) - known
    if extra:
        raise ConfigError(f"unknown measure fields: {sorted(extra)}")
    variant = obj.get("variant")
    if variant == "finite_atomic":
        atoms = obj.get("atoms", [])
        pts = np.array([a["x"] for a in atoms], dtype=float).reshape(-1, dim)
        w = np.array([a["w"] for a in atoms], dtype=float)
        nu = FiniteAtomic(pts, w, dim=dim)
    elif variant == "block_e2":
        nu = BlockE2(np.array(obj["directions"], dtype=float).reshape(-1, dim),
                     np.array(obj["lambda"], dtype=float), tilde=bool(obj.get("tilde", False)))
    elif variant == "analytic_tail":
        nu = AnalyticTail(np.array(obj["directions"], dtype=float).reshape(-1, dim),
                          np.array(obj["weights"], dtype=float),
                          alpha=float(obj.get("alpha", 1.0)), kappa=float(obj.get("kappa", 1.0)),
                          kind=obj.get("kind", "pareto"))
    else:
        raise ConfigError(f"unknown measure variant {variant!r}")
    if nu.dim != dim:
        raise ConfigError(f"measure dimension {nu.dim} does not match dim={dim}")
    return nu.scaled(float(obj.get("scale", 1.0)))
