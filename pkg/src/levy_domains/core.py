"""Levy-Khintchine triplets: cumulants, scaling, phi / phi-tilde, means and
the triplet of the integral process Y_t = int_0^t f(s) dX_s."""
from __future__ import annotations

import functools
import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, QuadratureFailure
from .measures import (DEFAULT_TOL, FiniteAtomic, LevyMeasure, ScaledMeasure,
                       measure_from_json)
from .quadrature import ABS_TOL, REL_TOL, integrate

PSD_EPS = 1e-12
GOLDEN_STEPS = 64
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True, eq=False)
class Triplet:
    """(A, nu, gamma) of an infinitely divisible law on R^d."""

    A: np.ndarray
    nu: LevyMeasure
    gamma: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        g = np.atleast_1d(np.asarray(self.gamma, dtype=float))
        d = g.size
        if A.shape != (d, d):
            raise ConfigError(f"A has shape {A.shape}, expected {(d, d)}")
        if not np.allclose(A, A.T, atol=PSD_EPS * max(1.0, np.trace(np.abs(A)))):
            raise ConfigError("A must be symmetric")
        A = 0.5 * (A + A.T)
        scale = max(1.0, float(np.trace(np.abs(A))))
        if d and np.linalg.eigvalsh(A).min() < -PSD_EPS * scale:
            raise ConfigError("A must be positive semidefinite")
        if self.nu.dim != d:
            raise ConfigError(f"nu has dimension {self.nu.dim}, gamma has {d}")
        tsm = self.nu.trunc_second_moment(1.0)
        if not math.isfinite(tsm):
            raise ConfigError("nu must integrate |x|^2 ∧ 1")
        A.setflags(write=False)
        g.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "gamma", g)

    @property
    def dim(self) -> int:
        return self.gamma.size

    @classmethod
    def zero(cls, dim: int = 1) -> "Triplet":
        return cls(np.zeros((dim, dim)), FiniteAtomic.zero(dim), np.zeros(dim))

    @classmethod
    def gaussian(cls, A, gamma=None) -> "Triplet":
        A = np.atleast_2d(np.asarray(A, dtype=float))
        d = A.shape[0]
        return cls(A, FiniteAtomic.zero(d), np.zeros(d) if gamma is None else gamma)

    def with_gamma(self, gamma) -> "Triplet":
        return Triplet(self.A, self.nu, gamma)

    def shifted(self, q) -> "Triplet":
        """Triplet of mu * delta_{-q}."""
        return Triplet(self.A, self.nu, self.gamma - np.asarray(q, dtype=float))

    # -- serialization ------------------------------------------------------
    def to_json(self) -> dict:
        return {"dim": self.dim, "A": self.A.tolist(), "gamma": self.gamma.tolist(),
                "nu": self.nu.to_json()}

    @classmethod
    def from_json(cls, obj: dict) -> "Triplet":
        extra = set(obj) - {"dim", "A", "gamma", "nu"}
        if extra:
            raise ConfigError(f"unknown triplet fields: {sorted(extra)}")
        try:
            d = int(obj["dim"])
            if d < 1:
                raise ConfigError("dim must be positive")
            A = np.asarray(obj.get("A", np.zeros((d, d))), dtype=float).reshape(d, d)
            gamma = np.asarray(obj.get("gamma", np.zeros(d)), dtype=float).reshape(d)
            nu_obj = obj.get("nu", {"variant": "finite_atomic", "atoms": []})
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"malformed triplet: {exc}") from exc
        return cls(A, measure_from_json(nu_obj, d), gamma)

    def config_hash(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def load_triplet(path) -> Triplet:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return Triplet.from_json(obj)


def dump_triplet(mu: Triplet, path) -> None:
    with open(path, "w") as fh:
        json.dump(mu.to_json(), fh, indent=2)
        fh.write("\n")


@dataclass(frozen=True)
class CumulantValue:
    gaussian_part: float
    jump_part: complex
    drift_part: complex

    @property
    def value(self) -> complex:
        return self.gaussian_part + self.jump_part + self.drift_part

    def __complex__(self):
        return self.value


@dataclass(frozen=True, eq=False)
class ScaledTriplet:
    """mu^u: the law of u X_1."""

    u: float
    A_u: np.ndarray
    nu_u: LevyMeasure
    gamma_u: np.ndarray

    @property
    def triplet(self) -> Triplet:
        return Triplet(self.A_u, self.nu_u, self.gamma_u)


def _vec(z, d):
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if z.size != d:
        raise ConfigError(f"vector of length {z.size} given for dimension {d}")
    if not np.all(np.isfinite(z)):
        raise ConfigError("z must be finite")
    return z


def cumulant(mu: Triplet, z, tol: float = DEFAULT_TOL) -> CumulantValue:
    """C_mu(z) split into Gaussian, jump and drift parts."""
    z = _vec(z, mu.dim)
    gauss = -0.5 * float(z @ mu.A @ z)
    jump = 0j if mu.nu.is_zero or not np.any(z) else complex(mu.nu.jump_integral(z, tol))
    drift = 1j * float(mu.gamma @ z)
    return CumulantValue(gauss, jump, drift)


def gamma_scaled(mu: Triplet, u) -> np.ndarray:
    """gamma^u for scalar u (shape (d,)) or an array of u (shape (n, d))."""
    u_arr = np.atleast_1d(np.asarray(u, dtype=float))
    out = u_arr[:, None] * mu.gamma[None, :]
    if not mu.nu.is_zero:
        out = out + np.asarray(mu.nu.drift_correction(u_arr)).reshape(u_arr.size, mu.dim)
    return out if np.ndim(u) else out[0]


def scale_triplet(mu: Triplet, u: float) -> ScaledTriplet:
    u = float(u)
    if u == 0.0:
        z = Triplet.zero(mu.dim)
        return ScaledTriplet(0.0, z.A, z.nu, z.gamma)
    if u == 1.0:
        return ScaledTriplet(1.0, mu.A, mu.nu, mu.gamma)
    return ScaledTriplet(u, u * u * mu.A, mu.nu.scaled(u), gamma_scaled(mu, u))


def phi(mu: Triplet, u: float) -> float:
    """tr A^u + int (|x|^2 ∧ 1) nu^u(dx) + |gamma^u|."""
    u = float(u)
    if u == 0.0:
        return 0.0
    return (u * u * float(np.trace(mu.A)) + mu.nu.trunc_second_moment(u)
            + float(np.linalg.norm(gamma_scaled(mu, u))))


# fixed v-grid for the sup in phi_tilde, shared by all u so the result is monotone
_V_GRID = np.geomspace(1e-12, 1e12, 241)


def sup_gamma(mu: Triplet, u: float) -> float:
    """sup_{|v| <= |u|} |gamma^v| (gamma^{-v} = -gamma^v, so v >= 0 suffices).

    A fixed geometric grid locates the best bracket, golden-section search
    with 64 steps refines it, and the endpoint v = |u| is always included.
    """
    U = abs(float(u))
    if U == 0.0:
        return 0.0
    grid = np.append(_V_GRID[_V_GRID < U], U)

    def g(v):
        return np.linalg.norm(np.atleast_2d(gamma_scaled(mu, v)), axis=1)

    vals = g(grid)
    j = int(np.argmax(vals))
    best = float(vals[j])
    lo = grid[j - 1] if j > 0 else 0.0
    hi = grid[j + 1] if j + 1 < grid.size else U
    if hi > lo:
        a, b = lo, hi
        c, d = b - _INVPHI * (b - a), a + _INVPHI * (b - a)
        gc, gd = g(np.array([c, d]))
        for _ in range(GOLDEN_STEPS):
            if gc > gd:
                b, d, gd = d, c, gc
                c = b - _INVPHI * (b - a)
                gc = float(g(np.array([c]))[0])
            else:
                a, c, gc = c, d, gd
                d = a + _INVPHI * (b - a)
                gd = float(g(np.array([d]))[0])
            best = max(best, gc, gd)
    return best


def phi_tilde(mu: Triplet, u: float) -> float:
    u = float(u)
    if u == 0.0:
        return 0.0
    return u * u * float(np.trace(mu.A)) + mu.nu.trunc_second_moment(u) + sup_gamma(mu, u)


def mean(mu: Triplet):
    """E X_1 when int_{|x|>1} |x| nu(dx) < inf, else None."""
    if mu.nu.is_zero:
        return mu.gamma.copy()
    if not math.isfinite(mu.nu.abs_first_tail()):
        return None
    return mu.gamma + mu.nu.centered_mean_term()


# ---------------------------------------------------------------------------
# the integral process

def _s_integral(func, f, t, *, abs_tol=ABS_TOL, rel_tol=REL_TOL, a=0.0):
    lo = max(a, 0.0)
    if t <= lo:
        return None
    pts = f.breakpoints(lo, t)
    try:
        return integrate(func, lo, t, abs_tol=abs_tol, rel_tol=rel_tol, points=pts).value
    except QuadratureFailure:
        raise
    except ValueError as exc:
        raise QuadratureFailure(str(exc)) from exc


@dataclass(frozen=True, eq=False)
class IntegralMeasure(LevyMeasure):
    """nu_t(B) = int_0^t ds int 1_B(f(s) x) nu(dx).

    Functionals are s-integrals of the base functionals at u = f(s), using the
    scaling identities of ``ScaledMeasure``; the s-axis is split at the
    integrand's breakpoints and integrated adaptively.
    """

    base: LevyMeasure
    f: object
    t: float

    @property
    def dim(self):
        return self.base.dim

    @property
    def symmetric(self):
        return self.base.symmetric

    @property
    def is_zero(self):
        return self.base.is_zero

    def _per_s(self, fn, shape=()):
        def integrand(s):
            fs = np.asarray(self.f(s), dtype=float)
            out = np.zeros((fs.size,) + shape)
            for i, u in enumerate(fs):
                if u != 0.0:
                    out[i] = fn(float(u))
            return out
        return integrand

    def _int(self, fn, shape=(), dtype=float):
        val = _s_integral(self._per_s(fn, shape), self.f, self.t)
        return np.zeros(shape) if val is None else val

    def total_mass(self):
        m = self.base.total_mass()
        if m == 0.0:
            return 0.0
        occupied = _s_integral(lambda s: (np.asarray(self.f(s)) != 0).astype(float), self.f, self.t)
        return m * (occupied or 0.0)

    def trunc_second_moment(self, u: float = 1.0):
        if u == 0.0:
            return 0.0
        return float(self._int(lambda v: self.base.trunc_second_moment(u * v)))

    def drift_correction(self, u):
        u_arr = np.atleast_1d(np.asarray(u, dtype=float))
        d = self.dim
        rows = []
        for uu in u_arr:
            if uu == 0.0:
                rows.append(np.zeros(d))
                continue

            def fn(v, uu=uu):
                return (np.asarray(self.base.drift_correction(uu * v))
                        - uu * np.asarray(self.base.drift_correction(v)))
            rows.append(np.asarray(self._int(fn, (d,))))
        out = np.array(rows)
        return out if np.ndim(u) else out[0]

    def jump_integral(self, z, tol: float = DEFAULT_TOL):
        z = np.atleast_1d(np.asarray(z, dtype=float))

        def fn(v):
            c = self.base.jump_integral(v * z, tol) - 1j * float(z @ self.base.drift_correction(v))
            return np.array([c.real, c.imag])
        re, im = self._int(fn, (2,))
        return complex(re, im)

    def abs_tail_moment(self, s0: float):
        if not math.isfinite(self.base.abs_tail_moment(1.0)):
            return math.inf
        return float(self._int(lambda v: abs(v) * self.base.abs_tail_moment(s0 / abs(v))))

    def centered_mean_term(self):
        if self.base.centered_mean_term() is None:
            return None
        cm = np.asarray(self.base.centered_mean_term())
        return np.asarray(self._int(
            lambda v: v * cm - np.asarray(self.base.drift_correction(v)), (self.dim,)))

    def signed_tail(self, s0: float):
        return np.asarray(self._int(lambda v: v * np.asarray(self.base.signed_tail(s0 / abs(v))),
                                    (self.dim,)))

    def log_moment_finite(self, p):
        return self.base.log_moment_finite(p)

    def power_moment_finite(self, q):
        return self.base.power_moment_finite(q)

    def atoms(self, max_radius=None):
        raise NotImplementedError("nu_t is not atomic")

    def to_json(self):
        raise ConfigError("integral-process measures are not serializable")


def integral_process_triplet(mu: Triplet, f, t: float) -> Triplet:
    """(A_t, nu_t, gamma_t) of Y_t = int_0^t f dX."""
    t = float(t)
    if not t > 0:
        raise ConfigError("t must be positive")
    sq = f.sq_integral(0.0, t)
    A_t = sq * mu.A
    if mu.nu.is_zero:
        g_int = f.integral(0.0, t)
        return Triplet(A_t, mu.nu, g_int * mu.gamma)
    nu_t = IntegralMeasure(mu.nu, f, t)
    d = mu.dim

    def drift(s):
        fs = np.asarray(f(s), dtype=float)
        out = np.zeros((fs.size, d))
        nz = fs != 0
        if np.any(nz):
            out[nz] = gamma_scaled(mu, fs[nz])
        return out
    g_t = _s_integral(drift, f, t)
    return Triplet(A_t, nu_t, np.zeros(d) if g_t is None else g_t)


# radii up to here are summed one by one in the swapped cumulant
SWAP_K = 1 << 22
# accepted bound on the far-radius step of the swapped cumulant
SWAP_MAX_ERR = 1e-6


def _inv_s_exp(alpha: np.ndarray, a: float, b: float) -> np.ndarray:
    """int_a^b (e^{i alpha/s} - 1) ds, vectorized over alpha (a > 0).

    The antiderivative is s expm1(i alpha/s) + i alpha E1(-i alpha/s) with
    E1(-iy) = -Ci|y| + i sgn(y) (pi/2 - Si|y|).
    """
    from scipy.special import sici

    def F(s):
        y = alpha / s
        si, ci = sici(np.abs(y))
        with np.errstate(invalid="ignore"):
            e1 = -ci + 1j * np.sign(y) * (0.5 * math.pi - si)
            out = s * np.expm1(1j * y) + 1j * alpha * e1
        return np.where(alpha == 0.0, 0.0, out)
    return F(b) - F(a)


@functools.lru_cache(maxsize=1)
def _swap_table():
    from . import _blocks
    k, c = _blocks.weights(2, SWAP_K)
    kf = k.astype(float)
    tail = float(_blocks.tail_series(lambda x: 1.0 / x, SWAP_K + 1, signed=False))
    return np.abs(c) / kf, np.sign(c) * kf, tail


def _swapped_cumulant(mu: Triplet, f, z: np.ndarray, T: float):
    """int_0^T int (e^{i f(s)<z,x>} - 1) nu(dx) ds by summing over atoms first.

    Applies to f = 1/s on [1, inf) (optionally masked) with atomic or block
    jump parts.  Returns (value, compensator, error bound) or None.  Block
    radii beyond SWAP_K enter as -length * mass; the bound on that step comes
    from |int_a^b e^{i alpha/s} ds| <= 2 b^2/|alpha|.
    """
    from .measures import BlockE2
    nu = mu.nu
    if getattr(f, "family", None) not in ("InvS", "PowerDecay") or f.decay != 1.0:
        return None
    if not isinstance(nu, (FiniteAtomic, BlockE2)):
        return None
    pieces = [(max(l, 1.0), r) for l, r in f._pieces(1.0, T) if r > max(l, 1.0)]
    atoms = [nu] if isinstance(nu, FiniteAtomic) else ([nu.extra] if nu.extra is not None else [])
    val, comp, err = 0j, 0.0, 0.0
    for at in atoms:
        if at.masses.size:
            al = at.points @ z
            val += sum(complex(np.sum(at.masses * _inv_s_exp(al, l, r))) for l, r in pieces)
            comp += float((at.masses / (1.0 + at.radii ** 2)) @ al)
    if isinstance(nu, BlockE2):
        from . import _blocks
        w, sk, tail = _swap_table()
        length = sum(r - l for l, r in pieces)
        b = max(r for _, r in pieces) if pieces else 0.0
        for lam, xi in zip(nu.lam, nu.directions):
            p = float(xi @ z)
            if p == 0.0 or not pieces:
                continue
            val += lam * sum(complex(np.dot(w, _inv_s_exp(p * sk, l, r))) for l, r in pieces)
            val += -lam * length * tail
            err += lam * tail * 2.0 * b * b / (abs(p) * SWAP_K)
        comp += float(_blocks.radial_compensator() * (nu.xi_bar @ z))
    return val, comp, err


def phi_cumulant(mu: Triplet, f, z, T: float, *, abs_tol: float = ABS_TOL,
                 rel_tol: float = REL_TOL, tol: float = DEFAULT_TOL) -> complex:
    """int_0^T C_mu(f(s) z) ds."""
    z = _vec(z, mu.dim)
    T = float(T)
    if T <= 0:
        return 0j
    if not mu.nu.is_zero and not np.any(mu.A) and T > 1.0:
        sw = _swapped_cumulant(mu, f, z, T)
        if sw is not None and sw[2] <= SWAP_MAX_ERR:
            jump, comp, _ = sw
            lin = float(mu.gamma @ z) - comp
            return jump + 1j * lin * f.integral(0.0, T)
    zAz = float(z @ mu.A @ z)
    gz = float(mu.gamma @ z)

    def integrand(s):
        fs = np.asarray(f(s), dtype=float)
        out = np.zeros((fs.size, 2))
        out[:, 0] = -0.5 * fs * fs * zAz
        out[:, 1] = fs * gz
        if not mu.nu.is_zero:
            for i, v in enumerate(fs):
                if v != 0.0:
                    c = mu.nu.jump_integral(v * z, tol)
                    out[i, 0] += c.real
                    out[i, 1] += c.imag
        return out
    val = _s_integral(integrand, f, T, abs_tol=abs_tol, rel_tol=rel_tol)
    return 0j if val is None else complex(val[0], val[1])
