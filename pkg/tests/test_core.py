import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from levy_domains import ConfigError, FiniteAtomic, Triplet, cumulant, load_triplet, mean, phi
from levy_domains.core import gamma_scaled, phi_cumulant, phi_tilde, scale_triplet, sup_gamma
from levy_domains.integrands import ExpDecay, InvS, PiecewiseTable, PowerDecay

reals = st.floats(-5.0, 5.0, allow_nan=False)


def _direct_cumulant(mu, z):
    x, w = mu.nu.points[:, 0], mu.nu.masses
    jump = np.sum(w * (np.exp(1j * z * x) - 1 - 1j * z * x / (1 + x * x)))
    return -0.5 * z * z * mu.A[0, 0] + 1j * mu.gamma[0] * z + jump


def _direct_gamma_u(mu, u):
    x, w = mu.nu.points[:, 0], mu.nu.masses
    return u * mu.gamma[0] + np.sum(w * u * x * (1 / (1 + (u * x) ** 2) - 1 / (1 + x * x)))


@given(reals)
def test_cumulant_matches_direct_sum(atomic_mu, z):
    assert complex(cumulant(atomic_mu, z)) == pytest.approx(_direct_cumulant(atomic_mu, z),
                                                             abs=1e-12)


@given(reals)
def test_cumulant_conjugate_symmetry(atomic_mu, z):
    assert complex(cumulant(atomic_mu, -z)) == pytest.approx(
        complex(cumulant(atomic_mu, z)).conjugate(), abs=1e-12)


def test_cumulant_at_zero_vanishes(atomic_mu):
    assert complex(cumulant(atomic_mu, 0.0)) == 0


@given(st.floats(-20.0, 20.0, allow_nan=False).filter(lambda u: abs(u) > 1e-6))
def test_gamma_scaled_matches_definition(atomic_mu, u):
    assert float(gamma_scaled(atomic_mu, u)[0]) == pytest.approx(_direct_gamma_u(atomic_mu, u),
                                                                 rel=1e-10, abs=1e-12)


@given(st.floats(0.01, 10.0), reals)
def test_scaled_triplet_cumulant_identity(atomic_mu, u, z):
    """C_{mu^u}(z) = C_mu(u z)."""
    mu_u = scale_triplet(atomic_mu, u).triplet
    assert complex(cumulant(mu_u, z)) == pytest.approx(complex(cumulant(atomic_mu, u * z)),
                                                       abs=1e-10)


@given(st.floats(0.01, 10.0))
def test_phi_is_sum_of_three_parts(atomic_mu, u):
    x, w = atomic_mu.nu.points[:, 0], atomic_mu.nu.masses
    want = 2.0 * u * u + np.sum(w * np.minimum((u * x) ** 2, 1.0)) + abs(_direct_gamma_u(atomic_mu, u))
    assert phi(atomic_mu, u) == pytest.approx(want, rel=1e-10)


@given(st.floats(0.01, 10.0))
def test_phi_tilde_dominates_phi(atomic_mu, u):
    assert phi_tilde(atomic_mu, u) >= phi(atomic_mu, u) - 1e-12
    grid = np.linspace(0.0, u, 400)
    brute = max(abs(_direct_gamma_u(atomic_mu, v)) for v in grid)
    assert sup_gamma(atomic_mu, u) >= brute - 1e-9


def test_mean_of_atomic(atomic_mu):
    x, w = atomic_mu.nu.points[:, 0], atomic_mu.nu.masses
    want = 0.4 + np.sum(w * x * x * x / (1 + x * x))
    assert mean(atomic_mu)[0] == pytest.approx(want, rel=1e-12)


def test_json_round_trip(tmp_path, atomic_mu):
    p = tmp_path / "m.json"
    p.write_text(json.dumps(atomic_mu.to_json()))
    mu = load_triplet(p)
    assert mu.config_hash() == atomic_mu.config_hash()
    assert complex(cumulant(mu, 0.7)) == complex(cumulant(atomic_mu, 0.7))


def test_json_unknown_field_rejected(atomic_mu):
    obj = atomic_mu.to_json()
    obj["colour"] = "blue"
    with pytest.raises(ConfigError):
        Triplet.from_json(obj)


def test_bad_json_reports_position(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"A": [[1]],\n  oops}')
    with pytest.raises(ConfigError, match="line 2"):
        load_triplet(p)


@pytest.mark.parametrize("A", [[[1.0, 2.0], [0.0, 1.0]], [[1.0, 0.0], [0.0, -1.0]]])
def test_invalid_covariance_rejected(A):
    with pytest.raises(ConfigError):
        Triplet(np.array(A), FiniteAtomic.zero(2), np.zeros(2))


def test_phi_cumulant_gaussian_closed_form(bm_drift):
    """int_0^T C(f z) ds = -z^2/2 int f^2 + i z int f for BM with drift 1."""
    f = ExpDecay(c=1.0, alpha=1.0)
    z, T = 0.8, 12.0
    want = -0.5 * z * z * (1 - math.exp(-2 * T)) / 2 + 1j * z * (1 - math.exp(-T))
    assert phi_cumulant(bm_drift, f, z, T) == pytest.approx(want, abs=1e-9)


def test_phi_cumulant_swap_matches_quadrature():
    """The Fubini-swapped form for f = 1/s agrees with direct s-quadrature."""
    from levy_domains import core
    nu = FiniteAtomic(np.array([[1.5], [-3.0]]), np.array([0.7, 0.2]))
    mu = Triplet(np.zeros((1, 1)), nu, np.array([0.3]))
    f, z, T = InvS(), 0.9, 200.0
    fast = phi_cumulant(mu, f, z, T)
    old = core.SWAP_MAX_ERR
    try:
        core.SWAP_MAX_ERR = -1.0   # force the quadrature branch
        slow = phi_cumulant(mu, f, z, T)
    finally:
        core.SWAP_MAX_ERR = old
    assert fast == pytest.approx(slow, abs=1e-7)


def test_phi_cumulant_table_integrand(atomic_mu):
    f = PiecewiseTable(rows=((0.0, 2.0, (1.0, -0.25)), (3.0, 5.0, (0.5,))))
    z = 0.6
    s = (np.arange(200_000) + 0.5) * (5.0 / 200_000)
    fs = f(s)
    vals = np.array([_direct_cumulant(atomic_mu, v * z) for v in fs[::1]])
    brute = vals.sum() * 5.0 / 200_000
    assert phi_cumulant(atomic_mu, f, z, 5.0) == pytest.approx(brute, rel=1e-6)


def test_power_decay_integral_closed_form():
    f = PowerDecay(alpha=0.5)
    assert f.integral(1.0, 4.0) == pytest.approx(quad_ref(lambda s: f(np.array([s]))[0], 1.0, 4.0),
                                                 rel=1e-10)


def quad_ref(g, a, b):
    from scipy.integrate import quad
    return quad(g, a, b, epsabs=1e-13, epsrel=1e-12)[0]
