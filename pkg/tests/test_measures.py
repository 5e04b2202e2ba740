import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from levy_domains import AnalyticTail, BlockE2, ConfigError, FiniteAtomic
from levy_domains import _blocks, counterexamples as ce

U = st.floats(1e-3, 1e3)


def pareto(alpha, kappa=1.3):
    return AnalyticTail(np.array([[1.0]]), np.array([1.0]), alpha=alpha, kappa=kappa)


def pareto_density(alpha, kappa):
    return lambda r: kappa * alpha * r ** (-alpha - 1.0)


def _quad(g, a, b=math.inf, points=None):
    return quad(g, a, b, epsabs=1e-14, epsrel=1e-12, limit=500, points=points)[0]


# ---------------------------------------------------------------------------
# finite atomic

def test_atomic_symmetry_detection():
    assert FiniteAtomic(np.array([[1.0], [-1.0]]), np.array([2.0, 2.0])).symmetric
    assert not FiniteAtomic(np.array([[1.0], [-1.0]]), np.array([2.0, 1.0])).symmetric


@given(U)
def test_atomic_tsm_direct(u):
    x, w = np.array([0.3, -2.0, 7.0]), np.array([1.0, 0.5, 0.2])
    nu = FiniteAtomic(x[:, None], w)
    assert nu.trunc_second_moment(u) == pytest.approx(np.sum(w * np.minimum((u * x) ** 2, 1)),
                                                      rel=1e-12)


@given(st.floats(0.0, 10.0))
def test_atomic_signed_tail_direct(s):
    x, w = np.array([0.3, -2.0, 7.0]), np.array([1.0, 0.5, 0.2])
    nu = FiniteAtomic(x[:, None], w)
    sel = np.abs(x) > s
    assert nu.signed_tail(s)[0] == pytest.approx(np.sum((w * x)[sel]), abs=1e-14)


# ---------------------------------------------------------------------------
# pareto tail, compared with quadrature of its density

@given(st.floats(0.2, 1.9), U)
def test_pareto_tsm_matches_density(alpha, u):
    nu, g = pareto(alpha), pareto_density(alpha, 1.3)
    knee = 1.0 / u
    if knee > 1:
        want = _quad(lambda r: u * u * r * r * g(r), 1.0, knee) + _quad(g, knee)
    else:
        want = _quad(g, 1.0)
    assert nu.trunc_second_moment(u) == pytest.approx(want, rel=1e-7)


@pytest.mark.parametrize("alpha", [0.4, 1.0, 1.5])
@pytest.mark.parametrize("z", [0.3, 2.0])
def test_pareto_jump_integral_matches_fourier_quadrature(alpha, z):
    kappa = 1.3
    nu, g = pareto(alpha, kappa), pareto_density(alpha, kappa)
    cos_part = quad(g, 1.0, math.inf, weight="cos", wvar=z)[0]
    sin_part = quad(g, 1.0, math.inf, weight="sin", wvar=z)[0]
    comp = _quad(lambda r: r / (1 + r * r) * g(r), 1.0)
    want = complex(cos_part - kappa, sin_part - z * comp)
    assert nu.jump_integral(np.array([z])) == pytest.approx(want, abs=1e-7)


@given(st.floats(0.2, 1.9), st.floats(1e-2, 1e2))
def test_pareto_drift_correction_matches_density(alpha, u):
    nu, g = pareto(alpha), pareto_density(alpha, 1.3)

    def integrand(r):
        return u * r * (1 / (1 + (u * r) ** 2) - 1 / (1 + r * r)) * g(r)
    knee = max(1.0, 1.0 / u)
    want = _quad(integrand, 1.0, knee) + _quad(integrand, knee)
    assert float(np.ravel(nu.drift_correction(u))[0]) == pytest.approx(want, rel=1e-6, abs=1e-10)


@pytest.mark.parametrize("alpha,finite", [(0.5, False), (1.0, False), (1.5, True)])
def test_pareto_first_moment_finiteness(alpha, finite):
    assert math.isfinite(pareto(alpha).abs_tail_moment(1.0)) == finite


def test_pareto_rejects_alpha_out_of_range():
    with pytest.raises(ConfigError):
        pareto(2.5)


# ---------------------------------------------------------------------------
# log atoms: e^n with mass kappa n^-alpha

@given(st.floats(1.1, 4.0), st.floats(1e-6, 1.0))
def test_log_atoms_tsm_direct_sum(alpha, u):
    nu = AnalyticTail(np.array([[1.0]]), np.array([0.7]), alpha=alpha, kappa=2.0, kind="log_atoms")
    n = np.arange(1, 701, dtype=float)
    direct = 0.7 * 2.0 * math.fsum(n ** -alpha * np.exp(np.minimum(2 * (n + math.log(u)), 0.0)))
    from scipy.special import zeta
    direct += 0.7 * 2.0 * float(zeta(alpha, 701))
    assert nu.trunc_second_moment(u) == pytest.approx(direct, rel=1e-9)


@pytest.mark.parametrize("alpha,p,finite", [(2.5, 1.0, True), (2.5, 1.5, False), (4.0, 2.9, True)])
def test_log_atoms_log_moment(alpha, p, finite):
    nu = AnalyticTail(np.array([[1.0]]), np.array([1.0]), alpha=alpha, kind="log_atoms")
    assert nu.log_moment_finite(p) == finite
    assert not nu.power_moment_finite(0.1)


# ---------------------------------------------------------------------------
# the block measure

@pytest.mark.parametrize("lo,hi", [(2, 40), (500, 530), (65520, 65560)])
def test_block_weights_vectorized_matches_scalar(lo, hi):
    k, c = _blocks.weights(lo, hi)
    assert np.allclose(c, [_blocks.signed_weight(int(n)) for n in k], rtol=1e-14, atol=0)


def test_block_coefficients_one_sided():
    for n in [2, 3, 15, 16, 17, 511, 512, 513, 70000]:
        a, b = ce.coeff(n)
        assert a * b == 0.0 and a + b > 0


def test_block_tsm_matches_atoms():
    nu = BlockE2(np.array([[1.0]]), np.array([1.0]))
    pts, w, dropped = nu.atoms()
    r = np.abs(pts[:, 0])
    for u in (1e-4, 0.01, 0.3, 1.0):
        direct = math.fsum(w * np.minimum((u * r) ** 2, 1.0))
        assert nu.trunc_second_moment(u) == pytest.approx(direct, abs=2 * dropped + 1e-12)


@pytest.mark.parametrize("s", [2.5, 16.0, 16.5, 600.0, 70000.0])
def test_block_signed_tail_is_telescoped(s):
    nu = BlockE2(np.array([[1.0]]), np.array([1.0]))
    assert nu.signed_tail(s)[0] == pytest.approx(ce.tail_sum(math.floor(s) + 1), abs=1e-12)


@pytest.mark.parametrize("z", [0.05, 0.7, 3.0])
def test_block_jump_integral_matches_atoms(z):
    nu = BlockE2(np.array([[1.0]]), np.array([1.0]), tilde=True)
    pts, w, dropped = nu.atoms()
    x = pts[:, 0]
    direct = np.sum(w * (np.exp(1j * z * x) - 1 - 1j * z * x / (1 + x * x)))
    # beyond the atom list each unit mass contributes at most 2 + |z|/|x|
    assert nu.jump_integral(np.array([z])) == pytest.approx(direct, abs=3 * dropped + 1e-9)


def test_tilde_extra_atom_cancels_first_moment():
    nu = BlockE2(np.array([[1.0]]), np.array([1.0]), tilde=True)
    assert abs(nu.first_moment()[0]) < 1e-12
    assert abs(BlockE2(np.array([[1.0]]), np.array([1.0])).first_moment()[0]
               + 1.0 / math.log(2.0)) < 1e-12


@given(st.floats(0.05, 20.0), st.floats(1e-3, 10.0))
def test_scaled_measure_tsm(u, v):
    nu = pareto(1.2)
    assert nu.scaled(u).trunc_second_moment(v) == pytest.approx(nu.trunc_second_moment(u * v),
                                                                rel=1e-10)
