import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from levy_domains import AnalyticTail, FiniteAtomic, Status, Triplet, classify, mean
from levy_domains.classifier import (CLASSES, DriftIntegrand, build_defeating_mask, check_chain,
                                     cond_gaussian, cond_levy, drift_partials, sign_sets)
from levy_domains.integrands import AlternatingInvS, ExpDecay, InvS, PowerDecay
from levy_domains.suites import random_pair, random_triplet

M, N, U = Status.MEMBER, Status.NONMEMBER, Status.UNDETERMINED
RANK = {N: 0, U: 1, M: 2}


def pareto_mu(alpha, gamma=0.0):
    nu = AnalyticTail(np.array([[1.0]]), np.array([1.0]), alpha=alpha, kappa=1.0)
    return Triplet(np.zeros((1, 1)), nu, np.array([gamma]))


def test_all_members_for_gaussian_and_exponential(bm_drift):
    v = classify(bm_drift, ExpDecay(c=1.0, alpha=1.0))
    assert v.as_dict() == {c: M for c in CLASSES}
    assert [e.condition for e in v.evidence] == ["gauss", "levy", "drift", "abs"]


def test_gaussian_part_infinite_gives_nonmember(bm_drift):
    v = classify(bm_drift, PowerDecay(alpha=3.0))     # int s^(-2/3) = inf
    assert v.De is N and v.D0 is N
    assert v.evidence[0].record["verdict"] == "Infinite"


def test_heavy_tail_breaks_levy_condition():
    v = classify(pareto_mu(0.7), InvS())
    assert v.De is N


def test_finite_mean_compensated_by_mean():
    """Pareto alpha = 1.5 has a finite first moment: D fails, Dc holds with q = mean."""
    mu = pareto_mu(1.5, gamma=0.2)
    v = classify(mu, InvS())
    assert v.D is N and v.Dc is M
    assert v.q[0] == pytest.approx(float(mean(mu)[0]), rel=1e-6)


def test_brownian_drift_witnesses(bm_drift):
    v = classify(bm_drift, InvS())
    assert (v.D, v.Dc, v.De) == (N, M, M)
    assert v.q == pytest.approx((1.0,))
    assert classify(bm_drift, AlternatingInvS()).D is M


@settings(max_examples=25)
@given(st.integers(0, 2 ** 32 - 1))
def test_verdict_respects_chain(seed):
    rng = np.random.default_rng(seed)
    mu = random_triplet(rng)
    f, _ = random_pair(rng)
    v = classify(mu, f)
    st_ = v.as_dict()
    check_chain(st_)
    for a, b in zip(CLASSES, CLASSES[1:]):
        if st_[a] is M:
            assert st_[b] is M
        if st_[b] is N:
            assert st_[a] is N


@given(st.floats(0.1, 5.0))
def test_gaussian_condition_value(tr):
    mu = Triplet(np.array([[tr]]), FiniteAtomic.zero(1), np.zeros(1))
    assert cond_gaussian(mu, ExpDecay(c=1.0, alpha=1.0), 30.0).value == pytest.approx(
        tr * (1 - math.exp(-60.0)) / 2, rel=1e-12)


def test_levy_condition_value_atomic():
    nu = FiniteAtomic(np.array([[2.0]]), np.array([1.0]))
    mu = Triplet(np.zeros((1, 1)), nu, np.zeros(1))
    # int_1^T min(4/s^2, 1) ds = 1 + 2 - 4/T for T > 2
    assert cond_levy(mu, InvS(), 100.0).value == pytest.approx(3.0 - 0.04, rel=1e-9)


def test_drift_partials_pure_drift():
    mu = Triplet(np.zeros((1, 1)), FiniteAtomic.zero(1), np.array([0.5]))
    G = drift_partials(mu, InvS(), [10.0, 100.0])
    assert G[:, 0] == pytest.approx(0.5 * np.log([10.0, 100.0]), rel=1e-10)


def test_sign_sets_partition_window():
    nu = FiniteAtomic(np.array([[1.0], [-3.0]]), np.array([2.0, 0.4]))
    mu = Triplet(np.zeros((1, 1)), nu, np.array([-0.3]))
    h = DriftIntegrand(mu, InvS())
    plus, minus, zero = sign_sets(h, 0, (1.0, 500.0))
    s = np.geomspace(1.0, 499.0, 3001)
    ind = plus.indicator(s) + minus.indicator(s) + zero.indicator(s)
    assert np.all(ind == 1.0)
    hv = h(s)[:, 0]
    assert np.all(hv[plus.indicator(s) == 1] >= -1e-12)
    assert np.all(hv[minus.indicator(s) == 1] <= 1e-12)


@pytest.mark.slow
def test_defeating_mask_for_block_measure():
    from levy_domains.counterexamples import build_mu
    mu = build_mu()
    dm = build_defeating_mask(mu, InvS())
    assert dm.verified
    from levy_domains.integrands import apply_mask
    assert classify(mu, apply_mask(InvS(), dm.D)).D is N
