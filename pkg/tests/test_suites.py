import numpy as np
import pytest

from levy_domains import Status, dominates
from levy_domains.suites import (CHECKS, check_draw, log_moment_series_finite, log_moment_suite,
                                 monotonicity_suite, random_log_atomic, random_pair)


@pytest.mark.parametrize("seed", range(5))
def test_random_pairs_are_dominated(seed):
    rng = np.random.default_rng(seed)
    for _ in range(20):
        f1, f2 = random_pair(rng)
        assert dominates(f1, f2, (0.0, 1e4), grid=256)


def test_small_monotonicity_suite_clean():
    rep = monotonicity_suite(draws=20, seed=3)
    assert set(rep.passed) == set(CHECKS)
    assert not any(rep.failed.values())
    assert rep.undetermined_fraction < 0.1
    assert rep.to_json()["ok"]


def test_small_log_moment_suite_clean():
    rep = log_moment_suite(n_measures=4, seed=3)
    assert rep.failed["log-moment"] == 0
    assert rep.passed["log-moment"] == 4 * 9


def test_series_test_p_series_threshold():
    rng = np.random.default_rng(0)
    mu = random_log_atomic(rng)
    while type(mu.nu).__name__ != "AnalyticTail":
        mu = random_log_atomic(rng)
    a = mu.nu.alpha
    assert log_moment_series_finite(mu.nu, a - 1.5) is (a - (a - 1.5) > 1)
    assert not log_moment_series_finite(mu.nu, a - 0.5)


def test_check_draw_flags_a_violation():
    """A synthetic verdict pair breaking de-monotonicity is reported as a failure."""
    from levy_domains.classifier import DomainVerdict
    from levy_domains.core import Triplet
    from levy_domains import FiniteAtomic
    from levy_domains.integrands import InvS
    M, N = Status.MEMBER, Status.NONMEMBER
    mu = Triplet(np.eye(1), FiniteAtomic.zero(1), np.zeros(1))
    v1 = DomainVerdict(M, M, M, M)
    v2 = DomainVerdict(N, N, N, N)
    out = check_draw(mu, InvS(), InvS(), v1, v2)
    assert out["de-monotone"] == "fail" and out["d0-monotone"] == "fail"
