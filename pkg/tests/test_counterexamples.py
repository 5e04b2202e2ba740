import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from levy_domains import counterexamples as ce
from levy_domains import mean
from levy_domains.core import Triplet


@pytest.mark.parametrize("k", ce.TAIL_KS)
def test_tail_sum_identity(k):
    assert ce.tail_sum(k) == pytest.approx(ce.tail_sign(k) / math.log(k), abs=1e-12)


@given(st.integers(2, 3000))
def test_tail_sum_telescopes_by_one_step(k):
    """tail_sum(k) - tail_sum(k+1) equals the single weight c_k."""
    from levy_domains._blocks import signed_weight
    assert ce.tail_sum(k) - ce.tail_sum(k + 1) == pytest.approx(signed_weight(k), abs=1e-13)


@pytest.mark.parametrize("k", [3, 17, 513])
def test_streamed_tail_sum_matches(k):
    assert ce.tail_sum_streamed(k, 1 << 20) == pytest.approx(ce.tail_sum(k), abs=1e-12)


def test_tail_sign_flips_at_block_boundaries():
    signs = [ce.tail_sign(k) for k in (3, 16, 17, 512, 513)]
    assert signs == [1, 1, -1, -1, 1]


def test_abs_moment_small_stream_consistent():
    am = ce.abs_moment(1 << 20)
    assert am.error < 1e-9
    assert abs(am.forward - am.reverse) < 1e-12
    assert ce.abs_moment_partial(1 << 20) + am.remainder == pytest.approx(am.value, abs=1e-12)


@pytest.mark.parametrize("dim", [1, 2])
def test_mu_and_mu_tilde_have_mean_zero(dim):
    assert np.linalg.norm(mean(ce.build_mu(dim=dim))) < 1e-12
    assert np.linalg.norm(mean(ce.build_mu_tilde(dim=dim))) < 1e-12


def test_identity_table_all_ok():
    rows = ce.identity_table()
    assert rows and all(r["ok"] for r in rows)


def test_emitted_measure_round_trips():
    mu = ce.build_mu_tilde()
    again = Triplet.from_json(mu.to_json())
    assert again.config_hash() == mu.config_hash()


def test_tail_log_integral_exact_below_cut():
    """Direct check of int_1^t tail(s) ds/s against per-unit summation for small t."""
    t = 40
    from levy_domains._blocks import tail_sum
    direct = math.fsum(tail_sum(k + 1) * math.log((k + 1) / k) for k in range(1, t))
    assert ce.tail_log_integral(float(t)) == pytest.approx(direct, abs=1e-13)
