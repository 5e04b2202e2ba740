import math

import numpy as np
import pytest

from levy_domains import FiniteAtomic, MaskSet, Triplet, mean
from levy_domains.core import phi_cumulant
from levy_domains.integrands import ExpDecay, InvS, PiecewiseTable
from levy_domains.simulator import (Partition, empirical_cf, integrate_path, monte_carlo, rng_for,
                                    sample_path, write_csv)


def _atomic_mu(A=0.0):
    nu = FiniteAtomic(np.array([[1.0], [-2.0]]), np.array([0.5, 0.3]))
    return Triplet(np.array([[A]]), nu, np.array([0.4]))


def test_streams_are_distinct_and_reproducible():
    a = rng_for(5, 3).random(4)
    assert np.array_equal(a, rng_for(5, 3).random(4))
    assert not np.array_equal(a, rng_for(5, 4).random(4))
    assert not np.array_equal(a, rng_for(5, 3, stream=1).random(4))
    assert not np.array_equal(a, rng_for(6, 3).random(4))


def test_pure_drift_path_is_deterministic():
    mu = Triplet(np.zeros((1, 1)), FiniteAtomic.zero(1), np.array([0.7]))
    path = sample_path(mu, 100.0, seed=1)
    Y = integrate_path(InvS(), path, [10.0, 100.0])
    assert Y.values[:, 0] == pytest.approx(0.7 * np.log([10.0, 100.0]), rel=1e-12)


def test_jump_contributions_are_f_times_size():
    mu = _atomic_mu()
    path = sample_path(mu, 50.0, seed=4)
    f = ExpDecay(c=0.1, alpha=1.0)
    Y = integrate_path(f, path, [50.0])
    b = path.drift_rate[0]
    want = math.fsum(f(path.times) * path.sizes[:, 0]) + b * f.integral(0.0, 50.0)
    assert Y.values[-1, 0] == pytest.approx(want, rel=1e-12)


def test_partition_covers_and_labels():
    part = Partition.build({"a": MaskSet([(1.0, 3.0)]), "b": MaskSet([(5.0, math.inf)])}, 10.0)
    assert part.labels == ["a", "b", "rest"]
    assert part.label_of(2.0) == 0 and part.label_of(6.0) == 1 and part.label_of(4.0) == 2


def test_decomposition_exact_and_mask_invariant():
    mu = _atomic_mu(A=2.0)
    f = ExpDecay(c=0.5, alpha=1.0)
    masks = {"a": MaskSet([(0.0, 0.7)]), "b": MaskSet([(0.7, 2.0), (3.0, 4.0)])}
    r1 = monte_carlo(mu, f, masks, [1.0, 5.0], n_paths=300, seed=9, workers=1, keep_values=True)
    r0 = monte_carlo(mu, f, None, [1.0, 5.0], n_paths=300, seed=9, workers=1, keep_values=True)
    v = r1.values
    assert np.array_equal(v[:, :, :-1].sum(axis=2), v[:, :, -1])
    assert np.allclose(v[:, :, -1], r0.values[:, :, -1], atol=1e-12)


def test_rerun_bit_identical_and_worker_independent():
    mu, f = _atomic_mu(A=1.0), InvS()
    a = monte_carlo(mu, f, None, [10.0, 100.0], n_paths=64, seed=3, workers=1, keep_values=True)
    b = monte_carlo(mu, f, None, [10.0, 100.0], n_paths=64, seed=3, workers=1, keep_values=True)
    c = monte_carlo(mu, f, None, [10.0, 100.0], n_paths=64, seed=3, workers=2, keep_values=True)
    assert np.array_equal(a.values, b.values) and np.array_equal(a.values, c.values)


def test_mean_and_variance_match_theory():
    mu = _atomic_mu(A=2.0)
    f = ExpDecay(c=0.5, alpha=1.0)
    T = 6.0
    r = monte_carlo(mu, f, None, [T], n_paths=6000, seed=21, workers=1)
    nu = mu.nu
    m = float(mean(mu)[0])
    var_rate = 2.0 + float(nu.masses @ (nu.points[:, 0] ** 2))
    want_mean = m * f.integral(0.0, T)
    want_sd = math.sqrt(var_rate * f.sq_integral(0.0, T))
    se = want_sd / math.sqrt(r.n_paths)
    assert abs(r.mean[0, -1, 0] - want_mean) < 4 * se
    assert r.std[0, -1, 0] == pytest.approx(want_sd, rel=0.05)


def test_characteristic_function_matches_cumulant():
    mu = _atomic_mu(A=0.5)
    f = PiecewiseTable(rows=((0.0, 3.0, (1.0, -0.2)), (4.0, 8.0, (-0.5,))))
    T = 8.0
    r = monte_carlo(mu, f, None, [T], n_paths=4000, seed=5, workers=1, keep_values=True)
    for z in (0.3, 1.0):
        emp, se = empirical_cf(r.values[:, -1, -1], np.array([z]))
        want = np.exp(phi_cumulant(mu, f, z, T))
        assert abs(emp - want) < 4 * se


def test_from_h_masks_give_sign_labels(tmp_path):
    mu = _atomic_mu()
    r = monte_carlo(mu, InvS(), "from-h", [10.0, 100.0], n_paths=20, seed=1, workers=1)
    assert r.labels[:3] == ["+", "-", "0"]
    out = tmp_path / "r.csv"
    write_csv(r, out)
    lines = out.read_text().splitlines()
    assert lines[0] == "t,mask,mean,std,ci_lo,ci_hi,gamma_t"
    assert len(lines) == 1 + 2 * len(r.all_labels)
