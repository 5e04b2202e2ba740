import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from levy_domains import ConfigError, MaskSet, apply_mask, dominates, parse_integrand
from levy_domains.integrands import (AlternatingInvS, ExpDecay, InvS, PiecewiseTable, PowerDecay,
                                     integrand_spec, parse_mask)

pytestmark = pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")

FAMILIES = [PowerDecay(alpha=0.7), PowerDecay(alpha=3.0), InvS(), ExpDecay(c=0.5, alpha=2.0),
            ExpDecay(c=2.0, alpha=0.5), AlternatingInvS(),
            PiecewiseTable(rows=((0.0, 1.5, (1.0, -2.0, 0.5)), (2.0, 4.0, (-0.3,))))]


def _quad(f, a, b, power=1, absolute=False):
    g = (lambda s: abs(f(np.array([s]))[0]) ** power) if absolute or power == 2 else \
        (lambda s: f(np.array([s]))[0])
    pts = [p for p in f.breakpoints(a, b) if a < p < b]
    edges = [a] + pts + [b]
    return math.fsum(quad(g, l, r, epsabs=1e-14, epsrel=1e-12, limit=200)[0]
                     for l, r in zip(edges, edges[1:]))


windows = st.tuples(st.floats(0.0, 30.0), st.floats(0.1, 40.0)).map(lambda t: (t[0], t[0] + t[1]))


@pytest.mark.parametrize("f", FAMILIES, ids=lambda f: f.spec())
@given(w=windows)
def test_closed_form_integrals_match_quadrature(f, w):
    a, b = w
    assert f.integral(a, b) == pytest.approx(_quad(f, a, b), rel=1e-9, abs=1e-12)
    assert f.abs_integral(a, b) == pytest.approx(_quad(f, a, b, absolute=True), rel=1e-9, abs=1e-12)
    assert f.sq_integral(a, b) == pytest.approx(_quad(f, a, b, power=2), rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("f", FAMILIES[:4], ids=lambda f: f.spec())
@given(w=windows)
def test_masked_integral_is_sum_over_pieces(f, w):
    D = MaskSet([(0.5, 2.5), (5.0, 9.0), (20.0, math.inf)])
    g = apply_mask(f, D)
    a, b = w
    want = math.fsum(f.integral(l, r) for l, r in D.intervals_in(a, b))
    assert g.integral(a, b) == pytest.approx(want, rel=1e-12, abs=1e-15)


def test_alternating_integral_is_wallis_log():
    """sum_n (-1)^(n+1) ln(1 + 1/n) = ln(pi/2) by the Wallis product."""
    assert AlternatingInvS().integral(0.0, math.inf) == pytest.approx(math.log(math.pi / 2), abs=1e-10)
    assert AlternatingInvS().abs_integral(1.0, 1e6) == pytest.approx(math.log(1e6), rel=1e-12)


@pytest.mark.parametrize("f,sq,ab", [(InvS(), True, False), (PowerDecay(alpha=3.0), False, False),
                                     (PowerDecay(alpha=0.5), True, True),
                                     (ExpDecay(c=1.0, alpha=0.5), True, True)])
def test_integrability_flags(f, sq, ab):
    assert f.sq_integrable == sq
    assert f.abs_integrable == ab


@given(st.lists(st.tuples(st.floats(0, 100), st.floats(0.01, 50)), max_size=4))
def test_masked_integrand_is_dominated(ivs):
    D = MaskSet([(l, l + w) for l, w in ivs])
    for f in FAMILIES[:5]:
        assert dominates(f, apply_mask(f, D))


def test_domination_order_between_families():
    assert dominates(PowerDecay(alpha=1.5), PowerDecay(alpha=0.5))
    assert not dominates(PowerDecay(alpha=0.5), PowerDecay(alpha=1.5))
    assert dominates(InvS(), AlternatingInvS()) and dominates(AlternatingInvS(), InvS())
    assert dominates(ExpDecay(c=1.0, alpha=1.0), ExpDecay(c=2.0, alpha=1.0))
    assert not dominates(ExpDecay(c=2.0, alpha=1.0), ExpDecay(c=1.0, alpha=1.0))


@given(st.lists(st.tuples(st.floats(0, 100), st.floats(0.01, 50)), max_size=3))
def test_mask_intersection_is_commutative(ivs):
    A = MaskSet([(l, l + w) for l, w in ivs])
    B = MaskSet([(3.0, 40.0), (60.0, math.inf)])
    s = np.linspace(0, 200, 2001)
    assert np.array_equal(A.intersect(B).indicator(s), A.indicator(s) * B.indicator(s))
    assert np.array_equal(A.intersect(B).indicator(s), B.intersect(A).indicator(s))


@pytest.mark.parametrize("spec", ["pow:0.7", "exp:2:0.5", "invs", "alt-invs",
                                  "invs+mask:1,3;7,inf", "exp:1:1+mask:0,2.5"])
def test_spec_round_trip(spec):
    f = parse_integrand(spec)
    g = parse_integrand(integrand_spec(f))
    s = np.linspace(0, 50, 5001)
    assert np.array_equal(f(s), g(s))


def test_table_from_csv(tmp_path):
    p = tmp_path / "f.csv"
    p.write_text("start,end,c0,c1\n0,2,1,-0.5\n3,4,2,0\n")
    f = parse_integrand(f"table:{p}")
    assert f(np.array([0.0, 1.0, 2.5, 3.5, 5.0])).tolist() == [1.0, 0.5, 0.0, 2.0, 0.0]
    assert f.integral(0, 10) == pytest.approx(1.0 + 2.0)


@pytest.mark.parametrize("spec", ["pow", "exp:1", "wave:3", "invs+mask:3,1", "invs+mask:a,b"])
def test_bad_specs_rejected(spec):
    with pytest.raises(ConfigError):
        parse_integrand(spec)


def test_overlapping_table_rejected():
    with pytest.raises(ConfigError):
        PiecewiseTable(rows=((0.0, 2.0, (1.0,)), (1.0, 3.0, (1.0,))))


def test_parse_mask_merges_overlaps():
    assert parse_mask("mask:0,2;1,3;5,inf").intervals_in(0, math.inf) == [(0.0, 3.0), (5.0, math.inf)]
