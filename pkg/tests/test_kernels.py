import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from levy_domains import _accel, _fallback

compiled = pytest.mark.skipif(_accel.BACKEND != "cython", reason="extension not built")


@compiled
@pytest.mark.parametrize("lo,hi", [(2, 1000), (17, 70000), (500, 3 << 20)])
@pytest.mark.parametrize("reverse", [False, True])
def test_stream_sums_agree(lo, hi, reverse):
    from levy_domains import _kernels
    a = _kernels.stream_block_sums(lo, hi, reverse)
    b = _fallback.stream_block_sums(lo, hi, reverse)
    assert a == pytest.approx(b, rel=1e-14, abs=1e-15)


def test_stream_sums_orders_agree():
    f = _fallback.stream_block_sums(2, 1 << 21, False)
    r = _fallback.stream_block_sums(2, 1 << 21, True)
    assert f == pytest.approx(r, rel=1e-15)


@st.composite
def path_batches(draw):
    n_paths = draw(st.integers(1, 6))
    counts = draw(st.lists(st.integers(0, 12), min_size=n_paths, max_size=n_paths))
    offsets = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
    times = np.concatenate([np.sort(draw(st.lists(st.floats(0.0, 20.0), min_size=c, max_size=c)))
                            for c in counts]) if sum(counts) else np.zeros(0)
    d = draw(st.integers(1, 2))
    contrib = np.asarray(draw(st.lists(st.floats(-5, 5), min_size=len(times) * d,
                                       max_size=len(times) * d)), dtype=float).reshape(len(times), d)
    cps = np.array(sorted(set(draw(st.lists(st.floats(0.5, 25.0), min_size=1, max_size=4)))))
    edges = np.array(sorted(set(draw(st.lists(st.floats(0.0, 20.0), max_size=3)))))
    labels = np.asarray(draw(st.lists(st.integers(0, 2), min_size=len(edges) + 1,
                                      max_size=len(edges) + 1)), dtype=np.int64)
    return offsets, times.astype(float), contrib, cps, edges, labels


@compiled
@settings(max_examples=100)
@given(path_batches())
def test_accumulate_paths_agree(batch):
    from levy_domains import _kernels
    a = _kernels.accumulate_paths(*batch, 3)
    b = _fallback.accumulate_paths(*batch, 3)
    assert np.allclose(a, b, rtol=1e-13, atol=1e-13)


@given(path_batches())
def test_accumulate_totals(batch):
    """The last checkpoint summed over labels is the sum of jumps up to it."""
    offsets, times, contrib, cps, edges, labels = batch
    out = _accel.accumulate_paths(offsets, times, contrib, cps, edges, labels, 3)
    for p in range(len(offsets) - 1):
        sl = slice(offsets[p], offsets[p + 1])
        keep = times[sl] <= cps[-1]
        assert np.allclose(out[p, -1].sum(axis=0), contrib[sl][keep].sum(axis=0), atol=1e-12)
