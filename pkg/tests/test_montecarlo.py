import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flatmagic.errors import InvalidInput
from flatmagic.montecarlo import RunningStats, batch_rng, batch_sizes, jackknife, mc_mean, run_batches


@pytest.mark.parametrize("n, b, expected", [
    (10, 4, [4, 4, 2]),
    (8, 4, [4, 4]),
    (3, 10, [3]),
    (1, 1, [1]),
])
def test_batch_sizes(n, b, expected):
    assert batch_sizes(n, b) == expected


@pytest.mark.parametrize("n, b", [(0, 4), (5, 0), (-1, 2)])
def test_batch_sizes_rejects(n, b):
    with pytest.raises(InvalidInput):
        batch_sizes(n, b)


def test_batch_rng_streams():
    a = batch_rng(3, 0).random(5)
    assert np.array_equal(a, batch_rng(3, 0).random(5))
    assert not np.array_equal(a, batch_rng(3, 1).random(5))
    assert not np.array_equal(a, batch_rng(4, 0).random(5))


def test_run_batches_order_independent_of_threads():
    def fn(rng, s):
        return rng.random(s).sum()
    assert run_batches(fn, 1000, 5, 64, threads=1) == run_batches(fn, 1000, 5, 64, threads=4)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=60), st.integers(1, 59))
def test_running_stats_merge(values, cut):
    values = np.array(values)
    cut = min(cut, len(values) - 1)
    merged = RunningStats().merge(RunningStats.of(values[:cut])).merge(RunningStats.of(values[cut:]))
    whole = RunningStats.of(values)
    assert merged.count == whole.count
    np.testing.assert_allclose(merged.mean, whole.mean, atol=1e-9)
    np.testing.assert_allclose(merged.m2, whole.m2, rtol=1e-9, atol=1e-6)


def test_running_stats_stderr():
    v = np.array([1.0, 2.0, 3.0, 4.0])
    assert RunningStats.of(v).stderr == pytest.approx(np.std(v, ddof=1) / 2)
    assert np.isnan(RunningStats.of(v[:1]).stderr)


def test_mc_mean_uniform():
    mean, se = mc_mean(lambda rng, s: rng.random((s, 2)), 20_000, 1, 1000)
    assert mean.shape == (2,)
    assert np.all(np.abs(mean - 0.5) < 4 * se)
    np.testing.assert_allclose(se, np.sqrt(1 / 12 / 20_000), rtol=0.05)


def test_mc_mean_deterministic_across_threads():
    stat = lambda rng, s: rng.standard_normal((s, 3))  # noqa: E731
    a = mc_mean(stat, 5000, 9, 300, threads=1)
    b = mc_mean(stat, 5000, 9, 300, threads=3)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def test_jackknife_linear_matches_plain_stderr():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(400)
    sums, counts = x.reshape(400, 1), np.ones(400)
    full, se = jackknife(lambda m: m, sums, counts)
    assert full[0] == pytest.approx(x.mean())
    assert se[0] == pytest.approx(x.std(ddof=1) / 20)


def test_jackknife_single_group():
    full, se = jackknife(lambda m: m ** 2, np.array([[6.0]]), np.array([3]))
    assert full[0] == pytest.approx(4.0)
    assert np.isnan(se[0])
