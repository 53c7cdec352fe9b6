import math

import numpy as np
import pytest
from scipy import stats

from almostdet.core import ParameterError
from almostdet.randgen import (
    final_prob_schedule,
    gen_almost_det,
    gen_dense_nfa,
    gen_structure,
    make_rng,
    poisson,
    seed_sequence,
    trial_seed,
)


def test_single_state_structure():
    s = gen_structure(1, 2, seed=123)
    assert s.delta.tolist() == [[0, 0]]


def test_structure_reproducible():
    assert gen_structure(5, 2, 7) == gen_structure(5, 2, 7)
    assert gen_structure(50, 2, 7) != gen_structure(50, 2, 8)


def test_structure_parameter_errors():
    with pytest.raises(ParameterError):
        gen_structure(0)
    with pytest.raises(ParameterError):
        gen_structure(3, 1)


def test_uniform_target_frequency():
    hits = sum(gen_structure(1000, 2, trial_seed(5, i)).delta[0, 0] == 0 for i in range(10_000))
    assert abs(hits / 10_000 - 1 / 1000) <= 3e-3


def test_target_chi_square():
    # 10 states x 2 letters per draw, 5000 draws = 10^5 targets
    counts = np.zeros(10)
    for i in range(5000):
        counts += np.bincount(gen_structure(10, 2, trial_seed(1, i)).delta.ravel(), minlength=10)
    stat = stats.chisquare(counts).statistic
    assert stat < stats.chi2.ppf(0.999, df=9)


def test_finals_extremes():
    assert not gen_almost_det(20, 2, 0.0, 3).finals.any()
    assert gen_almost_det(20, 2, 1.0, 3).finals.all()
    with pytest.raises(ParameterError):
        gen_almost_det(5, 2, 1.5, 0)


def test_finals_mean():
    sizes = [gen_almost_det(100, 2, 0.5, trial_seed(9, i)).finals.sum() for i in range(10_000)]
    assert abs(np.mean(sizes) - 50) <= 1.5


def test_final_prob_only_changes_finals():
    a = gen_almost_det(30, 2, 0.2, 11)
    b = gen_almost_det(30, 2, 0.7, 11)
    assert a.base == b.base
    assert (a.extra_src, a.extra_dst, a.initial) == (b.extra_src, b.extra_dst, b.initial)


def test_final_prob_schedule():
    assert final_prob_schedule(17, "constant", 0.5) == 0.5
    assert final_prob_schedule(100, "sqrt_low", 1.0) == pytest.approx(0.1)
    assert final_prob_schedule(4, "sqrt_low", 1.0) == 0.5
    assert final_prob_schedule(100, "sqrt_high", 1.0) == pytest.approx(0.9)
    with pytest.raises(ParameterError):
        final_prob_schedule(100, "sqrt_low", 0.0)
    with pytest.raises(ParameterError):
        final_prob_schedule(100, "weird", 1.0)


def test_dense_nfa_reproducible_and_errors():
    a, b = gen_dense_nfa(3, 2, 0.5, 4), gen_dense_nfa(3, 2, 0.5, 4)
    assert np.array_equal(a.edges, b.edges) and a.initial == b.initial
    for bad in (0.0, 1.0, -0.1):
        with pytest.raises(ParameterError):
            gen_dense_nfa(3, 2, bad, 0)


def test_dense_nfa_out_degree():
    deg = [gen_dense_nfa(20, 2, 0.5, trial_seed(2, i)).edges.sum(axis=2).mean() for i in range(2000)]
    assert abs(np.mean(deg) - 10) <= 0.5


def test_dense_nfa_full_relation_rate():
    full = sum(gen_dense_nfa(2, 2, 0.99, trial_seed(3, i)).edges.all() for i in range(10_000))
    assert abs(full / 10_000 - 0.99**8) <= 0.01


def test_trial_streams_independent_of_order():
    forward = [gen_structure(8, 2, trial_seed(42, i)) for i in range(10)]
    backward = [gen_structure(8, 2, trial_seed(42, i)) for i in reversed(range(10))][::-1]
    assert forward == backward
    assert len({s for s in forward}) == 10


def test_seed_sequence_tags():
    a = seed_sequence(3, "x", 1)
    b = seed_sequence(seed_sequence(3, "x"), 1)
    assert a.spawn_key == b.spawn_key and a.entropy == b.entropy
    with pytest.raises(ParameterError):
        seed_sequence(-1)


@pytest.mark.parametrize("lam", [1e-3, 0.5, 2.0, 7.5, 25.0])
def test_poisson_moments(lam):
    x = poisson(make_rng(0, "poi"), lam, size=200_000)
    se = math.sqrt(lam / x.size)
    assert abs(x.mean() - lam) < 5 * se + 1e-9
    assert x.var() == pytest.approx(lam, rel=0.05, abs=1e-3)


def test_poisson_inversion_matches_pmf():
    x = poisson(make_rng(1, "poi"), 2.0, size=200_000)
    counts = np.bincount(x, minlength=12)[:12]
    expected = stats.poisson.pmf(np.arange(12), 2.0) * x.size
    mask = expected > 5
    stat = (((counts - expected) ** 2) / expected)[mask].sum()
    assert stat < stats.chi2.ppf(0.999, df=mask.sum() - 1)
    assert poisson(make_rng(0), 0.0) == 0
    with pytest.raises(ParameterError):
        poisson(make_rng(0), -1.0)
