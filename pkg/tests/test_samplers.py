import math

import numpy as np
import pytest
from scipy import stats

from tailrisk.dist import ParetoShifted
from tailrisk.harness import oracle_tail_n2
from tailrisk.samplers import (
    Algorithm,
    ConfigError,
    MixtureConfig,
    WeightedSampleSet,
    batch,
    default_mix_p,
    sample_conditional_mixture,
    sample_scaling_mixture,
    sample_standard,
)
from tailrisk.streams import substream

IS_ALGS = [Algorithm.CONDITIONAL, Algorithm.SCALING]


def _tail_and_se(samples, t):
    c = samples.contributions(t)
    return samples.tail_probability(t), c.std(ddof=1) / math.sqrt(c.size)


def test_algorithm_aliases():
    assert Algorithm.parse("DLW") is Algorithm.CONDITIONAL
    assert Algorithm.parse("sm") is Algorithm.SCALING
    assert Algorithm.parse("mc") is Algorithm.STANDARD
    with pytest.raises(ConfigError):
        Algorithm.parse("tilted")


def test_default_mix_schedule():
    assert default_mix_p(1) == ()
    assert default_mix_p(3) == (2 / 3, 1 / 2)
    # every step equally likely to be the first conditioned one
    p = default_mix_p(10)
    first_big = [math.prod(p[:i]) * (1 - p[i]) for i in range(9)] + [math.prod(p)]
    np.testing.assert_allclose(first_big, 0.1)


@pytest.mark.parametrize("kw", [dict(a=0.0), dict(a=1.0), dict(sigma=0.0), dict(mix_p=(0.5,)),
                                dict(mix_p=(1.0, 0.5)), dict(lam=-1.0)])
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        MixtureConfig(Algorithm.CONDITIONAL, 3, **{"lam": 5.0, **kw})


def test_wrong_sampler_for_config():
    d = ParetoShifted(2.0)
    with pytest.raises(ConfigError):
        sample_scaling_mixture(d, MixtureConfig("dlw", 2, lam=3.0), np.random.default_rng(0))


def test_single_draw_helpers():
    d = ParetoShifted(2.0)
    rng = np.random.default_rng(0)
    s = sample_standard(d, 3, rng)
    assert s.weight == 1.0 and s.value >= 0
    c = sample_conditional_mixture(d, MixtureConfig("dlw", 3, lam=50.0), rng)
    assert c.weight > 0
    m = sample_scaling_mixture(d, MixtureConfig("sm", 3, lam=50.0), rng)
    assert m.weight > 0


def test_batch_equals_repeated_single_draws():
    d = ParetoShifted(2.0)
    cfg = MixtureConfig("dlw", 4, lam=20.0)
    many = batch(d, cfg, 50, substream(9, 1))
    rng = substream(9, 1)
    singles = [sample_conditional_mixture(d, cfg, rng) for _ in range(50)]
    assert [s.value for s in singles] == many.values.tolist()
    assert [s.weight for s in singles] == many.weights.tolist()


@pytest.mark.parametrize("alg", list(Algorithm))
def test_determinism_and_positivity(alg):
    d = ParetoShifted(3.0)
    cfg = MixtureConfig(alg, 10, lam=30.0)
    a = batch(d, cfg, 5000, substream(1, 2, 3))
    b = batch(d, cfg, 5000, substream(1, 2, 3))
    assert np.array_equal(a.values, b.values) and np.array_equal(a.weights, b.weights)
    assert np.all(a.weights > 0) and np.all(np.isfinite(a.weights))
    assert np.all(a.values >= 0)


def test_standard_single_step_is_pareto():
    d = ParetoShifted(2.0)
    s = batch(d, MixtureConfig("standard", 1), 50_000, substream(4))
    assert stats.kstest(s.values, lambda t: 1.0 - d.tail(t)).pvalue > 1e-3


@pytest.mark.parametrize("b", [1.0, 10.0, 100.0])
def test_conditional_single_step_zero_variance(b):
    d = ParetoShifted(2.0)
    s = batch(d, MixtureConfig("dlw", 1, lam=b), 10_000, substream(0))
    c = s.contributions(b)
    assert np.all(c == d.tail(b))
    assert s.tail_probability(b) == d.tail(b)


@pytest.mark.parametrize("alg", IS_ALGS)
@pytest.mark.parametrize("alpha,lam", [(2.0, 20.0), (3.0, 50.0), (1.5, 200.0)])
def test_unbiased_against_two_step_oracle(alg, alpha, lam):
    d = ParetoShifted(alpha)
    s = batch(d, MixtureConfig(alg, 2, lam=lam), 200_000, substream(11, int(alpha * 10)))
    for t in (0.5 * lam, lam, 2 * lam):
        est, se = _tail_and_se(s, t)
        # the conditional mixture only proposes paths beyond lam
        target = oracle_tail_n2(d, max(t, lam) if alg is Algorithm.CONDITIONAL else t)
        assert abs(est - target) < 4 * se


@pytest.mark.parametrize("alg", IS_ALGS)
def test_unbiased_against_plain_mc_n5(alg):
    d = ParetoShifted(2.0)
    lam = 40.0
    mc = batch(d, MixtureConfig("standard", 5), 2_000_000, substream(21))
    ref, ref_se = _tail_and_se(mc, lam)
    s = batch(d, MixtureConfig(alg, 5, lam=lam), 200_000, substream(22))
    est, se = _tail_and_se(s, lam)
    assert abs(est - ref) < 4 * math.hypot(se, ref_se)


def test_scaling_weights_average_to_one():
    d = ParetoShifted(2.0)
    s = batch(d, MixtureConfig("sm", 3, lam=25.0), 400_000, substream(5))
    w = s.weights
    assert abs(w.mean() - 1.0) < 4 * w.std() / math.sqrt(w.size)


def test_conditional_weights_average_to_tail_at_lam():
    d = ParetoShifted(2.0)
    lam = 25.0
    s = batch(d, MixtureConfig("dlw", 2, lam=lam), 400_000, substream(5))
    assert np.all(s.values > lam)
    w = s.weights
    assert abs(w.mean() - oracle_tail_n2(d, lam)) < 4 * w.std() / math.sqrt(w.size)


@pytest.mark.parametrize("alg", IS_ALGS)
def test_samples_cover_the_tail(alg):
    d = ParetoShifted(2.0)
    lam = 99.0
    s = batch(d, MixtureConfig(alg, 10, lam=lam), 10_000, substream(6))
    assert np.mean(s.values > lam) > 0.3


def test_sample_set_container():
    s = WeightedSampleSet([1.0, 2.0, 3.0], [0.5, 1.0, 1.5])
    assert len(s) == 3
    assert s[1].value == 2.0 and s[1].weight == 1.0
    assert [x.value for x in s] == [1.0, 2.0, 3.0]
    assert s.tail_probability(1.5) == pytest.approx(2.5 / 3)
    both = WeightedSampleSet.concat([s, s])
    assert len(both) == 6
    with pytest.raises(ValueError):
        WeightedSampleSet([1.0], [1.0, 2.0])
