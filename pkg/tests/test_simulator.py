import math

import numpy as np
import pytest
from scipy import stats

from CIR_rates.checker import ValidationError
from CIR_rates.cir import expected_integrated_rate, index_of_dispersion, make_params, transition_cdf
from CIR_rates.mgf import covarion_mgf_bridge, covarion_mgf_start, make_covarion, mgf_bridge, mgf_start
from CIR_rates.phylo import parse_newick, three_taxa_pattern_probabilities
from CIR_rates.simulator import (dispersion_experiment, integrated_rate, simulate_counts, simulate_covarion,
                                 simulate_path, simulate_sequences, simulate_substitutions)


def within(sample, expected, bands=4):
    return abs(sample.mean() - expected) < bands * sample.std() / math.sqrt(sample.size)


def test_path_follows_the_mean_ode():
    p = make_params(1, 1, 1e-12)
    path = simulate_path(p, 2, 1, np.random.default_rng(1), dt=0.01)
    assert path.rates.shape == (101,)
    assert path.times[-1] == pytest.approx(1)
    np.testing.assert_allclose(path.rates, 1 + np.exp(-path.times), atol=1e-5)
    assert path.tau == pytest.approx(expected_integrated_rate(p, 2, 1), abs=1e-4)


def test_grid_covers_the_horizon():
    path = simulate_path(make_params(1, 1, 1), 1, 0.25, np.random.default_rng(1), dt=0.1, size=3)
    assert path.rates.shape == (3, 4)
    assert path.times[-1] == pytest.approx(0.25)
    assert np.all(path.rates >= 0)


def test_integrated_rate_mean(p111):
    tau, _ = integrated_rate(p111, 1.5, 1, np.random.default_rng(2), dt=0.01, size=20000)
    assert within(tau, expected_integrated_rate(p111, 1.5, 1))


def test_integrated_rate_matches_path_streams(p111):
    path = simulate_path(p111, 1, 0.5, np.random.default_rng(4), dt=0.05, size=5)
    tau, end = integrated_rate(p111, 1, 0.5, np.random.default_rng(4), dt=0.05, size=5)
    np.testing.assert_allclose(tau, path.tau, rtol=1e-12)
    np.testing.assert_array_equal(end, path.rates[:, -1])


@pytest.mark.parametrize('mode', ['exact', 'euler'])
def test_laplace_transform_of_simulated_paths(p111, mode):
    tau, _ = integrated_rate(p111, 1, 1, np.random.default_rng(3), dt=1e-3 if mode == 'euler' else 0.01,
                             mode=mode, size=20000)
    assert within(np.exp(-tau), mgf_start(p111, 1, -1, 1))


def test_bridge_mgf_against_paths_ending_near_rt(p111):
    tau, end = integrated_rate(p111, 1, 1, np.random.default_rng(23), dt=0.01, size=2000000)
    near = np.abs(end - 1) < 0.02
    assert near.sum() > 30000
    assert within(np.exp(-tau[near]), mgf_bridge(p111, 1, 1, -1, 1))


@pytest.mark.parametrize('eta, t, r0', [(-0.5, 0.5, 0.2), (-2, 1.5, 1), (-1, 0.3, 3)])
def test_laplace_transform_grid(p111, eta, t, r0):
    tau, _ = integrated_rate(p111, r0, t, np.random.default_rng(17), dt=0.01, size=20000)
    assert within(np.exp(eta * tau), mgf_start(p111, r0, eta, t))


def test_grid_marginal_is_the_transition_law(p111):
    path = simulate_path(p111, 0.5, 1, np.random.default_rng(8), dt=0.1, size=20000)
    result = stats.kstest(path.rates[:, -1], lambda x: transition_cdf(p111, 0.5, 1, x))
    assert result.pvalue > 0.001


def test_unknown_mode(p111):
    with pytest.raises(ValidationError, match='acceptable'):
        simulate_path(p111, 1, 1, np.random.default_rng(), mode='milstein')


def test_counts_with_frozen_rate():
    p = make_params(1, 1, 1e-10)
    counts = simulate_substitutions(p, 10, np.random.default_rng(6), r0=1, size=20000, dt=0.1)
    assert within(counts, 10)
    assert counts.var() / counts.mean() == pytest.approx(1, abs=0.05)


def test_counts_are_overdispersed(p111):
    counts = simulate_substitutions(p111, 10, np.random.default_rng(7), size=20000, dt=0.01)
    assert within(counts, 10)
    assert counts.var() / counts.mean() == pytest.approx(index_of_dispersion(p111, 10), rel=0.1)


def test_thinning_margin_does_not_change_the_law(p111):
    low = simulate_substitutions(p111, 2, np.random.default_rng(12), size=20000, dt=0.05, margin=1.5)
    high = simulate_substitutions(p111, 2, np.random.default_rng(13), size=20000, dt=0.05, margin=3.0)
    edges = [0, 1, 2, 3, 4, 6, 9, np.inf]
    table = np.array([np.histogram(low, edges)[0], np.histogram(high, edges)[0]])
    assert stats.chi2_contingency(table)[1] > 0.001
    with pytest.raises(ValidationError):
        simulate_substitutions(p111, 2, np.random.default_rng(), margin=0.5)


def test_simulate_counts_is_deterministic(p111):
    one = simulate_counts(p111, 1, 2500, seed=21, dt=0.05, workers=1)
    two = simulate_counts(p111, 1, 2500, seed=21, dt=0.05, workers=2)
    np.testing.assert_array_equal(one.counts, two.counts)
    assert one.counts.shape == (2500,)
    assert one.params == (1, 1, 1)
    other = simulate_counts(p111, 1, 2500, seed=22, dt=0.05)
    assert not np.array_equal(one.counts, other.counts)


def test_dispersion_experiment(p111):
    estimate = dispersion_experiment(p111, 1, 10000, seed=1985, dt=0.01)
    assert estimate.n == 10000
    assert estimate.value == pytest.approx(1 + math.exp(-1), abs=0.1)
    with pytest.raises(ValidationError, match='at least 100'):
        dispersion_experiment(p111, 1, 50)


def test_zero_branches_copy_the_root(jc, p111):
    tree = parse_newick('(A:0,(B:0,C:0):0);')
    aln = simulate_sequences(tree, jc, p111, 500, seed=2)
    assert aln.names == ('A', 'B', 'C')
    assert aln.sequences[0] == aln.sequences[1] == aln.sequences[2]


def test_long_branches_saturate(hky, p111):
    tree = parse_newick('(A:100,B:100);')
    aln = simulate_sequences(tree, hky, p111, 20000, seed=3, dt=0.5)
    codes = aln.codes()
    for row in codes:
        frequencies = np.bincount(row, minlength=4) / row.size
        np.testing.assert_allclose(frequencies, hky.pi, atol=0.015)
    assert np.mean(codes[0] == codes[1]) == pytest.approx(np.sum(hky.pi ** 2), abs=0.015)


def test_three_taxa_pattern_frequencies(jc, p111):
    tree = parse_newick('(A:0.2,B:0.5,C:1.1);')
    aln = simulate_sequences(tree, jc, p111, 100000, seed=4, dt=0.005)
    codes = aln.codes()
    pattern = codes[0] * 16 + codes[1] * 4 + codes[2]
    observed = np.bincount(pattern, minlength=64) / pattern.size
    probs = three_taxa_pattern_probabilities(jc, p111, 0.2, 0.5, 1.1).ravel()
    se = np.sqrt(probs * (1 - probs) / pattern.size)
    assert np.all(np.abs(observed - probs) < 4.5 * se)


def test_branch_integrated_rates(jc, p111):
    tree = parse_newick('((A:0.5,B:0.5):0.5,C:1);')
    aln, taus = simulate_sequences(tree, jc, p111, 3000, seed=5, dt=0.05, return_tau=True)
    assert set(taus) == {'node1', 'A', 'B', 'C'}
    assert all(x.shape == (3000,) for x in taus.values())
    assert within(taus['C'], 1)
    again = simulate_sequences(tree, jc, p111, 3000, seed=5, dt=0.05, workers=2)
    assert again == aln


def test_simulate_sequences_validation(jc, p111):
    with pytest.raises(ValidationError):
        simulate_sequences(parse_newick('(A:1,B:1);'), jc, p111, 0)


def test_covarion_paths_match_the_mgf():
    c = make_covarion([[-1, 1], [2, -2]], [0.2, 2.5])
    tau, end = simulate_covarion(c, 0, 1.5, np.random.default_rng(10), size=40000)
    assert within(np.exp(-tau), covarion_mgf_start(c, 0, -1, 1.5))
    landed = end == 1
    conditional = np.exp(-tau[landed])
    assert within(conditional, covarion_mgf_bridge(c, 0, 1, -1, 1.5))
    assert 0.2 * 1.5 <= tau.min() and tau.max() <= 2.5 * 1.5


def test_covarion_without_switches():
    c = make_covarion([[0]], [2.0])
    tau, end = simulate_covarion(c, 0, 3, np.random.default_rng(1))
    assert tau == 6
    assert end == 0


def test_paths_forget_their_start(p111):
    path = simulate_path(p111, 3, 20, np.random.default_rng(14), dt=1, size=20000)
    result = stats.kstest(path.rates[:, -1], stats.gamma(p111.shape, scale=p111.scale).cdf)
    assert result.pvalue > 0.001
