import math

import numpy as np
import pytest

from CIR_rates import CIRRates, build_rate_matrix, make_params, parse_newick, read_alignment
from CIR_rates.checker import ValidationError


def test_construction():
    model = CIRRates((1, 1, 1), 'HKY', kappa=2.0, freqs=[0.1, 0.2, 0.3, 0.4])
    assert model.params == make_params(1, 1, 1)
    assert model.model.family == 'HKY'
    np.testing.assert_allclose(model.model.pi, [0.1, 0.2, 0.3, 0.4])
    assert repr(model) == 'CIRRates(a=1.0, b=1.0, sigma2=1.0, model=HKY)'

    built = build_rate_matrix('K2P', {'kappa': 4})
    assert CIRRates(make_params(1, 2, 1), built).model is built
    with pytest.raises(ValidationError):
        CIRRates((1, 1, 1), built, kappa=2)


def test_from_stats():
    model = CIRRates.from_stats(0.5, 2)
    assert tuple(model.params) == pytest.approx((1, 0.5, 0.25))
    assert model.index_of_dispersion() == pytest.approx(2)
    assert model.index_of_dispersion(1) < 2


def test_mgf_and_transition():
    model = CIRRates((1, 1, 1))
    assert model.mgf(-1, 1, 1) == pytest.approx(0.39651, abs=5e-4)
    assert model.mgf(0, 1, 1, rt=2) == pytest.approx(1, abs=1e-10)
    P = model.transition(1, 1)
    assert P[0, 0] == pytest.approx(0.25 + 0.75 * model.mgf(-4 / 3, 1, 1))
    bridged = model.transition(1, 1, rt=0.5)
    np.testing.assert_allclose(bridged.sum(axis=1), 1, atol=1e-9)
    assert bridged[0, 0] > P[0, 0]


def test_three_taxa_and_likelihood():
    model = CIRRates((1, 1, 1))
    aln = read_alignment('>A\nACG\n>B\nACC\n>C\nATG\n')
    result = model.likelihood('(A:0.2,B:0.3,C:0.9);', aln)
    assert result.method == 'exact'
    assert result.values[0] == pytest.approx(model.three_taxa(0.2, 0.3, 0.9, 'AAA'), rel=1e-12)
    tree = parse_newick('((A:0.2,B:0.3):0.4,C:0.5);')
    mc = model.likelihood(tree, aln, n_samples=200)
    assert mc.method == 'mc'
    assert np.all(np.isfinite(mc.log_values))


def test_simulate_and_dispersion():
    model = CIRRates((1, 1, 1), 'K2P', kappa=2)
    aln = model.simulate('(A:0.5,B:0.5);', 100, seed=3, dt=0.05)
    assert aln.n_sites == 100
    estimate = model.dispersion(1, 2000, seed=4, dt=0.05)
    assert estimate.n == 2000
    assert estimate.value == pytest.approx(1 + math.exp(-1), abs=0.2)
