import math

import numpy as np
import pytest
from scipy import integrate
from scipy.linalg import expm

from CIR_rates.checker import ValidationError
from CIR_rates.cir import make_params, transition_pdf
from CIR_rates.mgf import make_covarion, mgf_start
from CIR_rates.simulator import integrated_rate
from CIR_rates.substitution import (build_rate_matrix, matrix_function, transition_cir_joint, transition_cir_start,
                                    transition_constant_rate, transition_covarion_start)


def random_models(n=20, seed=3):
    rng = np.random.default_rng(seed)
    for k in range(n):
        freqs = rng.dirichlet(np.ones(4) * 3)
        if k % 2:
            yield build_rate_matrix('HKY', {'kappa': rng.uniform(0.5, 8)}, freqs)
        else:
            yield build_rate_matrix('GTR', {'rates': rng.uniform(0.2, 5, size=6)}, freqs)


def test_jc(jc):
    off = jc.Q[~np.eye(4, dtype=bool)]
    np.testing.assert_allclose(off, 1 / 3)
    np.testing.assert_allclose(np.diag(jc.Q), -1)
    np.testing.assert_allclose(jc.eigen.lambdas, [0, -4 / 3, -4 / 3, -4 / 3], atol=1e-12)
    np.testing.assert_allclose(jc.pi, 0.25)


def test_degenerate_families_equal_jc(jc):
    np.testing.assert_allclose(build_rate_matrix('K2P', {'kappa': 1}).Q, jc.Q, atol=1e-14)
    np.testing.assert_allclose(build_rate_matrix('gtr', {'rates': [2] * 6}, [0.25] * 4).Q, jc.Q, atol=1e-14)


def test_normalised_and_reversible(hky):
    assert -np.dot(hky.pi, np.diag(hky.Q)) == pytest.approx(1)
    np.testing.assert_allclose(hky.Q.sum(axis=1), 0, atol=1e-12)
    flux = hky.pi[:, None] * hky.Q
    np.testing.assert_allclose(flux, flux.T, atol=1e-12)
    np.testing.assert_allclose(hky.eigen.V @ np.diag(hky.eigen.lambdas) @ hky.eigen.U, hky.Q, atol=1e-12)
    assert hky.eigen.lambdas[0] == 0
    assert np.all(np.diff(hky.eigen.lambdas) <= 0)


def test_rate_matrix_is_read_only(hky):
    with pytest.raises(ValueError):
        hky.Q[0, 0] = 1


def test_bad_input():
    with pytest.raises(ValidationError, match='sum to 1'):
        build_rate_matrix('HKY', {'kappa': 2}, [0.3, 0.3, 0.3, 0.3])
    with pytest.raises(ValidationError, match='kappa'):
        build_rate_matrix('K2P', {'kappa': -1})
    with pytest.raises(ValidationError, match='acceptable'):
        build_rate_matrix('WAG')
    with pytest.raises(ValidationError, match='6 exchangeabilities'):
        build_rate_matrix('GTR', {'rates': [1, 2]})


def test_custom_models():
    m = build_rate_matrix('custom', Q=[[-1, 1], [2, -2]], alphabet='01')
    np.testing.assert_allclose(m.pi, [2 / 3, 1 / 3])
    assert -np.dot(m.pi, np.diag(m.Q)) == pytest.approx(1)
    assert m.index('1') == 1

    cyclic = [[-1, 1, 0], [0, -1, 1], [1, 0, -1]]
    with pytest.raises(ValidationError, match='not reversible'):
        build_rate_matrix('custom', Q=cyclic, alphabet='XYZ')
    reducible = [[-1, 1, 0, 0], [1, -1, 0, 0], [0, 0, -1, 1], [0, 0, 1, -1]]
    with pytest.raises(ValidationError, match='irreducible'):
        build_rate_matrix('custom', Q=reducible, alphabet='ABCD', freqs=[0.25] * 4)
    with pytest.raises(ValidationError, match='sum to 0'):
        build_rate_matrix('custom', Q=[[-1, 2], [1, -1]], alphabet='01')


def test_state_index(jc):
    assert jc.index('g') == 2
    assert jc.index(3) == 3
    with pytest.raises(ValidationError):
        jc.index('N')


def test_constant_rate(jc):
    np.testing.assert_allclose(transition_constant_rate(jc, 1, 0), np.eye(4), atol=1e-14)
    P = transition_constant_rate(jc, 1, 0.75)
    np.testing.assert_allclose(np.diag(P), 0.25 + 0.75 * math.exp(-1), atol=1e-12)
    np.testing.assert_allclose(P, expm(jc.Q * 0.75), atol=1e-12)
    np.testing.assert_allclose(transition_constant_rate(jc, 2, 0.5), transition_constant_rate(jc, 1, 1), atol=1e-15)


def test_constant_rate_chapman_kolmogorov(hky):
    P = transition_constant_rate(hky, 1.3, 0.4) @ transition_constant_rate(hky, 1.3, 0.6)
    np.testing.assert_allclose(P, transition_constant_rate(hky, 1.3, 1.0), atol=1e-12)


def test_cir_start_jc(jc, p111):
    P = transition_cir_start(jc, p111, 1, 1)
    np.testing.assert_allclose(np.diag(P), 0.25 + 0.75 * mgf_start(p111, 1, -4 / 3, 1), atol=1e-12)
    np.testing.assert_allclose(P.sum(axis=1), 1, atol=1e-9)


def test_cir_start_against_simulated_paths(jc, p111):
    tau, _ = integrated_rate(p111, 1, 1, np.random.default_rng(5), dt=0.01, size=100000)
    diagonal = 0.25 + 0.75 * np.exp(-4 / 3 * tau)
    expected = transition_cir_start(jc, p111, 1, 1)[0, 0]
    assert abs(diagonal.mean() - expected) < 4 * diagonal.std() / math.sqrt(tau.size)


def test_cir_start_limits(jc):
    steady = make_params(1, 50, 1e-4)
    np.testing.assert_allclose(transition_cir_start(jc, steady, 1, 1), transition_constant_rate(jc, 1, 1), atol=1e-3)
    P = transition_cir_start(jc, make_params(1, 1, 1), 1, 200)
    np.testing.assert_allclose(P, np.tile(jc.pi, (4, 1)), atol=1e-6)


def test_cir_start_breaks_chapman_kolmogorov(jc, p111):
    half = transition_cir_start(jc, p111, 1, 0.5)
    whole = transition_cir_start(jc, p111, 1, 1)
    assert np.abs(half @ half - whole).max() > 1e-3


def test_transition_laws_on_random_models(p111):
    for m in random_models():
        for P, values in [(transition_constant_rate(m, 1.2, 0.7), np.exp(m.eigen.lambdas * 0.84)),
                          (transition_cir_start(m, p111, 1.2, 0.7), mgf_start(p111, 1.2, m.eigen.lambdas, 0.7))]:
            np.testing.assert_allclose(P.sum(axis=1), 1, atol=1e-9)
            assert P.min() >= -1e-9 and P.max() <= 1 + 1e-9
            flux = m.pi[:, None] * P
            np.testing.assert_allclose(flux, flux.T, atol=1e-9)
            np.testing.assert_allclose(np.sort(np.linalg.eigvals(P).real), np.sort(values), atol=1e-9)


def test_joint_rows_and_density(hky, p111):
    joint = transition_cir_joint(hky, p111, 1, 0.7, 1)
    np.testing.assert_allclose(joint.matrix.sum(axis=1), 1, atol=1e-9)
    assert joint.density == pytest.approx(transition_pdf(p111, 1, 1, 0.7))
    np.testing.assert_allclose(joint.joint, joint.matrix * joint.density)


def test_joint_integrates_to_start_conditioned(jc, p111):
    def integrand(rt):
        if rt <= 0:
            return np.zeros(16)
        return transition_cir_joint(jc, p111, 1, rt, 1).joint.ravel()

    value, _ = integrate.quad_vec(integrand, 0, 30, epsabs=1e-10)
    np.testing.assert_allclose(value.reshape(4, 4), transition_cir_start(jc, p111, 1, 1), atol=1e-5)


def test_joint_pinned_rate_limit(jc):
    p = make_params(1, 50, 1e-3)
    matrix = transition_cir_joint(jc, p, 1, 1, 1).matrix
    np.testing.assert_allclose(matrix, transition_constant_rate(jc, 1, 1), atol=1e-3)


def test_covarion_transition(hky):
    c = make_covarion([[-1, 1], [1, -1]], [1, 1])
    np.testing.assert_allclose(transition_covarion_start(hky, c, 0, 0.8), transition_constant_rate(hky, 1, 0.8),
                               atol=1e-12)
    switching = make_covarion([[-1, 1], [1, -1]], [0, 2])
    P = transition_covarion_start(hky, switching, 0, 0.8)
    np.testing.assert_allclose(P.sum(axis=1), 1, atol=1e-9)


def test_matrix_function_of_ones_is_identity(hky):
    np.testing.assert_allclose(matrix_function(hky, np.ones(4)), np.eye(4), atol=1e-12)
    stacked = matrix_function(hky, np.ones((3, 4)))
    assert stacked.shape == (3, 4, 4)
