"""
Reversible substitution rate matrices and their transition probabilities
under a constant rate, a CIR rate (start-conditioned or bridge-conditioned)
and a covarion-type rate chain. Every transition matrix is a matrix function
M(Q) = V diag(M(lambda)) V^-1 evaluated on the spectral decomposition of Q.
"""
import logging
from typing import NamedTuple

import numpy as np

from . import config
from .checker import NumericalError, ValidationError, check_nonnegative, check_positive, check_time, parse_frequencies
from .cir import transition_pdf
from .mgf import covarion_mgf_start, mgf_bridge, mgf_start

logger = logging.getLogger(__name__)

FAMILIES = ['JC', 'K2P', 'HKY', 'GTR', 'CUSTOM']
GTR_PAIRS = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]  # AC AG AT CG CT GT
TRANSITIONS = [(0, 2), (1, 3)]  # A<->G, C<->T


class Eigensystem(NamedTuple):
    lambdas: np.ndarray  # descending, lambdas[0] == 0
    U: np.ndarray  # rows are left eigenvectors
    V: np.ndarray  # columns are right eigenvectors, V @ U == I


class RateMatrix(NamedTuple):
    alphabet: str
    Q: np.ndarray
    pi: np.ndarray
    eigen: Eigensystem
    family: str

    @property
    def n(self):
        return len(self.alphabet)

    def index(self, state):
        if isinstance(state, (int, np.integer)):
            if 0 <= state < self.n:
                return int(state)
        elif isinstance(state, str) and len(state) == 1 and state.upper() in self.alphabet:
            return self.alphabet.index(state.upper())
        raise ValidationError(f'state {state!r} is not in the alphabet {self.alphabet}')


class JointTransition(NamedTuple):
    matrix: np.ndarray  # Pr[X_t = j | X_0 = i, R_0 = r0, R_t = rt]
    density: float  # f(rt | r0)

    @property
    def joint(self):
        """Pr[X_t = j, R_t in drt | X_0 = i, R_0 = r0] / drt"""
        return self.matrix * self.density


def build_rate_matrix(family, params=None, freqs=None, Q=None, alphabet=None):
    """
    Normalised reversible rate matrix of a standard family

    :param str family: JC, K2P, HKY, GTR or CUSTOM
    :param dict params: 'kappa' for K2P/HKY, 'rates' (AC, AG, AT, CG, CT, GT) for GTR
    :param freqs: stationary frequencies (HKY, GTR, optional for CUSTOM)
    :param Q: generator for CUSTOM
    :param str alphabet: state symbols for CUSTOM
    :rtype: RateMatrix
    """
    family = str(family).upper()
    if family not in FAMILIES:
        raise ValidationError(f'model family {family} is not one of the acceptable {FAMILIES}')
    params = params or {}
    if family == 'CUSTOM':
        return _custom_rate_matrix(Q, freqs, alphabet)

    n = len(config.DNA_ALPHABET)
    exchange = np.ones((n, n))
    if family in ('K2P', 'HKY'):
        kappa = check_positive('kappa', params.get('kappa', 1.0))
        for i, j in TRANSITIONS:
            exchange[i, j] = exchange[j, i] = kappa
    elif family == 'GTR':
        rates = params.get('rates', [1.0] * 6)
        if len(rates) != 6:
            raise ValidationError(f'GTR needs 6 exchangeabilities (AC, AG, AT, CG, CT, GT), got {len(rates)}')
        for (i, j), name, s in zip(GTR_PAIRS, ['AC', 'AG', 'AT', 'CG', 'CT', 'GT'], rates):
            exchange[i, j] = exchange[j, i] = check_positive(f'rate {name}', s)

    if family in ('JC', 'K2P') or freqs is None:
        pi = np.full(n, 1 / n)
    else:
        pi = np.array(parse_frequencies(list(map(float, freqs)), n), dtype=float)

    Q = exchange * pi[None, :]
    np.fill_diagonal(Q, 0.0)
    np.fill_diagonal(Q, -Q.sum(axis=1))
    return _finish(config.DNA_ALPHABET, Q, pi, family)


def _custom_rate_matrix(Q, freqs, alphabet):
    if Q is None or alphabet is None:
        raise ValidationError('a custom model needs both a rate matrix and an alphabet')
    Q = np.array(Q, dtype=float)
    n = len(alphabet)
    if Q.shape != (n, n):
        raise ValidationError(f'rate matrix shape {Q.shape} does not match the alphabet of {n} states')
    if len(set(alphabet)) != n:
        raise ValidationError(f'alphabet {alphabet} has repeated symbols')
    if np.any(~np.isfinite(Q)):
        raise ValidationError('rate matrix must be finite')
    off = Q - np.diag(np.diag(Q))
    if np.any(off < 0):
        raise ValidationError('off-diagonal rates must be nonnegative')
    if np.abs(Q.sum(axis=1)).max() > config.ROW_SUM_TOL * max(1.0, np.abs(Q).max()):
        raise ValidationError('rows of the rate matrix must sum to 0')
    if freqs is None:
        pi = _stationary(Q)
    else:
        pi = np.array(parse_frequencies(list(map(float, freqs)), n), dtype=float)
    flux = pi[:, None] * Q
    if np.abs(flux - flux.T).max() > config.REVERSIBILITY_TOL * max(1.0, np.abs(flux).max()):
        raise ValidationError('rate matrix is not reversible with respect to its stationary distribution')
    return _finish(alphabet.upper(), Q, pi, 'CUSTOM')


def _stationary(Q):
    w, vl = np.linalg.eig(Q.T)
    k = np.argmin(np.abs(w))
    pi = np.real(vl[:, k])
    pi = pi / pi.sum()
    if np.any(pi <= 0):
        raise ValidationError('rate matrix has no strictly positive stationary distribution')
    return pi


def _finish(alphabet, Q, pi, family):
    total = -np.dot(pi, np.diag(Q))
    if not total > 0:
        raise ValidationError('rate matrix has no substitutions')
    Q = Q / total
    eigen = eigensystem(Q, pi)
    for x in (Q, pi, eigen.lambdas, eigen.U, eigen.V):
        x.flags.writeable = False
    logger.debug(f'{family} rate matrix with eigenvalues {eigen.lambdas}')
    return RateMatrix(alphabet=alphabet, Q=Q, pi=pi, eigen=eigen, family=family)


def eigensystem(Q, pi):
    """
    Spectral decomposition of a reversible Q through the symmetric matrix
    diag(sqrt(pi)) Q diag(1/sqrt(pi))
    """
    root = np.sqrt(pi)
    S = root[:, None] * Q / root[None, :]
    S = (S + S.T) / 2
    w, W = np.linalg.eigh(S)
    order = np.argsort(w)[::-1]
    w, W = w[order], W[:, order]
    scale = max(1.0, np.abs(w).max())
    near_zero = np.abs(w) <= config.ZERO_EIGENVALUE_TOL * scale
    if near_zero.sum() != 1 or not near_zero[0]:
        raise ValidationError(f'rate matrix must be irreducible with a single zero eigenvalue, got {w}')
    w[0] = 0.0
    V = W / root[:, None]
    U = W.T * root[None, :]
    error = np.abs(V @ np.diag(w) @ U - Q).sum(axis=1).max()
    if error > config.RECONSTRUCTION_TOL * scale:
        raise NumericalError(f'eigendecomposition reconstructs Q only to {error}')
    return Eigensystem(lambdas=w, U=U, V=V)


def matrix_function(m, values):
    """V diag(values) V^-1; values of shape (..., n) give matrices of shape (..., n, n)"""
    return np.einsum('ik,...k,kj->...ij', m.eigen.V, values, m.eigen.U)


def transition_constant_rate(m, r0, t):
    r0 = check_nonnegative('r0', r0)
    t = check_nonnegative('t', t)
    return matrix_function(m, np.exp(m.eigen.lambdas * (r0 * t)))


def transition_cir_start(m, p, r0, t):
    """Pr[X_t = j | X_0 = i, R_0 = r0] under a CIR rate"""
    return matrix_function(m, mgf_start(p, r0, m.eigen.lambdas, t))


def transition_cir_joint(m, p, r0, rt, t):
    """
    Character transitions conditioned on both endpoint rates, together with
    the rate density f(rt | r0); their product is the joint transition law
    """
    matrix = matrix_function(m, mgf_bridge(p, r0, rt, m.eigen.lambdas, t))
    return JointTransition(matrix=matrix, density=transition_pdf(p, r0, t, rt))


def transition_covarion_start(m, c, i, t):
    """Pr[X_t = j | X_0 = i', rate state i at time 0] under a covarion-type rate chain"""
    t = check_time(t)
    return matrix_function(m, covarion_mgf_start(c, i, m.eigen.lambdas, t))
