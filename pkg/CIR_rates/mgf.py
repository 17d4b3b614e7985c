"""
Moment generating functions E[exp(eta tau)] of the integrated rate
tau = int_0^t R_s ds, for the CIR rate (conditioned on R_0, or on R_0 and
R_t) and for covarion-type rate chains.

For the CIR the mgfs are written with bbar = sqrt(b^2 - 2 eta sigma2),
d = b - bbar and h = (1 - exp(-bbar t)) / bbar, which keeps every term
bounded for large bbar t and continuous at bbar = 0.
"""
import logging
from typing import NamedTuple

import numpy as np
from scipy.linalg import expm

from .checker import DomainError, ValidationError, check_time
from .special import as_output, log_bessel_i

logger = logging.getLogger(__name__)

COVARION_REACH_TOL = 1e-14


class CovarionSpec(NamedTuple):
    G: np.ndarray
    g: np.ndarray

    @property
    def k(self):
        return len(self.g)


def eta_max(p):
    """largest mgf argument with a real bbar"""
    return p.b ** 2 / (2 * p.sigma2)


def _bbar(p, eta):
    eta = np.asarray(eta, dtype=float)
    if np.any(~np.isfinite(eta)) or np.any(eta > eta_max(p)):
        raise DomainError(f'eta must be finite and at most b^2/(2 sigma2) = {eta_max(p)}, got {eta.max()}')
    bbar = np.sqrt(np.maximum(p.b ** 2 - 2 * eta * p.sigma2, 0.0))
    d = 2 * eta * p.sigma2 / (p.b + bbar)
    return bbar, d


def _h(bbar, t):
    with np.errstate(divide='ignore', invalid='ignore'):
        h = -np.expm1(-bbar * t) / bbar
    return np.where(bbar > 0, h, t)


def log_psi(p, eta, t):
    t = check_time(t)
    bbar, d = _bbar(p, eta)
    h = _h(bbar, t)
    return as_output(p.shape * (d * t / 2 - np.log1p(h * d / 2)))


def psi(p, eta, t):
    """
    Psi(eta, t) = (bbar e^{bt/2} / (bbar cosh(bbar t/2) + b sinh(bbar t/2)))^{2ab/sigma2}
    """
    return as_output(np.exp(log_psi(p, eta, t)))


def xi(p, eta, t):
    """
    Xi(eta, t) = -2 eta sinh(bbar t/2) / (bbar cosh(bbar t/2) + b sinh(bbar t/2)),
    nonnegative for eta <= 0
    """
    t = check_time(t)
    bbar, d = _bbar(p, eta)
    h = _h(bbar, t)
    eta = np.asarray(eta, dtype=float)
    return as_output(-eta * h / (1 + h * d / 2))


def mgf_start(p, r0, eta, t):
    """E[exp(eta tau) | R_0 = r0] = Psi(eta, t) exp(-r0 Xi(eta, t))"""
    r0 = np.asarray(r0, dtype=float)
    if np.any(~np.isfinite(r0)) or np.any(r0 < 0):
        raise DomainError('r0 must be finite and nonnegative')
    return as_output(np.exp(log_psi(p, eta, t) - r0 * xi(p, eta, t)))


def log_bridge_kernel(p, r0, rt, eta, t):
    """
    log of v(t, r0) = E[exp(eta tau) delta(R_t - rt) | R_0 = r0].
    At eta = 0 this is the log transition density of R_t.
    """
    t = check_time(t)
    r0 = np.asarray(r0, dtype=float)
    rt = np.asarray(rt, dtype=float)
    if np.any(~(r0 > 0)) or np.any(~(rt > 0)):
        raise DomainError('bridge endpoints r0 and rt must be positive')
    bbar, d = _bbar(p, eta)
    h = _h(bbar, t)
    c = 2 / (p.sigma2 * h)
    half_decay = np.exp(-bbar * t / 2)
    nu = p.shape - 1
    z = 2 * c * half_decay * np.sqrt(r0 * rt)
    log_v = (np.log(c) + p.shape * d * t / 2
             + d / p.sigma2 * r0 - (p.b + bbar) / p.sigma2 * rt
             - c * (r0 + rt) * half_decay ** 2
             + nu / 2 * (np.log(rt / r0) + bbar * t)
             + log_bessel_i(nu, z))
    return as_output(log_v)


def mgf_bridge(p, r0, rt, eta, t):
    """E[exp(eta tau) | R_0 = r0, R_t = rt] = v(t, r0) / f(rt | r0)"""
    log_v = log_bridge_kernel(p, r0, rt, eta, t)
    log_f = log_bridge_kernel(p, r0, rt, 0.0, t)
    return as_output(np.exp(np.asarray(log_v) - log_f))


def make_covarion(G, g):
    """
    Validate a covarion-type rate chain

    :param G: k x k generator of the switches between rate values
    :param g: the k rate values
    :rtype: CovarionSpec
    """
    G = np.array(G, dtype=float)
    g = np.array(g, dtype=float)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise ValidationError(f'switch-rate matrix must be square, got shape {G.shape}')
    if g.shape != (G.shape[0],):
        raise ValidationError(f'expected {G.shape[0]} rate values, got {g.size}')
    off = G - np.diag(np.diag(G))
    if np.any(off < 0):
        raise ValidationError('off-diagonal switch rates must be nonnegative')
    if np.abs(G.sum(axis=1)).max() > 1e-9 * max(1.0, np.abs(G).max()):
        raise ValidationError('rows of the switch-rate matrix must sum to 0')
    if np.any(g < 0) or np.any(~np.isfinite(g)):
        raise ValidationError('rate values must be finite and nonnegative')
    G.flags.writeable = False
    g.flags.writeable = False
    return CovarionSpec(G=G, g=g)


def check_rate_state(c, i, name='i'):
    if not (isinstance(i, (int, np.integer)) and 0 <= i < c.k):
        raise ValidationError(f'rate state {name} must be an index in [0, {c.k}), got {i}')


def _covarion_expm(c, eta, t):
    return expm((c.G + eta * np.diag(c.g)) * t)


def covarion_mgf_start(c, i, eta, t):
    """M_{g_i}(eta) = sum_j exp((G + eta D) t)_ij; eta may be an array"""
    t = check_time(t)
    check_rate_state(c, i)
    eta = np.asarray(eta, dtype=float)
    values = [_covarion_expm(c, e, t)[i].sum() for e in eta.ravel()]
    return as_output(np.reshape(values, eta.shape))


def covarion_mgf_bridge(c, i, j, eta, t):
    """M_{g_i,g_j}(eta) = exp((G + eta D) t)_ij / exp(G t)_ij"""
    t = check_time(t)
    check_rate_state(c, i)
    check_rate_state(c, j, 'j')
    reach = expm(c.G * t)[i, j]
    if reach <= COVARION_REACH_TOL:
        raise DomainError(f'rate state {j} is unreachable from state {i} in time {t}')
    eta = np.asarray(eta, dtype=float)
    values = [_covarion_expm(c, e, t)[i, j] / reach for e in eta.ravel()]
    return as_output(np.reshape(values, eta.shape))
