"""
The CIR square-root diffusion dR = b (a - R) dt + sigma sqrt(R) dB used as
the evolutionary rate process: parameters, transition and stationary laws,
autocovariance, index of dispersion and the two-statistic estimator.
"""
import logging
import math
from typing import NamedTuple

import numpy as np
from scipy import integrate, stats

from .checker import DomainError, ValidationError, check_nonnegative, check_positive, check_time
from .special import as_output, noncentral_chi2_cdf, noncentral_chi2_pdf

# if you want to control logs uncomment these lines
# import sys
# logging.basicConfig(stream=sys.stdout, level=logging.INFO)  # default logging.WARNING
logger = logging.getLogger(__name__)

INFINITY = math.inf


class CirParams(NamedTuple):
    a: float
    b: float
    sigma2: float

    @property
    def shape(self):
        """shape of the stationary gamma law, 2ab/sigma2"""
        return 2 * self.a * self.b / self.sigma2

    @property
    def scale(self):
        return self.sigma2 / (2 * self.b)

    @property
    def rate(self):
        return 2 * self.b / self.sigma2

    @property
    def mean(self):
        return self.a

    @property
    def variance(self):
        return self.a * self.sigma2 / (2 * self.b)

    @property
    def feller(self):
        """True when 2ab >= sigma2, i.e. the process never reaches 0"""
        return 2 * self.a * self.b >= self.sigma2

    def scaled(self, c):
        """c * R is again a CIR process, with parameters (c a, b, c sigma2)"""
        c = check_positive('c', c)
        return make_params(c * self.a, self.b, c * self.sigma2)


class DispersionEstimate(NamedTuple):
    value: float
    n: int
    mean_count: float
    var_count: float


def make_params(a, b, sigma2):
    p = CirParams(a=check_positive('a', a),
                  b=check_positive('b', b),
                  sigma2=check_positive('sigma2', sigma2))
    if not p.feller:
        logger.warning(f'Feller condition 2ab >= sigma2 fails for {tuple(p)}: the rate can reach 0')
    return p


def _check_rates(name, r):
    r = np.asarray(r, dtype=float)
    if np.any(~np.isfinite(r)) or np.any(r < 0):
        raise DomainError(f'{name} must be finite and nonnegative')
    return r


def _check_times(t):
    if np.ndim(t) == 0:
        return check_time(t)
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise DomainError('t must be positive')
    return t


def _transition_law(p, r0, t):
    """(scale constant c, degrees of freedom, non-centrality) of 2c R_t ~ ncx2"""
    decay = np.exp(-p.b * t)
    c = 2 * p.b / (p.sigma2 * -np.expm1(-p.b * t))
    df = 4 * p.a * p.b / p.sigma2
    nc = 2 * c * r0 * decay
    return c, df, nc


def transition_mean_var(p, r0, t):
    t = check_time(t)
    r0 = check_nonnegative('r0', r0)
    decay = math.exp(-p.b * t)
    grown = -math.expm1(-p.b * t)
    mean = r0 * decay + p.a * grown
    variance = r0 * p.sigma2 / p.b * (decay - decay ** 2) + p.variance * grown ** 2
    return mean, variance


def transition_pdf(p, r0, t, r):
    """
    Density of R_t given R_0 = r0: R_t = Y / (2c) with
    Y ~ ncx2(4ab/sigma2, 2 c r0 e^{-bt}) and c = 2b / (sigma2 (1 - e^{-bt}))
    """
    t = check_time(t)
    r0 = check_nonnegative('r0', r0)
    c, df, nc = _transition_law(p, r0, t)
    r = np.asarray(r, dtype=float)
    return as_output(np.where(r < 0, 0.0, 2 * c * noncentral_chi2_pdf(df, nc, 2 * c * r)))


def transition_cdf(p, r0, t, r):
    t = check_time(t)
    r0 = check_nonnegative('r0', r0)
    c, df, nc = _transition_law(p, r0, t)
    r = np.asarray(r, dtype=float)
    return as_output(np.where(r < 0, 0.0, noncentral_chi2_cdf(df, nc, 2 * c * np.maximum(r, 0))))


def sample_transition(p, r0, t, rng, size=None):
    """
    Exact draw(s) of R_t given R_0 = r0; r0 and t broadcast against each other
    """
    t = _check_times(t)
    r0 = _check_rates('r0', r0)
    c, df, nc = _transition_law(p, r0, t)
    draws = rng.noncentral_chisquare(df, nc, size=size) / (2 * c)
    return as_output(draws)


def stationary_pdf(p, r):
    """gamma density with shape 2ab/sigma2 and rate 2b/sigma2"""
    return as_output(stats.gamma.pdf(np.asarray(r, dtype=float), p.shape, scale=p.scale))


def stationary_sample(p, rng, size=None):
    return as_output(rng.gamma(p.shape, p.scale, size=size))


def autocovariance(p, t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError(f'lag t must be nonnegative, got {t.min()}')
    return as_output(p.variance * np.exp(-p.b * t))


def expected_integrated_rate(p, r0, t):
    t = check_time(t)
    r0 = check_nonnegative('r0', r0)
    return p.a * t + (r0 - p.a) * -math.expm1(-p.b * t) / p.b


def index_of_dispersion(p, t=INFINITY):
    """
    Index of dispersion Var N(t) / E N(t) of the substitution counts of a Cox
    process driven by the stationary CIR rate. t=INFINITY gives the limit
    1 + sigma2/b^2.
    """
    if t == INFINITY:
        return 1 + p.sigma2 / p.b ** 2
    t = check_time(t)
    x = p.b * t
    if x < 1e-5:
        excess = x ** 2 / 2 - x ** 3 / 6 + x ** 4 / 24
    else:
        excess = x + math.expm1(-x)
    return 1 + p.sigma2 * excess / (p.b ** 3 * t)


def dispersion_from_autocovariance(rho, mean, t=INFINITY):
    """
    I(t) = 1 + 2 int_0^t (1 - s/t) rho(s) ds / mean for a stationary rate with
    autocovariance rho; t=INFINITY integrates rho over [0, inf).
    """
    mean = check_positive('mean', mean)
    if t == INFINITY:
        integral, _ = integrate.quad(rho, 0, np.inf)
    else:
        t = check_time(t)
        integral, _ = integrate.quad(lambda s: (1 - s / t) * rho(s), 0, t)
    return 1 + 2 * integral / mean


def estimate_from_stats(gamma_hat, i_inf_hat):
    """
    CIR parameters (a = 1) matching a rates-across-sites gamma parameter
    Gamma = sigma2/b and a stationary index of dispersion 1 + sigma2/b^2

    :param float gamma_hat: estimated gamma parameter
    :param float i_inf_hat: estimated index of dispersion, > 1
    :rtype: CirParams
    """
    try:
        i_inf_hat = float(i_inf_hat)
    except (TypeError, ValueError):
        raise ValidationError(f'index of dispersion must be a number, got {i_inf_hat!r}')
    if not (i_inf_hat > 1 and math.isfinite(i_inf_hat)):
        raise ValidationError(f'index of dispersion must exceed 1 under rate variation, got {i_inf_hat}')
    gamma_hat = check_positive('gamma', gamma_hat)
    excess = i_inf_hat - 1
    return make_params(1.0, gamma_hat / excess, gamma_hat ** 2 / excess)


def empirical_dispersion(counts):
    counts = np.asarray(counts)
    if counts.ndim != 1 or counts.size < 2:
        raise ValidationError(f'at least 2 counts are needed, got {counts.size}')
    if np.any(counts < 0) or np.any(counts != np.round(counts)):
        raise ValidationError('counts must be nonnegative integers')
    mean = float(counts.mean())
    if mean == 0:
        raise ValidationError('mean count is zero')
    var = float(counts.var(ddof=1))
    return DispersionEstimate(value=var / mean, n=int(counts.size), mean_count=mean, var_count=var)
