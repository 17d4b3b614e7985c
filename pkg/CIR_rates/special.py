"""
Special functions behind the CIR transition law and the bridge mgf.
"""
import math

import numpy as np
from scipy import special, stats

from .checker import DomainError


def as_output(value):
    """0-d results are handed back as python floats, everything else as arrays"""
    if np.ndim(value) == 0:
        return float(value)
    return value


def bessel_i(nu, x):
    """
    Modified Bessel function of the first kind

    :param float nu: order, nu >= -1
    :param x: nonnegative argument(s)
    :return: I_nu(x)
    """
    if not nu >= -1:
        raise DomainError(f'Bessel order must be at least -1, got {nu}')
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError(f'Bessel argument must be nonnegative, got {x.min()}')
    return as_output(special.iv(nu, x))


def log_bessel_i(nu, x):
    """
    log I_nu(x) from the exponentially scaled Bessel function.
    Where ive under- or overflows (orders in the thousands and beyond)
    the uniform asymptotic expansion in nu takes over.
    """
    x = np.asarray(x, dtype=float)
    with np.errstate(divide='ignore', invalid='ignore'):
        value = np.log(special.ive(nu, x)) + x
    bad = ~np.isfinite(value) & (x > 0) & (nu > 0)
    if np.any(bad):
        value = np.where(bad, _log_bessel_i_uniform(nu, np.where(bad, x, 1.0)), value)
    return as_output(value)


def _log_bessel_i_uniform(nu, x):
    z = x / nu
    s = np.sqrt(1 + z * z)
    eta = s + np.log(z / (1 + s))
    p = 1 / s
    u1 = p * (3 - 5 * p ** 2) / 24
    u2 = p ** 2 * (81 - 462 * p ** 2 + 385 * p ** 4) / 1152
    return nu * eta - 0.5 * math.log(2 * math.pi * nu) - 0.5 * np.log(s) + np.log1p(u1 / nu + u2 / nu ** 2)


def noncentral_chi2_pdf(df, nc, x):
    """
    Density of the non-central chi-squared law, central chi-squared at nc=0

    :param float df: degrees of freedom, > 0
    :param float nc: non-centrality, >= 0
    :param x: point(s); negative points have density 0
    """
    if not df > 0:
        raise DomainError(f'degrees of freedom must be positive, got {df}')
    if not nc >= 0:
        raise DomainError(f'non-centrality must be nonnegative, got {nc}')
    x = np.asarray(x, dtype=float)
    if nc == 0:
        density = stats.chi2.pdf(x, df)
    else:
        density = stats.ncx2.pdf(x, df, nc)
    return as_output(np.where(x < 0, 0.0, density))


def noncentral_chi2_cdf(df, nc, x):
    x = np.asarray(x, dtype=float)
    if nc == 0:
        return as_output(stats.chi2.cdf(x, df))
    return as_output(stats.ncx2.cdf(x, df, nc))
