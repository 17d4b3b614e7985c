import math
import numbers
import os

from . import config


class ValidationError(ValueError):
    pass


class DomainError(ValidationError):
    pass


class ParseError(ValidationError):
    def __init__(self, message, offset=None):
        if offset is not None:
            message = f'{message} at offset {offset}'
        super().__init__(message)
        self.offset = offset


class NumericalError(ArithmeticError):
    pass


def check_positive(name, value):
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f'{name} must be a number, got {value!r}')
    if not math.isfinite(value):
        raise ValidationError(f'{name} must be finite, got {value}')
    if value <= 0:
        raise ValidationError(f'{name} must be positive, got {value}')
    return value


def check_nonnegative(name, value):
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f'{name} must be a number, got {value!r}')
    if not math.isfinite(value) or value < 0:
        raise ValidationError(f'{name} must be finite and nonnegative, got {value}')
    return value


def check_time(t, name='t'):
    """Times entering transition laws and mgfs must be strictly positive."""
    if not isinstance(t, numbers.Real):
        raise DomainError(f'{name} must be a positive number, got {t!r}')
    if not t > 0:
        raise DomainError(f'{name} must be positive, got {t}')
    return float(t)


def parse_cir(text):
    """
    Parse the comma separated triple of the --cir option

    :param str text: "a,b,sigma2", like "1,1,1"
    :return: (a, b, sigma2)
    :rtype: tuple[float, float, float]
    """
    parts = [x.strip() for x in str(text).split(',')]
    if len(parts) != 3:
        raise ValidationError(f'CIR parameters should look like "a,b,sigma2", got {text!r}')
    try:
        return tuple(float(x) for x in parts)
    except ValueError:
        raise ValidationError(f'CIR parameters should be numbers, got {text!r}')


def parse_floats(text, name, length=None):
    parts = [x.strip() for x in str(text).split(',') if x.strip()]
    try:
        values = [float(x) for x in parts]
    except ValueError:
        raise ValidationError(f'{name} should be comma separated numbers, got {text!r}')
    if length is not None and len(values) != length:
        raise ValidationError(f'{name} has incorrect length. Expected {length}, got {len(values)}')
    return values


def parse_frequencies(freqs, n):
    if len(freqs) != n:
        raise ValidationError(f'frequencies have incorrect length. Expected {n}, got {len(freqs)}')
    for i, f in enumerate(freqs):
        if not (math.isfinite(f) and f > 0):
            raise ValidationError(f'frequency {i} must be positive, got {f}')
    total = math.fsum(freqs)
    if abs(total - 1) > config.FREQ_SUM_TOL:
        raise ValidationError(f'frequencies must sum to 1, got {total}')
    return freqs


def parse_workers(workers):
    if workers is None:
        workers = os.environ.get(config.WORKERS_ENV, 1)
    try:
        workers = int(workers)
    except (TypeError, ValueError):
        raise ValidationError(f'worker count should be an integer, got {workers!r}')
    if workers < 1:
        raise ValidationError(f'worker count must be at least 1, got {workers}')
    return workers


def unknown_symbols(alphabet):
    if alphabet == config.DNA_ALPHABET:
        return config.DNA_UNKNOWN_SYMBOLS
    return config.UNKNOWN_SYMBOLS
