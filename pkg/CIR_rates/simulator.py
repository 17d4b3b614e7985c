"""
Forward simulation: CIR rate paths on a grid, substitution counts of the Cox
process they drive, sequences evolving down a tree under per-site rate paths,
and switch paths of covarion-type rate chains.
"""
import logging
import math
from typing import NamedTuple

import numpy as np
from scipy import integrate

from . import config
from .checker import ValidationError, check_positive, check_time
from .cir import empirical_dispersion, sample_transition, stationary_sample
from .mgf import check_rate_state
from .phylo.alignment import make_alignment
from .special import as_output
from .substitution import matrix_function
from .workers import run_tasks, task_rng

# if you want to control logs uncomment these lines
# import sys
# logging.basicConfig(stream=sys.stdout, level=logging.INFO)  # default logging.WARNING
logger = logging.getLogger(__name__)

MODES = ['exact', 'euler']


class RatePath(NamedTuple):
    times: np.ndarray
    rates: np.ndarray  # (n_steps + 1,) or (size, n_steps + 1)
    tau: object  # trapezoid of rates, float or (size,)


class CountSample(NamedTuple):
    counts: np.ndarray
    t: float
    params: tuple


def _grid(t, dt):
    t = check_time(t)
    dt = check_positive('dt', dt)
    n_steps = max(1, math.ceil(t / dt - 1e-9))
    return n_steps, t / n_steps


def _check_mode(mode):
    if mode not in MODES:
        raise ValidationError(f'path mode {mode} is not one of the acceptable {MODES}')


def _start(r0, size):
    r0 = np.asarray(r0, dtype=float)
    if np.any(~np.isfinite(r0)) or np.any(r0 < 0):
        raise ValidationError('r0 must be finite and nonnegative')
    return np.array(np.broadcast_to(r0, np.shape(r0) if size is None else size), dtype=float)


def _step(p, x, step, rng, mode):
    """one grid step; in euler mode x is the full-truncation auxiliary, which may be negative"""
    if mode == 'exact':
        return sample_transition(p, x, step, rng, size=np.shape(x) or None)
    positive = np.maximum(x, 0.0)
    noise = rng.standard_normal(np.shape(x) or None)
    return x + p.b * (p.a - positive) * step + math.sqrt(p.sigma2 * step) * np.sqrt(positive) * noise


def simulate_path(p, r0, t, rng, dt=config.DEFAULT_DT, mode='exact', size=None):
    """
    Rate path on the uniform grid of step t / ceil(t / dt)

    :param str mode: exact (transition draws, distributionally exact at grid
        points) or euler (full-truncation Euler-Maruyama)
    :param size: number of independent paths, None for one
    :rtype: RatePath
    """
    _check_mode(mode)
    n_steps, step = _grid(t, dt)
    x = _start(r0, size)
    rates = np.empty(np.shape(x) + (n_steps + 1,))
    rates[..., 0] = x
    for k in range(n_steps):
        x = _step(p, x, step, rng, mode)
        rates[..., k + 1] = np.maximum(x, 0.0)
    times = np.linspace(0.0, n_steps * step, n_steps + 1)
    tau = integrate.trapezoid(rates, dx=step, axis=-1)
    return RatePath(times=times, rates=rates, tau=as_output(tau))


def integrated_rate(p, r0, t, rng, dt=config.DEFAULT_DT, mode='exact', size=None):
    """
    Same stream usage as simulate_path without keeping the path

    :return: (tau, rate at t)
    """
    _check_mode(mode)
    n_steps, step = _grid(t, dt)
    x = _start(r0, size)
    left = x.copy()
    tau = np.zeros(np.shape(x))
    for _ in range(n_steps):
        x = _step(p, x, step, rng, mode)
        right = np.maximum(x, 0.0)
        tau = tau + (left + right) * step / 2
        left = right
    if size is None and np.ndim(r0) == 0:
        return float(tau), float(left)
    return tau, left


def simulate_substitutions(p, t, rng, r0=None, size=None, dt=config.DEFAULT_DT, margin=config.THINNING_MARGIN):
    """
    Substitution counts over [0, t] of a Poisson process with intensity R_s,
    by thinning. Per grid interval the intensity is the linear interpolation of
    the exact endpoint rates and candidates come at margin times the larger one.

    :param r0: starting rate(s), drawn from the stationary law when None
    :return: count, or array of counts for size paths
    """
    margin = check_positive('margin', margin)
    if margin < 1:
        raise ValidationError(f'thinning margin must be at least 1, got {margin}')
    n_steps, step = _grid(t, dt)
    n = 1 if size is None else int(size)
    left = stationary_sample(p, rng, size=n) if r0 is None else _start(r0, n)
    counts = np.zeros(n, dtype=np.int64)
    for _ in range(n_steps):
        right = np.asarray(sample_transition(p, left, step, rng, size=n), dtype=float)
        bound = margin * np.maximum(left, right)
        n_candidates = rng.poisson(bound * step)
        owner = np.repeat(np.arange(n), n_candidates)
        u = rng.random(owner.size)
        intensity = left[owner] + u * (right - left)[owner]
        accepted = rng.random(owner.size) * bound[owner] < intensity
        counts += np.bincount(owner[accepted], minlength=n)
        left = right
    return int(counts[0]) if size is None else counts


def _count_chunk(task):
    p, t, n, seed, index, dt = task
    return simulate_substitutions(p, t, task_rng(seed, index), size=n, dt=dt)


def simulate_counts(p, t, replicates, seed=config.DEFAULT_SEED, dt=config.DEFAULT_DT, workers=None):
    """
    Substitution counts of independent lineages started from the stationary
    law, in chunks of config.REPLICATE_CHUNK replicates with one stream each

    :rtype: CountSample
    """
    t = check_time(t)
    if not isinstance(replicates, (int, np.integer)) or replicates < 1:
        raise ValidationError(f'replicates must be a positive integer, got {replicates}')
    sizes = [min(config.REPLICATE_CHUNK, replicates - k) for k in range(0, replicates, config.REPLICATE_CHUNK)]
    tasks = [(p, t, n, seed, k, dt) for k, n in enumerate(sizes)]
    logger.info(f'simulating {replicates} lineages over t={t}')
    counts = np.concatenate(run_tasks(_count_chunk, tasks, workers))
    return CountSample(counts=counts, t=t, params=tuple(p))


def dispersion_experiment(p, t, replicates, seed=config.DEFAULT_SEED, dt=config.DEFAULT_DT, workers=None):
    """empirical index of dispersion of simulated counts"""
    if not isinstance(replicates, (int, np.integer)) or replicates < config.MIN_MC_SAMPLES:
        raise ValidationError(f'replicates must be an integer of at least {config.MIN_MC_SAMPLES}, got {replicates}')
    sample = simulate_counts(p, t, replicates, seed, dt, workers)
    return empirical_dispersion(sample.counts)


def _draw_states(probs, rng):
    """one categorical draw per row of probs"""
    u = rng.random(probs.shape[0])
    states = (u[:, None] > np.cumsum(probs, axis=1)).sum(axis=1)
    return np.minimum(states, probs.shape[1] - 1)


def _node_labels(tree):
    labels = []
    for k, node in enumerate(tree.preorder()):
        labels.append(node.name if node.name else f'node{k}')
    return labels


def _sequence_chunk(task):
    tree, m, p, n, seed, index, dt, mode = task
    rng = task_rng(seed, index)
    nodes = list(tree.preorder())
    position = {id(x): k for k, x in enumerate(nodes)}
    rates = [None] * len(nodes)
    states = [None] * len(nodes)
    taus = [np.zeros(n) for _ in nodes]
    rates[0] = np.asarray(stationary_sample(p, rng, size=n))
    states[0] = _draw_states(np.broadcast_to(m.pi, (n, m.n)), rng)
    for k, node in enumerate(nodes[1:], start=1):
        parent = position[id(node.parent)]
        if node.length == 0:
            rates[k], states[k] = rates[parent], states[parent]
            continue
        taus[k], rates[k] = integrated_rate(p, rates[parent], node.length, rng, dt, mode, size=n)
        transition = matrix_function(m, np.exp(np.outer(taus[k], m.eigen.lambdas)))
        rows = transition[np.arange(n), states[parent]]
        states[k] = _draw_states(np.clip(rows, 0.0, None), rng)
    return states, taus


def simulate_sequences(tree, m, p, n_sites, seed=config.DEFAULT_SEED, dt=config.DEFAULT_DT, mode='exact',
                       workers=None, return_tau=False):
    """
    Sequences at the leaves of tree. Every site has its own rate path,
    continuous through the internal nodes; characters change along a branch
    with the transition matrix exp(Q tau) of the branch's integrated rate.

    :param Tree tree: rooted tree with branch lengths
    :param RateMatrix m: substitution model
    :param CirParams p: rate process
    :param int n_sites: number of sites
    :param return_tau: also return {node label: tau per site} for the branch above each node
    :rtype: Alignment or (Alignment, dict)
    """
    _check_mode(mode)
    if not isinstance(n_sites, (int, np.integer)) or n_sites < 1:
        raise ValidationError(f'number of sites must be a positive integer, got {n_sites}')
    sizes = [min(config.REPLICATE_CHUNK, n_sites - k) for k in range(0, n_sites, config.REPLICATE_CHUNK)]
    tasks = [(tree, m, p, n, seed, k, dt, mode) for k, n in enumerate(sizes)]
    logger.info(f'simulating {n_sites} sites on a tree of {tree.n_leaves} leaves')
    results = run_tasks(_sequence_chunk, tasks, workers)
    labels = _node_labels(tree)
    nodes = list(tree.preorder())
    states = [np.concatenate([r[0][k] for r in results]) for k in range(len(nodes))]
    names = [x.name for x in nodes if x.is_leaf]
    sequences = [''.join(np.array(list(m.alphabet))[states[k]]) for k, x in enumerate(nodes) if x.is_leaf]
    aln = make_alignment(names, sequences, m.alphabet)
    if not return_tau:
        return aln
    taus = {labels[k]: np.concatenate([r[1][k] for r in results]) for k in range(1, len(nodes))}
    return aln, taus


def simulate_covarion(c, i, t, rng, size=None):
    """
    Gillespie simulation of a covarion-type rate chain started in state i

    :return: (tau, end state), arrays for size paths
    """
    t = check_time(t)
    check_rate_state(c, i)
    n = 1 if size is None else int(size)
    state = np.full(n, i)
    clock = np.zeros(n)
    tau = np.zeros(n)
    active = np.ones(n, dtype=bool)
    exit_rates = -np.diag(c.G)
    jumps = np.where(exit_rates[:, None] > 0, c.G / np.where(exit_rates > 0, exit_rates, 1.0)[:, None], 0.0)
    np.fill_diagonal(jumps, 0.0)
    while active.any():
        idx = np.flatnonzero(active)
        q = exit_rates[state[idx]]
        with np.errstate(divide='ignore'):
            dwell = np.where(q > 0, rng.exponential(1.0, idx.size) / np.where(q > 0, q, 1.0), np.inf)
        ends = clock[idx] + dwell >= t
        stay = np.where(ends, t - clock[idx], dwell)
        tau[idx] += c.g[state[idx]] * stay
        clock[idx] += stay
        active[idx[ends]] = False
        moving = idx[~ends]
        if moving.size:
            state[moving] = _draw_states(jumps[state[moving]], rng)
    if size is None:
        return float(tau[0]), int(state[0])
    return tau, state

