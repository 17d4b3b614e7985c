"""
Site likelihoods under a per-site CIR rate: the closed form for a star tree
of three taxa, and a Monte-Carlo estimator for any rooted tree that samples
rates at the nodes and prunes with bridge-conditioned transition matrices.
"""
import logging
from typing import NamedTuple

import numpy as np

from .. import config
from ..checker import NumericalError, ValidationError, check_time, parse_workers
from ..mgf import log_psi, mgf_bridge, xi
from ..cir import sample_transition, stationary_sample
from ..workers import chunks_of_n, run_tasks, task_rng

logger = logging.getLogger(__name__)

MAX_RESAMPLE_ROUNDS = 100


class SiteLikelihoods(NamedTuple):
    log_values: np.ndarray
    log_std_errors: np.ndarray  # standard error relative to the value, 0 when exact
    method: str  # exact or mc
    n_samples: int
    rejected: int

    @property
    def values(self):
        return np.exp(self.log_values)

    @property
    def std_errors(self):
        return self.values * self.log_std_errors

    @property
    def log_likelihood(self):
        return float(np.sum(self.log_values))

    @property
    def log_std_error(self):
        """delta-method standard error of the total log likelihood"""
        return float(np.sqrt(np.sum(self.log_std_errors ** 2)))


def three_taxa_pattern_probabilities(m, p, t1, t2, t3, root_state=None):
    """
    Probabilities of all n^3 leaf patterns of a star tree with branches t1, t2, t3,
    the root rate drawn from the stationary gamma law. Without root_state the
    root character is drawn from pi.

    :return: array indexed [x1, x2, x3]
    """
    times = [check_time(t, name) for t, name in zip((t1, t2, t3), ('t1', 't2', 't3'))]
    lambdas, U, V = m.eigen.lambdas, m.eigen.U, m.eigen.V
    lpsi = [np.asarray(log_psi(p, lambdas, t)) for t in times]
    xis = [np.asarray(xi(p, lambdas, t)) for t in times]
    total_xi = xis[0][:, None, None] + xis[1][None, :, None] + xis[2][None, None, :]
    log_w = (lpsi[0][:, None, None] + lpsi[1][None, :, None] + lpsi[2][None, None, :]
             + p.shape * (np.log(p.rate) - np.log(p.rate + total_xi)))
    w = np.exp(log_w)
    joint = np.einsum('ai,ix,aj,jy,ak,kz,ijk->axyz', V, U, V, U, V, U, w, optimize=True)
    if root_state is None:
        return np.einsum('a,axyz->xyz', m.pi, joint)
    return joint[m.index(root_state)]


def three_taxa_likelihood(m, p, t1, t2, t3, pattern, root_state=None):
    """
    :param pattern: the states (x1, x2, x3) at the three leaves
    :param root_state: condition on the root character instead of averaging over pi
    """
    if len(pattern) != 3:
        raise ValidationError(f'a three-taxa pattern has 3 states, got {len(pattern)}')
    x1, x2, x3 = (m.index(x) for x in pattern)
    return float(three_taxa_pattern_probabilities(m, p, t1, t2, t3, root_state)[x1, x2, x3])


class _Plan(NamedTuple):
    """tree flattened in preorder, picklable for worker processes"""
    parents: tuple  # -1 at the root
    lengths: tuple
    leaf_rows: tuple  # alignment row of a leaf, -1 for internal nodes
    children: tuple


def _make_plan(tree, leaf_names):
    nodes = list(tree.preorder())
    position = {id(x): k for k, x in enumerate(nodes)}
    row = {name: k for k, name in enumerate(leaf_names)}
    return _Plan(parents=tuple(position[id(x.parent)] if x.parent is not None else -1 for x in nodes),
                 lengths=tuple(float(x.length) for x in nodes),
                 leaf_rows=tuple(row[x.name] if x.is_leaf else -1 for x in nodes),
                 children=tuple(tuple(position[id(c)] for c in x.children) for x in nodes))


def _check_taxa(tree, aln, m):
    if aln.alphabet != m.alphabet:
        raise ValidationError(f'alignment alphabet {aln.alphabet} differs from the model alphabet {m.alphabet}')
    leaves, taxa = set(tree.leaf_names), set(aln.names)
    if leaves != taxa:
        raise ValidationError(f'tree leaves and alignment taxa differ: only in tree {sorted(leaves - taxa)}, '
                              f'only in alignment {sorted(taxa - leaves)}')


def _sample_node_rates(p, plan, n_samples, rng):
    rates = np.empty((len(plan.parents), n_samples))
    rates[0] = stationary_sample(p, rng, size=n_samples)
    for k in range(1, len(plan.parents)):
        parent, length = plan.parents[k], plan.lengths[k]
        if length == 0:
            rates[k] = rates[parent]
        else:
            rates[k] = sample_transition(p, rates[parent], length, rng)
    return rates


def _node_rates(p, plan, n_samples, rng):
    """node rates with every sample that hits 0 on a bridge endpoint redrawn"""
    rates = _sample_node_rates(p, plan, n_samples, rng)
    bad = ~(rates > 0).all(axis=0)
    rejected = 0
    for _ in range(MAX_RESAMPLE_ROUNDS):
        if not bad.any():
            return rates, rejected
        rejected += int(bad.sum())
        rates[:, bad] = _sample_node_rates(p, plan, int(bad.sum()), rng)
        bad = ~(rates > 0).all(axis=0)
    raise NumericalError(f'node rates kept hitting 0 after {MAX_RESAMPLE_ROUNDS} rounds of resampling')


def _prune(m, p, plan, codes, rates):
    """per-sample log likelihood of one site given the node rates"""
    n_nodes, n_samples = rates.shape
    lambdas, U, V = m.eigen.lambdas, m.eigen.U, m.eigen.V
    partial = [None] * n_nodes
    log_scale = np.zeros(n_samples)
    for k in reversed(range(n_nodes)):
        if plan.leaf_rows[k] >= 0:
            vec = np.ones(m.n) if codes[plan.leaf_rows[k]] < 0 else np.eye(m.n)[codes[plan.leaf_rows[k]]]
            partial[k] = np.broadcast_to(vec, (n_samples, m.n))
            continue
        msg = np.ones((n_samples, m.n))
        for c in plan.children[k]:
            if plan.lengths[c] == 0:
                msg = msg * partial[c]
            else:
                bridge = mgf_bridge(p, rates[k][:, None], rates[c][:, None], lambdas[None, :], plan.lengths[c])
                msg = msg * (((partial[c] @ U.T) * bridge) @ V.T)
            partial[c] = None
        scale = msg.max(axis=1)
        scale = np.where(scale > 0, scale, 1.0)
        partial[k] = msg / scale[:, None]
        log_scale += np.log(scale)
    with np.errstate(divide='ignore'):
        return np.log(partial[0] @ m.pi) + log_scale


def _mean_log(log_values):
    """log of the sample mean and relative standard error, without leaving log space"""
    top = log_values.max()
    if top == -np.inf:
        return -np.inf, 0.0
    w = np.exp(log_values - top)
    mean = w.mean()
    se = w.std(ddof=1) / np.sqrt(w.size)
    return top + np.log(mean), se / mean


def _mc_chunk(task):
    m, p, plan, codes, sites, n_samples, seed = task
    out = []
    for column, site in zip(codes.T, sites):
        rng = task_rng(seed, site)
        rates, rejected = _node_rates(p, plan, n_samples, rng)
        log_value, log_se = _mean_log(_prune(m, p, plan, column, rates))
        out.append((log_value, log_se, rejected))
    return out


def mc_tree_likelihood(m, p, tree, aln, n_samples, seed=config.DEFAULT_SEED, workers=None):
    """
    Monte-Carlo site likelihoods. For each site independently: draw the root
    rate from the stationary law, propagate exact transitions down the tree,
    prune with the bridge-conditioned transition matrix of every branch and
    average over the samples.

    :param RateMatrix m: substitution model
    :param CirParams p: rate process
    :param Tree tree: rooted tree, leaves named as the alignment taxa
    :param Alignment aln: the sites
    :param int n_samples: samples per site, at least config.MIN_MC_SAMPLES
    :param int seed: site k uses the stream (seed, k) whatever the number of workers
    :rtype: SiteLikelihoods
    """
    if not isinstance(n_samples, (int, np.integer)) or n_samples < config.MIN_MC_SAMPLES:
        raise ValidationError(f'number of samples must be an integer of at least {config.MIN_MC_SAMPLES}, '
                              f'got {n_samples}')
    _check_taxa(tree, aln, m)
    workers = parse_workers(workers)
    aln = aln.subset(tree.leaf_names)
    plan = _make_plan(tree, aln.names)
    codes = aln.codes()
    sites = list(range(aln.n_sites))
    size = max(1, -(-len(sites) // workers))
    tasks = [(m, p, plan, codes[:, chunk[0]:chunk[-1] + 1], chunk, int(n_samples), seed)
             for chunk in chunks_of_n(sites, size)]
    logger.info(f'Monte-Carlo likelihood of {aln.n_sites} sites with {n_samples} samples each')
    results = [x for chunk in run_tasks(_mc_chunk, tasks, workers) for x in chunk]
    log_values = np.array([x[0] for x in results])
    if np.any(np.isnan(log_values)):
        raise NumericalError('Monte-Carlo likelihood is not a number')
    rejected = sum(x[2] for x in results)
    if rejected:
        logger.warning(f'{rejected} rate samples hit 0 and were redrawn')
    return SiteLikelihoods(log_values=log_values, log_std_errors=np.array([x[1] for x in results]),
                           method='mc', n_samples=int(n_samples), rejected=rejected)


def exact_site_likelihoods(m, p, tree, aln):
    """three-taxa star trees only; gaps and unknowns are summed over"""
    if not tree.is_three_taxa_star():
        raise ValidationError('the closed form needs a star tree of three taxa with positive branches')
    _check_taxa(tree, aln, m)
    leaves = tree.root.children
    probs = three_taxa_pattern_probabilities(m, p, *(x.length for x in leaves))
    codes = aln.subset([x.name for x in leaves]).codes()
    weights = [np.where(row[:, None] < 0, 1.0, np.eye(m.n)[np.maximum(row, 0)]) for row in codes]
    values = np.einsum('xyz,sx,sy,sz->s', probs, *weights)
    with np.errstate(divide='ignore'):
        log_values = np.log(np.maximum(values, 0.0))
    return SiteLikelihoods(log_values=log_values, log_std_errors=np.zeros(aln.n_sites),
                           method='exact', n_samples=0, rejected=0)


def site_likelihoods(m, p, tree, aln, n_samples=10000, seed=config.DEFAULT_SEED, workers=None, force_mc=False):
    """closed form on a star tree of three taxa unless force_mc, Monte-Carlo otherwise"""
    if tree.is_three_taxa_star() and not force_mc:
        logger.info('dispatching to exact three-taxa formula')
        return exact_site_likelihoods(m, p, tree, aln)
    return mc_tree_likelihood(m, p, tree, aln, n_samples, seed, workers)
