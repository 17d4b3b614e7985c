"""
CIR model of evolutionary rate variation.
A substitution model whose rate is a CIR diffusion, one independent path per site.
"""
import logging

from . import config
from .checker import ValidationError
from .cir import CirParams, estimate_from_stats, index_of_dispersion, make_params, INFINITY
from .mgf import mgf_bridge, mgf_start
from .phylo.likelihood import site_likelihoods, three_taxa_likelihood
from .phylo.tree import parse_newick, Tree
from .simulator import dispersion_experiment, simulate_sequences
from .substitution import RateMatrix, build_rate_matrix, transition_cir_joint, transition_cir_start

logger = logging.getLogger(__name__)


class CIRRates:
    """
    :param params: CirParams or an (a, b, sigma2) triple
    :param model: RateMatrix, or a family name for build_rate_matrix
    :param dict model_params: kappa / rates / freqs when model is a family name
    """

    def __init__(self, params, model='JC', **model_params):
        self.params = params if isinstance(params, CirParams) else make_params(*params)
        if isinstance(model, RateMatrix):
            if model_params:
                raise ValidationError('model parameters go with a family name, not with a built rate matrix')
            self.model = model
        else:
            freqs = model_params.pop('freqs', None)
            self.model = build_rate_matrix(model, model_params, freqs)

    @classmethod
    def from_stats(cls, gamma, dispersion, model='JC', **model_params):
        """model whose stationary rates match a gamma parameter and a long-run index of dispersion"""
        return cls(estimate_from_stats(gamma, dispersion), model, **model_params)

    def __repr__(self):
        a, b, sigma2 = self.params
        return f'CIRRates(a={a}, b={b}, sigma2={sigma2}, model={self.model.family})'

    def transition(self, r0, t, rt=None):
        """character transition matrix given R_0 = r0, and R_t = rt when it is given"""
        if rt is None:
            return transition_cir_start(self.model, self.params, r0, t)
        return transition_cir_joint(self.model, self.params, r0, rt, t).matrix

    def mgf(self, eta, t, r0, rt=None):
        if rt is None:
            return mgf_start(self.params, r0, eta, t)
        return mgf_bridge(self.params, r0, rt, eta, t)

    def index_of_dispersion(self, t=INFINITY):
        return index_of_dispersion(self.params, t)

    def dispersion(self, t, replicates, seed=config.DEFAULT_SEED, workers=None, dt=config.DEFAULT_DT):
        """index of dispersion of simulated substitution counts, with the closed form for comparison"""
        estimate = dispersion_experiment(self.params, t, replicates, seed, dt, workers)
        expected = index_of_dispersion(self.params, t)
        logger.info(f'simulated index of dispersion {estimate.value}, expected {expected}')
        return estimate

    def three_taxa(self, t1, t2, t3, pattern, root_state=None):
        return three_taxa_likelihood(self.model, self.params, t1, t2, t3, pattern, root_state)

    def likelihood(self, tree, aln, n_samples=10000, seed=config.DEFAULT_SEED, workers=None, force_mc=False):
        """
        :param tree: Tree or Newick string
        :param Alignment aln: sites over the model alphabet
        :rtype: SiteLikelihoods
        """
        tree = tree if isinstance(tree, Tree) else parse_newick(tree)
        return site_likelihoods(self.model, self.params, tree, aln, n_samples, seed, workers, force_mc)

    def simulate(self, tree, n_sites, seed=config.DEFAULT_SEED, workers=None, dt=config.DEFAULT_DT,
                 return_tau=False):
        tree = tree if isinstance(tree, Tree) else parse_newick(tree)
        return simulate_sequences(tree, self.model, self.params, n_sites, seed, dt, workers=workers,
                                  return_tau=return_tau)
