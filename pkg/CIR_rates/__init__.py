"""
CIR model of evolutionary rate variation: a CIR diffusion drives the
substitution rate of every site along every lineage.
"""
from .checker import DomainError, NumericalError, ParseError, ValidationError
from .cir import CirParams, estimate_from_stats, index_of_dispersion, make_params
from .mgf import make_covarion, mgf_bridge, mgf_start
from .phylo import parse_newick, read_alignment, three_taxa_likelihood
from .rates import CIRRates
from .substitution import build_rate_matrix
