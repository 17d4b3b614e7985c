from .alignment import Alignment, make_alignment, read_alignment, write_fasta
from .likelihood import (SiteLikelihoods, exact_site_likelihoods, mc_tree_likelihood, site_likelihoods,
                         three_taxa_likelihood, three_taxa_pattern_probabilities)
from .tree import Node, Tree, parse_newick, to_newick
