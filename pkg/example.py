from CIR_rates import CIRRates


if __name__ == '__main__':

    """
    Rates of every site follow their own CIR path: dR = b (a - R) dt + sqrt(sigma2 R) dW.
    With a = 1 the stationary mean rate is 1 and branch lengths keep their usual meaning.
    """

    # MODEL #################################################################
    # # from CIR parameters (a, b, sigma2)
    model = CIRRates((1, 1, 1), 'HKY', kappa=3.0, freqs=[0.1, 0.2, 0.3, 0.4])
    # # or from the gamma parameter of rates across sites and the index of dispersion
    # model = CIRRates.from_stats(gamma=0.5, dispersion=2)
    print(model)

    # RATE PROCESS ##########################################################
    print(model.mgf(eta=-1, t=1, r0=1))
    print(model.transition(r0=1, t=0.5))
    print(model.index_of_dispersion(t=10))

    # SIMULATION ############################################################
    TREE = '((A:0.2,B:0.3):0.4,C:0.5);'
    aln = model.simulate(TREE, n_sites=200, seed=1985, dt=0.01)

    # # substitution counts along one lineage (better in parallel)
    # estimate = model.dispersion(t=10, replicates=10000, workers=4)

    # LIKELIHOOD ############################################################
    # # three taxa on a star tree => exact
    print(model.three_taxa(0.2, 0.5, 1.1, 'ACG'))

    # # any rooted tree => Monte-Carlo, standard errors come along
    result = model.likelihood(TREE, aln, n_samples=1000, seed=1985, workers=2)
    print(result.log_likelihood, result.log_std_error)

    # # write the alignment
    # from CIR_rates.phylo import write_fasta
    # with open('example.fasta', 'w') as f:
    #     write_fasta(aln, f)
