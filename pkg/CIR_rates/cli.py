"""
Command line of CIR_rates: estimate, lik, simulate, dispersion and mgf.
Exit codes: 0 success, 2 usage or validation error, 3 numerical failure.
"""
import argparse
import contextlib
import json
import logging
import sys
from pathlib import Path

from . import config
from .checker import NumericalError, ValidationError, parse_cir, parse_floats, parse_workers
from .cir import empirical_dispersion, estimate_from_stats, index_of_dispersion, make_params
from .mgf import mgf_bridge, mgf_start
from .output import write_csv, write_table
from .phylo.alignment import read_alignment, write_fasta
from .phylo.likelihood import site_likelihoods
from .phylo.tree import parse_newick
from .simulator import simulate_counts, simulate_sequences
from .substitution import build_rate_matrix

logger = logging.getLogger(__name__)

MODELS = ['jc', 'k2p', 'hky', 'gtr', 'custom']
LIK_HEADER = ['site', 'method', 'likelihood', 'std_error', 'log_likelihood', 'log_std_error']
ESTIMATE_HEADER = ['a', 'b', 'sigma2', 'shape', 'scale', 'feller']
DISPERSION_HEADER = ['t', 'replicates', 'index', 'expected', 'mean_count', 'var_count']
MGF_HEADER = ['eta', 't', 'r0', 'rt', 'value']


def _add_common(parser, formats=('csv', 'json'), seeded=True):
    parser.add_argument('--format', choices=formats, default=formats[0], help='output format')
    parser.add_argument('--out', type=str, default=None, help='output file, standard output when omitted')
    if seeded:
        parser.add_argument('--seed', type=int, default=config.DEFAULT_SEED,
                            help=f'random seed, {config.DEFAULT_SEED} by default')
        parser.add_argument('--workers', type=int, default=None,
                            help=f'worker processes, ${config.WORKERS_ENV} or 1 by default')


def _add_cir(parser):
    group = parser.add_mutually_exclusive_group()
    group.add_argument('--cir', type=str, default=None, help='CIR parameters "a,b,sigma2"')
    group.add_argument('--gamma', type=float, default=None,
                       help='gamma parameter of rates across sites, with --dispersion (a = 1)')
    parser.add_argument('--dispersion', type=float, default=None,
                        help='long-run index of dispersion of substitution counts, with --gamma')


def _add_model(parser):
    parser.add_argument('--model', choices=MODELS, default='jc', help='substitution model family')
    parser.add_argument('--kappa', type=float, default=None, help='transition/transversion ratio of K2P and HKY')
    parser.add_argument('--freqs', type=str, default=None, help='stationary frequencies "pA,pC,pG,pT"')
    parser.add_argument('--rates', type=str, default=None, help='GTR exchangeabilities "AC,AG,AT,CG,CT,GT"')
    parser.add_argument('--q-file', type=str, default=None,
                        help='JSON file {"alphabet": ..., "Q": [[...]], "freqs": [...]} for the custom model')


def make_parser():
    parser = argparse.ArgumentParser(prog='CIR_rates', description='CIR model of evolutionary rate variation')
    subparsers = parser.add_subparsers(dest='command', required=True)

    estimate = subparsers.add_parser('estimate', help='CIR parameters from a gamma parameter and a dispersion index')
    estimate.add_argument('--gamma', type=float, default=None, help='gamma parameter of rates across sites')
    estimate.add_argument('--dispersion', type=float, default=None, help='long-run index of dispersion, > 1')
    _add_common(estimate, seeded=False)

    lik = subparsers.add_parser('lik', help='site likelihoods of an alignment on a tree')
    lik.add_argument('--tree', type=str, required=True, help='Newick file or string')
    lik.add_argument('--aln', type=str, required=True, help='alignment file')
    lik.add_argument('--aln-format', choices=['fasta', 'phylip'], default='fasta')
    lik.add_argument('--samples', type=int, default=10000, help='Monte-Carlo samples per site')
    lik.add_argument('--force-mc', action='store_true', help='Monte-Carlo even where the closed form applies')
    _add_model(lik)
    _add_cir(lik)
    _add_common(lik)

    simulate = subparsers.add_parser('simulate', help='simulate sequences down a tree')
    simulate.add_argument('--tree', type=str, required=True, help='Newick file or string')
    simulate.add_argument('--sites', type=int, required=True, help='number of sites')
    simulate.add_argument('--dt', type=float, default=config.DEFAULT_DT, help='grid step of the rate paths')
    simulate.add_argument('--tau-out', type=str, default=None, help='CSV file for the integrated rate of each branch')
    _add_model(simulate)
    _add_cir(simulate)
    _add_common(simulate, formats=('fasta',))

    dispersion = subparsers.add_parser('dispersion', help='index of dispersion of simulated substitution counts')
    dispersion.add_argument('--t', type=float, required=True, help='time horizon')
    dispersion.add_argument('--replicates', type=int, default=10000)
    dispersion.add_argument('--dt', type=float, default=config.DEFAULT_DT, help='grid step of the rate paths')
    dispersion.add_argument('--counts-out', type=str, default=None, help='CSV file for the simulated counts')
    _add_cir(dispersion)
    _add_common(dispersion)

    mgf = subparsers.add_parser('mgf', help='moment generating function of the integrated rate')
    mgf.add_argument('--eta', type=float, required=True)
    mgf.add_argument('--t', type=float, required=True)
    mgf.add_argument('--r0', type=float, required=True, help='rate at time 0')
    mgf.add_argument('--rt', type=float, default=None, help='rate at time t, for the bridge mgf')
    _add_cir(mgf)
    _add_common(mgf, seeded=False)
    return parser


def cir_from_args(args):
    if args.cir is not None:
        if args.dispersion is not None:
            raise ValidationError('give either --cir or --gamma with --dispersion, not both')
        return make_params(*parse_cir(args.cir))
    if args.gamma is not None or args.dispersion is not None:
        if args.dispersion is None or args.gamma is None:
            raise ValidationError('--gamma and --dispersion go together')
        return estimate_from_stats(args.gamma, args.dispersion)
    raise ValidationError('CIR parameters are needed: --cir a,b,sigma2 or --gamma with --dispersion')


def model_from_args(args):
    if args.model == 'custom':
        if args.q_file is None:
            raise ValidationError('the custom model needs --q-file')
        try:
            with open(args.q_file, encoding='utf-8') as f:
                document = json.load(f)
        except (OSError, UnicodeDecodeError, json.JSONDecodeError) as e:
            raise ValidationError(f'can not read the rate matrix file {args.q_file}: {e}')
        freqs = document.get('freqs')
        if args.freqs is not None:
            freqs = parse_floats(args.freqs, '--freqs')
        return build_rate_matrix('custom', Q=document.get('Q'), alphabet=document.get('alphabet'), freqs=freqs)
    params = {}
    if args.kappa is not None:
        params['kappa'] = args.kappa
    if args.rates is not None:
        params['rates'] = parse_floats(args.rates, '--rates', 6)
    freqs = parse_floats(args.freqs, '--freqs') if args.freqs is not None else None
    return build_rate_matrix(args.model, params, freqs)


def read_tree(text):
    path = Path(text)
    if not text.lstrip().startswith('(') and path.is_file():
        text = _read_text(path)
    return parse_newick(text.strip())


def _read_text(path):
    try:
        return Path(path).read_text(encoding='utf-8')
    except (OSError, UnicodeDecodeError) as e:
        raise ValidationError(f'can not read {path}: {e}')


@contextlib.contextmanager
def _output(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, 'w', newline='', encoding='utf-8') as f:
            yield f


def _cir_metadata(p):
    return {'cir': {'a': p.a, 'b': p.b, 'sigma2': p.sigma2}, 'feller': p.feller}


def cmd_estimate(args):
    if args.dispersion is None:
        raise ValidationError('--dispersion is required')
    if not args.dispersion > 1:
        raise ValidationError(f'index of dispersion must exceed 1 under rate variation, got {args.dispersion}')
    if args.gamma is None:
        raise ValidationError('--gamma is required')
    p = estimate_from_stats(args.gamma, args.dispersion)
    row = {'a': p.a, 'b': p.b, 'sigma2': p.sigma2, 'shape': p.shape, 'scale': p.scale, 'feller': p.feller}
    with _output(args.out) as handle:
        write_table(args.format, 'estimate', None, {}, ESTIMATE_HEADER, [row], handle)


def cmd_lik(args):
    p = cir_from_args(args)
    m = model_from_args(args)
    tree = read_tree(args.tree)
    aln = read_alignment(_read_text(args.aln), args.aln_format, m.alphabet)
    result = site_likelihoods(m, p, tree, aln, args.samples, args.seed, parse_workers(args.workers), args.force_mc)
    rows = [{'site': k + 1, 'method': result.method, 'likelihood': float(v), 'std_error': float(se),
             'log_likelihood': float(lv), 'log_std_error': float(lse)}
            for k, (v, se, lv, lse) in enumerate(zip(result.values, result.std_errors,
                                                     result.log_values, result.log_std_errors))]
    rows.append({'site': 'total', 'method': result.method, 'log_likelihood': result.log_likelihood,
                 'log_std_error': result.log_std_error})
    metadata = dict(_cir_metadata(p), model=m.family, method=result.method,
                    samples=result.n_samples, rejected=result.rejected)
    logger.info(f'log likelihood {result.log_likelihood} ({result.method})')
    with _output(args.out) as handle:
        write_table(args.format, 'lik', args.seed, metadata, LIK_HEADER, rows, handle)


def cmd_simulate(args):
    p = cir_from_args(args)
    m = model_from_args(args)
    tree = read_tree(args.tree)
    aln, taus = simulate_sequences(tree, m, p, args.sites, args.seed, args.dt,
                                   workers=parse_workers(args.workers), return_tau=True)
    with _output(args.out) as handle:
        write_fasta(aln, handle)
    if args.tau_out is not None:
        header = ['site'] + list(taus)
        rows = [dict({'site': k + 1}, **{name: float(x[k]) for name, x in taus.items()}) for k in range(aln.n_sites)]
        with _output(args.tau_out) as handle:
            write_csv(header, rows, handle)


def cmd_dispersion(args):
    p = cir_from_args(args)
    if args.replicates < config.MIN_MC_SAMPLES:
        raise ValidationError(f'--replicates must be at least {config.MIN_MC_SAMPLES}, got {args.replicates}')
    sample = simulate_counts(p, args.t, args.replicates, args.seed, args.dt, parse_workers(args.workers))
    estimate = empirical_dispersion(sample.counts)
    row = {'t': sample.t, 'replicates': estimate.n, 'index': estimate.value,
           'expected': index_of_dispersion(p, sample.t), 'mean_count': estimate.mean_count,
           'var_count': estimate.var_count}
    with _output(args.out) as handle:
        write_table(args.format, 'dispersion', args.seed, _cir_metadata(p), DISPERSION_HEADER, [row], handle)
    if args.counts_out is not None:
        rows = [{'replicate': k + 1, 'count': int(x)} for k, x in enumerate(sample.counts)]
        with _output(args.counts_out) as handle:
            write_csv(['replicate', 'count'], rows, handle)


def cmd_mgf(args):
    p = cir_from_args(args)
    if args.rt is None:
        value = mgf_start(p, args.r0, args.eta, args.t)
    else:
        value = mgf_bridge(p, args.r0, args.rt, args.eta, args.t)
    row = {'eta': args.eta, 't': args.t, 'r0': args.r0, 'rt': args.rt, 'value': value}
    with _output(args.out) as handle:
        write_table(args.format, 'mgf', None, _cir_metadata(p), MGF_HEADER, [row], handle)


COMMANDS = {
    'estimate': cmd_estimate,
    'lik': cmd_lik,
    'simulate': cmd_simulate,
    'dispersion': cmd_dispersion,
    'mgf': cmd_mgf,
}


def main(argv=None):
    logging.basicConfig(level=logging.INFO, format='%(levelname)s %(name)s: %(message)s')
    args = make_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except ValidationError as e:
        logger.error(str(e))
        return 2
    except NumericalError as e:
        logger.error(str(e))
        return 3
    return 0
