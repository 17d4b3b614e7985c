"""
Character alignments: validation, FASTA / sequential PHYLIP reading and
FASTA writing
"""
import io
import logging
from typing import NamedTuple

import numpy as np
from Bio import AlignIO, SeqIO
from Bio.Seq import Seq
from Bio.SeqIO.FastaIO import SimpleFastaParser
from Bio.SeqRecord import SeqRecord

from .. import config
from ..checker import ParseError, ValidationError, unknown_symbols

logger = logging.getLogger(__name__)

FORMATS = ['fasta', 'phylip']


class Alignment(NamedTuple):
    names: tuple
    sequences: tuple
    alphabet: str

    @property
    def n_taxa(self):
        return len(self.names)

    @property
    def n_sites(self):
        return len(self.sequences[0])

    def column(self, site):
        """the site pattern: leaf name -> character"""
        return {name: seq[site] for name, seq in zip(self.names, self.sequences)}

    def codes(self):
        """(n_taxa, n_sites) state indices, -1 for gaps and unknowns"""
        lookup = {ch: k for k, ch in enumerate(self.alphabet)}
        return np.array([[lookup.get(ch, -1) for ch in seq] for seq in self.sequences],
                        dtype=np.int64).reshape(self.n_taxa, self.n_sites)

    def subset(self, names):
        """rows reordered to follow names"""
        rows = dict(zip(self.names, self.sequences))
        missing = [x for x in names if x not in rows]
        if missing:
            raise ValidationError(f'taxa {missing} are not in the alignment')
        return Alignment(names=tuple(names), sequences=tuple(rows[x] for x in names), alphabet=self.alphabet)


def make_alignment(names, sequences, alphabet=config.DNA_ALPHABET):
    names = [str(x) for x in names]
    sequences = [str(x).upper() for x in sequences]
    if not names:
        raise ValidationError('alignment is empty')
    if len(names) != len(sequences):
        raise ValidationError(f'{len(names)} taxon names for {len(sequences)} sequences')
    if len(set(names)) != len(names):
        duplicated = sorted({x for x in names if names.count(x) > 1})
        raise ValidationError(f'duplicate taxon names {duplicated}')
    n_sites = len(sequences[0])
    if n_sites == 0:
        raise ValidationError('alignment has no sites')
    allowed = set(alphabet) | set(unknown_symbols(alphabet))
    for k, (name, seq) in enumerate(zip(names, sequences)):
        if len(seq) != n_sites:
            raise ValidationError(f'sequence of taxon {k + 1} ({name}) has {len(seq)} sites, expected {n_sites}')
        for j, ch in enumerate(seq):
            if ch not in allowed:
                raise ValidationError(f'unknown character {ch!r} in taxon {k + 1} ({name}) at column {j + 1}')
    return Alignment(names=tuple(names), sequences=tuple(sequences), alphabet=alphabet)


def read_alignment(text, fmt='fasta', alphabet=config.DNA_ALPHABET):
    """
    :param str text: alignment file contents
    :param str fmt: fasta or phylip (sequential, names of any length)
    :param str alphabet: state symbols, gaps and unknowns come on top of it
    :rtype: Alignment
    """
    fmt = fmt.lower()
    if fmt not in FORMATS:
        raise ValidationError(f'alignment format {fmt} is not one of the acceptable {FORMATS}')
    text = text.replace('\r\n', '\n').replace('\r', '\n')
    if fmt == 'fasta':
        if text.strip() and not text.lstrip().startswith('>'):
            raise ParseError("FASTA input should start with '>'", len(text) - len(text.lstrip()))
        pairs = list(SimpleFastaParser(io.StringIO(text)))
        names = [title.split()[0] if title.split() else '' for title, _ in pairs]
        sequences = [seq.replace(' ', '') for _, seq in pairs]
    else:
        names, sequences = _read_phylip(text)
    aln = make_alignment(names, sequences, alphabet)
    logger.info(f'found {aln.n_taxa} taxa and {aln.n_sites} sites')
    return aln


def _read_phylip(text):
    """sequential PHYLIP, each sequence may wrap over several lines"""
    lines = text.strip().split('\n')
    header = lines[0].split() if lines and lines[0].strip() else []
    if len(header) != 2 or not all(x.isdigit() for x in header):
        raise ParseError('PHYLIP header should be "<number of taxa> <number of sites>"', 0)
    n_taxa, n_sites = map(int, header)
    records = []
    for line in lines[1:]:
        if not line.strip():
            continue
        if records and len(records[-1][1]) < n_sites:
            records[-1][1] += ''.join(line.split())
        else:
            name, *chunks = line.split()
            records.append([name, ''.join(chunks)])
        if len(records[-1][1]) > n_sites:
            raise ValidationError(f'PHYLIP header announces {n_sites} sites, taxon {records[-1][0]} has more')
    if len(records) != n_taxa:
        raise ValidationError(f'PHYLIP header announces {n_taxa} taxa, found {len(records)}')
    short = [name for name, seq in records if len(seq) != n_sites]
    if short:
        raise ValidationError(f'PHYLIP header announces {n_sites} sites, taxa {short} have fewer')
    unwrapped = f'{n_taxa} {n_sites}\n' + ''.join(f'{name} {seq}\n' for name, seq in records)
    try:
        alignment = AlignIO.read(io.StringIO(unwrapped), 'phylip-relaxed')
    except ValueError as e:
        raise ValidationError(f'PHYLIP input does not match its header: {e}')
    return [x.id for x in alignment], [str(x.seq) for x in alignment]


def write_fasta(aln, handle):
    records = [SeqRecord(Seq(seq), id=name, description='') for name, seq in zip(aln.names, aln.sequences)]
    SeqIO.write(records, handle, 'fasta')
