"""Sequence classification via a two-level attention hypergraph network.

Thin wrapper over the C++ core: sequences become hyperedges, their
subsequences become nodes, and a two-level attention network learns
hyperedge representations for classification.
"""

import json as _json

from seqhygan._core import (  # noqa: F401
    Corpus,
    DataError,
    Hypergraph,
    NumericError,
    SequenceRecord,
    SplitAssignment,
    SubseqVocabulary,
    build_debruijn,
    build_hypergraph,
    decompose_kmer,
    encode_espf,
    evaluate,
    group_labels,
    load_corpus,
    make_split,
    run_experiment_json,
    tokenize_corpus,
    train_espf,
)

__all__ = [
    "Corpus",
    "DataError",
    "Hypergraph",
    "NumericError",
    "SequenceRecord",
    "SplitAssignment",
    "SubseqVocabulary",
    "build_debruijn",
    "build_hypergraph",
    "decompose_kmer",
    "encode_espf",
    "evaluate",
    "group_labels",
    "load_corpus",
    "make_split",
    "run_experiment",
    "run_experiment_json",
    "tokenize_corpus",
    "train_espf",
]

__version__ = "0.1.0"


def run_experiment(corpus, **kwargs):
    """Run the full pipeline and return the report as a dict."""
    return _json.loads(run_experiment_json(corpus, **kwargs))
