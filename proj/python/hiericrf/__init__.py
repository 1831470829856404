"""Hierarchy-aware chain CRF for few-shot hierarchical text classification."""

from ._hiericrf import (
    ChainSchedule,
    Example,
    HiericrfError,
    Model,
    Taxonomy,
    build_schedule,
    evaluate,
    evaluate_model,
    golden_sequence,
    greedy_sample,
    hash_features,
    init_transitions,
    load_corpus,
    load_emissions,
    load_model,
    load_taxonomy,
    load_taxonomy_file,
    log_partition,
    marginals,
    nll_and_grads,
    render_template,
    sequence_score,
    store_emissions,
    synth,
    train,
    viterbi,
    write_corpus,
)

__all__ = [name for name in dir() if not name.startswith("_")]
