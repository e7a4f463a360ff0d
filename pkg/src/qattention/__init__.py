"""Retweet-transfer extraction with classical and quantum q-attention models."""

__version__ = "0.1.0"

from .ingest import (
    ParseStats,
    RetweetChain,
    TweetRecord,
    extract_retweet_chain,
    parse_jsonl_stream,
    parse_snap_stream,
    read_corpus,
    write_corpus,
)
from .cascade import (
    BuildStats,
    PatternRow,
    PatternStats,
    TransferInstance,
    aggregate_patterns,
    author_tweet_counts,
    build_instances,
    instance_probability,
)
from .classical import (
    ClassicalFit,
    ClassicalParams,
    PreconditionError,
    fit_classical,
    predict_classical,
    total_probability,
)
from .quantum import (
    Decomposition,
    QuantumFit,
    QuantumFitConfig,
    QuantumParams,
    decompose,
    fit_quantum,
    interference_term,
    predict_quantum,
    probability,
    total_amplitude,
)
from .simulator import (
    SequenceConfig,
    WorldConfig,
    ground_truth,
    simulate_classical_world,
    simulate_sequence_world,
)
