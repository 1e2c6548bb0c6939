"""Perfectly uniform proper k-coloring sampling via coupling from the past.

Given an undirected graph with maximum degree D and k > 3*D colors, the
sampler returns colorings whose distribution is exactly uniform over all
proper k-colorings; the package also ships the oracles that verify the
distributional guarantees at desk scale.
"""

from .graph import (
    Graph,
    GraphParseError,
    InstanceRejectedError,
    graph_hash,
    is_proper,
    load_graph,
    load_graph_file,
    max_degree,
    serialize_graph,
    validate_instance,
)
from .kernel import (
    COMPRESS,
    CONTRACT,
    BoundingState,
    ContractPreconditionError,
    MalformedTupleError,
    PaletteSnapshot,
    UpdateTuple,
    compress_decode,
    compress_gen,
    contract_decode,
    contract_gen,
    decode_color,
    palette,
)
from .oracle import (
    CoalescenceReport,
    DriftBin,
    ExactDistribution,
    TraceCheckReport,
    UniformityReport,
    chi_square_critical,
    coalescence_stats,
    drift_lower_bound,
    enumerate_colorings,
    exact_update_marginal,
    random_bounded_degree_graph,
    scripted_trace_check,
    uniformity_test,
)
from .phases import (
    Block,
    PhasePlan,
    StepStreams,
    block_from_record,
    block_to_record,
    choose_spruce_set,
    coalescence_horizon,
    coalescence_phase,
    collapse_phase,
    generate_block,
    phase_plan,
    phi,
    spruce_up,
)
from .randomness import (
    BitStream,
    EntropyExhaustedError,
    LazyReal,
    derive_trial_seed,
    lazy_compare,
    random_permutation,
    substream,
    uniform_from_set,
    uniform_index,
)
from .sampler import SamplerRun, apply_block, perfect_sample, sample_run

__version__ = "0.1.0"

__all__ = [
    "Graph", "GraphParseError", "InstanceRejectedError", "graph_hash", "is_proper",
    "load_graph", "load_graph_file", "max_degree", "serialize_graph", "validate_instance",
    "COMPRESS", "CONTRACT", "BoundingState", "ContractPreconditionError",
    "MalformedTupleError", "PaletteSnapshot", "UpdateTuple", "compress_decode",
    "compress_gen", "contract_decode", "contract_gen", "decode_color", "palette",
    "CoalescenceReport", "DriftBin", "ExactDistribution", "TraceCheckReport",
    "UniformityReport", "chi_square_critical", "coalescence_stats", "drift_lower_bound",
    "enumerate_colorings", "exact_update_marginal", "random_bounded_degree_graph",
    "scripted_trace_check", "uniformity_test",
    "Block", "PhasePlan", "StepStreams", "block_from_record", "block_to_record",
    "choose_spruce_set", "coalescence_horizon", "coalescence_phase", "collapse_phase",
    "generate_block", "phase_plan", "phi", "spruce_up",
    "BitStream", "EntropyExhaustedError", "LazyReal", "derive_trial_seed",
    "lazy_compare", "random_permutation", "substream", "uniform_from_set",
    "uniform_index",
    "SamplerRun", "apply_block", "perfect_sample", "sample_run",
]
