"""Relative entropy coding over 1-D continuous distributions.

Given a target distribution Q, a proposal P, and a seed both sides
share, the coders here transmit an exact sample of Q using roughly
KL(Q||P) bits: the encoder runs a race of keyed random draws and sends
only the winner's identity, and the decoder regenerates the same draw
from the shared stream. Exact searches (sample-split, dyadic, and the
unshrunk rejection race) are joined by two fixed-budget coders and the
constant-divergence parameterizations used to build test pairs, plus a
benchmark harness.
"""

from .bench import (
    CSV_COLUMNS,
    ExperimentConfig,
    ResultRow,
    ShrinkageReport,
    knn_kl_estimate,
    mixture_pair,
    rows_to_csv,
    run_bias_grid,
    run_mode_sweep,
    run_runtime_grid,
    summarize_rows,
    verify_shrinkage,
    write_rows,
)
from .bitstream import (
    BitReader,
    BitWriter,
    MODE_BLOCK,
    MODE_EXACT,
    MessageFrame,
    pack_block,
    pack_exact,
    pack_pfr,
    read_message,
    unpack,
    unpack_block,
    unpack_exact,
    unpack_pfr,
    write_message,
)
from .coders import (
    Code,
    TrialStats,
    Variant,
    decode,
    decode_astar,
    decode_dad,
    decode_mrc,
    decode_pfr,
    encode_astar,
    encode_dad,
    encode_mrc,
    encode_pfr,
)
from .distributions import (
    FULL_LINE,
    Distribution1D,
    Gaussian,
    MixtureComponent,
    PairSpec,
    Region,
    Uniform,
    UniformMixture,
    distribution_from_dict,
    distribution_from_json,
    sample_restricted,
)
from .errors import (
    AbsoluteContinuityError,
    BudgetExhaustedError,
    DegenerateRegionError,
    DepthExceededError,
    DomainError,
    InfeasibleParameterError,
    InvalidCodeError,
    MalformedMessageError,
    RecError,
    UnboundedRatioError,
)
from .isokl import (
    BlockCodecConfig,
    IsoKLGaussianBlock,
    decode_block_vector,
    encode_block_vector,
    gaussian_from_kl_dinf,
    gaussian_from_mean_kl,
    gaussian_unconstrained,
    lambert_w0,
    load_block_model,
    load_block_model_json,
    uniform_from_mean_kl,
)
from .randomness import (
    DrawSlot,
    GumbelValue,
    StreamKey,
    derive_seed,
    gumbel,
    gumbel_to_arrival,
    keyed_uniform,
    trunc_gumbel,
)
from .tree import (
    NodeRecord,
    PartitionKind,
    depth_of,
    expand,
    heap_children,
    make_root,
    partition,
    top_down_process,
)

__version__ = "0.1.0"

__all__ = [
    "AbsoluteContinuityError",
    "BitReader",
    "BitWriter",
    "BlockCodecConfig",
    "BudgetExhaustedError",
    "CSV_COLUMNS",
    "Code",
    "DegenerateRegionError",
    "DepthExceededError",
    "Distribution1D",
    "DomainError",
    "DrawSlot",
    "ExperimentConfig",
    "FULL_LINE",
    "Gaussian",
    "GumbelValue",
    "InfeasibleParameterError",
    "InvalidCodeError",
    "IsoKLGaussianBlock",
    "MODE_BLOCK",
    "MODE_EXACT",
    "MalformedMessageError",
    "MessageFrame",
    "MixtureComponent",
    "NodeRecord",
    "PairSpec",
    "PartitionKind",
    "RecError",
    "Region",
    "ResultRow",
    "ShrinkageReport",
    "StreamKey",
    "TrialStats",
    "UnboundedRatioError",
    "Uniform",
    "UniformMixture",
    "Variant",
    "decode",
    "decode_astar",
    "decode_block_vector",
    "decode_dad",
    "decode_mrc",
    "decode_pfr",
    "depth_of",
    "derive_seed",
    "distribution_from_dict",
    "distribution_from_json",
    "encode_astar",
    "encode_block_vector",
    "encode_dad",
    "encode_mrc",
    "encode_pfr",
    "expand",
    "gaussian_from_kl_dinf",
    "gaussian_from_mean_kl",
    "gaussian_unconstrained",
    "gumbel",
    "gumbel_to_arrival",
    "heap_children",
    "keyed_uniform",
    "knn_kl_estimate",
    "lambert_w0",
    "load_block_model",
    "load_block_model_json",
    "make_root",
    "mixture_pair",
    "pack_block",
    "pack_exact",
    "pack_pfr",
    "partition",
    "read_message",
    "rows_to_csv",
    "run_bias_grid",
    "run_mode_sweep",
    "run_runtime_grid",
    "sample_restricted",
    "summarize_rows",
    "top_down_process",
    "trunc_gumbel",
    "uniform_from_mean_kl",
    "unpack",
    "unpack_block",
    "unpack_exact",
    "unpack_pfr",
    "verify_shrinkage",
    "write_message",
    "write_rows",
]
