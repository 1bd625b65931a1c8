"""Wiener-filter quality enhancement for voxelized point-cloud color attributes.

Library surface: PointCloud frames with Morton ordering and PLY I/O, a fast
coplanar neighbor gather, least-squares filter estimation with an RD gate, a
bit-exact sidecar payload, a surrogate attribute codec, quality metrics, and
a scikit-learn style estimator tying the pipeline together.
"""

from .bitstream import (
    FramePayload,
    PayloadError,
    StreamHeader,
    dequantize_taps,
    parse,
    quantize_taps,
    serialize,
)
from .cloud import (
    ColorTriple,
    FrameSequence,
    GeometryMismatchError,
    PointCloud,
    ValidationError,
    VoxelPosition,
    rgb_to_ycbcr,
    sort_by_morton,
    ycbcr_to_rgb,
)
from .estimator import WienerEnhancer
from .metrics import RatePoint, bd_rate, complexity_ratio, psnr, weighted_psnr
from .neighbors import (
    IndexTable,
    NeighborMatrix,
    brute_force_neighbors,
    build_index,
    gather_neighbors,
)
from .pipeline import (
    FrameResult,
    GofCoefficientBuffer,
    SequenceResult,
    decode_replay,
    enhance_frame_bwf,
    enhance_gof_ciwf,
    enhance_gof_vcwf,
    enhance_sequence,
)
from .ply import read_ply, write_ply
from .surrogate import (
    InterFrameRecord,
    QuantizerConfig,
    inter_code,
    intra_code,
    propagation_identity_check,
)
from .synthetic import generate_sequence
from .wiener import FilterCoefficients, NormalEquation, accumulate, apply, mse, solve

__version__ = "0.1.0"

__all__ = [
    "ColorTriple",
    "FilterCoefficients",
    "FramePayload",
    "FrameResult",
    "FrameSequence",
    "GeometryMismatchError",
    "GofCoefficientBuffer",
    "IndexTable",
    "InterFrameRecord",
    "NeighborMatrix",
    "NormalEquation",
    "PayloadError",
    "PointCloud",
    "QuantizerConfig",
    "RatePoint",
    "SequenceResult",
    "StreamHeader",
    "ValidationError",
    "VoxelPosition",
    "WienerEnhancer",
    "accumulate",
    "apply",
    "bd_rate",
    "brute_force_neighbors",
    "build_index",
    "complexity_ratio",
    "decode_replay",
    "dequantize_taps",
    "enhance_frame_bwf",
    "enhance_gof_ciwf",
    "enhance_gof_vcwf",
    "enhance_sequence",
    "gather_neighbors",
    "generate_sequence",
    "inter_code",
    "intra_code",
    "mse",
    "parse",
    "propagation_identity_check",
    "psnr",
    "quantize_taps",
    "read_ply",
    "rgb_to_ycbcr",
    "serialize",
    "solve",
    "sort_by_morton",
    "weighted_psnr",
    "write_ply",
    "ycbcr_to_rgb",
]
