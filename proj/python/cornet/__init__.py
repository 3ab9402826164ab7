"""Co-occurrence relation network for multi-label temporal action localization.

Thin wrapper over the C++ core; see the project README for the file formats
and the `cornet` command-line tool.
"""

from cornet._core import (
    CornetError,
    CornetParseError,
    Tape,
    __version__,
    average_precision,
    build_cooccurrence,
    cooc,
    correlate_m1,
    correlate_m2,
    evaluate,
    param_count,
    per_frame_map,
    synth,
    synthetic_semantic_space,
    to_dense_targets,
    train,
)

__all__ = [
    "CornetError",
    "CornetParseError",
    "Tape",
    "__version__",
    "average_precision",
    "build_cooccurrence",
    "cooc",
    "correlate_m1",
    "correlate_m2",
    "evaluate",
    "param_count",
    "per_frame_map",
    "synth",
    "synthetic_semantic_space",
    "to_dense_targets",
    "train",
]
