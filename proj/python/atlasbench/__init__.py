"""Python access to the atlasbench core: bins, answer grammar, scenes, QA pairs and metrics."""

from ._atlasbench import (
    __version__,
    build_dataset,
    decode_bin,
    encode_bin,
    evaluate,
    f1_from_pr,
    generate_scenes,
    l2_horizons,
    parse_planning_answer,
)

__all__ = [
    "__version__",
    "build_dataset",
    "decode_bin",
    "encode_bin",
    "evaluate",
    "f1_from_pr",
    "generate_scenes",
    "l2_horizons",
    "parse_planning_answer",
]
