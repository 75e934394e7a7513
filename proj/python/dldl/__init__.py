"""Label distributions learned directly from logical labels."""

from ._dldl import (
    DldlError,
    HyperParams,
    baseline_recover,
    binarize,
    evaluate,
    fit,
    knn_similarity,
    laplacian,
    predict,
    project,
    run_experiment,
    synth,
)

__all__ = [
    "DldlError",
    "HyperParams",
    "baseline_recover",
    "binarize",
    "evaluate",
    "fit",
    "knn_similarity",
    "laplacian",
    "predict",
    "project",
    "run_experiment",
    "synth",
]
