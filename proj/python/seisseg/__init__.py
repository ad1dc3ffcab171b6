"""Weakly supervised segmentation of seismic sections.

Thin wrapper over the compiled core. Images are 2-D float arrays (depth by
column), horizon sets are (n_horizons, n_x) arrays of depths, and partial
labels are (k, 3) integer arrays of row, column, class.
"""

from ._core import (
    ArchConfig,
    ConfigError,
    ContractError,
    Dataset,
    FormatError,
    GeoModelConfig,
    Network,
    Reduction,
    SeissegError,
    ShapeError,
    Strategy,
    TrainConfig,
    TrainingDiverged,
    build_network,
    derive_seed,
    evaluate_maps,
    full_cross_entropy,
    gen_dataset,
    load_checkpoint,
    load_dataset,
    lr_schedule,
    partial_cross_entropy,
    rasterize,
    ricker_wavelet,
    run_cell,
    sample_labels,
    save_dataset,
    scattered_quotas,
    train,
)

__all__ = [name for name in dir() if not name.startswith("_")]
