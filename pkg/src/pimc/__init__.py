"""Pixel-wise multimodal contrastive learning over satellite image time series.

The pipeline turns reflectance cubes into per-pixel vegetation-index
series, renders each series as a stacked recurrence-plot image, and
trains an image-patch encoder and a plot encoder with a symmetric
contrastive loss so the two modalities share one embedding space. The
trained encoders are then probed (frozen or fine-tuned) on pixel
classification, index forecasting, and land-cover classification.
"""

from .contrastive import (
    PairBatch,
    PairDataset,
    TrainConfig,
    TrainState,
    build_pair_dataset,
    cross_modal_retrieval,
    make_pair_batches,
    pimc_loss,
    similarity_matrix,
    train,
)
from .cube import DatasetManifest, SitsCube, read_cube, read_labels, write_cube, write_labels
from .downstream import (
    MetricsReport,
    ProbeConfig,
    balanced_accuracy,
    classify_landcover,
    classify_pixels,
    compare_runs,
    forecast_index,
    macro_f1,
)
from .encoder import Encoder, EncoderConfig, encode, init_encoder, load_params, save_params
from .hilbert import hilbert_order
from .indices import evi, ndvi, savi
from .optim import AdamState, adam_step
from .patches import IndexSeriesSet, PatchGrid, build_series, sample_pixels, slice_patches
from .recurrence import RpImage, recurrence_plot, resize_rp, stack_channels
from .synth import synth_cube
from .tensor import Tensor, no_grad

__version__ = "0.1.0"

__all__ = [
    "AdamState",
    "DatasetManifest",
    "Encoder",
    "EncoderConfig",
    "IndexSeriesSet",
    "MetricsReport",
    "PairBatch",
    "PairDataset",
    "PatchGrid",
    "ProbeConfig",
    "RpImage",
    "SitsCube",
    "Tensor",
    "TrainConfig",
    "TrainState",
    "adam_step",
    "balanced_accuracy",
    "build_pair_dataset",
    "build_series",
    "classify_landcover",
    "classify_pixels",
    "compare_runs",
    "cross_modal_retrieval",
    "encode",
    "evi",
    "forecast_index",
    "hilbert_order",
    "init_encoder",
    "load_params",
    "macro_f1",
    "make_pair_batches",
    "ndvi",
    "no_grad",
    "pimc_loss",
    "read_cube",
    "read_labels",
    "recurrence_plot",
    "resize_rp",
    "sample_pixels",
    "save_params",
    "savi",
    "similarity_matrix",
    "slice_patches",
    "stack_channels",
    "synth_cube",
    "train",
    "write_cube",
    "write_labels",
]
