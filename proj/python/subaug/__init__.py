"""Subgraph representation learning with multi-view subgraph augmentation.

Thin Python layer over the C++ core: graph construction, stochastic
multi-view batch assembly, training with analytic gradients, the synthetic
SBM task, and micro-F1 evaluation.
"""

from subaug._core import (
    AugmentConfig,
    AugmentedBatch,
    DivergenceError,
    Graph,
    IoError,
    LabelSpec,
    ModelConfig,
    SubgraphDataset,
    SynthConfig,
    TrainConfig,
    TrainedModel,
    ValidationError,
    apply_masks,
    assemble_batch,
    build_graph,
    fit,
    fold,
    induced_adjacency,
    load_dataset,
    load_model,
    make_dataset,
    mask_stream_key,
    micro_f1,
    mix64,
    save_dataset,
    split_dataset,
    subgraph_features,
    synth_dataset,
)

__all__ = [
    "AugmentConfig",
    "AugmentedBatch",
    "DivergenceError",
    "Graph",
    "IoError",
    "LabelSpec",
    "ModelConfig",
    "SubgraphDataset",
    "SynthConfig",
    "TrainConfig",
    "TrainedModel",
    "ValidationError",
    "apply_masks",
    "assemble_batch",
    "build_graph",
    "fit",
    "fold",
    "induced_adjacency",
    "load_dataset",
    "load_model",
    "make_dataset",
    "mask_stream_key",
    "micro_f1",
    "mix64",
    "save_dataset",
    "split_dataset",
    "subgraph_features",
    "synth_dataset",
]
