"""Disconnected graph neural networks for adsorbate-catalyst energy prediction."""

from ._core import (
    VARIANTS,
    AtomicSystem,
    Dataset,
    DuplicateTargetStats,
    Error,
    Model,
    NonFiniteError,
    SystemMetadata,
    TrainingError,
    ValidationError,
    duplicate_target_stats,
    evaluate,
    format_dataset,
    generate_synthetic,
    parse_dataset,
    read_checkpoint,
    read_dataset,
    train,
    verify,
    write_dataset,
)

__all__ = [
    "VARIANTS",
    "AtomicSystem",
    "Dataset",
    "DuplicateTargetStats",
    "Error",
    "Model",
    "NonFiniteError",
    "SystemMetadata",
    "TrainingError",
    "ValidationError",
    "duplicate_target_stats",
    "evaluate",
    "format_dataset",
    "generate_synthetic",
    "parse_dataset",
    "read_checkpoint",
    "read_dataset",
    "train",
    "verify",
    "write_dataset",
]
