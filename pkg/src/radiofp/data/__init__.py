"""Windowed, normalized, labeled datasets from IQ recordings."""

from .datasets import (
    LabeledDataset,
    SplitSpec,
    Task,
    build_dataset,
    device_task,
    distance_task,
    load_dataset_cache,
    save_dataset_cache,
)
from .windows import (
    DEFAULT_WINDOW,
    Window,
    block_to_tensor,
    from_tensor,
    normalize_block,
    normalize_window,
    partition_windows,
    rms,
    to_tensor,
)

__all__ = [
    "DEFAULT_WINDOW",
    "LabeledDataset",
    "SplitSpec",
    "Task",
    "Window",
    "block_to_tensor",
    "build_dataset",
    "device_task",
    "distance_task",
    "from_tensor",
    "load_dataset_cache",
    "normalize_block",
    "normalize_window",
    "partition_windows",
    "rms",
    "save_dataset_cache",
    "to_tensor",
]
