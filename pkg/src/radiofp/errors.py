"""Exception types shared across the package."""


class RadioFPError(Exception):
    """Base class for all package errors."""


class ConfigError(RadioFPError):
    """Invalid configuration: bad layer wiring, shapes, splits, missing classes."""


class DataError(RadioFPError):
    """Invalid data: labels out of range, all-zero windows, malformed files."""


class UsageError(RadioFPError):
    """API misuse: e.g. backward before forward."""


class TrainingError(RadioFPError):
    """Training aborted: non-finite loss or gradients."""


class CheckpointError(RadioFPError):
    """Checkpoint file cannot be loaded (bad magic/version/shape/truncation)."""
