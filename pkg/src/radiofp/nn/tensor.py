"""Trainable parameter buffers for the numpy NN engine.

A Parameter couples a value array with a same-shape gradient accumulator.
All arrays are row-major (C order) real floats; 32-bit is the training
default, 64-bit exists for gradient checking.
"""

from __future__ import annotations

import numpy as np

FLOAT32 = np.float32
FLOAT64 = np.float64


class Parameter:
    """A trainable array plus its gradient accumulator."""

    def __init__(self, data: np.ndarray, name: str = "") -> None:
        self.data = np.ascontiguousarray(data)
        self.grad = np.zeros_like(self.data)
        self.name = name

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def zero_grad(self) -> None:
        self.grad[...] = 0.0

    def accumulate(self, g: np.ndarray) -> None:
        self.grad += g

    def __repr__(self) -> str:  # pragma: no cover
        return f"Parameter({self.name or 'unnamed'}, shape={self.shape}, dtype={self.dtype})"


def he_uniform(rng: np.random.Generator, shape: tuple, fan_in: int, dtype) -> np.ndarray:
    """He-style uniform init for relu networks: U(-sqrt(6/fan_in), +sqrt(6/fan_in))."""
    limit = np.sqrt(6.0 / max(1, fan_in))
    return rng.uniform(-limit, limit, size=shape).astype(dtype)
