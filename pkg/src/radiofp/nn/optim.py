"""Mini-batch SGD with classical momentum."""

from __future__ import annotations

import numpy as np

from ..errors import TrainingError
from .tensor import Parameter


class SGD:
    """v <- momentum * v + g;  theta <- theta - lr * v.

    Velocity buffers persist across steps. Aborts on non-finite gradients.
    """

    def __init__(self, params: list[Parameter], lr: float = 0.01, momentum: float = 0.9) -> None:
        if lr < 0:
            raise ValueError("learning rate must be non-negative")
        if not (0.0 <= momentum < 1.0):
            raise ValueError("momentum must be in [0, 1)")
        self.params = list(params)
        self.lr = float(lr)
        self.momentum = float(momentum)
        self.velocity = [np.zeros_like(p.data) for p in self.params]

    def step(self) -> None:
        for p, v in zip(self.params, self.velocity):
            if not np.all(np.isfinite(p.grad)):
                raise TrainingError(f"non-finite gradient in parameter {p.name or p.shape}")
            v *= self.momentum
            v += p.grad
            p.data -= self.lr * v

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()
