"""Sequential network container with train/eval modes.

A Network materializes an ordered LayerSpec list for a declared input shape,
validating that consecutive layer shapes agree. Per-layer RNG streams are
spawned from one seed, so construction and dropout masks are reproducible.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError, UsageError
from .layers import Layer, LayerSpec, materialize
from .tensor import FLOAT32, FLOAT64, Parameter


class Network:
    def __init__(
        self,
        specs: list[LayerSpec],
        input_shape: tuple,
        seed: int = 0,
        float64: bool = False,
    ) -> None:
        self.specs = list(specs)
        self.input_shape = tuple(int(s) for s in input_shape)
        self.seed = int(seed)
        self.dtype = FLOAT64 if float64 else FLOAT32
        self.mode = "train"
        self.layers: list[Layer] = []
        self._forward_done = False

        streams = np.random.SeedSequence(self.seed).spawn(len(self.specs))
        shape = self.input_shape
        for spec, ss in zip(self.specs, streams):
            layer = materialize(spec, shape, np.random.default_rng(ss), self.dtype)
            shape = layer.out_shape(shape)
            self.layers.append(layer)
        self.output_shape = shape

    # -- modes ---------------------------------------------------------

    def train(self) -> "Network":
        self.mode = "train"
        return self

    def eval(self) -> "Network":
        self.mode = "eval"
        return self

    # -- passes --------------------------------------------------------

    def forward(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=self.dtype)
        if x.shape[1:] != self.input_shape:
            raise ConfigError(
                f"network expects input shape [B, {', '.join(map(str, self.input_shape))}], got {x.shape}"
            )
        is_train = self.mode == "train"
        for layer in self.layers:
            x = layer.forward(x, is_train)
        self._forward_done = True
        return x

    def backward(self, dout: np.ndarray) -> np.ndarray:
        if not self._forward_done:
            raise UsageError("backward called before forward")
        self._forward_done = False
        for layer in reversed(self.layers):
            dout = layer.backward(dout)
        return dout

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.forward(x)

    # -- state ---------------------------------------------------------

    def parameters(self) -> list[Parameter]:
        out: list[Parameter] = []
        for layer in self.layers:
            out.extend(layer.parameters())
        return out

    def buffers(self) -> list[np.ndarray]:
        out: list[np.ndarray] = []
        for layer in self.layers:
            out.extend(layer.buffers())
        return out

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    def n_parameters(self) -> int:
        return sum(p.data.size for p in self.parameters())

    def state_arrays(self) -> list[np.ndarray]:
        """All persistent arrays (parameters then buffers, per layer order)."""
        out: list[np.ndarray] = []
        for layer in self.layers:
            out.extend(p.data for p in layer.parameters())
            out.extend(layer.buffers())
        return out

    def load_state_arrays(self, arrays: list[np.ndarray]) -> None:
        slots = self.state_arrays()
        if len(arrays) != len(slots):
            raise ConfigError(f"state has {len(arrays)} arrays, network needs {len(slots)}")
        for slot, arr in zip(slots, arrays):
            if slot.shape != arr.shape:
                raise ConfigError(f"state array shape {arr.shape} does not match slot {slot.shape}")
            slot[...] = arr.astype(slot.dtype)

    def copy_state(self) -> list[np.ndarray]:
        return [a.copy() for a in self.state_arrays()]
