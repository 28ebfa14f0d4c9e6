"""Layer set for 1D residual classifiers.

Conventions:
  - Sequence tensors are [B, C, L] (batch, channels, length); dense-stage
    tensors are [B, F].
  - conv1d computes cross-correlation (no kernel flip) with symmetric zero
    padding, so sequence length is preserved; kernel sizes must be odd.
  - Each layer caches what its backward needs during forward; one
    forward/backward pair at a time per layer (single trainer).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import ConfigError, UsageError
from .tensor import Parameter, he_uniform

LAYER_KINDS = (
    "conv1d",
    "residual_block",
    "max_pool1d",
    "batch_norm",
    "dense",
    "relu",
    "dropout",
    "flatten",
    "softmax",
)


@dataclass
class LayerSpec:
    """Declarative layer description; materialized by the Network builder."""

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in LAYER_KINDS:
            raise ConfigError(f"unknown layer kind {self.kind!r}")
        k = self.params.get("kernel")
        if k is not None and k % 2 == 0:
            raise ConfigError(f"{self.kind}: kernel size must be odd for symmetric padding, got {k}")
        rate = self.params.get("rate")
        if rate is not None and not (0.0 <= rate < 1.0):
            raise ConfigError(f"dropout rate must be in [0, 1), got {rate}")


def conv1d(filters: int, kernel: int = 5) -> LayerSpec:
    return LayerSpec("conv1d", {"filters": filters, "kernel": kernel})


def residual_block(filters: int, kernel: int = 5, batch_norm: bool = True) -> LayerSpec:
    return LayerSpec("residual_block", {"filters": filters, "kernel": kernel, "batch_norm": batch_norm})


def max_pool1d(width: int = 2) -> LayerSpec:
    return LayerSpec("max_pool1d", {"width": width})


def batch_norm() -> LayerSpec:
    return LayerSpec("batch_norm", {})


def dense(units: int) -> LayerSpec:
    return LayerSpec("dense", {"units": units})


def relu() -> LayerSpec:
    return LayerSpec("relu", {})


def dropout(rate: float) -> LayerSpec:
    return LayerSpec("dropout", {"rate": rate})


def flatten() -> LayerSpec:
    return LayerSpec("flatten", {})


def softmax() -> LayerSpec:
    return LayerSpec("softmax", {})


class Layer:
    """Base layer: forward caches, backward consumes the cache once."""

    spec: LayerSpec

    def parameters(self) -> list[Parameter]:
        return []

    def buffers(self) -> list[np.ndarray]:
        """Non-trainable state (running stats), serialized with checkpoints."""
        return []

    def forward(self, x: np.ndarray, train: bool) -> np.ndarray:
        raise NotImplementedError

    def backward(self, dout: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def out_shape(self, in_shape: tuple) -> tuple:
        raise NotImplementedError


class Conv1d(Layer):
    """Same-padded 1D cross-correlation, im2col + GEMM."""

    def __init__(self, spec: LayerSpec, c_in: int, rng: np.random.Generator, dtype, bias: bool = True) -> None:
        self.spec = spec
        self.c_in = c_in
        self.c_out = spec.params["filters"]
        self.kernel = spec.params["kernel"]
        fan_in = c_in * self.kernel
        self.w = Parameter(he_uniform(rng, (self.c_out, c_in, self.kernel), fan_in, dtype), "conv.w")
        self.b = Parameter(np.zeros(self.c_out, dtype=dtype), "conv.b") if bias else None
        self._cache = None

    def parameters(self) -> list[Parameter]:
        return [self.w] if self.b is None else [self.w, self.b]

    def out_shape(self, in_shape: tuple) -> tuple:
        c, length = in_shape
        if c != self.c_in:
            raise ConfigError(f"conv1d expects {self.c_in} input channels, got {c}")
        return (self.c_out, length)

    def forward(self, x: np.ndarray, train: bool) -> np.ndarray:
        if x.ndim != 3 or x.shape[1] != self.c_in:
            raise ConfigError(f"conv1d expects [B,{self.c_in},L], got {x.shape}")
        batch, _, length = x.shape
        pad = (self.kernel - 1) // 2
        xp = np.pad(x, ((0, 0), (0, 0), (pad, pad)))
        # [B, C, L, K] sliding view -> [B*L, C*K] so one GEMM does the batch
        cols = np.lib.stride_tricks.sliding_window_view(xp, self.kernel, axis=2)
        cols = np.ascontiguousarray(cols.transpose(0, 2, 1, 3)).reshape(batch * length, -1)
        w2 = self.w.data.reshape(self.c_out, -1)
        y = cols @ w2.T
        if self.b is not None:
            y += self.b.data
        self._cache = (cols, x.shape)
        return np.ascontiguousarray(y.reshape(batch, length, self.c_out).transpose(0, 2, 1))

    def backward(self, dout: np.ndarray) -> np.ndarray:
        if self._cache is None:
            raise UsageError("conv1d backward called before forward")
        cols, x_shape = self._cache
        self._cache = None
        batch, c_in, length = x_shape
        pad = (self.kernel - 1) // 2
        dmat = np.ascontiguousarray(dout.transpose(0, 2, 1)).reshape(batch * length, self.c_out)
        self.w.accumulate((dmat.T @ cols).reshape(self.w.shape))
        if self.b is not None:
            self.b.accumulate(dmat.sum(axis=0))
        dcols = (dmat @ self.w.data.reshape(self.c_out, -1)).reshape(batch, length, c_in, self.kernel)
        dcols = dcols.transpose(0, 2, 1, 3)  # [B, C, L, K]
        dxp = np.zeros((batch, c_in, length + 2 * pad), dtype=dout.dtype)
        for k in range(self.kernel):
            dxp[:, :, k : k + length] += dcols[:, :, :, k]
        return dxp[:, :, pad : pad + length]


class MaxPool1d(Layer):
    """Non-overlapping max pooling (stride == width); trailing remainder dropped."""

    def __init__(self, spec: LayerSpec) -> None:
        self.spec = spec
        self.width = spec.params["width"]
        self._cache = None

    def out_shape(self, in_shape: tuple) -> tuple:
        c, length = in_shape
        if length < self.width:
            raise ConfigError(f"max_pool1d width {self.width} exceeds length {length}")
        return (c, length // self.width)

    def forward(self, x: np.ndarray, train: bool) -> np.ndarray:
        batch, c, length = x.shape
        w = self.width
        l_out = length // w
        xr = x[:, :, : l_out * w].reshape(batch, c, l_out, w)
        idx = xr.argmax(axis=3)
        self._cache = (idx, x.shape)
        return np.take_along_axis(xr, idx[..., None], axis=3)[..., 0]

    def backward(self, dout: np.ndarray) -> np.ndarray:
        idx, x_shape = self._cache
        self._cache = None
        batch, c, length = x_shape
        w = self.width
        l_out = length // w
        dxr = np.zeros((batch, c, l_out, w), dtype=dout.dtype)
        np.put_along_axis(dxr, idx[..., None], dout[..., None], axis=3)
        dx = np.zeros(x_shape, dtype=dout.dtype)
        dx[:, :, : l_out * w] = dxr.reshape(batch, c, l_out * w)
        return dx


class BatchNorm(Layer):
    """Batch normalization over (batch, length) per channel, or per feature on 2D input.

    Train mode uses batch statistics and updates running stats; eval mode uses
    running stats only (frozen, deterministic).
    """

    MOMENTUM = 0.9
    EPS = 1e-5

    def __init__(self, spec: LayerSpec, n_features: int, dtype) -> None:
        self.spec = spec
        self.n = n_features
        self.gamma = Parameter(np.ones(n_features, dtype=dtype), "bn.gamma")
        self.beta = Parameter(np.zeros(n_features, dtype=dtype), "bn.beta")
        self.running_mean = np.zeros(n_features, dtype=dtype)
        self.running_var = np.ones(n_features, dtype=dtype)
        self._cache = None

    def parameters(self) -> list[Parameter]:
        return [self.gamma, self.beta]

    def buffers(self) -> list[np.ndarray]:
        return [self.running_mean, self.running_var]

    def out_shape(self, in_shape: tuple) -> tuple:
        return in_shape

    @staticmethod
    def _axes(x: np.ndarray) -> tuple:
        return (0,) if x.ndim == 2 else (0, 2)

    def _expand(self, v: np.ndarray, ndim: int) -> np.ndarray:
        return v if ndim == 2 else v[:, None]

    def forward(self, x: np.ndarray, train: bool) -> np.ndarray:
        axes = self._axes(x)
        if train:
            mu = x.mean(axis=axes)
            var = x.var(axis=axes)  # biased, matches the backward formula
            self.running_mean[...] = self.MOMENTUM * self.running_mean + (1 - self.MOMENTUM) * mu
            self.running_var[...] = self.MOMENTUM * self.running_var + (1 - self.MOMENTUM) * var
        else:
            mu, var = self.running_mean, self.running_var
        inv_std = 1.0 / np.sqrt(var + self.EPS)
        xhat = (x - self._expand(mu, x.ndim)) * self._expand(inv_std, x.ndim)
        y = self._expand(self.gamma.data, x.ndim) * xhat + self._expand(self.beta.data, x.ndim)
        self._cache = (xhat, inv_std, train, x.shape)
        return y

    def backward(self, dout: np.ndarray) -> np.ndarray:
        xhat, inv_std, train, x_shape = self._cache
        self._cache = None
        axes = self._axes(dout)
        self.gamma.accumulate((dout * xhat).sum(axis=axes))
        self.beta.accumulate(dout.sum(axis=axes))
        dxhat = dout * self._expand(self.gamma.data, dout.ndim)
        if not train:
            return dxhat * self._expand(inv_std, dout.ndim)
        # full train-mode backward: mean/var both depend on x
        n = dout.size // self.n
        sum_dxhat = dxhat.sum(axis=axes, keepdims=True)
        sum_dxhat_xhat = (dxhat * xhat).sum(axis=axes, keepdims=True)
        dx = (dxhat - sum_dxhat / n - xhat * sum_dxhat_xhat / n) * self._expand(inv_std, dout.ndim)
        return dx


class Dense(Layer):
    def __init__(self, spec: LayerSpec, n_in: int, rng: np.random.Generator, dtype) -> None:
        self.spec = spec
        self.n_in = n_in
        self.units = spec.params["units"]
        self.w = Parameter(he_uniform(rng, (self.units, n_in), n_in, dtype), "dense.w")
        self.b = Parameter(np.zeros(self.units, dtype=dtype), "dense.b")
        self._cache = None

    def parameters(self) -> list[Parameter]:
        return [self.w, self.b]

    def out_shape(self, in_shape: tuple) -> tuple:
        (f,) = in_shape
        if f != self.n_in:
            raise ConfigError(f"dense expects {self.n_in} features, got {f}")
        return (self.units,)

    def forward(self, x: np.ndarray, train: bool) -> np.ndarray:
        if x.ndim != 2 or x.shape[1] != self.n_in:
            raise ConfigError(f"dense expects [B,{self.n_in}], got {x.shape}")
        self._cache = x
        return x @ self.w.data.T + self.b.data

    def backward(self, dout: np.ndarray) -> np.ndarray:
        x = self._cache
        self._cache = None
        self.w.accumulate(dout.T @ x)
        self.b.accumulate(dout.sum(axis=0))
        return dout @ self.w.data


class ReLU(Layer):
    def __init__(self, spec: LayerSpec) -> None:
        self.spec = spec
        self._mask = None

    def out_shape(self, in_shape: tuple) -> tuple:
        return in_shape

    def forward(self, x: np.ndarray, train: bool) -> np.ndarray:
        self._mask = x > 0
        return np.where(self._mask, x, 0.0)

    def backward(self, dout: np.ndarray) -> np.ndarray:
        mask = self._mask
        self._mask = None
        return np.where(mask, dout, 0.0)


class Dropout(Layer):
    """Inverted dropout: retained units scaled by 1/(1-rate) in train mode."""

    def __init__(self, spec: LayerSpec, rng: np.random.Generator) -> None:
        self.spec = spec
        self.rate = spec.params["rate"]
        self.rng = rng
        self._mask = None

    def out_shape(self, in_shape: tuple) -> tuple:
        return in_shape

    def forward(self, x: np.ndarray, train: bool) -> np.ndarray:
        if not train or self.rate == 0.0:
            self._mask = None
            return x
        keep = 1.0 - self.rate
        mask = (self.rng.random(x.shape) < keep).astype(x.dtype) / keep
        self._mask = mask
        return x * mask

    def backward(self, dout: np.ndarray) -> np.ndarray:
        mask = self._mask
        self._mask = None
        return dout if mask is None else dout * mask


class Flatten(Layer):
    def __init__(self, spec: LayerSpec) -> None:
        self.spec = spec
        self._shape = None

    def out_shape(self, in_shape: tuple) -> tuple:
        return (int(np.prod(in_shape)),)

    def forward(self, x: np.ndarray, train: bool) -> np.ndarray:
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dout: np.ndarray) -> np.ndarray:
        shape = self._shape
        self._shape = None
        return dout.reshape(shape)


class Softmax(Layer):
    """Row softmax; kept out of the classifier stacks (the loss owns softmax)."""

    def __init__(self, spec: LayerSpec) -> None:
        self.spec = spec
        self._y = None

    def out_shape(self, in_shape: tuple) -> tuple:
        return in_shape

    def forward(self, x: np.ndarray, train: bool) -> np.ndarray:
        z = x - x.max(axis=1, keepdims=True)
        e = np.exp(z)
        y = e / e.sum(axis=1, keepdims=True)
        self._y = y
        return y

    def backward(self, dout: np.ndarray) -> np.ndarray:
        y = self._y
        self._y = None
        return y * (dout - (dout * y).sum(axis=1, keepdims=True))


class ResidualBlock(Layer):
    """conv -> [bn] -> relu -> conv -> [bn], plus shortcut, relu.

    Shortcut is the identity when channel counts match, otherwise a learned
    kernel-size-1 projection. Convs carry no bias when batch norm follows
    (the mean subtraction would absorb it).
    """

    def __init__(self, spec: LayerSpec, c_in: int, rng: np.random.Generator, dtype) -> None:
        self.spec = spec
        self.c_in = c_in
        self.c_out = spec.params["filters"]
        kernel = spec.params["kernel"]
        self.use_bn = spec.params.get("batch_norm", True)
        self.conv_a = Conv1d(conv1d(self.c_out, kernel), c_in, rng, dtype, bias=not self.use_bn)
        self.conv_b = Conv1d(conv1d(self.c_out, kernel), self.c_out, rng, dtype, bias=not self.use_bn)
        self.bn_a = BatchNorm(batch_norm(), self.c_out, dtype) if self.use_bn else None
        self.bn_b = BatchNorm(batch_norm(), self.c_out, dtype) if self.use_bn else None
        self.proj: Optional[Conv1d] = None
        if c_in != self.c_out:
            self.proj = Conv1d(conv1d(self.c_out, 1), c_in, rng, dtype)
        self._cache = None

    def parameters(self) -> list[Parameter]:
        ps = self.conv_a.parameters() + (self.bn_a.parameters() if self.bn_a else [])
        ps += self.conv_b.parameters() + (self.bn_b.parameters() if self.bn_b else [])
        if self.proj is not None:
            ps += self.proj.parameters()
        return ps

    def buffers(self) -> list[np.ndarray]:
        bufs = []
        if self.bn_a:
            bufs += self.bn_a.buffers()
        if self.bn_b:
            bufs += self.bn_b.buffers()
        return bufs

    def out_shape(self, in_shape: tuple) -> tuple:
        c, length = in_shape
        if c != self.c_in:
            raise ConfigError(f"residual_block expects {self.c_in} input channels, got {c}")
        return (self.c_out, length)

    def forward(self, x: np.ndarray, train: bool) -> np.ndarray:
        h = self.conv_a.forward(x, train)
        if self.bn_a:
            h = self.bn_a.forward(h, train)
        mask1 = h > 0
        h = np.where(mask1, h, 0.0)
        h = self.conv_b.forward(h, train)
        if self.bn_b:
            h = self.bn_b.forward(h, train)
        s = self.proj.forward(x, train) if self.proj is not None else x
        z = h + s
        mask2 = z > 0
        self._cache = (mask1, mask2)
        return np.where(mask2, z, 0.0)

    def backward(self, dout: np.ndarray) -> np.ndarray:
        mask1, mask2 = self._cache
        self._cache = None
        dz = np.where(mask2, dout, 0.0)
        dh = self.bn_b.backward(dz) if self.bn_b else dz
        dh = self.conv_b.backward(dh)
        dh = np.where(mask1, dh, 0.0)
        dh = self.bn_a.backward(dh) if self.bn_a else dh
        dx = self.conv_a.backward(dh)
        ds = self.proj.backward(dz) if self.proj is not None else dz
        return dx + ds


def materialize(spec: LayerSpec, in_shape: tuple, rng: np.random.Generator, dtype) -> Layer:
    """Build a concrete layer for the given input shape [C, L] or [F]."""
    kind = spec.kind
    if kind == "conv1d":
        if len(in_shape) != 2:
            raise ConfigError("conv1d requires a [C, L] input")
        return Conv1d(spec, in_shape[0], rng, dtype)
    if kind == "residual_block":
        if len(in_shape) != 2:
            raise ConfigError("residual_block requires a [C, L] input")
        return ResidualBlock(spec, in_shape[0], rng, dtype)
    if kind == "max_pool1d":
        return MaxPool1d(spec)
    if kind == "batch_norm":
        return BatchNorm(spec, in_shape[0], dtype)
    if kind == "dense":
        if len(in_shape) != 1:
            raise ConfigError("dense requires a flattened [F] input")
        return Dense(spec, in_shape[0], rng, dtype)
    if kind == "relu":
        return ReLU(spec)
    if kind == "dropout":
        return Dropout(spec, rng)
    if kind == "flatten":
        return Flatten(spec)
    if kind == "softmax":
        return Softmax(spec)
    raise ConfigError(f"unknown layer kind {kind!r}")
