"""Central finite-difference verification of analytic gradients.

The check projects the network output onto a fixed random direction to get a
scalar objective, then compares the analytic gradient of every parameter and
every input entry against (f(t+eps) - f(t-eps)) / (2 eps). Run in 64-bit mode;
stochastic layers (dropout rate > 0 in train mode) are not checkable because
each forward would draw a fresh mask.
"""

from __future__ import annotations

import numpy as np

from .layers import LayerSpec
from .network import Network


def _as_network(target, input_shape: tuple, seed: int) -> Network:
    if isinstance(target, Network):
        return target
    if isinstance(target, LayerSpec):
        return Network([target], input_shape, seed=seed, float64=True)
    raise TypeError("gradient_check target must be a Network or LayerSpec")


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-8)
    return float(np.max(np.abs(analytic - numeric) / denom))


def gradient_check(target, x: np.ndarray, eps: float = 1e-3, seed: int = 0, train: bool = True) -> float:
    """Max relative error between analytic and numeric gradients.

    Covers every trainable parameter and every entry of the probe input.
    """
    x = np.asarray(x, dtype=np.float64)
    net = _as_network(target, x.shape[1:], seed)
    assert net.dtype == np.float64, "gradient_check requires a 64-bit network"
    net.train() if train else net.eval()

    rng = np.random.default_rng(seed)
    out = net.forward(x)
    # keep the scalar objective O(1): the relative-error floor is absolute
    proj = rng.standard_normal(out.shape) / np.sqrt(out.size)

    def objective(xv: np.ndarray) -> float:
        return float(np.sum(net.forward(xv) * proj))

    net.forward(x)
    net.zero_grad()
    dx_analytic = net.backward(proj.astype(np.float64))

    worst = 0.0
    # input gradient
    numeric = np.zeros_like(x)
    flat = x.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        f_plus = objective(x)
        flat[i] = orig - eps
        f_minus = objective(x)
        flat[i] = orig
        numeric.reshape(-1)[i] = (f_plus - f_minus) / (2 * eps)
    worst = max(worst, relative_error(dx_analytic, numeric))

    # parameter gradients
    for p in net.parameters():
        numeric_p = np.zeros_like(p.data)
        flat_p = p.data.reshape(-1)
        for i in range(flat_p.size):
            orig = flat_p[i]
            flat_p[i] = orig + eps
            f_plus = objective(x)
            flat_p[i] = orig - eps
            f_minus = objective(x)
            flat_p[i] = orig
            numeric_p.reshape(-1)[i] = (f_plus - f_minus) / (2 * eps)
        worst = max(worst, relative_error(p.grad, numeric_p))
    return worst
