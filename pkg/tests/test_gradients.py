"""Finite-difference gradient verification for every layer kind (64-bit)."""

import numpy as np
import pytest

from radiofp.nn import (
    Network,
    batch_norm,
    conv1d,
    dense,
    dropout,
    flatten,
    gradient_check,
    max_pool1d,
    relu,
    residual_block,
    softmax,
)

RNG = np.random.default_rng(2024)


def probe(shape):
    return RNG.standard_normal(shape)


@pytest.mark.parametrize(
    "spec,in_shape",
    [
        (dense(7), (5,)),
        (conv1d(4, 5), (3, 10)),
        (conv1d(3, 1), (2, 8)),
        (relu(), (6,)),
        (flatten(), (3, 4)),
        (softmax(), (5,)),
        (dropout(0.0), (6,)),
    ],
)
def test_layer_gradients(spec, in_shape):
    err = gradient_check(spec, probe((4,) + in_shape))
    assert err < 1e-5, f"{spec.kind}: {err}"


def test_max_pool_gradient_non_tied():
    # continuous random input: ties have measure zero
    err = gradient_check(max_pool1d(2), probe((3, 2, 12)))
    assert err < 1e-5


def test_batch_norm_gradient_train_mode():
    err = gradient_check(batch_norm(), probe((8, 3, 6)))
    assert err < 1e-4


def test_batch_norm_gradient_eval_mode():
    err = gradient_check(batch_norm(), probe((4, 3, 6)), train=False)
    assert err < 1e-5


def test_residual_block_gradient():
    # piecewise-linear without bn: strict tolerance applies
    err = gradient_check(residual_block(4, 3, batch_norm=False), probe((4, 2, 8)))
    assert err < 1e-5


def test_residual_block_gradient_with_bn():
    # batch-statistic coupling inside the block: bn tolerance applies
    err = gradient_check(residual_block(4, 3), probe((4, 2, 8)))
    assert err < 1e-4


def test_small_stack_gradient():
    net = Network(
        [conv1d(3, 3), max_pool1d(2), relu(), flatten(), dense(4)],
        (2, 8),
        seed=1,
        float64=True,
    )
    err = gradient_check(net, probe((3, 2, 8)))
    assert err < 1e-5


def test_unused_parameter_gets_zero_gradient():
    # relu kills the negative half; a dense row feeding only dead units gets no grad
    net = Network([dense(3)], (2,), seed=0, float64=True)
    x = probe((4, 2))
    out = net.forward(x)
    net.zero_grad()
    dout = np.zeros_like(out)
    dout[:, 0] = 1.0  # loss depends on output 0 only
    net.backward(dout)
    w = net.layers[0].w
    assert np.all(w.grad[1:] == 0.0)
    assert np.any(w.grad[0] != 0.0)


def test_gradient_linearity_in_loss_scale():
    net = Network([dense(3), relu(), dense(2)], (4,), seed=3, float64=True)
    x = probe((5, 4))
    out = net.forward(x)
    dout = RNG.standard_normal(out.shape)

    net.zero_grad()
    net.forward(x)
    net.backward(dout)
    grads1 = [p.grad.copy() for p in net.parameters()]

    net.zero_grad()
    net.forward(x)
    net.backward(2.0 * dout)
    grads2 = [p.grad.copy() for p in net.parameters()]

    for g1, g2 in zip(grads1, grads2):
        np.testing.assert_array_equal(g2, 2.0 * g1)
