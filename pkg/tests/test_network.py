"""Network container contracts: shapes, modes, determinism."""

import numpy as np
import pytest

from radiofp.errors import ConfigError, UsageError
from radiofp.nn import Network, conv1d, dense, dropout, flatten, max_pool1d, relu


def small_net(seed=0, float64=False):
    return Network(
        [conv1d(4, 3), max_pool1d(2), relu(), flatten(), dense(8), relu(), dropout(0.2), dense(3)],
        (2, 16),
        seed=seed,
        float64=float64,
    )


def test_shape_validation_at_build():
    with pytest.raises(ConfigError):
        Network([dense(4)], (2, 16))  # dense needs a flattened input


def test_forward_shape():
    net = small_net()
    y = net.eval().forward(np.zeros((5, 2, 16), dtype=np.float32))
    assert y.shape == (5, 3)
    assert net.output_shape == (3,)


def test_batch_shape_mismatch():
    net = small_net()
    with pytest.raises(ConfigError):
        net.forward(np.zeros((5, 2, 8), dtype=np.float32))


def test_zero_dense_weights_equal_logits():
    net = Network([flatten(), dense(4)], (2, 8), seed=0)
    net.layers[1].w.data[...] = 0.0
    net.layers[1].b.data[...] = 0.0
    y = net.eval().forward(np.random.default_rng(0).standard_normal((1, 2, 8)).astype(np.float32))
    assert np.all(y == y[0, 0])


def test_eval_determinism_bit_identical():
    net = small_net(seed=7)
    x = np.random.default_rng(1).standard_normal((4, 2, 16)).astype(np.float32)
    net.eval()
    y1 = net.forward(x)
    y2 = net.forward(x)
    np.testing.assert_array_equal(y1, y2)


def test_identical_rows_identical_outputs():
    net = small_net(seed=3)
    row = np.random.default_rng(2).standard_normal((1, 2, 16)).astype(np.float32)
    x = np.repeat(row, 6, axis=0)
    y = net.eval().forward(x)
    for i in range(1, 6):
        np.testing.assert_array_equal(y[i], y[0])


def test_same_seed_same_init():
    a = small_net(seed=42)
    b = small_net(seed=42)
    for pa, pb in zip(a.parameters(), b.parameters()):
        np.testing.assert_array_equal(pa.data, pb.data)


def test_backward_before_forward_raises():
    net = small_net()
    with pytest.raises(UsageError):
        net.backward(np.zeros((1, 3)))


def test_state_round_trip():
    a = small_net(seed=1)
    b = small_net(seed=2)
    b.load_state_arrays(a.copy_state())
    x = np.random.default_rng(5).standard_normal((3, 2, 16)).astype(np.float32)
    np.testing.assert_array_equal(a.eval().forward(x), b.eval().forward(x))


def test_state_shape_mismatch_raises():
    a = small_net()
    state = a.copy_state()
    state[0] = np.zeros((1, 1, 1), dtype=np.float32)
    with pytest.raises(ConfigError):
        a.load_state_arrays(state)
