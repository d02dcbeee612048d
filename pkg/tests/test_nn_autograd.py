import numpy as np
import pytest

from ctrkit.errors import GraphNotBuiltError, ShapeMismatchError
from ctrkit.nn import (
    Tensor,
    ToyUNet,
    UNetConfig,
    bce_with_logits,
    grad_check,
    tensor_sum,
    total_loss,
)

TINY = UNetConfig(input_size=16, levels=2, base_channels=2, convs_per_level=1)


def test_square_gradient():
    w = Tensor(3.0, requires_grad=True)
    loss = w * w
    loss.backward()
    assert float(w.grad) == 6.0


def test_unused_parameter_gets_zero_gradient():
    used = Tensor(np.array([2.0, 1.0]), requires_grad=True)
    unused = Tensor(np.array([5.0]), requires_grad=True)
    used.zero_grad()
    unused.zero_grad()
    loss = tensor_sum(used * used)
    loss.backward()
    assert np.array_equal(unused.grad, np.zeros(1))
    assert np.array_equal(used.grad, np.array([4.0, 2.0]))


def test_backward_without_graph_raises():
    plain = Tensor(np.array(1.5))
    with pytest.raises(GraphNotBuiltError):
        plain.backward()


def test_backward_requires_scalar():
    v = Tensor(np.array([1.0, 2.0]), requires_grad=True)
    with pytest.raises(ValueError):
        (v * v).backward()


def test_shared_subexpression_accumulates():
    x = Tensor(2.0, requires_grad=True)
    y = x * x + x * x  # y = 2x^2, dy/dx = 4x
    y.backward()
    assert float(x.grad) == 8.0


def test_linear_model_gradcheck_near_machine_precision():
    # squared-error loss of a linear map is quadratic in the weights, so
    # central differences are exact up to roundoff
    rng = np.random.default_rng(5)
    w = Tensor(rng.normal(size=(4,)), requires_grad=True)
    b = Tensor(np.zeros(4), requires_grad=True)
    x = rng.normal(size=(4,))
    t = rng.normal(size=(4,))

    def loss_fn():
        pred = w * x + b
        err = pred - t
        return tensor_sum(err * err)

    assert grad_check(loss_fn, [w, b], h=1e-5) < 1e-8


def test_toy_unet_gradcheck():
    rng = np.random.default_rng(6)
    model = ToyUNet(TINY, seed=2)
    assert model.num_params() <= 5000
    x = rng.normal(0.4, 0.25, size=(1, 1, 16, 16))
    y = (rng.random((1, 1, 16, 16)) < 0.4).astype(float)

    def loss_fn():
        return total_loss(model.forward(Tensor(x)), y)

    assert grad_check(loss_fn, model.param_tensors(), h=1e-5) < 1e-4


def test_larger_h_gives_larger_error():
    # smooth nonlinear loss: BCE through a sigmoid has nonzero third
    # derivative, so truncation error grows with h
    rng = np.random.default_rng(7)
    w = Tensor(rng.normal(size=(6,)), requires_grad=True)
    x = rng.normal(size=(6,))
    y = (rng.random(6) < 0.5).astype(float)

    def loss_fn():
        return bce_with_logits(w * x, y)

    err_small = grad_check(loss_fn, [w], h=1e-5)
    err_large = grad_check(loss_fn, [w], h=1e-2)
    assert err_large > err_small


def test_conv_channel_mismatch():
    model = ToyUNet(TINY, seed=0)
    with pytest.raises(ShapeMismatchError):
        model.forward(np.zeros((1, 2, 16, 16)))
    with pytest.raises(ShapeMismatchError):
        model.forward(np.zeros((1, 1, 8, 8)))
