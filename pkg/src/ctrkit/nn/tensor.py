"""Minimal define-by-run autograd over float64 numpy arrays.

Only the operations the encoder-decoder model needs are implemented:
elementwise arithmetic, full-tensor sum, relu/sigmoid, 2-D convolution,
2x2 max pooling, 2x nearest upsampling, and channel concatenation.
Gradients accumulate in fixed index order, so training is bit-reproducible
for a given seed.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import GraphNotBuiltError, ShapeMismatchError


def _as_array(value) -> np.ndarray:
    return np.asarray(value, dtype=np.float64)


class Tensor:
    """A float64 array plus an optional gradient and backward closure."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False):
        self.data = _as_array(data)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self._parents: tuple[Tensor, ...] = ()
        self._backward = None

    @property
    def shape(self):
        return self.data.shape

    def item(self) -> float:
        return float(self.data)

    def __float__(self) -> float:
        return float(self.data)

    def zero_grad(self):
        self.grad = np.zeros_like(self.data)

    def _accumulate(self, g: np.ndarray):
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def backward(self):
        """Reverse-mode sweep from this scalar."""
        if self.data.size != 1:
            raise ValueError("backward() requires a scalar loss")
        if self._backward is None and not self.requires_grad:
            raise GraphNotBuiltError("no computation graph recorded for this value")

        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))

        self._accumulate(np.ones_like(self.data))
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    # -- elementwise arithmetic ------------------------------------------

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return mul(self, -1.0)

    def __sub__(self, other):
        return add(self, -as_tensor(other))

    def __rsub__(self, other):
        return add(-self, other)

    def __truediv__(self, other):
        return div(self, other)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"


def as_tensor(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def _node(data: np.ndarray, parents: tuple[Tensor, ...], backward_fn) -> Tensor:
    out = Tensor(data)
    if any(p.requires_grad or p._parents for p in parents):
        out.requires_grad = True
        out._parents = parents
        out._backward = backward_fn
    return out


def _check_same_shape(a: Tensor, b: Tensor):
    if a.data.shape != b.data.shape:
        raise ShapeMismatchError(f"shapes differ: {a.data.shape} vs {b.data.shape}")


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.data.shape != () and b.data.shape != ():
        _check_same_shape(a, b)

    def backward(g):
        a._accumulate(g if a.data.shape == g.shape else g.sum())
        b._accumulate(g if b.data.shape == g.shape else g.sum())

    return _node(a.data + b.data, (a, b), backward)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.data.shape != () and b.data.shape != ():
        _check_same_shape(a, b)

    def backward(g):
        ga = g * b.data
        gb = g * a.data
        a._accumulate(ga if a.data.shape == ga.shape else ga.sum())
        b._accumulate(gb if b.data.shape == gb.shape else gb.sum())

    return _node(a.data * b.data, (a, b), backward)


def div(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.data.shape != () and b.data.shape != ():
        _check_same_shape(a, b)

    def backward(g):
        ga = g / b.data
        gb = -g * a.data / (b.data * b.data)
        a._accumulate(ga if a.data.shape == ga.shape else ga.sum())
        b._accumulate(gb if b.data.shape == gb.shape else gb.sum())

    return _node(a.data / b.data, (a, b), backward)


def tensor_sum(x: Tensor) -> Tensor:
    x = as_tensor(x)

    def backward(g):
        x._accumulate(np.full_like(x.data, float(g)))

    return _node(np.asarray(x.data.sum()), (x,), backward)


def relu(x: Tensor) -> Tensor:
    x = as_tensor(x)
    mask = x.data > 0

    def backward(g):
        x._accumulate(g * mask)

    return _node(x.data * mask, (x,), backward)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def sigmoid(x: Tensor) -> Tensor:
    x = as_tensor(x)
    y = _sigmoid(np.atleast_1d(x.data)).reshape(x.data.shape)

    def backward(g):
        x._accumulate(g * y * (1.0 - y))

    return _node(y, (x,), backward)


# -- spatial operations on (batch, channels, height, width) --------------


def _conv_windows(x: np.ndarray, k: int, pad: int) -> np.ndarray:
    if pad:
        x = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    return sliding_window_view(x, (k, k), axis=(2, 3))


def conv2d(x: Tensor, w: Tensor, b: Tensor, pad: int) -> Tensor:
    """Stride-1 cross-correlation with ``pad`` zeros on each spatial edge."""
    x, w, b = as_tensor(x), as_tensor(w), as_tensor(b)
    if x.data.ndim != 4 or w.data.ndim != 4:
        raise ShapeMismatchError("conv2d expects 4-D input and weights")
    if x.data.shape[1] != w.data.shape[1]:
        raise ShapeMismatchError(
            f"input has {x.data.shape[1]} channels, weights expect {w.data.shape[1]}"
        )
    k = w.data.shape[2]
    windows = _conv_windows(x.data, k, pad)
    out = np.tensordot(windows, w.data, axes=([1, 4, 5], [1, 2, 3]))
    out = np.ascontiguousarray(out.transpose(0, 3, 1, 2))
    out += b.data[None, :, None, None]

    def backward(g):
        b._accumulate(g.sum(axis=(0, 2, 3)))
        gw = np.tensordot(windows, g, axes=([0, 2, 3], [0, 2, 3]))  # (C,k,k,O)
        w._accumulate(gw.transpose(3, 0, 1, 2))
        w_flip = w.data[:, :, ::-1, ::-1]
        g_windows = _conv_windows(g, k, k - 1 - pad)
        gx = np.tensordot(g_windows, w_flip, axes=([1, 4, 5], [0, 2, 3]))
        x._accumulate(gx.transpose(0, 3, 1, 2))

    return _node(out, (x, w, b), backward)


def maxpool2(x: Tensor) -> Tensor:
    """2x2 max pooling, stride 2; ties pick the first element in scan order."""
    x = as_tensor(x)
    n, c, h, w = x.data.shape
    if h % 2 or w % 2:
        raise ShapeMismatchError("maxpool2 requires even spatial dimensions")
    tiles = (
        x.data.reshape(n, c, h // 2, 2, w // 2, 2)
        .transpose(0, 1, 2, 4, 3, 5)
        .reshape(n, c, h // 2, w // 2, 4)
    )
    idx = tiles.argmax(axis=-1)
    out = np.take_along_axis(tiles, idx[..., None], axis=-1)[..., 0]

    def backward(g):
        gt = np.zeros_like(tiles)
        np.put_along_axis(gt, idx[..., None], g[..., None], axis=-1)
        gx = (
            gt.reshape(n, c, h // 2, w // 2, 2, 2)
            .transpose(0, 1, 2, 4, 3, 5)
            .reshape(n, c, h, w)
        )
        x._accumulate(gx)

    return _node(out, (x,), backward)


def upsample2(x: Tensor) -> Tensor:
    """Nearest-neighbor 2x upsampling."""
    x = as_tensor(x)
    n, c, h, w = x.data.shape
    out = x.data.repeat(2, axis=2).repeat(2, axis=3)

    def backward(g):
        x._accumulate(g.reshape(n, c, h, 2, w, 2).sum(axis=(3, 5)))

    return _node(out, (x,), backward)


def concat_channels(a: Tensor, b: Tensor) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.data.shape[0] != b.data.shape[0] or a.data.shape[2:] != b.data.shape[2:]:
        raise ShapeMismatchError("concat requires matching batch and spatial dims")
    ca = a.data.shape[1]

    def backward(g):
        a._accumulate(g[:, :ca])
        b._accumulate(g[:, ca:])

    return _node(np.concatenate([a.data, b.data], axis=1), (a, b), backward)
