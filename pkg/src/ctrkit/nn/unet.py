"""Toy encoder-decoder segmentation network with skip connections.

Each encoder level applies ``convs_per_level`` 3x3 conv+relu blocks and a
2x2 max pool; the decoder mirrors it with 2x nearest upsampling plus a 3x3
conv, concatenating the matching encoder activation before its conv stack.
A final 1x1 convolution produces single-channel logits at input resolution.

Weights serialize to a flat binary file:

    magic   4 bytes  b"CTRW"
    version u32 LE   currently 1
    config  4x u32   input_size, levels, base_channels, convs_per_level
    count   u64 LE   total number of float64 values that follow
    data    f64 LE   every parameter in ``parameters()`` order, raveled
                     row-major
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from ..errors import ModelLoadError, ShapeMismatchError
from .tensor import Tensor, concat_channels, conv2d, maxpool2, relu, sigmoid, upsample2

WEIGHTS_MAGIC = b"CTRW"
WEIGHTS_VERSION = 1
_HEADER = struct.Struct("<4sIIIIIQ")


@dataclass(frozen=True)
class UNetConfig:
    input_size: int = 64
    levels: int = 3
    base_channels: int = 8
    convs_per_level: int = 2

    def __post_init__(self):
        if self.levels < 1 or self.base_channels < 1 or self.convs_per_level < 1:
            raise ValueError("levels, base_channels, convs_per_level must be >= 1")
        if self.input_size % (1 << self.levels) != 0:
            raise ValueError(
                f"input_size {self.input_size} not divisible by 2^{self.levels}"
            )


class _Conv:
    def __init__(self, rng: np.random.Generator, in_ch: int, out_ch: int, k: int, name: str):
        std = np.sqrt(2.0 / (in_ch * k * k))
        self.w = Tensor(rng.normal(0.0, std, size=(out_ch, in_ch, k, k)), requires_grad=True)
        self.b = Tensor(np.zeros(out_ch), requires_grad=True)
        self.pad = k // 2
        self.name = name

    def __call__(self, x: Tensor) -> Tensor:
        return conv2d(x, self.w, self.b, self.pad)

    def params(self):
        return [(f"{self.name}.w", self.w), (f"{self.name}.b", self.b)]


class ToyUNet:
    """Holds parameters and runs the forward pass."""

    def __init__(self, cfg: UNetConfig, seed: int = 0):
        self.cfg = cfg
        rng = np.random.default_rng(seed)
        ch = cfg.base_channels
        self.enc: list[list[_Conv]] = []
        in_ch = 1
        for lvl in range(cfg.levels):
            out_ch = ch << lvl
            block = []
            for i in range(cfg.convs_per_level):
                block.append(_Conv(rng, in_ch, out_ch, 3, f"enc{lvl}.conv{i}"))
                in_ch = out_ch
            self.enc.append(block)

        bott_ch = ch << cfg.levels
        self.bottleneck = []
        for i in range(cfg.convs_per_level):
            self.bottleneck.append(_Conv(rng, in_ch, bott_ch, 3, f"bottleneck.conv{i}"))
            in_ch = bott_ch

        self.dec: list[tuple[_Conv, list[_Conv]]] = []
        for lvl in reversed(range(cfg.levels)):
            out_ch = ch << lvl
            up = _Conv(rng, in_ch, out_ch, 3, f"dec{lvl}.up")
            block = []
            in_ch = out_ch * 2  # after skip concatenation
            for i in range(cfg.convs_per_level):
                block.append(_Conv(rng, in_ch, out_ch, 3, f"dec{lvl}.conv{i}"))
                in_ch = out_ch
            self.dec.append((up, block))

        self.head = _Conv(rng, in_ch, 1, 1, "head")

    def parameters(self) -> list[tuple[str, Tensor]]:
        out = []
        for block in self.enc:
            for conv in block:
                out.extend(conv.params())
        for conv in self.bottleneck:
            out.extend(conv.params())
        for up, block in self.dec:
            out.extend(up.params())
            for conv in block:
                out.extend(conv.params())
        out.extend(self.head.params())
        return out

    def param_tensors(self) -> list[Tensor]:
        return [t for _, t in self.parameters()]

    def num_params(self) -> int:
        return sum(t.data.size for t in self.param_tensors())

    def zero_grad(self):
        for t in self.param_tensors():
            t.zero_grad()

    def forward(self, x) -> Tensor:
        """Batched images (n, 1, s, s) in, logits of the same shape out."""
        x = x if isinstance(x, Tensor) else Tensor(x)
        s = self.cfg.input_size
        if x.data.ndim != 4 or x.data.shape[1] != 1 or x.data.shape[2:] != (s, s):
            raise ShapeMismatchError(
                f"expected input (n, 1, {s}, {s}), got {x.data.shape}"
            )
        skips = []
        h = x
        for block in self.enc:
            for conv in block:
                h = relu(conv(h))
            skips.append(h)
            h = maxpool2(h)
        for conv in self.bottleneck:
            h = relu(conv(h))
        for (up, block), skip in zip(self.dec, reversed(skips)):
            h = relu(up(upsample2(h)))
            h = concat_channels(h, skip)
            for conv in block:
                h = relu(conv(h))
        return self.head(h)

    __call__ = forward


def unet_forward(model: ToyUNet, images: np.ndarray) -> np.ndarray:
    """Convenience wrapper: ndarray in, logits ndarray out."""
    return model.forward(Tensor(images)).data


def predict_probs(model: ToyUNet, image: np.ndarray) -> np.ndarray:
    """Sigmoid probabilities for one (s, s) image in [0, 1]."""
    logits = model.forward(Tensor(image[None, None, :, :]))
    return sigmoid(logits).data[0, 0]


def save_weights(model: ToyUNet, path) -> None:
    cfg = model.cfg
    values = [t.data.ravel() for t in model.param_tensors()]
    flat = np.concatenate(values) if values else np.empty(0)
    header = _HEADER.pack(
        WEIGHTS_MAGIC,
        WEIGHTS_VERSION,
        cfg.input_size,
        cfg.levels,
        cfg.base_channels,
        cfg.convs_per_level,
        flat.size,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(flat.astype("<f8").tobytes())


def load_weights(path) -> ToyUNet:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ModelLoadError(f"cannot read weights file: {exc}") from exc
    if len(raw) < _HEADER.size:
        raise ModelLoadError("weights file too short for header")
    magic, version, size, levels, base, convs, count = _HEADER.unpack_from(raw)
    if magic != WEIGHTS_MAGIC:
        raise ModelLoadError(f"bad magic {magic!r}")
    if version != WEIGHTS_VERSION:
        raise ModelLoadError(f"unsupported weights version {version}")
    try:
        cfg = UNetConfig(size, levels, base, convs)
    except ValueError as exc:
        raise ModelLoadError(str(exc)) from exc
    payload = raw[_HEADER.size:]
    if len(payload) != count * 8:
        raise ModelLoadError(
            f"expected {count * 8} payload bytes, found {len(payload)}"
        )
    flat = np.frombuffer(payload, dtype="<f8")
    model = ToyUNet(cfg, seed=0)
    if model.num_params() != count:
        raise ModelLoadError(
            f"weights hold {count} values, model needs {model.num_params()}"
        )
    offset = 0
    for t in model.param_tensors():
        n = t.data.size
        t.data = flat[offset:offset + n].reshape(t.data.shape).astype(np.float64)
        offset += n
    return model
