from .gradcheck import grad_check
from .losses import bce_with_logits, dice_loss, total_loss
from .optim import Adam, AdamState, adam_step
from .tensor import (
    Tensor,
    concat_channels,
    conv2d,
    maxpool2,
    relu,
    sigmoid,
    tensor_sum,
    upsample2,
)
from .train import TrainConfig, TrainResult, evaluate, train
from .unet import (
    ToyUNet,
    UNetConfig,
    load_weights,
    predict_probs,
    save_weights,
    unet_forward,
)

__all__ = [
    "Adam",
    "AdamState",
    "Tensor",
    "ToyUNet",
    "TrainConfig",
    "TrainResult",
    "UNetConfig",
    "adam_step",
    "bce_with_logits",
    "concat_channels",
    "conv2d",
    "dice_loss",
    "evaluate",
    "grad_check",
    "load_weights",
    "maxpool2",
    "predict_probs",
    "relu",
    "save_weights",
    "sigmoid",
    "tensor_sum",
    "total_loss",
    "train",
    "unet_forward",
    "upsample2",
]
