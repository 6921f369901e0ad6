"""From-scratch LSTM engine (numpy only)."""

from .adam import AdamState, adam_step
from .losses import cross_entropy, cross_entropy_grad_logits, mse, mse_grad, one_hot, softmax
from .lstm import Activation, lstm_backward, lstm_forward
from .network import (
    Loss,
    NetworkSpec,
    TrainResult,
    classifier_spec,
    forward,
    init_params,
    load_checkpoint,
    loss_and_grads,
    predict,
    save_checkpoint,
    train,
)

__all__ = [
    "Activation", "AdamState", "Loss", "NetworkSpec", "TrainResult", "adam_step",
    "classifier_spec", "cross_entropy", "cross_entropy_grad_logits", "forward", "init_params", "load_checkpoint",
    "loss_and_grads", "lstm_backward", "lstm_forward", "mse", "mse_grad", "one_hot", "predict",
    "save_checkpoint", "softmax", "train",
]
