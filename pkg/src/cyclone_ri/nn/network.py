"""LSTM -> last hidden state -> dense head, trained with Adam.

Two heads are supported: a softmax classifier trained with cross-entropy
and a linear regressor trained with MSE.
"""

from __future__ import annotations

import enum
import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from ..errors import ConfigError, NumericError, TrainingDivergedError
from .adam import AdamState, adam_step
from .losses import cross_entropy, cross_entropy_grad_logits, mse, mse_grad, one_hot, softmax
from .lstm import Activation, check_finite, lstm_backward, lstm_forward

CHECKPOINT_FORMAT = "cyclone-ri-lstm/1"
PARAM_ORDER = ("W_x", "W_h", "b", "W_out", "b_out")


class Loss(str, enum.Enum):
    CROSS_ENTROPY = "cross_entropy"
    MSE = "mse"


@dataclass(frozen=True)
class NetworkSpec:
    input_size: int
    output_size: int = 2
    hidden_size: int = 50
    loss: Loss = Loss.CROSS_ENTROPY
    activation: Activation = Activation.RELU
    epochs: int = 100
    batch_size: int = 32
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        object.__setattr__(self, "loss", Loss(self.loss))
        object.__setattr__(self, "activation", Activation(self.activation))
        for name in ("input_size", "output_size", "hidden_size", "batch_size"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.epochs < 0:
            raise ConfigError("epochs must be non-negative")

    @property
    def output_activation(self) -> str:
        return "softmax" if self.loss is Loss.CROSS_ENTROPY else "linear"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["loss"] = self.loss.value
        d["activation"] = self.activation.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "NetworkSpec":
        return cls(**d)


def classifier_spec(input_size: int, **overrides) -> NetworkSpec:
    return NetworkSpec(input_size=input_size, output_size=2, loss=Loss.CROSS_ENTROPY,
                       activation=Activation.RELU, **overrides)


def glorot_limit(fan_in: int, fan_out: int) -> float:
    return float(np.sqrt(6.0 / (fan_in + fan_out)))


def init_params(spec: NetworkSpec, seed=None) -> dict:
    """Glorot-uniform weights per gate, zero biases, forget-gate bias 1."""
    rng = np.random.default_rng(seed)
    I, H, O = spec.input_size, spec.hidden_size, spec.output_size
    lim_x = glorot_limit(I, H)
    lim_h = glorot_limit(H, H)
    W_x = np.concatenate([rng.uniform(-lim_x, lim_x, (I, H)) for _ in range(4)], axis=1)
    W_h = np.concatenate([rng.uniform(-lim_h, lim_h, (H, H)) for _ in range(4)], axis=1)
    b = np.zeros(4 * H)
    b[H:2 * H] = 1.0
    lim_o = glorot_limit(H, O)
    W_out = rng.uniform(-lim_o, lim_o, (H, O))
    b_out = np.zeros(O)
    return {"W_x": W_x, "W_h": W_h, "b": b, "W_out": W_out, "b_out": b_out}


def forward(spec: NetworkSpec, params: dict, x: np.ndarray):
    """Network outputs for a batch (B, T, I): probabilities or linear values."""
    hs, cache = lstm_forward(params, x, spec.activation)
    if hs.ndim == 2:
        hs = hs[None]
    last = hs[:, -1]
    z = last @ params["W_out"] + params["b_out"]
    out = softmax(z) if spec.loss is Loss.CROSS_ENTROPY else z
    return out, (cache, last)


def predict(spec: NetworkSpec, params: dict, x: np.ndarray, batch: int = 4096) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    parts = [forward(spec, params, x[s:s + batch])[0] for s in range(0, len(x), batch)]
    return np.concatenate(parts) if parts else np.zeros((0, spec.output_size))


def _targets(spec: NetworkSpec, y: np.ndarray) -> np.ndarray:
    y = np.asarray(y)
    if spec.loss is Loss.CROSS_ENTROPY and y.ndim == 1:
        return one_hot(y, spec.output_size)
    return np.asarray(y, dtype=float).reshape(len(y), -1)


def loss_value(spec: NetworkSpec, out: np.ndarray, targets: np.ndarray) -> float:
    if spec.loss is Loss.CROSS_ENTROPY:
        return cross_entropy(out, targets)
    return mse(out, targets)


def loss_and_grads(spec: NetworkSpec, params: dict, x: np.ndarray, y: np.ndarray):
    """Batch-mean loss and its exact gradient w.r.t. every parameter (BPTT)."""
    targets = _targets(spec, y)
    out, (cache, last) = forward(spec, params, x)
    loss = loss_value(spec, out, targets)
    if spec.loss is Loss.CROSS_ENTROPY:
        dz = cross_entropy_grad_logits(out, targets)
    else:
        dz = mse_grad(out, targets)
    grads = {"W_out": last.T @ dz, "b_out": dz.sum(axis=0)}
    dhs = np.zeros_like(cache.h[:, 1:])
    dhs[:, -1] = dz @ params["W_out"].T
    grads.update(lstm_backward(params, cache, dhs))
    for name in PARAM_ORDER:
        if not np.all(np.isfinite(grads[name])):
            raise NumericError(f"non-finite gradient for {name}", parameter=name)
    return loss, grads


@dataclass
class TrainResult:
    spec: NetworkSpec
    params: dict
    losses: list = field(default_factory=list)
    seed: int | None = None


def train(spec: NetworkSpec, x: np.ndarray, y: np.ndarray, seed=None, params: dict | None = None) -> TrainResult:
    """Mini-batch Adam for ``spec.epochs`` passes over shuffled data.

    Initialization and shuffling both derive from ``seed``, so a given
    (spec, seed, data) triple always yields the same parameters.
    """
    x = np.asarray(x, dtype=float)
    if len(x) == 0:
        raise ValueError("training set is empty")
    check_finite(x, "training inputs")
    init_seq, shuffle_seq = np.random.SeedSequence(seed).spawn(2)
    if params is None:
        params = init_params(spec, np.random.default_rng(init_seq))
    rng = np.random.default_rng(shuffle_seq)
    state = AdamState.for_params(params, lr=spec.learning_rate, beta1=spec.beta1,
                                 beta2=spec.beta2, eps=spec.eps)
    y = np.asarray(y)
    losses = []
    n = len(x)
    for epoch in range(spec.epochs):
        order = rng.permutation(n)
        total = 0.0
        for s in range(0, n, spec.batch_size):
            idx = order[s:s + spec.batch_size]
            try:
                loss, grads = loss_and_grads(spec, params, x[idx], y[idx])
            except NumericError:
                raise TrainingDivergedError(epoch) from None
            if not np.isfinite(loss):
                raise TrainingDivergedError(epoch, loss)
            total += loss * len(idx)
            params, state = adam_step(state, params, grads)
        mean = total / n
        if not np.isfinite(mean):
            raise TrainingDivergedError(epoch, mean)
        losses.append(mean)
    return TrainResult(spec, params, losses, seed)


def checkpoint_dict(spec: NetworkSpec, params: dict, seed=None) -> dict:
    return {
        "format": CHECKPOINT_FORMAT,
        "spec": spec.to_dict(),
        "seed": seed,
        "params": {
            k: {"shape": list(params[k].shape), "data": params[k].ravel(order="C").tolist()}
            for k in PARAM_ORDER
        },
    }


def params_from_dict(d: dict) -> dict:
    return {k: np.asarray(v["data"], dtype=float).reshape(v["shape"]) for k, v in d.items()}


def save_checkpoint(path, spec: NetworkSpec, params: dict, seed=None) -> None:
    # json writes floats with repr, which round-trips float64 exactly
    Path(path).write_text(json.dumps(checkpoint_dict(spec, params, seed), indent=1))


def load_checkpoint(path):
    d = json.loads(Path(path).read_text())
    if d.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"unrecognised checkpoint format {d.get('format')!r}")
    return NetworkSpec.from_dict(d["spec"]), params_from_dict(d["params"]), d.get("seed")


def with_epochs(spec: NetworkSpec, epochs: int) -> NetworkSpec:
    return replace(spec, epochs=epochs)
